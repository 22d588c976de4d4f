#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "aglsec/corrector.hpp"
#include "aglsec/scores.hpp"
#include "aglsec/transcript.hpp"

namespace aglsec {

// One sliding window over the transcript. Eligibility means the baseline
// labels inside the span name at most two distinct speakers; local_speakers
// lists them in order of first appearance.
struct CorrectionWindow {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::vector<int> local_speakers;
    bool eligible = false;
};

inline constexpr int kBypassedProvenance = -1;

// Final labels plus, per word, the index of the window that decided it
// (kBypassedProvenance when no eligible window covered the word).
struct CorrectedTranscript {
    std::vector<WordRecord> words;
    std::vector<int> provenance;
};

struct WindowingConfig {
    std::size_t window_size = 30;
    std::size_t stride = 15;
};

// Overlapping [k*stride, k*stride + size) spans, with the last window
// right-aligned so the tail is covered exactly once. A transcript shorter
// than one window yields the single span [0, num_words).
std::vector<std::pair<std::size_t, std::size_t>> make_windows(std::size_t num_words,
                                                              std::size_t window_size,
                                                              std::size_t stride);

CorrectionWindow classify_window(const std::vector<WordRecord>& words, std::size_t begin,
                                 std::size_t end);

// One eligible window's outcome: a global speaker id per word in the span.
struct WindowPrediction {
    std::size_t window_index = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::vector<int> labels;
};

struct MergedLabels {
    std::vector<int> labels;      // -1 where no prediction covered the word
    std::vector<int> provenance;  // deciding window index or kBypassedProvenance
};

// Each word takes the covering prediction whose window center lies nearest;
// equidistant centers resolve to the smaller window index. Purely geometric,
// so the outcome is independent of prediction order.
MergedLabels merge_predictions(std::size_t num_words,
                               const std::vector<WindowPrediction>& predictions);

// Callable applied to each eligible two-speaker window: word strings,
// baseline labels local to the window pair, and the (words x 2) restricted
// acoustic scores; returns the corrected per-word posteriors.
using WindowCorrector = std::function<WordPosteriors(
    const std::vector<std::string>&, const std::vector<int>&, const Tensor&)>;

// Full sweep: build windows, correct the eligible ones, pass single-speaker
// windows through, bypass words only ineligible windows cover.
CorrectedTranscript correct_transcript(const LabeledTranscript& transcript,
                                       const std::vector<SpeakerScoreVector>& scores,
                                       const WindowCorrector& corrector,
                                       const WindowingConfig& config);

// Supervised windows cut from one annotated conversation, with counts of the
// spans that were dropped and why.
struct TrainingHarvest {
    std::vector<TrainingWindow> windows;
    std::size_t windows_total = 0;
    std::size_t windows_ineligible = 0;
    std::size_t windows_single_speaker = 0;
    std::size_t windows_unsupervisable = 0;
};

// Cuts sliding windows from the baseline-labeled words, keeps the eligible
// two-speaker ones, and localizes both label tracks to the window's speaker
// pair. A window whose reference labels name a speaker outside that pair is
// unsupervisable and skipped. reference_labels holds the true global speaker
// per word.
TrainingHarvest harvest_training_windows(const std::vector<WordRecord>& baseline_words,
                                         const std::vector<int>& reference_labels,
                                         const std::vector<SpeakerScoreVector>& word_scores,
                                         const WindowingConfig& config);

}  // namespace aglsec
