#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aglsec/corrector.hpp"
#include "aglsec/diarization.hpp"
#include "aglsec/scores.hpp"
#include "aglsec/transcript.hpp"
#include "aglsec/windowing.hpp"

namespace aglsec {

struct SimulatorConfig {
    std::uint64_t seed = 1;
    int num_speakers = 2;        // 2..4
    int num_turns = 12;
    int min_words_per_turn = 4;  // turns stop appending patterns once this target is met
    int max_words_per_turn = 9;
    double overlap_probability = 0.2;      // chance a turn starts on the previous turn's last word
    double posterior_noise = 1.0;          // logit-domain, 0 copies the activity exactly
    double error_rate_at_boundaries = 0.3; // chance a turn boundary is shifted by 1-2 words
    double error_rate_interior = 0.01;     // per-word flip chance away from boundaries
    int frame_rate = 10;
    double word_duration_sec = 0.3;

    void validate() const;
};

struct SimulatedConversation {
    LabeledTranscript reference;
    LabeledTranscript baseline; // identical words, speaker labels with injected errors
    FramePosteriorMatrix posteriors;
    SpeakerActivityLabels activity;
    std::vector<std::size_t> turn_starts;     // word index of each turn's first word
    std::vector<std::size_t> injected_errors; // word indices whose labels differ
};

enum class PatternFamily { kGreeting = 0, kQuestion = 1, kAnswer = 2, kStatement = 3 };

// The fixed lexical templates a family draws from. Exposed so tests can
// verify turns are built from whole patterns.
const std::vector<std::vector<std::string>>& patterns_for(PatternFamily family);

// Builds one conversation: a family-chained sequence of templated turns with
// word timings, frame activity, noisy posteriors, and a baseline label track
// whose errors cluster at turn boundaries. Deterministic in config.seed.
SimulatedConversation generate(const SimulatorConfig& config);

struct CorpusOptions {
    WindowingConfig windowing;
    int median_frames = 11;
};

struct CorpusSplit {
    std::vector<std::size_t> conversation_indices;
    std::vector<TrainingWindow> windows;
};

struct SimulatedCorpus {
    std::vector<SimulatedConversation> conversations;
    // Normalized per-word speaker scores, one vector per conversation word.
    std::vector<std::vector<SpeakerScoreVector>> word_scores;
    CorpusSplit train;
    CorpusSplit validation;
    CorpusSplit test;
    std::size_t windows_total = 0;          // every window the engine enumerates
    std::size_t windows_ineligible = 0;     // 3+ baseline speakers
    std::size_t windows_single_speaker = 0; // pass-through at inference, not trainable
    std::size_t windows_unsupervisable = 0; // reference speaker outside the local pair
};

// Generates num_conversations conversations (conversation i uses seed + i),
// splits them 80/10/10 by conversation, and attaches ground-truth labels to
// every trainable window. Requires num_conversations >= 3.
SimulatedCorpus build_corpus(const SimulatorConfig& config, std::size_t num_conversations,
                             const CorpusOptions& options = {});

} // namespace aglsec
