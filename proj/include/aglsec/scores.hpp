#pragma once

#include <vector>

#include "aglsec/diarization.hpp"
#include "aglsec/transcript.hpp"

namespace aglsec {

// Word-level acoustic speaker scores. Scores sum to 1; low_confidence marks
// words whose pre-normalization mass was below the floor (silence-aligned
// words), which get the uniform fallback instead of fabricated confidence.
struct SpeakerScoreVector {
    std::vector<double> scores;
    bool low_confidence = false;
};

// Per-column median filter with replicate (edge) padding. window_frames must
// be odd; a window of 1 is the identity.
FramePosteriorMatrix median_smooth(const FramePosteriorMatrix& posteriors, int window_frames);

// Mean of the smoothed posteriors over the word's frame span [start, end).
std::vector<double> pool_word_posteriors(const FramePosteriorMatrix& smoothed,
                                         const WordRecord& word);

// Normalize raw pooled scores to sum to 1. Mass below 1e-6 falls back to the
// uniform distribution with low_confidence set.
SpeakerScoreVector normalize_scores(const std::vector<double>& raw_scores);

// Select two global speakers' entries and renormalize (same fallback rule).
SpeakerScoreVector restrict_to_window_speakers(const SpeakerScoreVector& scores,
                                               int speaker_a, int speaker_b);

// Full chain: smooth once, then pool + normalize per word.
std::vector<SpeakerScoreVector> extract_word_scores(const FramePosteriorMatrix& posteriors,
                                                    const std::vector<WordRecord>& words,
                                                    int median_frames);

} // namespace aglsec
