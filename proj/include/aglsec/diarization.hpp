#pragma once

#include <vector>

#include "aglsec/tensor.hpp"

namespace aglsec {

// Frame-level speaker activity probabilities, T x S. Speakers are independent
// activities: rows do not need to sum to 1 and overlap is allowed.
struct FramePosteriorMatrix {
    Tensor values;                // T x S, entries in [0, 1]
    double frame_duration = 0.1;  // seconds per frame

    std::size_t num_frames() const { return values.rows(); }
    std::size_t num_speakers() const { return values.cols(); }

    // Throws std::invalid_argument when a structural invariant is broken.
    void validate() const;
};

// Frame-level binary speaker activity, T x S.
struct SpeakerActivityLabels {
    Tensor values; // entries in {0, 1}

    std::size_t num_frames() const { return values.rows(); }
    std::size_t num_speakers() const { return values.cols(); }

    void validate() const;
};

struct PermutationFreeLoss {
    double loss = 0.0;
    // permutation[s] = label column matched to posterior column s
    std::vector<int> permutation;
};

// Mean binary cross entropy between labels and posteriors, minimized over all
// S! label-column permutations. Posteriors are clamped to [1e-7, 1 - 1e-7]
// before the logs. S is limited to 8 (the enumeration is factorial).
PermutationFreeLoss permutation_free_loss(const SpeakerActivityLabels& labels,
                                          const FramePosteriorMatrix& posteriors);

struct FrameDer {
    double der = 0.0;
    long long misses = 0;
    long long false_alarms = 0;
    long long confusions = 0;
    long long reference_active = 0; // total active reference frame-slots
};

// Frame-level diarization error rate between two binary activity matrices:
// (miss + false alarm + confusion) / total reference speech, with hypothesis
// speakers mapped to reference speakers by the best one-to-one assignment
// (brute force; both sides limited to 8 speakers). Speaker counts may differ.
FrameDer frame_der(const SpeakerActivityLabels& reference,
                   const SpeakerActivityLabels& hypothesis);

// Threshold posteriors into activity labels (> threshold means active).
SpeakerActivityLabels binarize(const FramePosteriorMatrix& posteriors, double threshold = 0.5);

} // namespace aglsec
