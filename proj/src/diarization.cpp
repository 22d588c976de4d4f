#include "aglsec/diarization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace aglsec {

namespace {

constexpr double kLogClamp = 1e-7;
constexpr int kMaxBruteForceSpeakers = 8;

void check_matrix_shape(const Tensor& t, const char* what) {
    if (t.rank() != 2 || t.rows() < 1 || t.cols() < 1) {
        throw std::invalid_argument(std::string(what) + ": expected a T x S matrix with T, S >= 1");
    }
}

} // namespace

void FramePosteriorMatrix::validate() const {
    check_matrix_shape(values, "FramePosteriorMatrix");
    for (double v : values.data) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("FramePosteriorMatrix: entry outside [0, 1]");
        }
    }
    if (!(frame_duration > 0.0)) {
        throw std::invalid_argument("FramePosteriorMatrix: frame_duration must be positive");
    }
}

void SpeakerActivityLabels::validate() const {
    check_matrix_shape(values, "SpeakerActivityLabels");
    for (double v : values.data) {
        if (v != 0.0 && v != 1.0) {
            throw std::invalid_argument("SpeakerActivityLabels: entry not in {0, 1}");
        }
    }
}

PermutationFreeLoss permutation_free_loss(const SpeakerActivityLabels& labels,
                                          const FramePosteriorMatrix& posteriors) {
    labels.validate();
    posteriors.validate();
    if (!labels.values.same_shape(posteriors.values)) {
        throw std::invalid_argument("permutation_free_loss: label/posterior shape mismatch");
    }
    const std::size_t num_frames = posteriors.num_frames();
    const std::size_t num_speakers = posteriors.num_speakers();
    if (num_speakers > kMaxBruteForceSpeakers) {
        throw std::invalid_argument("permutation_free_loss: more than 8 speakers");
    }

    // Per-(label column, posterior column) BCE totals over all frames; the
    // permutation sweep then only sums S of them.
    Tensor pair_bce = Tensor::matrix(num_speakers, num_speakers);
    for (std::size_t s_post = 0; s_post < num_speakers; ++s_post) {
        for (std::size_t s_lab = 0; s_lab < num_speakers; ++s_lab) {
            double total = 0.0;
            for (std::size_t t = 0; t < num_frames; ++t) {
                const double p = std::clamp(posteriors.values.at(t, s_post), kLogClamp, 1.0 - kLogClamp);
                const double y = labels.values.at(t, s_lab);
                total += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
            }
            pair_bce.at(s_lab, s_post) = total;
        }
    }

    std::vector<int> perm(num_speakers);
    std::iota(perm.begin(), perm.end(), 0);

    PermutationFreeLoss best;
    best.loss = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t s = 0; s < num_speakers; ++s) {
            total += pair_bce.at(perm[s], s);
        }
        if (total < best.loss) {
            best.loss = total;
            best.permutation = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    best.loss /= static_cast<double>(num_frames * num_speakers);
    return best;
}

FrameDer frame_der(const SpeakerActivityLabels& reference,
                   const SpeakerActivityLabels& hypothesis) {
    reference.validate();
    hypothesis.validate();
    if (reference.num_frames() != hypothesis.num_frames()) {
        throw std::invalid_argument("frame_der: frame count mismatch");
    }
    const std::size_t num_frames = reference.num_frames();
    const std::size_t ref_spk = reference.num_speakers();
    const std::size_t hyp_spk = hypothesis.num_speakers();
    if (ref_spk > kMaxBruteForceSpeakers || hyp_spk > kMaxBruteForceSpeakers) {
        throw std::invalid_argument("frame_der: more than 8 speakers");
    }

    long long reference_active = 0;
    for (double v : reference.values.data) reference_active += v != 0.0 ? 1 : 0;
    if (reference_active == 0) {
        throw std::invalid_argument("frame_der: reference has no speech");
    }

    // overlap[r][h] = frames where ref speaker r and hyp speaker h are both active
    std::vector<std::vector<long long>> overlap(ref_spk, std::vector<long long>(hyp_spk, 0));
    for (std::size_t t = 0; t < num_frames; ++t) {
        for (std::size_t r = 0; r < ref_spk; ++r) {
            if (reference.values.at(t, r) == 0.0) continue;
            for (std::size_t h = 0; h < hyp_spk; ++h) {
                if (hypothesis.values.at(t, h) != 0.0) ++overlap[r][h];
            }
        }
    }

    // Best one-to-one assignment of ref speakers to hyp speakers, maximizing
    // matched frames. Recursion over ref speakers with a used-mask on hyp.
    long long best_correct = 0;
    std::vector<bool> used(hyp_spk, false);
    auto search = [&](auto&& self, std::size_t r, long long acc) -> void {
        if (r == ref_spk) {
            best_correct = std::max(best_correct, acc);
            return;
        }
        self(self, r + 1, acc); // ref speaker r left unmatched
        for (std::size_t h = 0; h < hyp_spk; ++h) {
            if (used[h]) continue;
            used[h] = true;
            self(self, r + 1, acc + overlap[r][h]);
            used[h] = false;
        }
    };
    search(search, 0, 0);

    FrameDer out;
    out.reference_active = reference_active;
    for (std::size_t t = 0; t < num_frames; ++t) {
        long long n_ref = 0;
        long long n_hyp = 0;
        for (std::size_t r = 0; r < ref_spk; ++r) n_ref += reference.values.at(t, r) != 0.0 ? 1 : 0;
        for (std::size_t h = 0; h < hyp_spk; ++h) n_hyp += hypothesis.values.at(t, h) != 0.0 ? 1 : 0;
        out.misses += std::max(0LL, n_ref - n_hyp);
        out.false_alarms += std::max(0LL, n_hyp - n_ref);
        out.confusions += std::min(n_ref, n_hyp);
    }
    // Confusions counted above as min(n_ref, n_hyp) per frame; subtract the
    // globally matched frames once.
    out.confusions -= best_correct;
    out.der = static_cast<double>(out.misses + out.false_alarms + out.confusions) /
              static_cast<double>(reference_active);
    return out;
}

SpeakerActivityLabels binarize(const FramePosteriorMatrix& posteriors, double threshold) {
    posteriors.validate();
    SpeakerActivityLabels labels;
    labels.values = Tensor::zeros(posteriors.values.shape);
    for (std::size_t i = 0; i < posteriors.values.data.size(); ++i) {
        labels.values.data[i] = posteriors.values.data[i] > threshold ? 1.0 : 0.0;
    }
    return labels;
}

} // namespace aglsec
