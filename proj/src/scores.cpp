#include "aglsec/scores.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace aglsec {

namespace {
constexpr double kLowConfidenceFloor = 1e-6;
} // namespace

FramePosteriorMatrix median_smooth(const FramePosteriorMatrix& posteriors, int window_frames) {
    posteriors.validate();
    if (window_frames < 1 || window_frames % 2 == 0) {
        throw std::invalid_argument("median_smooth: window must be odd and >= 1, got " +
                                    std::to_string(window_frames));
    }
    const long long num_frames = static_cast<long long>(posteriors.num_frames());
    const std::size_t num_speakers = posteriors.num_speakers();
    const long long half = window_frames / 2;

    FramePosteriorMatrix smoothed = posteriors;
    if (window_frames == 1) return smoothed;

    std::vector<double> window(static_cast<std::size_t>(window_frames));
    for (std::size_t s = 0; s < num_speakers; ++s) {
        for (long long t = 0; t < num_frames; ++t) {
            for (long long k = -half; k <= half; ++k) {
                const long long idx = std::clamp(t + k, 0LL, num_frames - 1);
                window[static_cast<std::size_t>(k + half)] =
                    posteriors.values.at(static_cast<std::size_t>(idx), s);
            }
            auto mid = window.begin() + half;
            std::nth_element(window.begin(), mid, window.end());
            smoothed.values.at(static_cast<std::size_t>(t), s) = *mid;
        }
    }
    return smoothed;
}

std::vector<double> pool_word_posteriors(const FramePosteriorMatrix& smoothed,
                                         const WordRecord& word) {
    if (word.start_frame >= word.end_frame) {
        throw std::invalid_argument("pool_word_posteriors: empty frame span for word '" +
                                    word.text + "'");
    }
    if (word.start_frame < 0 ||
        word.end_frame > static_cast<long long>(smoothed.num_frames())) {
        throw std::invalid_argument("pool_word_posteriors: span of word '" + word.text +
                                    "' exceeds posterior matrix");
    }
    const std::size_t num_speakers = smoothed.num_speakers();
    std::vector<double> pooled(num_speakers, 0.0);
    for (long long t = word.start_frame; t < word.end_frame; ++t) {
        for (std::size_t s = 0; s < num_speakers; ++s) {
            pooled[s] += smoothed.values.at(static_cast<std::size_t>(t), s);
        }
    }
    const double span = static_cast<double>(word.end_frame - word.start_frame);
    for (double& v : pooled) v /= span;
    return pooled;
}

SpeakerScoreVector normalize_scores(const std::vector<double>& raw_scores) {
    if (raw_scores.empty()) {
        throw std::invalid_argument("normalize_scores: empty score vector");
    }
    double total = 0.0;
    for (double v : raw_scores) {
        if (v < 0.0) throw std::invalid_argument("normalize_scores: negative entry");
        total += v;
    }
    SpeakerScoreVector out;
    out.scores.resize(raw_scores.size());
    if (total < kLowConfidenceFloor) {
        std::fill(out.scores.begin(), out.scores.end(), 1.0 / raw_scores.size());
        out.low_confidence = true;
        return out;
    }
    for (std::size_t s = 0; s < raw_scores.size(); ++s) out.scores[s] = raw_scores[s] / total;
    return out;
}

SpeakerScoreVector restrict_to_window_speakers(const SpeakerScoreVector& scores,
                                               int speaker_a, int speaker_b) {
    const int num_speakers = static_cast<int>(scores.scores.size());
    if (speaker_a == speaker_b) {
        throw std::invalid_argument("restrict_to_window_speakers: identical speaker ids");
    }
    if (speaker_a < 0 || speaker_a >= num_speakers || speaker_b < 0 || speaker_b >= num_speakers) {
        throw std::invalid_argument("restrict_to_window_speakers: speaker id out of range");
    }
    SpeakerScoreVector out =
        normalize_scores({scores.scores[speaker_a], scores.scores[speaker_b]});
    out.low_confidence = out.low_confidence || scores.low_confidence;
    return out;
}

std::vector<SpeakerScoreVector> extract_word_scores(const FramePosteriorMatrix& posteriors,
                                                    const std::vector<WordRecord>& words,
                                                    int median_frames) {
    const FramePosteriorMatrix smoothed = median_smooth(posteriors, median_frames);
    std::vector<SpeakerScoreVector> out;
    out.reserve(words.size());
    for (const WordRecord& word : words) {
        out.push_back(normalize_scores(pool_word_posteriors(smoothed, word)));
    }
    return out;
}

} // namespace aglsec
