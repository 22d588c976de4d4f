#include "aglsec/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aglsec/error.hpp"

namespace aglsec {
namespace {

double window_center(std::size_t begin, std::size_t end) {
    return (static_cast<double>(begin) + static_cast<double>(end) - 1.0) / 2.0;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> make_windows(std::size_t num_words,
                                                              std::size_t window_size,
                                                              std::size_t stride) {
    if (num_words == 0) throw std::invalid_argument("cannot window an empty transcript");
    if (window_size < 2) throw std::invalid_argument("window size must be at least 2");
    if (stride < 1 || stride > window_size) {
        throw std::invalid_argument("stride must lie in [1, window_size]");
    }

    if (num_words <= window_size) return {{0, num_words}};

    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t begin = 0; begin + window_size < num_words; begin += stride) {
        spans.emplace_back(begin, begin + window_size);
    }
    spans.emplace_back(num_words - window_size, num_words);
    return spans;
}

CorrectionWindow classify_window(const std::vector<WordRecord>& words, std::size_t begin,
                                 std::size_t end) {
    if (begin >= end || end > words.size()) {
        throw std::invalid_argument("window span [" + std::to_string(begin) + "," +
                                    std::to_string(end) + ") invalid for " +
                                    std::to_string(words.size()) + " words");
    }
    CorrectionWindow window;
    window.begin = begin;
    window.end = end;
    for (std::size_t i = begin; i < end; ++i) {
        const int speaker = words[i].speaker;
        if (std::find(window.local_speakers.begin(), window.local_speakers.end(), speaker) ==
            window.local_speakers.end()) {
            window.local_speakers.push_back(speaker);
        }
    }
    window.eligible = window.local_speakers.size() <= 2;
    return window;
}

MergedLabels merge_predictions(std::size_t num_words,
                               const std::vector<WindowPrediction>& predictions) {
    for (const WindowPrediction& p : predictions) {
        if (p.begin >= p.end || p.end > num_words || p.labels.size() != p.end - p.begin) {
            throw std::invalid_argument("window prediction span or label count is inconsistent");
        }
    }

    MergedLabels merged;
    merged.labels.assign(num_words, -1);
    merged.provenance.assign(num_words, kBypassedProvenance);

    std::vector<double> best_distance(num_words, 0.0);
    for (const WindowPrediction& p : predictions) {
        const double center = window_center(p.begin, p.end);
        for (std::size_t w = p.begin; w < p.end; ++w) {
            const double distance = std::abs(static_cast<double>(w) - center);
            const bool unclaimed = merged.provenance[w] == kBypassedProvenance;
            const bool closer = distance < best_distance[w];
            const bool tie_earlier =
                distance == best_distance[w] &&
                static_cast<int>(p.window_index) < merged.provenance[w];
            if (unclaimed || closer || tie_earlier) {
                merged.labels[w] = p.labels[w - p.begin];
                merged.provenance[w] = static_cast<int>(p.window_index);
                best_distance[w] = distance;
            }
        }
    }
    return merged;
}

CorrectedTranscript correct_transcript(const LabeledTranscript& transcript,
                                       const std::vector<SpeakerScoreVector>& scores,
                                       const WindowCorrector& corrector,
                                       const WindowingConfig& config) {
    const std::vector<WordRecord>& words = transcript.words;
    if (words.empty()) throw std::invalid_argument("cannot correct an empty transcript");
    if (scores.size() != words.size()) {
        throw std::invalid_argument("need one score vector per word, got " +
                                    std::to_string(scores.size()) + " for " +
                                    std::to_string(words.size()) + " words");
    }

    const auto spans = make_windows(words.size(), config.window_size, config.stride);
    std::vector<WindowPrediction> predictions;
    for (std::size_t index = 0; index < spans.size(); ++index) {
        const auto [begin, end] = spans[index];
        CorrectionWindow window = classify_window(words, begin, end);
        if (!window.eligible) continue;

        WindowPrediction prediction;
        prediction.window_index = index;
        prediction.begin = begin;
        prediction.end = end;

        if (window.local_speakers.size() == 1) {
            // No alternative speaker exists inside the window; the baseline
            // is the prediction.
            prediction.labels.assign(end - begin, window.local_speakers[0]);
            predictions.push_back(std::move(prediction));
            continue;
        }

        const int speaker_a = window.local_speakers[0];
        const int speaker_b = window.local_speakers[1];
        std::vector<std::string> window_words;
        std::vector<int> baseline_local;
        Tensor window_scores = Tensor::zeros({end - begin, 2});
        for (std::size_t w = begin; w < end; ++w) {
            window_words.push_back(words[w].text);
            baseline_local.push_back(words[w].speaker == speaker_a ? 0 : 1);
            const SpeakerScoreVector restricted =
                restrict_to_window_speakers(scores[w], speaker_a, speaker_b);
            window_scores.at(w - begin, 0) = restricted.scores[0];
            window_scores.at(w - begin, 1) = restricted.scores[1];
        }

        const WordPosteriors posteriors = corrector(window_words, baseline_local, window_scores);
        if (posteriors.values.rank() != 2 || posteriors.values.rows() != end - begin ||
            posteriors.values.cols() != 2) {
            throw InternalError("window corrector returned posteriors of the wrong shape");
        }
        for (std::size_t w = 0; w < end - begin; ++w) {
            const bool flip = posteriors.values.at(w, 1) > posteriors.values.at(w, 0);
            prediction.labels.push_back(flip ? speaker_b : speaker_a);
        }
        predictions.push_back(std::move(prediction));
    }

    const MergedLabels merged = merge_predictions(words.size(), predictions);

    CorrectedTranscript corrected;
    corrected.words = words;
    corrected.provenance = merged.provenance;
    for (std::size_t w = 0; w < words.size(); ++w) {
        if (merged.provenance[w] != kBypassedProvenance) {
            corrected.words[w].speaker = merged.labels[w];
        }
    }
    return corrected;
}

TrainingHarvest harvest_training_windows(const std::vector<WordRecord>& baseline_words,
                                         const std::vector<int>& reference_labels,
                                         const std::vector<SpeakerScoreVector>& word_scores,
                                         const WindowingConfig& config) {
    if (reference_labels.size() != baseline_words.size()) {
        throw std::invalid_argument("expected one reference label per word, got " +
                                    std::to_string(reference_labels.size()) + " labels for " +
                                    std::to_string(baseline_words.size()) + " words");
    }
    if (word_scores.size() != baseline_words.size()) {
        throw std::invalid_argument("expected one score row per word, got " +
                                    std::to_string(word_scores.size()) + " rows for " +
                                    std::to_string(baseline_words.size()) + " words");
    }

    TrainingHarvest harvest;
    const auto spans =
        make_windows(baseline_words.size(), config.window_size, config.stride);
    for (const auto& [begin, end] : spans) {
        ++harvest.windows_total;
        const CorrectionWindow window = classify_window(baseline_words, begin, end);
        if (!window.eligible) {
            ++harvest.windows_ineligible;
            continue;
        }
        if (window.local_speakers.size() < 2) {
            ++harvest.windows_single_speaker;
            continue;
        }

        TrainingWindow training;
        training.word_scores = Tensor::zeros({end - begin, 2});
        bool supervisable = true;
        for (std::size_t w = begin; w < end; ++w) {
            const auto slot = std::find(window.local_speakers.begin(),
                                        window.local_speakers.end(), reference_labels[w]);
            if (slot == window.local_speakers.end()) {
                supervisable = false;
                break;
            }
            training.words.push_back(baseline_words[w].text);
            training.baseline_labels.push_back(
                baseline_words[w].speaker == window.local_speakers[0] ? 0 : 1);
            training.reference_labels.push_back(
                static_cast<int>(slot - window.local_speakers.begin()));
            const SpeakerScoreVector restricted = restrict_to_window_speakers(
                word_scores[w], window.local_speakers[0], window.local_speakers[1]);
            training.word_scores.at(w - begin, 0) = restricted.scores[0];
            training.word_scores.at(w - begin, 1) = restricted.scores[1];
        }
        if (!supervisable) {
            ++harvest.windows_unsupervisable;
            continue;
        }
        harvest.windows.push_back(std::move(training));
    }
    return harvest;
}

}  // namespace aglsec
