#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aglsec/nn.hpp"
#include "aglsec/rng.hpp"
#include "aglsec/tensor.hpp"
#include "aglsec/tokenizer.hpp"

namespace aglsec {

enum class ModelKind : std::uint32_t {
    kLexical = 0,      // baseline labels in, lexical evidence only
    kEarlyFusion = 1,  // soft acoustic scores fused at the input
    kFusionNet = 2,    // per-word net over acoustic and lexical score pairs
};

std::string model_kind_name(ModelKind kind);

// Per-token feature rows fed alongside the backbone embeddings. Each row is
// (score for local speaker 0, score for local speaker 1, continuation flag).
// First sub-word rows carry a distribution over the window's two speakers
// with the flag at 0; every other row is exactly the don't-care constant
// (0.5, 0.5, 1).
struct WindowFeatures {
    TokenizedWindow tokens;
    Tensor per_token_scores;  // [num_tokens x 3]

    void validate() const;
};

inline constexpr double kDontCareScore = 0.5;
inline constexpr std::size_t kFeatureDims = 3;
inline constexpr std::size_t kFusionHidden = 16;

// One probability row per word, regardless of how many sub-words each word
// produced.
struct WordPosteriors {
    Tensor values;  // [num_words x 2]
};

struct CorrectorModel {
    ModelKind kind = ModelKind::kLexical;
    EncoderConfig backbone;
    EncoderConfig frontend;
    Vocabulary vocab;
    ParameterStore params;
};

EncoderConfig default_backbone_config(std::size_t vocab_ids);
EncoderConfig default_frontend_config();

// Fresh model with seeded random weights. Encoder-based kinds take both
// configs and a vocabulary; the fusion net ignores them.
CorrectorModel make_corrector(ModelKind kind, const EncoderConfig& backbone,
                              const EncoderConfig& frontend, Vocabulary vocab, Rng& rng);

// Expands per-word score rows [num_words x 2] to per-token feature rows,
// placing don't-care rows on continuation tokens.
WindowFeatures build_window_features(TokenizedWindow tokens, const Tensor& word_scores);

// Lexical-only forward: baseline labels are one-hot encoded into the feature
// rows. Labels are local to the window (0 or 1).
WordPosteriors lsec_forward(const CorrectorModel& model, const std::vector<std::string>& words,
                            const std::vector<int>& baseline_labels);

WordPosteriors early_fusion_forward(const CorrectorModel& model, const WindowFeatures& features);

WordPosteriors fusion_net_forward(const CorrectorModel& model, const Tensor& acoustic,
                                  const Tensor& lexical);

// Copies a trained lexical model into an early-fusion model. The two kinds
// share one architecture, so fed binarized scores the copy reproduces the
// original's outputs.
CorrectorModel init_from_lsec(const CorrectorModel& lexical);

// One window of supervised training material, all labels local to the
// window's two speakers.
struct TrainingWindow {
    std::vector<std::string> words;
    std::vector<int> baseline_labels;
    std::vector<int> reference_labels;
    Tensor word_scores;     // [num_words x 2] acoustic scores
    Tensor lexical_scores;  // [num_words x 2], only for fusion-net training
};

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 8;
    double learning_rate = 1e-4;
    std::uint64_t seed = 1;
};

struct TrainResult {
    CorrectorModel model;
    std::vector<double> epoch_losses;  // mean window loss per epoch
};

// Trains the model on the given windows. Windows are validated up front; a
// window whose labels point past two speakers is rejected at ingestion.
TrainResult train_corrector(CorrectorModel model, const std::vector<TrainingWindow>& corpus,
                            const TrainConfig& config);

// Applies a lexical or early-fusion model to one window.
WordPosteriors correct_window(const CorrectorModel& model, const std::vector<std::string>& words,
                              const std::vector<int>& baseline_labels, const Tensor& word_scores);

// Lexical model feeding a fusion net: the lexical posteriors and the raw
// acoustic scores are combined per word.
struct LateFusionModel {
    CorrectorModel lexical;
    CorrectorModel fusion;
};

WordPosteriors late_fusion_correct(const LateFusionModel& model,
                                   const std::vector<std::string>& words,
                                   const std::vector<int>& baseline_labels,
                                   const Tensor& word_scores);

// Model container: header (magic "AGLC", version, kind, both encoder
// configs, vocabulary) followed by the flat parameter payload.
void save_corrector(const std::filesystem::path& path, const CorrectorModel& model);
CorrectorModel load_corrector(const std::filesystem::path& path);

}  // namespace aglsec
