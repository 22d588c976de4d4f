#include "aglsec/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "aglsec/autograd.hpp"
#include "aglsec/checkpoint.hpp"
#include "aglsec/error.hpp"
#include "aglsec/io.hpp"

namespace aglsec {
namespace {

constexpr char kModelMagic[4] = {'A', 'G', 'L', 'C'};
constexpr std::uint32_t kModelFormatVersion = 1;
constexpr double kRowSumTolerance = 1e-9;

bool uses_encoders(ModelKind kind) {
    return kind == ModelKind::kLexical || kind == ModelKind::kEarlyFusion;
}

void require_score_matrix(const Tensor& scores, std::size_t num_words, const char* what) {
    if (scores.rank() != 2 || scores.rows() != num_words || scores.cols() != 2) {
        throw std::invalid_argument(std::string(what) + " must be a (words x 2) matrix");
    }
    for (double x : scores.data) {
        if (!std::isfinite(x) || x < 0.0) {
            throw std::invalid_argument(std::string(what) + " entries must be finite and "
                                        "non-negative");
        }
    }
}

void require_local_labels(const std::vector<int>& labels, std::size_t num_words,
                          const char* what) {
    if (labels.size() != num_words) {
        throw std::invalid_argument(std::string(what) + " needs one label per word");
    }
    for (int label : labels) {
        if (label < 0 || label > 1) {
            throw std::invalid_argument(std::string(what) + " point past the window's two "
                                        "speakers; windows with more speakers are not "
                                        "correctable");
        }
    }
}

// Per-token feature rows from per-word one-hot baseline labels.
WindowFeatures label_features(TokenizedWindow tokens, const std::vector<int>& labels) {
    Tensor word_scores = Tensor::zeros({labels.size(), 2});
    for (std::size_t w = 0; w < labels.size(); ++w) {
        word_scores.at(w, static_cast<std::size_t>(labels[w])) = 1.0;
    }
    return build_window_features(std::move(tokens), word_scores);
}

// Shared graph construction: backbone over sub-words, feature concat, front
// end, classifier head. Returns per-token logits.
Var corrector_logits(Graph& g, const CorrectorModel& model, const WindowFeatures& features) {
    Var embeddings = encoder_forward(g, model.backbone, "backbone", features.tokens.sub_word_ids);
    Var fused = g.concat_cols(embeddings, g.constant(features.per_token_scores));
    Var front = encoder_forward_continuous(g, model.frontend, "frontend", fused);
    return g.add_row_bias(g.matmul(front, g.param("head.w")), g.param("head.b"));
}

Var fusion_logits(Graph& g, Var input) {
    Var hidden = g.gelu(g.add_row_bias(g.matmul(input, g.param("fusion.in.w")),
                                       g.param("fusion.in.b")));
    return g.add_row_bias(g.matmul(hidden, g.param("fusion.out.w")), g.param("fusion.out.b"));
}

Tensor fusion_input(const Tensor& acoustic, const Tensor& lexical) {
    Tensor input = Tensor::zeros({acoustic.rows(), 4});
    for (std::size_t i = 0; i < acoustic.rows(); ++i) {
        input.at(i, 0) = acoustic.at(i, 0);
        input.at(i, 1) = acoustic.at(i, 1);
        input.at(i, 2) = lexical.at(i, 0);
        input.at(i, 3) = lexical.at(i, 1);
    }
    return input;
}

// Reads the word-level posteriors off per-token logits.
WordPosteriors posteriors_at_first_subwords(Graph& g, Var logits,
                                            const TokenizedWindow& tokens) {
    Var rows = g.gather_rows(logits, tokens.word_boundaries);
    Var probs = g.softmax_rows(rows);
    WordPosteriors out;
    out.values = g.value(probs);
    return out;
}

void validate_training_window(const TrainingWindow& window, ModelKind kind) {
    if (window.words.empty()) throw std::invalid_argument("training window has no words");
    require_local_labels(window.baseline_labels, window.words.size(), "baseline labels");
    require_local_labels(window.reference_labels, window.words.size(), "reference labels");
    if (kind == ModelKind::kEarlyFusion || kind == ModelKind::kFusionNet ||
        !window.word_scores.data.empty()) {
        require_score_matrix(window.word_scores, window.words.size(), "acoustic scores");
    }
    if (kind == ModelKind::kFusionNet) {
        require_score_matrix(window.lexical_scores, window.words.size(), "lexical scores");
    }
}

}  // namespace

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::kLexical: return "lexical";
        case ModelKind::kEarlyFusion: return "early-fusion";
        case ModelKind::kFusionNet: return "fusion-net";
    }
    throw InternalError("unnamed model kind " +
                        std::to_string(static_cast<std::uint32_t>(kind)));
}

void WindowFeatures::validate() const {
    const std::size_t n_tokens = tokens.num_tokens();
    const std::size_t n_words = tokens.num_words();
    if (n_tokens == 0 || n_words == 0) {
        throw std::invalid_argument("window features must cover at least one word");
    }
    if (tokens.is_first_subword.size() != n_tokens) {
        throw std::invalid_argument("first-sub-word mask must cover every token");
    }
    for (std::size_t w = 0; w < n_words; ++w) {
        const std::size_t boundary = tokens.word_boundaries[w];
        if (boundary >= n_tokens || !tokens.is_first_subword[boundary] ||
            (w > 0 && boundary <= tokens.word_boundaries[w - 1])) {
            throw std::invalid_argument("word boundaries must be strictly increasing first-sub-"
                                        "word positions");
        }
    }
    if (per_token_scores.rank() != 2 || per_token_scores.rows() != n_tokens ||
        per_token_scores.cols() != kFeatureDims) {
        throw std::invalid_argument("per-token scores must be a (tokens x 3) matrix");
    }
    for (std::size_t t = 0; t < n_tokens; ++t) {
        if (tokens.is_first_subword[t]) {
            const double sum = per_token_scores.at(t, 0) + per_token_scores.at(t, 1);
            if (std::abs(sum - 1.0) > kRowSumTolerance || per_token_scores.at(t, 2) != 0.0) {
                throw std::invalid_argument("first-sub-word score rows must sum to 1 with a zero "
                                            "continuation flag");
            }
        } else if (per_token_scores.at(t, 0) != kDontCareScore ||
                   per_token_scores.at(t, 1) != kDontCareScore ||
                   per_token_scores.at(t, 2) != 1.0) {
            throw std::invalid_argument("continuation rows must hold the don't-care constant");
        }
    }
}

EncoderConfig default_backbone_config(std::size_t vocab_ids) {
    EncoderConfig config;
    config.num_layers = 2;
    config.model_dim = 32;
    config.num_heads = 2;
    config.ff_dim = 64;
    config.vocab_size = vocab_ids;
    config.max_positions = 192;
    return config;
}

EncoderConfig default_frontend_config() {
    EncoderConfig config;
    config.num_layers = 1;
    config.model_dim = 16;
    config.num_heads = 2;
    config.ff_dim = 32;
    config.vocab_size = 1;  // continuous input, no token table
    config.max_positions = 192;
    return config;
}

CorrectorModel make_corrector(ModelKind kind, const EncoderConfig& backbone,
                              const EncoderConfig& frontend, Vocabulary vocab, Rng& rng) {
    CorrectorModel model;
    model.kind = kind;
    model.backbone = backbone;
    model.frontend = frontend;
    model.vocab = std::move(vocab);

    if (uses_encoders(kind)) {
        if (backbone.vocab_size < model.vocab.id_count()) {
            throw std::invalid_argument("backbone vocab_size " +
                                        std::to_string(backbone.vocab_size) +
                                        " cannot hold " + std::to_string(model.vocab.id_count()) +
                                        " vocabulary ids");
        }
        init_encoder_params(model.params, backbone, "backbone", rng);
        init_encoder_params(model.params, frontend, "frontend", rng,
                            backbone.model_dim + kFeatureDims);
        model.params.add("head.w", uniform_init({frontend.model_dim, 2}, rng));
        model.params.add("head.b", Tensor::zeros({2}));
    } else {
        model.params.add("fusion.in.w", uniform_init({4, kFusionHidden}, rng));
        model.params.add("fusion.in.b", Tensor::zeros({kFusionHidden}));
        model.params.add("fusion.out.w", uniform_init({kFusionHidden, 2}, rng));
        model.params.add("fusion.out.b", Tensor::zeros({2}));
    }
    return model;
}

WindowFeatures build_window_features(TokenizedWindow tokens, const Tensor& word_scores) {
    require_score_matrix(word_scores, tokens.num_words(), "word scores");
    WindowFeatures features;
    features.per_token_scores = Tensor::zeros({tokens.num_tokens(), kFeatureDims});
    std::size_t word = 0;
    for (std::size_t t = 0; t < tokens.num_tokens(); ++t) {
        if (tokens.is_first_subword[t]) {
            features.per_token_scores.at(t, 0) = word_scores.at(word, 0);
            features.per_token_scores.at(t, 1) = word_scores.at(word, 1);
            ++word;
        } else {
            features.per_token_scores.at(t, 0) = kDontCareScore;
            features.per_token_scores.at(t, 1) = kDontCareScore;
            features.per_token_scores.at(t, 2) = 1.0;
        }
    }
    features.tokens = std::move(tokens);
    return features;
}

WordPosteriors lsec_forward(const CorrectorModel& model, const std::vector<std::string>& words,
                            const std::vector<int>& baseline_labels) {
    if (model.kind != ModelKind::kLexical && model.kind != ModelKind::kEarlyFusion) {
        throw std::invalid_argument("model kind cannot run the lexical forward pass");
    }
    if (words.empty()) throw std::invalid_argument("window has no words");
    require_local_labels(baseline_labels, words.size(), "baseline labels");

    WindowFeatures features = label_features(tokenize(words, model.vocab), baseline_labels);
    Graph g(model.params);
    Var logits = corrector_logits(g, model, features);
    return posteriors_at_first_subwords(g, logits, features.tokens);
}

WordPosteriors early_fusion_forward(const CorrectorModel& model, const WindowFeatures& features) {
    if (model.kind != ModelKind::kEarlyFusion && model.kind != ModelKind::kLexical) {
        throw std::invalid_argument("model kind cannot run the early-fusion forward pass");
    }
    features.validate();
    Graph g(model.params);
    Var logits = corrector_logits(g, model, features);
    return posteriors_at_first_subwords(g, logits, features.tokens);
}

WordPosteriors fusion_net_forward(const CorrectorModel& model, const Tensor& acoustic,
                                  const Tensor& lexical) {
    if (model.kind != ModelKind::kFusionNet) {
        throw std::invalid_argument("model kind cannot run the fusion-net forward pass");
    }
    if (acoustic.rank() != 2 || acoustic.rows() == 0) {
        throw std::invalid_argument("acoustic scores must be a nonempty matrix");
    }
    if (acoustic.rows() != lexical.rows()) {
        throw std::invalid_argument("acoustic and lexical score counts differ: " +
                                    std::to_string(acoustic.rows()) + " vs " +
                                    std::to_string(lexical.rows()));
    }
    require_score_matrix(acoustic, acoustic.rows(), "acoustic scores");
    require_score_matrix(lexical, lexical.rows(), "lexical scores");

    Graph g(model.params);
    Var logits = fusion_logits(g, g.constant(fusion_input(acoustic, lexical)));
    Var probs = g.softmax_rows(logits);
    WordPosteriors out;
    out.values = g.value(probs);
    return out;
}

CorrectorModel init_from_lsec(const CorrectorModel& lexical) {
    if (lexical.kind != ModelKind::kLexical) {
        throw std::invalid_argument("early-fusion initialization requires a lexical model");
    }
    CorrectorModel model = lexical;
    model.kind = ModelKind::kEarlyFusion;
    return model;
}

TrainResult train_corrector(CorrectorModel model, const std::vector<TrainingWindow>& corpus,
                            const TrainConfig& config) {
    if (corpus.empty()) throw std::invalid_argument("training corpus is empty");
    if (config.epochs == 0 || config.batch_size == 0) {
        throw std::invalid_argument("epochs and batch size must be positive");
    }
    for (const TrainingWindow& window : corpus) validate_training_window(window, model.kind);

    // Everything shape-dependent is prepared once; epochs only shuffle,
    // rebuild graphs, and step.
    struct Prepared {
        WindowFeatures features;          // encoder kinds
        std::vector<int> token_targets;   // encoder kinds
        std::vector<unsigned char> include;
        Tensor fusion_rows;               // fusion kind
        std::vector<int> word_targets;    // fusion kind
    };
    std::vector<Prepared> prepared;
    prepared.reserve(corpus.size());
    for (const TrainingWindow& window : corpus) {
        Prepared p;
        if (uses_encoders(model.kind)) {
            TokenizedWindow tokens = tokenize(window.words, model.vocab);
            p.features = (model.kind == ModelKind::kLexical)
                             ? label_features(std::move(tokens), window.baseline_labels)
                             : build_window_features(std::move(tokens), window.word_scores);
            const TokenizedWindow& tw = p.features.tokens;
            p.token_targets.assign(tw.num_tokens(), 0);
            p.include = tw.is_first_subword;
            for (std::size_t w = 0; w < tw.num_words(); ++w) {
                p.token_targets[tw.word_boundaries[w]] = window.reference_labels[w];
            }
        } else {
            p.fusion_rows = fusion_input(window.word_scores, window.lexical_scores);
            p.word_targets = window.reference_labels;
            p.include.assign(window.words.size(), 1);
        }
        prepared.push_back(std::move(p));
    }

    Rng rng(config.seed);
    AdamState adam;
    AdamConfig adam_config;
    adam_config.learning_rate = config.learning_rate;

    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    result.epoch_losses.reserve(config.epochs);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            model.params.zero_grads();
            for (std::size_t i = start; i < stop; ++i) {
                const Prepared& p = prepared[order[i]];
                Graph g(model.params);
                Var loss;
                if (uses_encoders(model.kind)) {
                    Var logits = corrector_logits(g, model, p.features);
                    loss = g.masked_cross_entropy(logits, p.token_targets, p.include);
                } else {
                    Var logits = fusion_logits(g, g.constant(p.fusion_rows));
                    loss = g.masked_cross_entropy(logits, p.word_targets, p.include);
                }
                g.backward(loss, 1.0 / static_cast<double>(stop - start));
                loss_sum += g.value(loss).data[0];
            }
            adam_step(model.params, adam, adam_config);
        }
        result.epoch_losses.push_back(loss_sum / static_cast<double>(corpus.size()));
    }
    result.model = std::move(model);
    return result;
}

WordPosteriors correct_window(const CorrectorModel& model, const std::vector<std::string>& words,
                              const std::vector<int>& baseline_labels,
                              const Tensor& word_scores) {
    switch (model.kind) {
        case ModelKind::kLexical:
            return lsec_forward(model, words, baseline_labels);
        case ModelKind::kEarlyFusion:
            return early_fusion_forward(
                model, build_window_features(tokenize(words, model.vocab), word_scores));
        case ModelKind::kFusionNet:
            throw std::invalid_argument("a fusion net corrects windows only behind a lexical "
                                        "model; use late_fusion_correct");
    }
    throw InternalError("unhandled model kind");
}

WordPosteriors late_fusion_correct(const LateFusionModel& model,
                                   const std::vector<std::string>& words,
                                   const std::vector<int>& baseline_labels,
                                   const Tensor& word_scores) {
    WordPosteriors lexical = lsec_forward(model.lexical, words, baseline_labels);
    return fusion_net_forward(model.fusion, word_scores, lexical.values);
}

void save_corrector(const std::filesystem::path& path, const CorrectorModel& model) {
    std::string out(kModelMagic, sizeof(kModelMagic));
    append_u32(out, kModelFormatVersion);
    append_u32(out, static_cast<std::uint32_t>(model.kind));
    for (const EncoderConfig* config : {&model.backbone, &model.frontend}) {
        append_u32(out, static_cast<std::uint32_t>(config->num_layers));
        append_u32(out, static_cast<std::uint32_t>(config->model_dim));
        append_u32(out, static_cast<std::uint32_t>(config->num_heads));
        append_u32(out, static_cast<std::uint32_t>(config->ff_dim));
        append_u32(out, static_cast<std::uint32_t>(config->vocab_size));
        append_u32(out, static_cast<std::uint32_t>(config->max_positions));
    }
    append_u32(out, static_cast<std::uint32_t>(model.vocab.chunks().size()));
    for (const std::string& chunk : model.vocab.chunks()) {
        append_u32(out, static_cast<std::uint32_t>(chunk.size()));
        out.append(chunk);
    }
    out.append(serialize_parameters(model.params));
    write_file_atomic(path, out);
}

CorrectorModel load_corrector(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    std::size_t offset = 0;
    if (read_bytes(bytes, offset, sizeof(kModelMagic)) !=
        std::string(kModelMagic, sizeof(kModelMagic))) {
        throw FormatError("not a corrector model file: bad magic bytes");
    }
    const std::uint32_t version = read_u32(bytes, offset);
    if (version != kModelFormatVersion) {
        throw FormatError("unsupported corrector model version " + std::to_string(version));
    }
    const std::uint32_t kind_value = read_u32(bytes, offset);
    if (kind_value > static_cast<std::uint32_t>(ModelKind::kFusionNet)) {
        throw FormatError("unknown model kind " + std::to_string(kind_value));
    }

    CorrectorModel model;
    model.kind = static_cast<ModelKind>(kind_value);
    for (EncoderConfig* config : {&model.backbone, &model.frontend}) {
        config->num_layers = read_u32(bytes, offset);
        config->model_dim = read_u32(bytes, offset);
        config->num_heads = read_u32(bytes, offset);
        config->ff_dim = read_u32(bytes, offset);
        config->vocab_size = read_u32(bytes, offset);
        config->max_positions = read_u32(bytes, offset);
    }

    const std::uint32_t chunk_count = read_u32(bytes, offset);
    std::vector<std::string> chunks;
    chunks.reserve(chunk_count);
    for (std::uint32_t i = 0; i < chunk_count; ++i) {
        const std::uint32_t len = read_u32(bytes, offset);
        chunks.push_back(read_bytes(bytes, offset, len));
    }
    try {
        model.vocab = Vocabulary::from_chunks(std::move(chunks));
        model.backbone.validate();
        model.frontend.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("corrector model header invalid: ") + e.what());
    }

    model.params = parse_parameters(std::string_view(bytes).substr(offset));
    return model;
}

}  // namespace aglsec
