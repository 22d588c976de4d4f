// Acceptance suite. Each criterion prints exactly one PASS/FAIL line
// followed by indented detail lines. Criteria are selected by number on the
// command line; criterion 7 drives the installed binary and needs
// --cli <path>. The process exits 0 only when every requested criterion
// passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aglsec/autograd.hpp"
#include "aglsec/corrector.hpp"
#include "aglsec/diarization.hpp"
#include "aglsec/error.hpp"
#include "aglsec/formats.hpp"
#include "aglsec/io.hpp"
#include "aglsec/nn.hpp"
#include "aglsec/rng.hpp"
#include "aglsec/scores.hpp"
#include "aglsec/scoring.hpp"
#include "aglsec/simulator.hpp"
#include "aglsec/tensor.hpp"
#include "aglsec/tokenizer.hpp"
#include "aglsec/transcript.hpp"
#include "aglsec/windowing.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace aglsec;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Pinned tolerances and budgets. Every numeric threshold the suite asserts
// lives here.

constexpr double kLossOracleTolerance = 1e-10;
constexpr std::size_t kLossOracleInstances = 500;
constexpr double kOracleBudgetSeconds = 30.0;

constexpr double kGradStep = 1e-5;
constexpr double kGradBudgetSeconds = 60.0;

constexpr double kInitEquivalenceTolerance = 1e-9;
constexpr std::size_t kInitEquivalenceWindows = 100;

constexpr double kRowSumTolerance = 1e-9;
constexpr double kLossCompareTolerance = 1e-9;

constexpr std::size_t kPropertyCases = 1000;

// The directional experiment shared by criteria 4, 5, and 6.
constexpr std::uint64_t kExperimentSeeds[3] = {401, 402, 403};
constexpr std::size_t kExperimentConversations = 2000;
constexpr std::size_t kExperimentTrainWindows = 6000;
constexpr std::size_t kFusionTrainWindows = 2000;
constexpr double kExperimentBudgetSeconds = 900.0;
constexpr double kRequiredDropVsBaseline = 0.20;
constexpr double kRequiredDropVsLexical = 0.10;

const char* pass_fail(bool ok) { return ok ? "PASS" : "FAIL"; }

std::string fmt(double v, int digits = 4) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*f", digits, v);
    return buffer;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    const auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(now - start).count();
}

struct CriterionOutcome {
    bool passed = true;
    std::string summary;
    std::vector<std::string> details;

    void fail(const std::string& why) {
        passed = false;
        details.push_back(why);
    }
};

// ---------------------------------------------------------------------------
// Shared random builders.

const std::vector<std::string>& pattern_word_pool() {
    static const std::vector<std::string> pool = [] {
        std::vector<std::string> words;
        for (PatternFamily family : {PatternFamily::kGreeting, PatternFamily::kQuestion,
                                     PatternFamily::kAnswer, PatternFamily::kStatement}) {
            for (const auto& pattern : patterns_for(family)) {
                words.insert(words.end(), pattern.begin(), pattern.end());
            }
        }
        std::sort(words.begin(), words.end());
        words.erase(std::unique(words.begin(), words.end()), words.end());
        return words;
    }();
    return pool;
}

std::vector<std::string> random_words(Rng& rng, std::size_t count) {
    const auto& pool = pattern_word_pool();
    std::vector<std::string> words;
    for (std::size_t i = 0; i < count; ++i) words.push_back(pool[rng.below(pool.size())]);
    return words;
}

Tensor random_score_rows(Rng& rng, std::size_t rows) {
    Tensor scores = Tensor::zeros({rows, 2});
    for (std::size_t i = 0; i < rows; ++i) {
        const double p = rng.uniform(0.05, 0.95);
        scores.at(i, 0) = p;
        scores.at(i, 1) = 1.0 - p;
    }
    return scores;
}

Tensor one_hot_rows(const std::vector<int>& labels) {
    Tensor scores = Tensor::zeros({labels.size(), 2});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        scores.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    return scores;
}

EncoderConfig small_backbone(std::size_t vocab_ids) {
    EncoderConfig config;
    config.num_layers = 1;
    config.model_dim = 4;
    config.num_heads = 2;
    config.ff_dim = 6;
    config.vocab_size = vocab_ids;
    config.max_positions = 24;
    return config;
}

EncoderConfig small_frontend() {
    EncoderConfig config;
    config.num_layers = 1;
    config.model_dim = 4;
    config.num_heads = 2;
    config.ff_dim = 6;
    config.vocab_size = 1;
    config.max_positions = 24;
    return config;
}

CorrectorModel small_model(ModelKind kind, std::uint64_t seed) {
    // A fixed miniature vocabulary keeps the gradient checks fast.
    Vocabulary vocab = Vocabulary::build({"how",  "are", "you",  "today", "i",    "am",
                                          "good", "it",  "went", "fine",  "well", "absolutely"},
                                         64);
    Rng rng(seed);
    const EncoderConfig backbone = small_backbone(vocab.id_count());
    return make_corrector(kind, backbone, small_frontend(), std::move(vocab), rng);
}

// Builds the training-loss graph for one window, mirroring the model's
// forward pass, and returns the loss after one backward sweep.
double corrector_window_loss(CorrectorModel& model, const std::vector<std::string>& words,
                             const std::vector<int>& baseline, const std::vector<int>& reference,
                             const Tensor& word_scores) {
    if (model.kind == ModelKind::kFusionNet) {
        Tensor input = Tensor::zeros({words.size(), 4});
        for (std::size_t i = 0; i < words.size(); ++i) {
            input.at(i, 0) = word_scores.at(i, 0);
            input.at(i, 1) = word_scores.at(i, 1);
            input.at(i, 2) = baseline[i] == 0 ? 0.8 : 0.2;
            input.at(i, 3) = baseline[i] == 0 ? 0.2 : 0.8;
        }
        Graph g(model.params);
        Var hidden = g.gelu(g.add_row_bias(g.matmul(g.constant(input), g.param("fusion.in.w")),
                                           g.param("fusion.in.b")));
        Var logits = g.add_row_bias(g.matmul(hidden, g.param("fusion.out.w")),
                                    g.param("fusion.out.b"));
        Var loss = g.masked_cross_entropy(logits, reference,
                                          std::vector<unsigned char>(words.size(), 1));
        g.backward(loss);
        return g.value(loss).data[0];
    }

    TokenizedWindow tokens = tokenize(words, model.vocab);
    WindowFeatures features =
        build_window_features(tokens, model.kind == ModelKind::kLexical ? one_hot_rows(baseline)
                                                                        : word_scores);
    std::vector<int> targets(features.tokens.num_tokens(), 0);
    for (std::size_t w = 0; w < features.tokens.num_words(); ++w) {
        targets[features.tokens.word_boundaries[w]] = reference[w];
    }
    Graph g(model.params);
    Var emb = encoder_forward(g, model.backbone, "backbone", features.tokens.sub_word_ids);
    Var fused = g.concat_cols(emb, g.constant(features.per_token_scores));
    Var front = encoder_forward_continuous(g, model.frontend, "frontend", fused);
    Var logits = g.add_row_bias(g.matmul(front, g.param("head.w")), g.param("head.b"));
    Var loss = g.masked_cross_entropy(logits, targets, features.tokens.is_first_subword);
    g.backward(loss);
    return g.value(loss).data[0];
}

// ---------------------------------------------------------------------------
// Criterion 1: closed-form implementations match their brute-force oracles.

CriterionOutcome criterion_1() {
    CriterionOutcome outcome;
    const auto start = std::chrono::steady_clock::now();

    Rng rng(1001);
    double worst_diff = 0.0;
    for (std::size_t i = 0; i < kLossOracleInstances; ++i) {
        const std::size_t speakers = 1 + rng.below(4);
        const std::size_t frames = 1 + rng.below(16);
        SpeakerActivityLabels labels;
        labels.values = Tensor::zeros({frames, speakers});
        FramePosteriorMatrix posteriors;
        posteriors.values = Tensor::zeros({frames, speakers});
        for (std::size_t t = 0; t < frames; ++t) {
            for (std::size_t s = 0; s < speakers; ++s) {
                labels.values.at(t, s) = rng.bernoulli(0.5) ? 1.0 : 0.0;
                posteriors.values.at(t, s) = rng.uniform();
            }
        }
        const double ours = permutation_free_loss(labels, posteriors).loss;
        const double reference = oracle::permutation_free_loss(labels, posteriors);
        worst_diff = std::max(worst_diff, std::abs(ours - reference));
    }
    if (worst_diff > kLossOracleTolerance) {
        outcome.fail("loss oracle max |diff| " + fmt(worst_diff, 14) + " exceeds " +
                     fmt(kLossOracleTolerance, 14));
    }

    // Every word-sequence pair of length <= 6 over a three-word vocabulary.
    const std::vector<std::string> vocab = {"a", "b", "c"};
    std::vector<std::vector<std::string>> sequences;
    sequences.push_back({});
    std::size_t first_of_previous_length = 0;
    for (int length = 1; length <= 6; ++length) {
        const std::size_t end = sequences.size();
        for (std::size_t base = first_of_previous_length; base < end; ++base) {
            for (const std::string& word : vocab) {
                std::vector<std::string> next = sequences[base];
                next.push_back(word);
                sequences.push_back(std::move(next));
            }
        }
        first_of_previous_length = end;
    }

    const auto as_transcript = [](const std::vector<std::string>& words) {
        LabeledTranscript t;
        for (const std::string& w : words) t.words.push_back({w, 0, 0, 0});
        return t;
    };
    std::vector<LabeledTranscript> transcripts;
    transcripts.reserve(sequences.size());
    for (const auto& seq : sequences) transcripts.push_back(as_transcript(seq));

    std::size_t pairs_checked = 0;
    std::size_t mismatches = 0;
    for (std::size_t a = 0; a < sequences.size() && mismatches == 0; ++a) {
        for (std::size_t b = 0; b < sequences.size(); ++b) {
            if (a == 0 && b == 0) continue;  // both empty: rejected by contract
            oracle::AlignmentCostOracle reference(sequences[a], sequences[b]);
            const AlignmentResult result = align_words(transcripts[a], transcripts[b]);
            ++pairs_checked;
            if (static_cast<int>(result.edit_cost()) != reference.cost()) {
                ++mismatches;
                outcome.fail("alignment cost mismatch on pair " + std::to_string(a) + "/" +
                             std::to_string(b));
                break;
            }
        }
    }
    bool both_empty_rejected = false;
    try {
        align_words(transcripts[0], transcripts[0]);
    } catch (const std::invalid_argument&) {
        both_empty_rejected = true;
    }
    if (!both_empty_rejected) outcome.fail("aligning two empty transcripts did not throw");

    const double elapsed = seconds_since(start);
    if (elapsed >= kOracleBudgetSeconds) {
        outcome.fail("elapsed " + fmt(elapsed, 1) + "s exceeds the " +
                     fmt(kOracleBudgetSeconds, 0) + "s budget");
    }
    outcome.summary = std::to_string(kLossOracleInstances) + " loss instances (max diff " +
                      fmt(worst_diff, 14) + "), " + std::to_string(pairs_checked) +
                      " alignment pairs, " + fmt(elapsed, 1) + "s";
    return outcome;
}

// ---------------------------------------------------------------------------
// Criterion 2: analytic gradients match central finite differences for every
// parameter of all three model kinds.

CriterionOutcome criterion_2() {
    CriterionOutcome outcome;
    const auto start = std::chrono::steady_clock::now();

    const std::vector<std::string> words = {"how", "are", "you", "today", "absolutely"};
    const std::vector<int> baseline = {0, 0, 1, 1, 1};
    const std::vector<int> reference = {0, 1, 1, 1, 0};
    Rng rng(2002);
    const Tensor soft_scores = random_score_rows(rng, words.size());

    double worst_rel = 0.0;
    std::string worst_at = "none";
    std::size_t total_entries = 0;
    for (ModelKind kind :
         {ModelKind::kLexical, ModelKind::kEarlyFusion, ModelKind::kFusionNet}) {
        CorrectorModel model = small_model(kind, 7 + static_cast<std::uint64_t>(kind));
        const auto loss = [&] {
            return corrector_window_loss(model, words, baseline, reference, soft_scores);
        };
        GradCheckResult result = finite_difference_check(model.params, loss, {}, kGradStep);
        total_entries += result.checked;
        if (result.worst_rel > worst_rel) {
            worst_rel = result.worst_rel;
            worst_at = model_kind_name(kind) + ":" + result.worst_name;
        }
        if (!result.passed) {
            std::string detail = model_kind_name(kind) + " gradient check failed:";
            for (const auto& f : result.failures) {
                detail += " " + f.name + "[" + std::to_string(f.index) + "]";
                if (detail.size() > 160) break;
            }
            outcome.fail(detail);
        }
    }

    const double elapsed = seconds_since(start);
    if (elapsed >= kGradBudgetSeconds) {
        outcome.fail("elapsed " + fmt(elapsed, 1) + "s exceeds the " +
                     fmt(kGradBudgetSeconds, 0) + "s budget");
    }
    outcome.summary = std::to_string(total_entries) + " parameter entries, " +
                      (worst_at == "none" ? "all analytic-numeric diffs within 1e-7"
                                          : "worst rel err " + fmt(worst_rel, 8) + " at " + worst_at) +
                      ", " + fmt(elapsed, 1) + "s";
    return outcome;
}

// ---------------------------------------------------------------------------
// Criterion 3: an early-fusion model copied from a lexical model reproduces
// it exactly when the acoustic input carries the same one-hot information.

CriterionOutcome criterion_3() {
    CriterionOutcome outcome;

    Vocabulary vocab = Vocabulary::build(pattern_word_pool(), 512);
    Rng init_rng(3003);
    const EncoderConfig backbone = default_backbone_config(vocab.id_count());
    CorrectorModel lexical = make_corrector(ModelKind::kLexical, backbone,
                                            default_frontend_config(), std::move(vocab), init_rng);
    const CorrectorModel fused = init_from_lsec(lexical);

    Rng rng(3103);
    double worst = 0.0;
    for (std::size_t trial = 0; trial < kInitEquivalenceWindows; ++trial) {
        const std::size_t n = 1 + rng.below(30);
        const std::vector<std::string> words = random_words(rng, n);
        std::vector<int> labels;
        for (std::size_t i = 0; i < n; ++i) labels.push_back(static_cast<int>(rng.below(2)));

        // Soft scores binarized by argmax; the labels fed to the lexical
        // model carry the same decisions.
        const Tensor soft = random_score_rows(rng, n);
        std::vector<int> decisions;
        for (std::size_t i = 0; i < n; ++i) {
            decisions.push_back(soft.at(i, 1) > soft.at(i, 0) ? 1 : 0);
        }
        const WordPosteriors from_lexical = lsec_forward(lexical, words, decisions);
        WindowFeatures features =
            build_window_features(tokenize(words, fused.vocab), one_hot_rows(decisions));
        const WordPosteriors from_fused = early_fusion_forward(fused, features);
        for (std::size_t i = 0; i < from_lexical.values.data.size(); ++i) {
            worst = std::max(worst,
                             std::abs(from_lexical.values.data[i] - from_fused.values.data[i]));
        }
    }
    if (worst > kInitEquivalenceTolerance) {
        outcome.fail("max posterior difference " + fmt(worst, 14) + " exceeds " +
                     fmt(kInitEquivalenceTolerance, 14));
    }
    outcome.summary = std::to_string(kInitEquivalenceWindows) +
                      " windows, max posterior difference " + fmt(worst, 14);
    return outcome;
}

// ---------------------------------------------------------------------------
// Criteria 4, 5, 6: the directional experiment. Three corpora are simulated,
// all three corrector variants are trained on each, and the test split is
// scored. Built once and shared.

struct SystemEvaluation {
    double wder = 0.0;
    std::size_t fixed = 0;
    std::size_t broken = 0;
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    double baseline_wder = 0.0;
    SystemEvaluation lexical;
    SystemEvaluation late_fusion;
    SystemEvaluation early_fusion;
    double eighth_lsec_init_wder = 0.0;
    double eighth_random_wder = 0.0;
    bool identity_exact = true;
    double lexical_loss = 0.0;
    double fused_loss = 0.0;
    double fusion_loss = 0.0;
};

struct Experiment {
    std::vector<SeedOutcome> seeds;
    double elapsed_seconds = 0.0;
};

SimulatorConfig experiment_config(std::uint64_t seed) {
    SimulatorConfig config;
    config.seed = seed;
    config.num_speakers = 2;
    config.num_turns = 12;
    config.min_words_per_turn = 4;
    config.max_words_per_turn = 9;
    config.overlap_probability = 0.2;
    config.posterior_noise = 4.5;
    config.error_rate_at_boundaries = 0.4;
    config.error_rate_interior = 0.01;
    config.frame_rate = 10;
    config.word_duration_sec = 0.3;
    return config;
}

TrainConfig experiment_train_config(std::size_t epochs, double learning_rate,
                                    std::uint64_t seed) {
    TrainConfig config;
    config.epochs = epochs;
    config.batch_size = 8;
    config.learning_rate = learning_rate;
    config.seed = seed;
    return config;
}

LabeledTranscript apply_system(const SimulatedConversation& conversation,
                               const std::vector<SpeakerScoreVector>& scores,
                               const WindowCorrector& corrector) {
    CorrectedTranscript corrected =
        correct_transcript(conversation.baseline, scores, corrector, WindowingConfig{});
    LabeledTranscript out;
    out.id = conversation.baseline.id;
    out.words = std::move(corrected.words);
    return out;
}

SeedOutcome run_experiment_seed(std::uint64_t seed) {
    SeedOutcome outcome;
    outcome.seed = seed;

    const SimulatedCorpus corpus =
        build_corpus(experiment_config(seed), kExperimentConversations, CorpusOptions{});

    std::vector<TrainingWindow> pool = corpus.train.windows;
    if (pool.size() > kExperimentTrainWindows) pool.resize(kExperimentTrainWindows);

    std::vector<std::string> vocabulary_words;
    for (const TrainingWindow& window : pool) {
        vocabulary_words.insert(vocabulary_words.end(), window.words.begin(),
                                window.words.end());
    }
    Vocabulary vocab = Vocabulary::build(vocabulary_words, 512);
    const EncoderConfig backbone = default_backbone_config(vocab.id_count());

    Rng lexical_rng(seed);
    CorrectorModel lexical_init = make_corrector(ModelKind::kLexical, backbone,
                                                 default_frontend_config(), vocab, lexical_rng);
    TrainResult lexical = train_corrector(std::move(lexical_init), pool,
                                          experiment_train_config(8, 5e-4, seed));

    TrainResult fused = train_corrector(init_from_lsec(lexical.model), pool,
                                        experiment_train_config(8, 2e-4, seed + 1));

    std::vector<TrainingWindow> fusion_pool = pool;
    if (fusion_pool.size() > kFusionTrainWindows) fusion_pool.resize(kFusionTrainWindows);
    for (TrainingWindow& window : fusion_pool) {
        window.lexical_scores =
            lsec_forward(lexical.model, window.words, window.baseline_labels).values;
    }
    Rng fusion_rng(seed + 2);
    CorrectorModel fusion_init = make_corrector(ModelKind::kFusionNet, backbone,
                                                default_frontend_config(), vocab, fusion_rng);
    TrainResult fusion = train_corrector(std::move(fusion_init), fusion_pool,
                                         experiment_train_config(8, 2e-3, seed + 2));

    // Data-efficiency arms: an eighth of the pool, identical budgets, one
    // model copied from the lexical weights and one from random weights.
    std::vector<TrainingWindow> eighth(pool.begin(),
                                       pool.begin() + static_cast<std::ptrdiff_t>(
                                                          std::max<std::size_t>(1, pool.size() / 8)));
    TrainResult eighth_lsec = train_corrector(init_from_lsec(lexical.model), eighth,
                                              experiment_train_config(6, 2e-4, seed + 3));
    Rng random_rng(seed + 4);
    CorrectorModel random_init = make_corrector(ModelKind::kEarlyFusion, backbone,
                                                default_frontend_config(), vocab, random_rng);
    TrainResult eighth_random = train_corrector(std::move(random_init), eighth,
                                                experiment_train_config(6, 2e-4, seed + 3));

    // Window correctors over the trained models.
    const auto encoder_system = [](const CorrectorModel& model) {
        return WindowCorrector([&model](const std::vector<std::string>& words,
                                        const std::vector<int>& labels, const Tensor& scores) {
            return correct_window(model, words, labels, scores);
        });
    };
    LateFusionModel late{lexical.model, fusion.model};
    const WindowCorrector late_system = [&late](const std::vector<std::string>& words,
                                                const std::vector<int>& labels,
                                                const Tensor& scores) {
        return late_fusion_correct(late, words, labels, scores);
    };

    std::vector<LabeledTranscript> references, baselines;
    std::vector<LabeledTranscript> by_lexical, by_late, by_fused, by_eighth_lsec,
        by_eighth_random;
    for (std::size_t index : corpus.test.conversation_indices) {
        const SimulatedConversation& conversation = corpus.conversations[index];
        const auto& scores = corpus.word_scores[index];
        references.push_back(conversation.reference);
        baselines.push_back(conversation.baseline);
        by_lexical.push_back(apply_system(conversation, scores, encoder_system(lexical.model)));
        by_late.push_back(apply_system(conversation, scores, late_system));
        by_fused.push_back(apply_system(conversation, scores, encoder_system(fused.model)));
        by_eighth_lsec.push_back(
            apply_system(conversation, scores, encoder_system(eighth_lsec.model)));
        by_eighth_random.push_back(
            apply_system(conversation, scores, encoder_system(eighth_random.model)));
    }

    const auto evaluate = [&](const std::vector<LabeledTranscript>& corrected) {
        const CorpusReport report = score_corpus(references, baselines, corrected);
        SystemEvaluation evaluation;
        evaluation.wder = report.corrected_total.wder;
        evaluation.fixed = report.accounting_total.fixed;
        evaluation.broken = report.accounting_total.broken;
        outcome.baseline_wder = report.baseline_total.wder;
        for (const ConversationReport& conversation : report.conversations) {
            const ErrorAccounting& a = conversation.accounting;
            if (a.final_errors != a.baseline_errors - a.fixed + a.broken) {
                outcome.identity_exact = false;
            }
        }
        return evaluation;
    };
    outcome.lexical = evaluate(by_lexical);
    outcome.late_fusion = evaluate(by_late);
    outcome.early_fusion = evaluate(by_fused);
    outcome.eighth_lsec_init_wder = evaluate(by_eighth_lsec).wder;
    outcome.eighth_random_wder = evaluate(by_eighth_random).wder;
    outcome.lexical_loss = lexical.epoch_losses.back();
    outcome.fused_loss = fused.epoch_losses.back();
    outcome.fusion_loss = fusion.epoch_losses.back();
    return outcome;
}

const Experiment& shared_experiment() {
    static const Experiment experiment = [] {
        Experiment e;
        const auto start = std::chrono::steady_clock::now();
        for (std::uint64_t seed : kExperimentSeeds) {
            e.seeds.push_back(run_experiment_seed(seed));
        }
        e.elapsed_seconds = seconds_since(start);
        return e;
    }();
    return experiment;
}

std::string seed_detail(const SeedOutcome& s) {
    return "seed " + std::to_string(s.seed) + ": baseline " + fmt(s.baseline_wder) +
           "  lexical " + fmt(s.lexical.wder) + "  late-fusion " + fmt(s.late_fusion.wder) +
           "  early-fusion " + fmt(s.early_fusion.wder) + "  (final train losses " +
           fmt(s.lexical_loss, 3) + "/" + fmt(s.fused_loss, 3) + "/" + fmt(s.fusion_loss, 3) +
           ")";
}

CriterionOutcome criterion_4() {
    CriterionOutcome outcome;
    const Experiment& experiment = shared_experiment();
    for (const SeedOutcome& s : experiment.seeds) {
        outcome.details.push_back(seed_detail(s));
        if (!(s.early_fusion.wder < s.late_fusion.wder &&
              s.late_fusion.wder < s.lexical.wder && s.lexical.wder < s.baseline_wder)) {
            outcome.fail("seed " + std::to_string(s.seed) +
                         ": ordering early < late < lexical < baseline does not hold");
        }
        if (!(s.early_fusion.wder <= (1.0 - kRequiredDropVsBaseline) * s.baseline_wder)) {
            outcome.fail("seed " + std::to_string(s.seed) + ": early fusion is only " +
                         fmt(100.0 * (1.0 - s.early_fusion.wder / s.baseline_wder), 1) +
                         "% below baseline (need 20%)");
        }
        if (!(s.early_fusion.wder <= (1.0 - kRequiredDropVsLexical) * s.lexical.wder)) {
            outcome.fail("seed " + std::to_string(s.seed) + ": early fusion is only " +
                         fmt(100.0 * (1.0 - s.early_fusion.wder / s.lexical.wder), 1) +
                         "% below the lexical corrector (need 10%)");
        }
    }
    if (experiment.elapsed_seconds >= kExperimentBudgetSeconds) {
        outcome.fail("experiment took " + fmt(experiment.elapsed_seconds, 1) + "s, budget " +
                     fmt(kExperimentBudgetSeconds, 0) + "s");
    }
    outcome.summary = "wder ordering on " + std::to_string(experiment.seeds.size()) +
                      " corpus seeds, " + fmt(experiment.elapsed_seconds, 1) + "s total";
    return outcome;
}

CriterionOutcome criterion_5() {
    CriterionOutcome outcome;
    const Experiment& experiment = shared_experiment();
    for (const SeedOutcome& s : experiment.seeds) {
        outcome.details.push_back(
            "seed " + std::to_string(s.seed) + ": lexical fixed/broken " +
            std::to_string(s.lexical.fixed) + "/" + std::to_string(s.lexical.broken) +
            "  early-fusion fixed/broken " + std::to_string(s.early_fusion.fixed) + "/" +
            std::to_string(s.early_fusion.broken));
        if (!(s.early_fusion.broken <= s.lexical.broken)) {
            outcome.fail("seed " + std::to_string(s.seed) +
                         ": early fusion introduces more errors than the lexical corrector");
        }
        if (!(s.early_fusion.fixed >= s.lexical.fixed)) {
            outcome.fail("seed " + std::to_string(s.seed) +
                         ": early fusion corrects fewer errors than the lexical corrector");
        }
        if (!s.identity_exact) {
            outcome.fail("seed " + std::to_string(s.seed) +
                         ": final != baseline - fixed + broken on some conversation");
        }
    }
    outcome.summary = "error bookkeeping on " + std::to_string(experiment.seeds.size()) +
                      " corpus seeds";
    return outcome;
}

CriterionOutcome criterion_6() {
    CriterionOutcome outcome;
    const Experiment& experiment = shared_experiment();
    for (const SeedOutcome& s : experiment.seeds) {
        outcome.details.push_back("seed " + std::to_string(s.seed) + ": eighth-split wder " +
                                  fmt(s.eighth_lsec_init_wder) + " (lexical init) vs " +
                                  fmt(s.eighth_random_wder) + " (random init)");
        if (!(s.eighth_lsec_init_wder < s.eighth_random_wder)) {
            outcome.fail("seed " + std::to_string(s.seed) +
                         ": lexical initialization does not beat random initialization");
        }
    }
    outcome.summary = "data efficiency on " + std::to_string(experiment.seeds.size()) +
                      " corpus seeds";
    return outcome;
}

// ---------------------------------------------------------------------------
// Criterion 7: two complete command-line pipeline runs are byte-identical.

int run_logged(const std::string& command, const fs::path& log) {
    const std::string full = command + " >> '" + log.string() + "' 2>&1";
    return std::system(full.c_str());
}

CriterionOutcome criterion_7(const std::string& cli) {
    CriterionOutcome outcome;
    if (cli.empty()) {
        outcome.fail("criterion 7 needs --cli <path to the binary>");
        outcome.summary = "no binary given";
        return outcome;
    }

    const fs::path base = fs::temp_directory_path() / "aglsec-acceptance-crit7";
    fs::remove_all(base);

    const auto pipeline = [&](const fs::path& dir) -> std::optional<std::string> {
        fs::create_directories(dir);
        const fs::path log = dir / "pipeline.log";
        const std::string bin = "'" + cli + "'";
        const std::string in = " cd '" + dir.string() + "' && ";
        const std::vector<std::string> steps = {
            bin + " simulate --out corpus --conversations 24 --seed 17",
            bin + " train --corpus corpus --model lexical --out lexical.ckpt"
                  " --epochs 3 --max-windows 60 --seed 9",
            bin + " train --corpus corpus --model early-fusion --init-from lexical.ckpt"
                  " --out fused.ckpt --epochs 3 --max-windows 60 --seed 9",
            bin + " correct --manifest manifest.json",
            bin + " score --reference corpus/conversations/conv-000022/reference.txt"
                  " --baseline corpus/conversations/conv-000022/baseline.txt"
                  " --corrected out/corrected.txt --out report.txt --key-values kv.txt",
        };
        const std::string manifest =
            "{\"posteriors\": \"corpus/conversations/conv-000022/posteriors.txt\",\n"
            " \"words\": \"corpus/conversations/conv-000022/words.ctm\",\n"
            " \"baseline\": \"corpus/conversations/conv-000022/baseline.txt\",\n"
            " \"model\": \"fused.ckpt\", \"output_dir\": \"out\"}\n";
        write_file_atomic(dir / "manifest.json", manifest);
        for (const std::string& step : steps) {
            if (run_logged(in + step, log) != 0) {
                return "step failed: " + step;
            }
        }
        return std::nullopt;
    };

    for (const char* run : {"a", "b"}) {
        if (auto failure = pipeline(base / run)) {
            outcome.fail(std::string("run ") + run + ": " + *failure);
            outcome.summary = "pipeline run failed";
            return outcome;
        }
    }

    const std::vector<std::string> artifacts = {"lexical.ckpt", "fused.ckpt",
                                                "out/corrected.txt", "report.txt", "kv.txt"};
    for (const std::string& artifact : artifacts) {
        const std::string a = read_file(base / "a" / artifact);
        const std::string b = read_file(base / "b" / artifact);
        if (a != b) {
            outcome.fail(artifact + " differs between the two runs");
        } else {
            outcome.details.push_back(artifact + ": " + std::to_string(a.size()) +
                                      " bytes, identical");
        }
    }
    if (outcome.passed) fs::remove_all(base);
    outcome.summary = std::to_string(artifacts.size()) + " pipeline artifacts compared";
    return outcome;
}

// ---------------------------------------------------------------------------
// Criterion 8: every module's stated invariants under the property harness.

std::vector<props::Outcome> run_all_properties() {
    std::vector<props::Outcome> outcomes;
    const auto add = [&](props::Outcome o) { outcomes.push_back(std::move(o)); };
    const std::size_t n = kPropertyCases;

    // --- diarization ---
    const auto random_pair = [](Rng& rng, std::size_t max_speakers, std::size_t max_frames) {
        const std::size_t speakers = 1 + rng.below(max_speakers);
        const std::size_t frames = 1 + rng.below(max_frames);
        SpeakerActivityLabels labels;
        labels.values = Tensor::zeros({frames, speakers});
        FramePosteriorMatrix posteriors;
        posteriors.values = Tensor::zeros({frames, speakers});
        for (std::size_t t = 0; t < frames; ++t) {
            for (std::size_t s = 0; s < speakers; ++s) {
                labels.values.at(t, s) = rng.bernoulli(0.5) ? 1.0 : 0.0;
                posteriors.values.at(t, s) = rng.uniform();
            }
        }
        return std::make_pair(labels, posteriors);
    };
    const auto permute_columns = [](const Tensor& m, const std::vector<std::size_t>& perm) {
        Tensor out = m;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c) out.at(r, perm[c]) = m.at(r, c);
        }
        return out;
    };
    const auto random_permutation = [](Rng& rng, std::size_t n_cols) {
        std::vector<std::size_t> perm(n_cols);
        for (std::size_t i = 0; i < n_cols; ++i) perm[i] = i;
        rng.shuffle(perm);
        return perm;
    };

    add(props::run("loss invariant under label and posterior column permutations", n, 8101,
                   [&](Rng& rng) {
                       auto [labels, posteriors] = random_pair(rng, 4, 16);
                       const double base = permutation_free_loss(labels, posteriors).loss;
                       const auto perm = random_permutation(rng, labels.values.cols());
                       SpeakerActivityLabels shuffled_labels;
                       shuffled_labels.values = permute_columns(labels.values, perm);
                       props::expect_close(permutation_free_loss(shuffled_labels, posteriors).loss,
                                           base, 1e-9, "label permutation changed the loss");
                       FramePosteriorMatrix shuffled_posteriors = posteriors;
                       shuffled_posteriors.values = permute_columns(posteriors.values, perm);
                       props::expect_close(
                           permutation_free_loss(labels, shuffled_posteriors).loss, base, 1e-9,
                           "posterior permutation changed the loss");
                   }));

    add(props::run("loss never exceeds the identity-permutation cross entropy", n, 8102,
                   [&](Rng& rng) {
                       auto [labels, posteriors] = random_pair(rng, 4, 16);
                       double identity = 0.0;
                       for (std::size_t t = 0; t < posteriors.num_frames(); ++t) {
                           for (std::size_t s = 0; s < posteriors.num_speakers(); ++s) {
                               double p = posteriors.values.at(t, s);
                               p = std::min(std::max(p, 1e-7), 1.0 - 1e-7);
                               const double y = labels.values.at(t, s);
                               identity += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
                           }
                       }
                       identity /= static_cast<double>(posteriors.num_frames() *
                                                       posteriors.num_speakers());
                       const double loss = permutation_free_loss(labels, posteriors).loss;
                       props::expect(loss <= identity + 1e-12,
                                     "permutation-free loss exceeds the identity BCE");
                   }));

    add(props::run("loss matches the permutation-enumeration oracle", n, 8103, [&](Rng& rng) {
        auto [labels, posteriors] = random_pair(rng, 4, 16);
        props::expect_close(permutation_free_loss(labels, posteriors).loss,
                            oracle::permutation_free_loss(labels, posteriors),
                            kLossOracleTolerance, "loss disagrees with the oracle");
    }));

    add(props::run("frame der invariant under hypothesis column permutation", n, 8104,
                   [&](Rng& rng) {
                       auto [reference, hyp_soft] = random_pair(rng, 4, 16);
                       // frame_der rejects a silent reference.
                       reference.values.at(0, 0) = 1.0;
                       SpeakerActivityLabels hypothesis = binarize(hyp_soft, 0.5);
                       const FrameDer base = frame_der(reference, hypothesis);
                       SpeakerActivityLabels shuffled;
                       shuffled.values = permute_columns(
                           hypothesis.values, random_permutation(rng, hypothesis.values.cols()));
                       const FrameDer permuted = frame_der(reference, shuffled);
                       props::expect(base.der == permuted.der &&
                                         base.misses == permuted.misses &&
                                         base.false_alarms == permuted.false_alarms &&
                                         base.confusions == permuted.confusions,
                                     "frame der changed under hypothesis permutation");
                   }));

    // --- scores ---
    add(props::run("median smoothing stays within each window's bounds", n, 8201, [&](Rng& rng) {
        const std::size_t frames = 1 + rng.below(24);
        const std::size_t speakers = 1 + rng.below(3);
        const int window = 1 + 2 * static_cast<int>(rng.below(5));
        FramePosteriorMatrix m;
        m.values = Tensor::zeros({frames, speakers});
        for (double& v : m.values.data) v = rng.uniform();
        const FramePosteriorMatrix smoothed = median_smooth(m, window);
        const long long half = window / 2;
        for (std::size_t s = 0; s < speakers; ++s) {
            for (std::size_t t = 0; t < frames; ++t) {
                double lo = 1.0, hi = 0.0;
                for (long long k = static_cast<long long>(t) - half;
                     k <= static_cast<long long>(t) + half; ++k) {
                    const long long clamped =
                        std::min(std::max(k, 0LL), static_cast<long long>(frames) - 1);
                    const double v = m.values.at(static_cast<std::size_t>(clamped), s);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                const double v = smoothed.values.at(t, s);
                props::expect(v >= lo && v <= hi, "smoothed value escapes its window bounds");
            }
        }
    }));

    add(props::run("median smoothing with window one is the identity", n, 8202, [&](Rng& rng) {
        const std::size_t frames = 1 + rng.below(24);
        FramePosteriorMatrix m;
        m.values = Tensor::zeros({frames, 1 + rng.below(3)});
        for (double& v : m.values.data) v = rng.uniform();
        const FramePosteriorMatrix smoothed = median_smooth(m, 1);
        props::expect(smoothed.values.data == m.values.data, "window-1 median changed data");
    }));

    add(props::run("normalized scores sum to one and keep the argmax", n, 8203, [&](Rng& rng) {
        const std::size_t speakers = 1 + rng.below(4);
        std::vector<double> raw;
        for (std::size_t s = 0; s < speakers; ++s) raw.push_back(rng.uniform(0.0, 1.5));
        if (rng.bernoulli(0.25)) {
            for (double& v : raw) v *= 1e-9;
        }
        const SpeakerScoreVector scores = normalize_scores(raw);
        double sum = 0.0;
        for (double v : scores.scores) sum += v;
        props::expect_close(sum, 1.0, kRowSumTolerance, "normalized scores do not sum to 1");
        if (!scores.low_confidence) {
            const auto raw_arg = std::max_element(raw.begin(), raw.end()) - raw.begin();
            const auto norm_arg =
                std::max_element(scores.scores.begin(), scores.scores.end()) -
                scores.scores.begin();
            props::expect(raw_arg == norm_arg, "normalization moved the argmax");
        } else {
            for (double v : scores.scores) {
                props::expect(v == 1.0 / static_cast<double>(speakers),
                              "low-confidence fallback is not uniform");
            }
        }
    }));

    add(props::run("score chain is one-hot for words interior to their turn", n, 8204,
                   [&](Rng& rng) {
                       SimulatorConfig config;
                       config.seed = rng.next_u64();
                       config.num_turns = 3 + static_cast<int>(rng.below(8));
                       config.min_words_per_turn = 3;
                       config.max_words_per_turn = 7;
                       config.overlap_probability = 0.0;
                       config.posterior_noise = 0.0;
                       const SimulatedConversation conversation = generate(config);
                       const auto scores =
                           extract_word_scores(conversation.posteriors,
                                               conversation.reference.words, 11);
                       const auto& starts = conversation.turn_starts;
                       for (std::size_t turn = 0; turn < starts.size(); ++turn) {
                           const std::size_t begin = starts[turn];
                           const std::size_t end = turn + 1 < starts.size()
                                                       ? starts[turn + 1]
                                                       : conversation.reference.words.size();
                           for (std::size_t w = begin + 1; w + 1 < end; ++w) {
                               const int speaker = conversation.reference.words[w].speaker;
                               for (std::size_t s = 0; s < scores[w].scores.size(); ++s) {
                                   const double want =
                                       s == static_cast<std::size_t>(speaker) ? 1.0 : 0.0;
                                   props::expect(scores[w].scores[s] == want,
                                                 "interior word score is not one-hot");
                               }
                           }
                       }
                   }));

    // --- neural kernel ---
    add(props::run("encoder gradients agree with finite differences", n, 8301, [&](Rng& rng) {
        EncoderConfig config;
        config.num_layers = 1 + rng.below(2);
        config.num_heads = 1 + rng.below(2);
        config.model_dim = config.num_heads * (2 + rng.below(2));
        config.ff_dim = 2 + rng.below(6);
        config.vocab_size = 8;
        config.max_positions = 12;
        const bool continuous = rng.bernoulli(0.5);
        const std::size_t length = 1 + rng.below(5);

        ParameterStore store;
        Rng init(rng.next_u64());
        init_encoder_params(store, config, "enc", init, continuous ? 3 : 0);
        std::vector<std::size_t> ids;
        Tensor input = Tensor::zeros({length, 3});
        for (std::size_t i = 0; i < length; ++i) {
            ids.push_back(rng.below(config.vocab_size));
            for (std::size_t c = 0; c < 3; ++c) input.at(i, c) = rng.uniform();
        }
        std::vector<int> targets;
        for (std::size_t i = 0; i < length; ++i) {
            targets.push_back(static_cast<int>(rng.below(config.model_dim)));
        }
        const auto loss = [&] {
            Graph g(store);
            Var out = continuous
                          ? encoder_forward_continuous(g, config, "enc", g.constant(input))
                          : encoder_forward(g, config, "enc", ids);
            Var l = g.masked_cross_entropy(out, targets,
                                           std::vector<unsigned char>(length, 1));
            g.backward(l);
            return g.value(l).data[0];
        };
        const auto& names = store.names();
        const std::string name = names[rng.below(names.size())];
        const std::size_t index = rng.below(store.param(name).data.size());
        const GradCheckResult result =
            finite_difference_check(store, loss, {{name, index}}, kGradStep);
        props::expect(result.passed, "gradient mismatch at " + name);
    }));

    add(props::run("softmax rows sum to one", n, 8302, [&](Rng& rng) {
        const std::size_t rows = 1 + rng.below(6);
        const std::size_t cols = 1 + rng.below(6);
        Tensor m = Tensor::zeros({rows, cols});
        for (double& v : m.data) v = rng.uniform(-8.0, 8.0);
        Graph g;
        const Tensor& out = g.value(g.softmax_rows(g.constant(m)));
        for (std::size_t r = 0; r < rows; ++r) {
            double sum = 0.0;
            for (std::size_t c = 0; c < cols; ++c) sum += out.at(r, c);
            props::expect_close(sum, 1.0, kRowSumTolerance, "softmax row sum");
        }
    }));

    add(props::run("attention rows sum to one", n, 8303, [&](Rng& rng) {
        EncoderConfig config;
        config.num_layers = 1 + rng.below(2);
        config.num_heads = 1 + rng.below(2);
        config.model_dim = config.num_heads * 2;
        config.ff_dim = 4;
        config.vocab_size = 8;
        config.max_positions = 12;
        ParameterStore store;
        Rng init(rng.next_u64());
        init_encoder_params(store, config, "enc", init);
        std::vector<std::size_t> ids;
        const std::size_t length = 1 + rng.below(6);
        for (std::size_t i = 0; i < length; ++i) ids.push_back(rng.below(config.vocab_size));
        Graph g(store);
        std::vector<Var> attention;
        encoder_forward(g, config, "enc", ids, std::nullopt, &attention);
        props::expect(!attention.empty(), "no attention matrices recorded");
        for (Var a : attention) {
            const Tensor& m = g.value(a);
            for (std::size_t r = 0; r < m.rows(); ++r) {
                double sum = 0.0;
                for (std::size_t c = 0; c < m.cols(); ++c) sum += m.at(r, c);
                props::expect_close(sum, 1.0, kRowSumTolerance, "attention row sum");
            }
        }
    }));

    add(props::run("encoder forward is deterministic", n, 8304, [&](Rng& rng) {
        EncoderConfig config;
        config.num_layers = 1;
        config.num_heads = 2;
        config.model_dim = 4;
        config.ff_dim = 6;
        config.vocab_size = 8;
        config.max_positions = 12;
        ParameterStore store;
        Rng init(rng.next_u64());
        init_encoder_params(store, config, "enc", init);
        std::vector<std::size_t> ids;
        const std::size_t length = 1 + rng.below(6);
        for (std::size_t i = 0; i < length; ++i) ids.push_back(rng.below(config.vocab_size));
        const auto run_once = [&] {
            Graph g(store);
            return g.value(encoder_forward(g, config, "enc", ids));
        };
        const Tensor first = run_once();
        const Tensor second = run_once();
        props::expect(first.data == second.data, "two identical forwards disagree");
    }));

    // --- corrector ---
    {
        CorrectorModel lexical = small_model(ModelKind::kLexical, 8401);
        const CorrectorModel fused_copy = init_from_lsec(lexical);
        add(props::run("copied early-fusion model equals its lexical source", n, 8401,
                       [&, lexical, fused_copy](Rng& rng) mutable {
                           const std::size_t count = 1 + rng.below(5);
                           const auto words = random_words(rng, count);
                           std::vector<int> labels;
                           for (std::size_t i = 0; i < count; ++i) {
                               labels.push_back(static_cast<int>(rng.below(2)));
                           }
                           const WordPosteriors a = lsec_forward(lexical, words, labels);
                           const WordPosteriors b = early_fusion_forward(
                               fused_copy, build_window_features(tokenize(words, fused_copy.vocab),
                                                                 one_hot_rows(labels)));
                           for (std::size_t i = 0; i < a.values.data.size(); ++i) {
                               props::expect_close(a.values.data[i], b.values.data[i],
                                                   kInitEquivalenceTolerance,
                                                   "copied model diverged");
                           }
                       }));
    }

    {
        CorrectorModel lexical = small_model(ModelKind::kLexical, 8402);
        CorrectorModel fused = small_model(ModelKind::kEarlyFusion, 8412);
        CorrectorModel fusion = small_model(ModelKind::kFusionNet, 8422);
        LateFusionModel late{lexical, fusion};
        add(props::run("posterior rows pair one to one with words and sum to one", n, 8402,
                       [&, lexical, fused, late](Rng& rng) {
                           const std::size_t count = 1 + rng.below(5);
                           const auto words = random_words(rng, count);
                           std::vector<int> labels;
                           for (std::size_t i = 0; i < count; ++i) {
                               labels.push_back(static_cast<int>(rng.below(2)));
                           }
                           const Tensor scores = random_score_rows(rng, count);
                           std::vector<WordPosteriors> outputs;
                           outputs.push_back(correct_window(lexical, words, labels, scores));
                           outputs.push_back(correct_window(fused, words, labels, scores));
                           outputs.push_back(late_fusion_correct(late, words, labels, scores));
                           for (const WordPosteriors& out : outputs) {
                               props::expect_eq(out.values.rows(), count,
                                                "posterior row count");
                               for (std::size_t r = 0; r < count; ++r) {
                                   props::expect_close(
                                       out.values.at(r, 0) + out.values.at(r, 1), 1.0,
                                       kRowSumTolerance, "posterior row sum");
                               }
                           }
                       }));
    }

    add(props::run("corrector gradients agree with finite differences", 1000, 8403,
                   [&](Rng& rng) {
                       const ModelKind kind = static_cast<ModelKind>(rng.below(3));
                       CorrectorModel model = small_model(kind, rng.next_u64());
                       const std::size_t count = 1 + rng.below(5);
                       const auto words = random_words(rng, count);
                       std::vector<int> baseline, reference;
                       for (std::size_t i = 0; i < count; ++i) {
                           baseline.push_back(static_cast<int>(rng.below(2)));
                           reference.push_back(static_cast<int>(rng.below(2)));
                       }
                       const Tensor scores = random_score_rows(rng, count);
                       const auto loss = [&] {
                           return corrector_window_loss(model, words, baseline, reference,
                                                        scores);
                       };
                       const auto& names = model.params.names();
                       const std::string name = names[rng.below(names.size())];
                       const std::size_t index =
                           rng.below(model.params.param(name).data.size());
                       const GradCheckResult result =
                           finite_difference_check(model.params, loss, {{name, index}},
                                                   kGradStep);
                       props::expect(result.passed,
                                     "gradient mismatch at " + model_kind_name(kind) + ":" +
                                         name);
                   }));

    {
        CorrectorModel model = small_model(ModelKind::kLexical, 8404);
        add(props::run("continuation-token logits carry exactly zero gradient", n, 8404,
                       [&, model](Rng& rng) mutable {
                           const std::size_t count = 1 + rng.below(4);
                           std::vector<std::string> words = random_words(rng, count);
                           words.push_back("absolutely");  // guarantees continuation tokens
                           std::vector<int> baseline, reference;
                           for (std::size_t i = 0; i < words.size(); ++i) {
                               baseline.push_back(static_cast<int>(rng.below(2)));
                               reference.push_back(static_cast<int>(rng.below(2)));
                           }
                           TokenizedWindow tokens = tokenize(words, model.vocab);
                           WindowFeatures features =
                               build_window_features(tokens, one_hot_rows(baseline));
                           std::vector<int> targets(tokens.num_tokens(), 0);
                           for (std::size_t w = 0; w < tokens.num_words(); ++w) {
                               targets[tokens.word_boundaries[w]] = reference[w];
                           }
                           Graph g(model.params);
                           Var emb = encoder_forward(g, model.backbone, "backbone",
                                                     features.tokens.sub_word_ids);
                           Var fused =
                               g.concat_cols(emb, g.constant(features.per_token_scores));
                           Var front = encoder_forward_continuous(g, model.frontend,
                                                                  "frontend", fused);
                           Var logits = g.add_row_bias(g.matmul(front, g.param("head.w")),
                                                       g.param("head.b"));
                           Var loss = g.masked_cross_entropy(logits, targets,
                                                             tokens.is_first_subword);
                           g.backward(loss);
                           const Tensor& dlogits = g.grad(logits);
                           bool saw_continuation = false;
                           for (std::size_t t = 0; t < tokens.num_tokens(); ++t) {
                               if (tokens.is_first_subword[t]) continue;
                               saw_continuation = true;
                               for (std::size_t c = 0; c < dlogits.cols(); ++c) {
                                   props::expect(dlogits.at(t, c) == 0.0,
                                                 "continuation logit has nonzero gradient");
                               }
                           }
                           props::expect(saw_continuation, "case produced no continuation token");
                       }));
    }

    // --- windowing ---
    add(props::run("corrected labels come from the deciding window's speaker pair", n, 8501,
                   [&](Rng& rng) {
                       const std::size_t num_words = 5 + rng.below(56);
                       const int roster = 2 + static_cast<int>(rng.below(3));
                       LabeledTranscript transcript;
                       transcript.id = "prop";
                       int speaker = 0;
                       for (std::size_t w = 0; w < num_words; ++w) {
                           if (rng.bernoulli(0.3)) speaker = static_cast<int>(rng.below(roster));
                           transcript.words.push_back(
                               {"w" + std::to_string(rng.below(9)),
                                static_cast<long long>(3 * w),
                                static_cast<long long>(3 * w + 3), speaker});
                       }
                       std::vector<SpeakerScoreVector> scores(num_words);
                       for (auto& row : scores) {
                           std::vector<double> raw;
                           for (int s = 0; s < roster; ++s) raw.push_back(rng.uniform());
                           row = normalize_scores(raw);
                       }
                       WindowingConfig config;
                       config.window_size = std::min<std::size_t>(2 + rng.below(12), num_words);
                       config.stride = 1 + rng.below(config.window_size);

                       Rng adversary(rng.next_u64());
                       const WindowCorrector hostile =
                           [&adversary](const std::vector<std::string>& words,
                                        const std::vector<int>&, const Tensor&) {
                               WordPosteriors out;
                               out.values = Tensor::zeros({words.size(), 2});
                               for (std::size_t i = 0; i < words.size(); ++i) {
                                   const double p = adversary.uniform();
                                   out.values.at(i, 0) = p;
                                   out.values.at(i, 1) = 1.0 - p;
                               }
                               return out;
                           };
                       const CorrectedTranscript corrected =
                           correct_transcript(transcript, scores, hostile, config);

                       const auto spans = make_windows(num_words, config.window_size,
                                                       config.stride);
                       for (std::size_t w = 0; w < num_words; ++w) {
                           const int origin = corrected.provenance[w];
                           if (origin == kBypassedProvenance) {
                               props::expect(corrected.words[w] == transcript.words[w],
                                             "bypassed word was altered");
                               continue;
                           }
                           const auto& span = spans[static_cast<std::size_t>(origin)];
                           props::expect(span.first <= w && w < span.second,
                                         "deciding window does not cover the word");
                           const CorrectionWindow window = classify_window(
                               transcript.words, span.first, span.second);
                           props::expect(window.eligible, "deciding window is not eligible");
                           const int label = corrected.words[w].speaker;
                           props::expect(std::find(window.local_speakers.begin(),
                                                   window.local_speakers.end(),
                                                   label) != window.local_speakers.end(),
                                         "label outside the window's speakers");
                       }
                   }));

    add(props::run("merged labels are independent of prediction order", n, 8502, [&](Rng& rng) {
        const std::size_t num_words = 4 + rng.below(40);
        std::vector<WindowPrediction> predictions;
        const std::size_t count = 1 + rng.below(6);
        for (std::size_t k = 0; k < count; ++k) {
            WindowPrediction p;
            p.window_index = k;
            p.begin = rng.below(num_words);
            p.end = p.begin + 1 + rng.below(num_words - p.begin);
            for (std::size_t w = p.begin; w < p.end; ++w) {
                p.labels.push_back(static_cast<int>(rng.below(3)));
            }
            predictions.push_back(std::move(p));
        }
        const MergedLabels in_order = merge_predictions(num_words, predictions);
        std::vector<WindowPrediction> shuffled = predictions;
        rng.shuffle(shuffled);
        const MergedLabels after = merge_predictions(num_words, shuffled);
        props::expect(in_order.labels == after.labels &&
                          in_order.provenance == after.provenance,
                      "merge outcome depends on prediction order");
    }));

    add(props::run("an oversized window behaves like one whole-transcript window", n, 8503,
                   [&](Rng& rng) {
                       const std::size_t num_words = 2 + rng.below(12);
                       LabeledTranscript transcript;
                       transcript.id = "prop";
                       for (std::size_t w = 0; w < num_words; ++w) {
                           transcript.words.push_back({"w" + std::to_string(rng.below(5)),
                                                       static_cast<long long>(3 * w),
                                                       static_cast<long long>(3 * w + 3),
                                                       static_cast<int>(rng.below(2))});
                       }
                       std::vector<SpeakerScoreVector> scores(num_words);
                       for (auto& row : scores) {
                           const double p = rng.uniform();
                           row.scores = {p, 1.0 - p};
                       }
                       // Pure function of the inputs, so both paths see the
                       // same posteriors.
                       const WindowCorrector flip = [](const std::vector<std::string>& words,
                                                       const std::vector<int>& labels,
                                                       const Tensor&) {
                           WordPosteriors out;
                           out.values = Tensor::zeros({words.size(), 2});
                           for (std::size_t i = 0; i < words.size(); ++i) {
                               const bool to_second =
                                   (words[i].size() + static_cast<std::size_t>(labels[i])) % 2 ==
                                   0;
                               out.values.at(i, to_second ? 1 : 0) = 1.0;
                           }
                           return out;
                       };
                       WindowingConfig oversized;
                       oversized.window_size = num_words + 5 + rng.below(20);
                       oversized.stride = 1 + rng.below(oversized.window_size);
                       const CorrectedTranscript a =
                           correct_transcript(transcript, scores, flip, oversized);
                       WindowingConfig exact;
                       exact.window_size = num_words;
                       exact.stride = num_words;
                       const CorrectedTranscript b =
                           correct_transcript(transcript, scores, flip, exact);
                       props::expect(a.words == b.words && a.provenance == b.provenance,
                                     "oversized window differs from the exact window");
                   }));

    // --- scoring ---
    add(props::run("alignment cost matches the enumeration oracle", n, 8601, [&](Rng& rng) {
        const std::vector<std::string> vocab = {"a", "b", "c"};
        const auto draw = [&](std::size_t max_len) {
            std::vector<std::string> words;
            const std::size_t len = rng.below(max_len + 1);
            for (std::size_t i = 0; i < len; ++i) words.push_back(vocab[rng.below(3)]);
            return words;
        };
        std::vector<std::string> ref = draw(6);
        std::vector<std::string> hyp = draw(6);
        if (ref.empty() && hyp.empty()) ref.push_back("a");
        LabeledTranscript ref_t, hyp_t;
        for (const auto& w : ref) ref_t.words.push_back({w, 0, 0, 0});
        for (const auto& w : hyp) hyp_t.words.push_back({w, 0, 0, 0});
        const AlignmentResult result = align_words(ref_t, hyp_t);
        props::expect_eq(static_cast<int>(result.edit_cost()),
                         oracle::exhaustive_alignment_cost(ref, hyp),
                         "alignment cost disagrees with the oracle");
    }));

    const auto random_transcript_pair = [](Rng& rng) {
        const std::size_t num_words = 1 + rng.below(12);
        LabeledTranscript reference, hypothesis;
        for (std::size_t w = 0; w < num_words; ++w) {
            const std::string text = "w" + std::to_string(rng.below(4));
            reference.words.push_back({text, static_cast<long long>(3 * w),
                                       static_cast<long long>(3 * w + 3),
                                       static_cast<int>(rng.below(3))});
            hypothesis.words.push_back({text, static_cast<long long>(3 * w),
                                        static_cast<long long>(3 * w + 3),
                                        static_cast<int>(rng.below(3))});
        }
        return std::make_pair(reference, hypothesis);
    };

    add(props::run("wder is invariant under hypothesis speaker renaming", n, 8602,
                   [&](Rng& rng) {
                       auto [reference, hypothesis] = random_transcript_pair(rng);
                       const AlignmentResult alignment = align_words(reference, hypothesis);
                       const auto column = [](const LabeledTranscript& t) {
                           std::vector<int> ids;
                           for (const WordRecord& w : t.words) ids.push_back(w.speaker);
                           return ids;
                       };
                       const WderBreakdown base =
                           wder(alignment, column(reference), column(hypothesis));
                       std::vector<std::size_t> mapping = {0, 1, 2};
                       rng.shuffle(mapping);
                       std::vector<int> renamed = column(hypothesis);
                       for (int& id : renamed) {
                           id = static_cast<int>(10 + mapping[static_cast<std::size_t>(id)]);
                       }
                       const WderBreakdown after = wder(alignment, column(reference), renamed);
                       props::expect(base.wder == after.wder && base.c_is == after.c_is &&
                                         base.s_is == after.s_is,
                                     "renaming hypothesis speakers changed wder");
                   }));

    add(props::run("error bookkeeping identity holds exactly", n, 8603, [&](Rng& rng) {
        const std::size_t num_words = 1 + rng.below(20);
        LabeledTranscript reference, baseline, corrected;
        for (std::size_t w = 0; w < num_words; ++w) {
            const std::string text = "w" + std::to_string(rng.below(5));
            const auto record = [&](int speaker) {
                return WordRecord{text, static_cast<long long>(3 * w),
                                  static_cast<long long>(3 * w + 3), speaker};
            };
            reference.words.push_back(record(static_cast<int>(rng.below(3))));
            baseline.words.push_back(record(static_cast<int>(rng.below(3))));
            corrected.words.push_back(record(static_cast<int>(rng.below(3))));
        }
        const ErrorAccounting accounting = error_accounting(baseline, corrected, reference);
        props::expect_eq(accounting.final_errors,
                         accounting.baseline_errors - accounting.fixed + accounting.broken,
                         "bookkeeping identity");
    }));

    add(props::run("a transcript scored against itself has zero wder", n, 8604, [&](Rng& rng) {
        auto [reference, unused] = random_transcript_pair(rng);
        (void)unused;
        const AlignmentResult alignment = align_words(reference, reference);
        std::vector<int> ids;
        for (const WordRecord& w : reference.words) ids.push_back(w.speaker);
        const WderBreakdown breakdown = wder(alignment, ids, ids);
        props::expect(breakdown.wder == 0.0 && breakdown.c_is == 0 && breakdown.s_is == 0,
                      "self-comparison produced errors");
    }));

    // --- simulator ---
    add(props::run("noiseless posteriors binarize back to the activity labels", n, 8701,
                   [&](Rng& rng) {
                       SimulatorConfig config;
                       config.seed = rng.next_u64();
                       config.num_turns = 2 + static_cast<int>(rng.below(8));
                       config.posterior_noise = 0.0;
                       config.overlap_probability = rng.bernoulli(0.5) ? 0.2 : 0.0;
                       const SimulatedConversation conversation = generate(config);
                       const FrameDer der =
                           frame_der(conversation.activity,
                                     binarize(conversation.posteriors, 0.5));
                       props::expect(der.der == 0.0 && der.misses == 0 &&
                                         der.false_alarms == 0 && der.confusions == 0,
                                     "noiseless round trip left frame errors");
                   }));

    add(props::run("posterior noise strictly raises the diarization loss", n, 8702,
                   [&](Rng& rng) {
                       SimulatorConfig clean;
                       clean.seed = rng.next_u64();
                       clean.num_turns = 6;
                       clean.posterior_noise = 0.0;
                       SimulatorConfig noisy = clean;
                       noisy.posterior_noise = 1.0 + rng.uniform(0.0, 2.0);
                       const SimulatedConversation a = generate(clean);
                       const SimulatedConversation b = generate(noisy);
                       const double clean_loss =
                           permutation_free_loss(a.activity, a.posteriors).loss;
                       const double noisy_loss =
                           permutation_free_loss(b.activity, b.posteriors).loss;
                       props::expect(clean_loss < noisy_loss,
                                     "noise did not raise the permutation-free loss");
                   }));

    add(props::run("injected label errors track the configured rates", n, 8703, [&](Rng& rng) {
        SimulatorConfig config;
        config.seed = rng.next_u64();
        config.num_turns = 2000;
        config.min_words_per_turn = 4;
        config.max_words_per_turn = 8;
        config.overlap_probability = 0.0;
        config.posterior_noise = 0.0;
        config.error_rate_at_boundaries = rng.uniform(0.35, 0.5);
        config.error_rate_interior = rng.uniform(0.005, 0.02);
        const SimulatedConversation conversation = generate(config);
        const std::size_t num_words = conversation.reference.words.size();
        const auto& starts = conversation.turn_starts;
        // Words more than two positions from every turn boundary (the
        // nearest boundary is always one of the turn's own edges).
        std::size_t interior = 0;
        for (std::size_t t = 0; t < starts.size(); ++t) {
            const std::size_t begin = starts[t];
            const std::size_t end = t + 1 < starts.size() ? starts[t + 1] : num_words;
            for (std::size_t w = begin; w < end; ++w) {
                const std::size_t left = t > 0 ? w - begin : num_words;
                const std::size_t right = t + 1 < starts.size() ? end - w : num_words;
                if (std::min(left, right) > 2) ++interior;
            }
        }
        const double expected =
            static_cast<double>(starts.size() - 1) * config.error_rate_at_boundaries * 1.5 +
            static_cast<double>(interior) * config.error_rate_interior;
        const double realized = static_cast<double>(conversation.injected_errors.size());
        props::expect(std::abs(realized - expected) <= 0.2 * expected,
                      "realized " + fmt(realized, 0) + " vs expected " + fmt(expected, 1));
    }));

    // --- formats ---
    add(props::run("transcript serialization round-trips", n, 8801, [&](Rng& rng) {
        LabeledTranscript t;
        t.id = "t";
        const std::size_t count = 1 + rng.below(20);
        const auto words = random_words(rng, count);
        for (std::size_t w = 0; w < count; ++w) {
            t.words.push_back({words[w], 0, 0, static_cast<int>(rng.below(4))});
        }
        props::expect(parse_transcript(serialize_transcript(t), "t") == t,
                      "transcript round trip changed content");
    }));

    add(props::run("ctm serialization round-trips every frame span", n, 8802, [&](Rng& rng) {
        const int frame_rate = 1 + static_cast<int>(rng.below(100));
        std::vector<WordRecord> words;
        long long frame = static_cast<long long>(rng.below(100));
        const std::size_t count = 1 + rng.below(20);
        const auto texts = random_words(rng, count);
        for (std::size_t w = 0; w < count; ++w) {
            WordRecord record;
            record.text = texts[w];
            record.start_frame = frame;
            record.end_frame = frame + 1 + static_cast<long long>(rng.below(9));
            frame = record.end_frame + static_cast<long long>(rng.below(3));
            words.push_back(std::move(record));
        }
        const auto parsed = parse_ctm(serialize_ctm(words, "rec", frame_rate), frame_rate);
        props::expect_eq(parsed.size(), words.size(), "ctm round trip word count");
        for (std::size_t w = 0; w < count; ++w) {
            props::expect(parsed[w].text == words[w].text &&
                              parsed[w].start_frame == words[w].start_frame &&
                              parsed[w].end_frame == words[w].end_frame,
                          "ctm round trip changed a word span");
        }
    }));

    add(props::run("rttm serialization round-trips", n, 8803, [&](Rng& rng) {
        std::vector<RttmSegment> segments;
        const std::size_t count = rng.below(10);
        for (std::size_t i = 0; i < count; ++i) {
            segments.push_back({"rec", rng.uniform(0.0, 500.0), rng.uniform(0.0, 8.0),
                                static_cast<int>(rng.below(6))});
        }
        props::expect(parse_rttm(serialize_rttm(segments)) == segments,
                      "rttm round trip changed content");
    }));

    add(props::run("posterior matrices round-trip bit for bit", n, 8804, [&](Rng& rng) {
        FramePosteriorMatrix m;
        m.frame_duration = 1.0 / static_cast<double>(1 + rng.below(100));
        m.values = Tensor::zeros({1 + rng.below(12), 1 + rng.below(4)});
        for (double& v : m.values.data) v = rng.uniform();
        const FramePosteriorMatrix back = parse_posteriors(serialize_posteriors(m));
        props::expect(back.frame_duration == m.frame_duration &&
                          back.values.shape == m.values.shape &&
                          back.values.data == m.values.data,
                      "posterior round trip changed content");
    }));

    add(props::run("score tables round-trip bit for bit", n, 8805, [&](Rng& rng) {
        std::vector<SpeakerScoreVector> rows;
        const std::size_t count = rng.below(12);
        const std::size_t speakers = 1 + rng.below(4);
        for (std::size_t i = 0; i < count; ++i) {
            SpeakerScoreVector row;
            for (std::size_t s = 0; s < speakers; ++s) row.scores.push_back(rng.uniform());
            row.low_confidence = rng.bernoulli(0.3);
            rows.push_back(std::move(row));
        }
        const auto back = parse_scores(serialize_scores(rows));
        props::expect_eq(back.size(), rows.size(), "score round trip row count");
        for (std::size_t i = 0; i < count; ++i) {
            props::expect(back[i].scores == rows[i].scores &&
                              back[i].low_confidence == rows[i].low_confidence,
                          "score round trip changed content");
        }
    }));

    add(props::run("simulated artifacts serialize identically across reruns", n, 8806,
                   [&](Rng& rng) {
                       SimulatorConfig config;
                       config.seed = rng.next_u64();
                       config.num_turns = 2 + static_cast<int>(rng.below(5));
                       const auto render = [&] {
                           const SimulatedConversation c = generate(config);
                           std::string all = serialize_transcript(c.reference);
                           all += serialize_transcript(c.baseline);
                           all += serialize_ctm(c.reference.words, c.reference.id,
                                                config.frame_rate);
                           all += serialize_rttm(
                               segments_from_words(c.reference, config.frame_rate));
                           all += serialize_posteriors(c.posteriors);
                           all += serialize_scores(extract_word_scores(
                               c.posteriors, c.reference.words, 11));
                           return all;
                       };
                       props::expect(render() == render(),
                                     "re-simulating the same seed changed an artifact");
                   }));

    return outcomes;
}

CriterionOutcome criterion_8() {
    CriterionOutcome outcome;
    const auto start = std::chrono::steady_clock::now();
    const std::vector<props::Outcome> results = run_all_properties();
    std::size_t passed = 0;
    for (const props::Outcome& result : results) {
        if (result.passed) {
            ++passed;
            outcome.details.push_back(result.name + ": " + std::to_string(result.cases) +
                                      " cases");
        } else {
            outcome.fail(result.name + ": " + result.failure);
        }
    }
    outcome.summary = std::to_string(passed) + "/" + std::to_string(results.size()) +
                      " properties at >= " + std::to_string(kPropertyCases) + " cases, " +
                      fmt(seconds_since(start), 1) + "s";
    return outcome;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<int> requested;
    std::string cli;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--cli" && i + 1 < argc) {
            cli = argv[++i];
        } else if (arg.size() == 1 && arg[0] >= '1' && arg[0] <= '8') {
            requested.push_back(arg[0] - '0');
        } else {
            std::cerr << "usage: acceptance [1-8]... [--cli PATH]\n";
            return 2;
        }
    }
    if (requested.empty()) requested = {1, 2, 3, 4, 5, 6, 7, 8};
    std::sort(requested.begin(), requested.end());
    requested.erase(std::unique(requested.begin(), requested.end()), requested.end());

    bool all_passed = true;
    for (int criterion : requested) {
        CriterionOutcome outcome;
        switch (criterion) {
            case 1: outcome = criterion_1(); break;
            case 2: outcome = criterion_2(); break;
            case 3: outcome = criterion_3(); break;
            case 4: outcome = criterion_4(); break;
            case 5: outcome = criterion_5(); break;
            case 6: outcome = criterion_6(); break;
            case 7: outcome = criterion_7(cli); break;
            case 8: outcome = criterion_8(); break;
        }
        std::cout << "criterion " << criterion << ": " << pass_fail(outcome.passed) << "  "
                  << outcome.summary << "\n";
        for (const std::string& detail : outcome.details) {
            std::cout << "    " << detail << "\n";
        }
        all_passed = all_passed && outcome.passed;
    }
    return all_passed ? 0 : 1;
}
