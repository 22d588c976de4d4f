// Command-line front end for the speaker error correction pipeline:
// simulate conversation corpora, extract word-level speaker scores, train
// correction models, correct transcripts, and score the results.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "aglsec/corrector.hpp"
#include "aglsec/error.hpp"
#include "aglsec/formats.hpp"
#include "aglsec/io.hpp"
#include "aglsec/rng.hpp"
#include "aglsec/scores.hpp"
#include "aglsec/scoring.hpp"
#include "aglsec/simulator.hpp"
#include "aglsec/tokenizer.hpp"
#include "aglsec/windowing.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aglsec;

namespace {

json parse_json_file(const fs::path& path) {
    const std::string text = read_file(path);
    json parsed = json::parse(text, nullptr, false);
    if (parsed.is_discarded()) {
        throw FormatError("'" + path.string() + "' is not valid JSON");
    }
    return parsed;
}

template <typename T>
T json_get(const json& j, const std::string& key, const fs::path& file, const T& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError("'" + file.string() + "': field '" + key + "': " + e.what());
    }
}

template <typename T>
T json_require(const json& j, const std::string& key, const fs::path& file) {
    if (!j.contains(key)) {
        throw FormatError("'" + file.string() + "' is missing required field '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError("'" + file.string() + "': field '" + key + "': " + e.what());
    }
}

fs::path existing_path(const std::string& raw, const char* what) {
    fs::path path(raw);
    if (!fs::exists(path)) {
        throw FormatError(std::string(what) + " '" + raw + "' does not exist");
    }
    return path;
}

int frame_rate_of(const FramePosteriorMatrix& posteriors) {
    return static_cast<int>(std::llround(1.0 / posteriors.frame_duration));
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;           // -1: take the config file's value
    std::int64_t conversations = -1;  // likewise
};

struct CorpusRecipe {
    SimulatorConfig simulator;
    std::size_t num_conversations = 100;
    CorpusOptions options;
};

CorpusRecipe load_recipe(const SimulateArgs& args) {
    CorpusRecipe recipe;
    if (!args.config_path.empty()) {
        const fs::path file = existing_path(args.config_path, "config file");
        const json j = parse_json_file(file);
        SimulatorConfig& c = recipe.simulator;
        c.seed = json_get<std::uint64_t>(j, "seed", file, c.seed);
        c.num_speakers = json_get<int>(j, "num_speakers", file, c.num_speakers);
        c.num_turns = json_get<int>(j, "num_turns", file, c.num_turns);
        c.min_words_per_turn = json_get<int>(j, "min_words_per_turn", file, c.min_words_per_turn);
        c.max_words_per_turn = json_get<int>(j, "max_words_per_turn", file, c.max_words_per_turn);
        c.overlap_probability =
            json_get<double>(j, "overlap_probability", file, c.overlap_probability);
        c.posterior_noise = json_get<double>(j, "posterior_noise", file, c.posterior_noise);
        c.error_rate_at_boundaries =
            json_get<double>(j, "error_rate_at_boundaries", file, c.error_rate_at_boundaries);
        c.error_rate_interior =
            json_get<double>(j, "error_rate_interior", file, c.error_rate_interior);
        c.frame_rate = json_get<int>(j, "frame_rate", file, c.frame_rate);
        c.word_duration_sec = json_get<double>(j, "word_duration_sec", file, c.word_duration_sec);
        recipe.num_conversations = json_get<std::size_t>(j, "num_conversations", file,
                                                         recipe.num_conversations);
        recipe.options.median_frames =
            json_get<int>(j, "median_frames", file, recipe.options.median_frames);
        if (j.contains("windowing")) {
            const json w = json_require<json>(j, "windowing", file);
            recipe.options.windowing.window_size = json_get<std::size_t>(
                w, "window_size", file, recipe.options.windowing.window_size);
            recipe.options.windowing.stride =
                json_get<std::size_t>(w, "stride", file, recipe.options.windowing.stride);
        }
    }
    if (args.seed >= 0) recipe.simulator.seed = static_cast<std::uint64_t>(args.seed);
    if (args.conversations >= 0) {
        recipe.num_conversations = static_cast<std::size_t>(args.conversations);
    }
    return recipe;
}

json recipe_to_json(const CorpusRecipe& recipe) {
    const SimulatorConfig& c = recipe.simulator;
    json j;
    j["seed"] = c.seed;
    j["num_speakers"] = c.num_speakers;
    j["num_turns"] = c.num_turns;
    j["min_words_per_turn"] = c.min_words_per_turn;
    j["max_words_per_turn"] = c.max_words_per_turn;
    j["overlap_probability"] = c.overlap_probability;
    j["posterior_noise"] = c.posterior_noise;
    j["error_rate_at_boundaries"] = c.error_rate_at_boundaries;
    j["error_rate_interior"] = c.error_rate_interior;
    j["frame_rate"] = c.frame_rate;
    j["word_duration_sec"] = c.word_duration_sec;
    j["num_conversations"] = recipe.num_conversations;
    return j;
}

int cmd_simulate(const SimulateArgs& args) {
    const CorpusRecipe recipe = load_recipe(args);
    const SimulatedCorpus corpus =
        build_corpus(recipe.simulator, recipe.num_conversations, recipe.options);

    const fs::path out(args.out_dir);
    if (fs::exists(out) && (!fs::is_directory(out) || !fs::is_empty(out))) {
        throw std::invalid_argument("output directory '" + out.string() +
                                    "' already exists and is not empty");
    }

    fs::path staging = out;
    staging += ".partial";
    fs::remove_all(staging);
    try {
        fs::create_directories(staging / "conversations");
        const auto split_ids = [&](const CorpusSplit& split) {
            json ids = json::array();
            for (std::size_t index : split.conversation_indices) {
                ids.push_back(corpus.conversations[index].reference.id);
            }
            return ids;
        };
        json descriptor;
        descriptor["frame_rate"] = recipe.simulator.frame_rate;
        descriptor["median_frames"] = recipe.options.median_frames;
        descriptor["windowing"] = {{"window_size", recipe.options.windowing.window_size},
                                   {"stride", recipe.options.windowing.stride}};
        descriptor["simulator"] = recipe_to_json(recipe);
        descriptor["splits"] = {{"train", split_ids(corpus.train)},
                                {"validation", split_ids(corpus.validation)},
                                {"test", split_ids(corpus.test)}};
        write_file_atomic(staging / "corpus.json", descriptor.dump(2) + "\n");

        for (const SimulatedConversation& conversation : corpus.conversations) {
            const fs::path dir = staging / "conversations" / conversation.reference.id;
            fs::create_directories(dir);
            write_file_atomic(dir / "reference.txt",
                              serialize_transcript(conversation.reference));
            write_file_atomic(dir / "baseline.txt", serialize_transcript(conversation.baseline));
            write_file_atomic(dir / "words.ctm",
                              serialize_ctm(conversation.reference.words,
                                            conversation.reference.id,
                                            recipe.simulator.frame_rate));
            write_file_atomic(dir / "posteriors.txt",
                              serialize_posteriors(conversation.posteriors));
        }

        if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
        if (fs::exists(out)) fs::remove(out);
        fs::rename(staging, out);
    } catch (...) {
        std::error_code ignored;
        fs::remove_all(staging, ignored);
        throw;
    }

    std::cout << "wrote " << corpus.conversations.size() << " conversations to " << out.string()
              << " (train " << corpus.train.conversation_indices.size() << ", validation "
              << corpus.validation.conversation_indices.size() << ", test "
              << corpus.test.conversation_indices.size() << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// extract-scores

struct ExtractArgs {
    std::string posteriors_path;
    std::string ctm_path;
    std::string out_path;
    int median_frames = 11;
};

int cmd_extract_scores(const ExtractArgs& args) {
    const FramePosteriorMatrix posteriors =
        parse_posteriors(read_file(existing_path(args.posteriors_path, "posteriors file")));
    const int frame_rate = frame_rate_of(posteriors);
    const std::vector<WordRecord> words =
        parse_ctm(read_file(existing_path(args.ctm_path, "ctm file")), frame_rate);

    const long long num_frames = static_cast<long long>(posteriors.num_frames());
    for (std::size_t i = 0; i < words.size(); ++i) {
        const WordRecord& w = words[i];
        if (w.start_frame < 0 || w.end_frame > num_frames) {
            throw FormatError("ctm line " + std::to_string(i + 1) + ": word '" + w.text +
                              "' spans frames [" + std::to_string(w.start_frame) + ", " +
                              std::to_string(w.end_frame) + ") but the posterior matrix has " +
                              std::to_string(num_frames) + " frames");
        }
    }

    const std::vector<SpeakerScoreVector> scores =
        extract_word_scores(posteriors, words, args.median_frames);
    write_file_atomic(args.out_path, serialize_scores(scores));
    std::cout << "wrote " << scores.size() << " score rows to " << args.out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string corpus_dir;
    std::string model_kind;
    std::string out_path;
    std::string init_from;
    std::string lexical_path;
    std::size_t epochs = 20;
    std::size_t batch_size = 8;
    double learning_rate = 1e-4;
    std::uint64_t seed = 1;
    std::size_t max_windows = 0;
    std::size_t vocab_ids = 512;
    std::string split = "train";
};

struct LoadedConversation {
    LabeledTranscript reference;
    LabeledTranscript baseline;  // carries CTM timings
    FramePosteriorMatrix posteriors;
};

struct CorpusDescriptor {
    fs::path root;
    int frame_rate = 10;
    int median_frames = 11;
    WindowingConfig windowing;
    std::vector<std::string> train_ids, validation_ids, test_ids;
};

CorpusDescriptor load_descriptor(const fs::path& corpus_dir) {
    CorpusDescriptor d;
    d.root = corpus_dir;
    const fs::path file = existing_path((corpus_dir / "corpus.json").string(), "corpus descriptor");
    const json j = parse_json_file(file);
    d.frame_rate = json_require<int>(j, "frame_rate", file);
    d.median_frames = json_get<int>(j, "median_frames", file, d.median_frames);
    if (j.contains("windowing")) {
        const json w = json_require<json>(j, "windowing", file);
        d.windowing.window_size =
            json_get<std::size_t>(w, "window_size", file, d.windowing.window_size);
        d.windowing.stride = json_get<std::size_t>(w, "stride", file, d.windowing.stride);
    }
    const json splits = json_require<json>(j, "splits", file);
    d.train_ids = json_require<std::vector<std::string>>(splits, "train", file);
    d.validation_ids = json_require<std::vector<std::string>>(splits, "validation", file);
    d.test_ids = json_require<std::vector<std::string>>(splits, "test", file);
    return d;
}

LoadedConversation load_conversation(const CorpusDescriptor& d, const std::string& id) {
    const fs::path dir = d.root / "conversations" / id;
    LoadedConversation conversation;
    conversation.reference =
        parse_transcript(read_file(existing_path((dir / "reference.txt").string(),
                                                 "reference transcript")),
                         id);
    const LabeledTranscript baseline_labels =
        parse_transcript(read_file(existing_path((dir / "baseline.txt").string(),
                                                 "baseline transcript")),
                         id);
    const std::vector<WordRecord> timed = parse_ctm(
        read_file(existing_path((dir / "words.ctm").string(), "word timing file")),
        d.frame_rate);
    conversation.baseline = join_words_with_labels(timed, baseline_labels);
    if (!same_word_sequence(conversation.reference, conversation.baseline)) {
        throw FormatError("conversation '" + id +
                          "': reference and baseline word sequences differ");
    }
    conversation.posteriors = parse_posteriors(
        read_file(existing_path((dir / "posteriors.txt").string(), "posteriors file")));
    return conversation;
}

const std::vector<std::string>& split_ids(const CorpusDescriptor& d, const std::string& name) {
    if (name == "train") return d.train_ids;
    if (name == "validation") return d.validation_ids;
    if (name == "test") return d.test_ids;
    throw std::invalid_argument("unknown split '" + name + "'");
}

std::vector<TrainingWindow> harvest_split(const CorpusDescriptor& d, const std::string& split,
                                          std::size_t max_windows) {
    std::vector<TrainingWindow> windows;
    for (const std::string& id : split_ids(d, split)) {
        if (max_windows != 0 && windows.size() >= max_windows) break;
        const LoadedConversation conversation = load_conversation(d, id);
        const std::vector<SpeakerScoreVector> scores = extract_word_scores(
            conversation.posteriors, conversation.baseline.words, d.median_frames);
        std::vector<int> reference_labels;
        reference_labels.reserve(conversation.reference.words.size());
        for (const WordRecord& w : conversation.reference.words) {
            reference_labels.push_back(w.speaker);
        }
        TrainingHarvest harvest = harvest_training_windows(conversation.baseline.words,
                                                           reference_labels, scores, d.windowing);
        for (TrainingWindow& window : harvest.windows) {
            windows.push_back(std::move(window));
        }
    }
    if (max_windows != 0 && windows.size() > max_windows) windows.resize(max_windows);
    return windows;
}

ModelKind parse_model_kind(const std::string& name) {
    for (ModelKind kind :
         {ModelKind::kLexical, ModelKind::kEarlyFusion, ModelKind::kFusionNet}) {
        if (name == model_kind_name(kind)) return kind;
    }
    throw std::invalid_argument("unknown model kind '" + name +
                                "' (expected lexical, early-fusion, or fusion-net)");
}

int cmd_train(const TrainArgs& args) {
    const ModelKind kind = parse_model_kind(args.model_kind);
    if (kind == ModelKind::kFusionNet && args.lexical_path.empty()) {
        throw std::invalid_argument("--model fusion-net requires --lexical CHECKPOINT");
    }
    const CorpusDescriptor descriptor = load_descriptor(existing_path(args.corpus_dir, "corpus"));
    std::vector<TrainingWindow> windows =
        harvest_split(descriptor, args.split, args.max_windows);
    if (windows.empty()) {
        throw FormatError("split '" + args.split + "' yields no trainable windows");
    }

    CorrectorModel lexical_helper;
    if (kind == ModelKind::kFusionNet) {
        lexical_helper = load_corrector(existing_path(args.lexical_path, "lexical checkpoint"));
        if (lexical_helper.kind != ModelKind::kLexical) {
            throw std::invalid_argument("--lexical must point at a lexical model, got " +
                                        model_kind_name(lexical_helper.kind));
        }
        for (TrainingWindow& window : windows) {
            window.lexical_scores =
                lsec_forward(lexical_helper, window.words, window.baseline_labels).values;
        }
    }

    Rng rng(args.seed);
    CorrectorModel model;
    if (kind == ModelKind::kEarlyFusion && !args.init_from.empty()) {
        const CorrectorModel lexical =
            load_corrector(existing_path(args.init_from, "initializer checkpoint"));
        if (lexical.kind != ModelKind::kLexical) {
            throw std::invalid_argument("--init-from must point at a lexical model, got " +
                                        model_kind_name(lexical.kind));
        }
        model = init_from_lsec(lexical);
    } else {
        std::vector<std::string> all_words;
        for (const TrainingWindow& window : windows) {
            all_words.insert(all_words.end(), window.words.begin(), window.words.end());
        }
        Vocabulary vocab = Vocabulary::build(all_words, args.vocab_ids);
        const EncoderConfig backbone = default_backbone_config(vocab.id_count());
        model = make_corrector(kind, backbone, default_frontend_config(), std::move(vocab), rng);
    }

    TrainConfig config;
    config.epochs = args.epochs;
    config.batch_size = args.batch_size;
    config.learning_rate = args.learning_rate;
    config.seed = args.seed;
    TrainResult result = train_corrector(std::move(model), windows, config);

    for (std::size_t epoch = 0; epoch < result.epoch_losses.size(); ++epoch) {
        std::cout << "epoch " << epoch + 1 << " loss " << result.epoch_losses[epoch] << "\n";
    }
    save_corrector(args.out_path, result.model);
    std::cout << "trained " << model_kind_name(kind) << " on " << windows.size()
              << " windows, checkpoint at " << args.out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// correct

struct CorrectArgs {
    std::string manifest_path;
};

int cmd_correct(const CorrectArgs& args) {
    const fs::path file = existing_path(args.manifest_path, "manifest");
    const json j = parse_json_file(file);

    const fs::path posteriors_path =
        existing_path(json_require<std::string>(j, "posteriors", file), "posteriors file");
    const fs::path ctm_path =
        existing_path(json_require<std::string>(j, "words", file), "word timing file");
    const fs::path baseline_path =
        existing_path(json_require<std::string>(j, "baseline", file), "baseline transcript");
    const fs::path model_path =
        existing_path(json_require<std::string>(j, "model", file), "model checkpoint");
    const fs::path output_dir(json_require<std::string>(j, "output_dir", file));
    WindowingConfig windowing;
    windowing.window_size = json_get<std::size_t>(j, "window_size", file, windowing.window_size);
    windowing.stride = json_get<std::size_t>(j, "stride", file, windowing.stride);
    const int median_frames = json_get<int>(j, "median_frames", file, 11);

    const FramePosteriorMatrix posteriors = parse_posteriors(read_file(posteriors_path));
    const int frame_rate = frame_rate_of(posteriors);
    const std::vector<WordRecord> timed = parse_ctm(read_file(ctm_path), frame_rate);
    const LabeledTranscript baseline = join_words_with_labels(
        timed, parse_transcript(read_file(baseline_path), baseline_path.stem().string()));
    const std::vector<SpeakerScoreVector> scores =
        extract_word_scores(posteriors, baseline.words, median_frames);

    const CorrectorModel model = load_corrector(model_path);
    WindowCorrector corrector;
    if (j.contains("fusion_model")) {
        const fs::path fusion_path =
            existing_path(json_require<std::string>(j, "fusion_model", file), "fusion checkpoint");
        LateFusionModel late;
        late.lexical = model;
        late.fusion = load_corrector(fusion_path);
        if (late.lexical.kind != ModelKind::kLexical ||
            late.fusion.kind != ModelKind::kFusionNet) {
            throw std::invalid_argument(
                "late fusion takes a lexical 'model' and a fusion-net 'fusion_model', got " +
                model_kind_name(late.lexical.kind) + " and " +
                model_kind_name(late.fusion.kind));
        }
        corrector = [late](const std::vector<std::string>& words,
                           const std::vector<int>& baseline_labels, const Tensor& word_scores) {
            return late_fusion_correct(late, words, baseline_labels, word_scores);
        };
    } else {
        if (model.kind == ModelKind::kFusionNet) {
            throw std::invalid_argument(
                "a fusion-net checkpoint needs a lexical partner; pass it as 'model' and the "
                "fusion net as 'fusion_model'");
        }
        corrector = [model](const std::vector<std::string>& words,
                            const std::vector<int>& baseline_labels, const Tensor& word_scores) {
            return correct_window(model, words, baseline_labels, word_scores);
        };
    }

    const CorrectedTranscript corrected =
        correct_transcript(baseline, scores, corrector, windowing);
    LabeledTranscript output;
    output.id = baseline.id;
    output.words = corrected.words;

    fs::create_directories(output_dir);
    write_file_atomic(output_dir / "corrected.txt", serialize_transcript(output));
    std::cout << "wrote corrected transcript to " << (output_dir / "corrected.txt").string()
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
    std::vector<std::string> reference_paths;
    std::vector<std::string> baseline_paths;
    std::vector<std::string> corrected_paths;
    std::string out_path;
    std::string key_values_path;
};

int cmd_score(const ScoreArgs& args) {
    if (args.reference_paths.size() != args.baseline_paths.size() ||
        args.reference_paths.size() != args.corrected_paths.size()) {
        throw std::invalid_argument("--reference, --baseline, and --corrected must be given "
                                    "the same number of files");
    }
    std::vector<LabeledTranscript> references, baselines, corrected;
    for (std::size_t i = 0; i < args.reference_paths.size(); ++i) {
        const fs::path ref_path = existing_path(args.reference_paths[i], "reference transcript");
        const std::string id = ref_path.stem().string();
        references.push_back(parse_transcript(read_file(ref_path), id));
        baselines.push_back(parse_transcript(
            read_file(existing_path(args.baseline_paths[i], "baseline transcript")), id));
        corrected.push_back(parse_transcript(
            read_file(existing_path(args.corrected_paths[i], "corrected transcript")), id));
    }

    const CorpusReport report = score_corpus(references, baselines, corrected);
    const std::string text = render_report_text(report);
    std::cout << text;
    if (!args.out_path.empty()) write_file_atomic(args.out_path, text);
    if (!args.key_values_path.empty()) {
        write_file_atomic(args.key_values_path, render_report_key_values(report));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"speaker error correction pipeline"};
    app.require_subcommand(1);

    SimulateArgs simulate_args;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "generate a two-speaker conversation corpus with diarization errors");
    simulate->add_option("--config", simulate_args.config_path,
                         "JSON simulator configuration (defaults used when omitted)");
    simulate->add_option("--out", simulate_args.out_dir, "output corpus directory")->required();
    simulate->add_option("--seed", simulate_args.seed, "override the config seed");
    simulate->add_option("--conversations", simulate_args.conversations,
                         "override the number of conversations");

    ExtractArgs extract_args;
    CLI::App* extract = app.add_subcommand(
        "extract-scores", "pool frame posteriors into per-word speaker scores");
    extract->add_option("--posteriors", extract_args.posteriors_path, "posterior matrix file")
        ->required();
    extract->add_option("--ctm", extract_args.ctm_path, "word timing file")->required();
    extract->add_option("--out", extract_args.out_path, "output scores file")->required();
    extract->add_option("--median-frames", extract_args.median_frames,
                        "median smoothing window in frames (odd)");

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "train a correction model on a corpus");
    train->add_option("--corpus", train_args.corpus_dir, "corpus directory")->required();
    train->add_option("--model", train_args.model_kind,
                      "model kind: lexical, early-fusion, or fusion-net")
        ->required();
    train->add_option("--out", train_args.out_path, "output checkpoint path")->required();
    train->add_option("--init-from", train_args.init_from,
                      "lexical checkpoint to initialize an early-fusion model from");
    train->add_option("--lexical", train_args.lexical_path,
                      "trained lexical checkpoint (required for fusion-net)");
    train->add_option("--epochs", train_args.epochs, "training epochs");
    train->add_option("--batch-size", train_args.batch_size, "windows per optimizer step");
    train->add_option("--learning-rate", train_args.learning_rate, "Adam learning rate");
    train->add_option("--seed", train_args.seed, "seed for weights and batch order");
    train->add_option("--max-windows", train_args.max_windows,
                      "cap on training windows (0 keeps all)");
    train->add_option("--vocab-size", train_args.vocab_ids,
                      "sub-word vocabulary size (ignored with --init-from)");
    train->add_option("--split", train_args.split, "corpus split to train on");

    CorrectArgs correct_args;
    CLI::App* correct = app.add_subcommand("correct", "correct a transcript using a manifest");
    correct->add_option("--manifest", correct_args.manifest_path,
                        "JSON manifest: posteriors, words, baseline, model, optional "
                        "fusion_model, window_size, stride, median_frames, output_dir")
        ->required();

    ScoreArgs score_args;
    CLI::App* score = app.add_subcommand("score", "score corrected transcripts against references");
    score->add_option("--reference", score_args.reference_paths, "reference transcripts")
        ->required();
    score->add_option("--baseline", score_args.baseline_paths, "baseline transcripts")
        ->required();
    score->add_option("--corrected", score_args.corrected_paths, "corrected transcripts")
        ->required();
    score->add_option("--out", score_args.out_path, "write the text report here");
    score->add_option("--key-values", score_args.key_values_path,
                      "write a machine-readable report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(simulate_args);
        if (extract->parsed()) return cmd_extract_scores(extract_args);
        if (train->parsed()) return cmd_train(train_args);
        if (correct->parsed()) return cmd_correct(correct_args);
        if (score->parsed()) return cmd_score(score_args);
        throw InternalError("no subcommand dispatched");
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
