#include "aglsec/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "aglsec/error.hpp"
#include "aglsec/rng.hpp"

namespace aglsec {
namespace {

const char* const kGreetingPatterns[] = {
    "hello there",           "hi there",               "hey there",
    "good morning",          "good morning to you",    "good evening",
    "good afternoon",        "hey how are you",        "how are you",
    "how are you doing",     "how are you today",      "how is it going",
    "how have you been",     "nice to meet you",       "great to see you",
    "good to see you",       "long time no see",       "hey what is up",
    "what is up",            "hello how are you",      "hi how are you doing",
    "morning how are you",   "hey good morning",       "hello good evening",
    "hi nice to see you",    "hey long time",          "hello again",
    "hi again",              "hey you made it",        "glad you could come",
    "welcome back",          "welcome in",             "come on in",
    "hello everyone",        "hi all",                 "hey folks",
    "hello friend",          "hi my friend",           "hey buddy",
    "good day",              "good day to you",        "top of the morning",
    "hello can you hear me", "hi can you hear me",     "hey are you there",
    "hello is this on",      "hi this is me",          "hey it is me",
    "hello speaking",        "hi speaking",
};

const char* const kQuestionPatterns[] = {
    "what do you think",        "what do you mean",       "what happened next",
    "what time is it",          "what is the plan",       "what is going on",
    "what did you do",          "what are you doing",     "where did you go",
    "where are you now",        "where was that",         "when did that happen",
    "when do we start",         "when is it due",         "why is that",
    "why did you do that",      "why do you say that",    "how did it go",
    "how does that work",       "how was your day",       "how was the trip",
    "how did you know",         "who told you that",      "who was there",
    "who is coming",            "did you see that",       "did you finish it",
    "did it work",              "do you like it",         "do you want to go",
    "do you remember",          "can you explain that",   "can you help me",
    "can we talk about it",     "could you say that again", "would you do it again",
    "will you be there",        "are you serious",        "are you coming",
    "are you sure about that",  "is that true",           "is it ready",
    "is that all",              "have you been there",    "have you heard the news",
    "was it hard",              "was that you",           "really you think so",
    "any news on that",         "so what now",
};

const char* const kAnswerPatterns[] = {
    "i am good",           "i am doing good",     "i am fine thanks",
    "i am okay",           "i am not sure",       "i think so",
    "i think it went well", "i believe so",       "i guess so",
    "i know right",        "i did yes",           "i did not",
    "i was there",         "i saw it",            "i heard about it",
    "i finished it",       "i liked it a lot",    "i am serious",
    "i am coming",         "i am sure",           "yes i did",
    "yes of course",       "yes that is true",    "yes it worked",
    "yes it is ready",     "yeah i think so",     "yeah it was hard",
    "yeah that was me",    "yeah for sure",       "no i did not",
    "no not really",       "no not yet",          "no i missed it",
    "not that i know",     "maybe later",         "maybe tomorrow",
    "probably yes",        "probably not",        "it went well",
    "it was great",        "it was fine",         "it was hard",
    "it worked out",       "that is true",        "that was me",
    "sure thing",          "of course",           "absolutely yes",
    "honestly not sure",   "well it depends",
};

const char* const kStatementPatterns[] = {
    "the weather is nice today",  "the meeting ran long",     "the food was great",
    "the traffic was bad",        "the game starts soon",     "the report is done",
    "the plan changed again",     "the team did well",        "the house needs work",
    "the car broke down",         "we should get going",      "we can talk later",
    "we finished early",          "we missed the bus",        "we have plenty of time",
    "you should see it",          "you will like it",         "you were right about that",
    "they arrived late",          "they liked the idea",      "he said it was fine",
    "she found a new place",      "it might rain later",      "it takes about an hour",
    "there is a lot to do",       "there was a long line",    "that reminds me of something",
    "that took forever",          "this place is busy",       "this one is better",
    "let me check on that",       "let us move on",           "anyway it worked out",
    "by the way it is done",      "in the end it was fine",   "for what it is worth",
    "at least it is friday",      "next week looks busy",     "last night was fun",
    "my phone died again",        "my plans fell through",    "our flight got delayed",
    "some things never change",   "everything is ready now",  "nothing much happened",
    "work has been busy",         "dinner is almost ready",   "the kids are asleep",
    "the movie was too long",     "the music was loud",
};

std::vector<std::vector<std::string>> split_patterns(const char* const* patterns,
                                                     std::size_t count) {
    std::vector<std::vector<std::string>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<std::string> words;
        std::string word;
        for (const char* c = patterns[i]; *c; ++c) {
            if (*c == ' ') {
                words.push_back(word);
                word.clear();
            } else {
                word.push_back(*c);
            }
        }
        words.push_back(word);
        out.push_back(std::move(words));
    }
    return out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct PlannedTurn {
    PatternFamily family;
    int speaker = 0;
    std::vector<std::string> words;
};

PatternFamily next_family(PatternFamily previous, Rng& rng) {
    switch (previous) {
        case PatternFamily::kGreeting:
        case PatternFamily::kQuestion:
            return PatternFamily::kAnswer;
        case PatternFamily::kAnswer:
            return rng.bernoulli(0.45) ? PatternFamily::kQuestion : PatternFamily::kStatement;
        case PatternFamily::kStatement:
            return rng.bernoulli(0.4) ? PatternFamily::kQuestion : PatternFamily::kStatement;
    }
    throw InternalError("unknown pattern family");
}

} // namespace

const std::vector<std::vector<std::string>>& patterns_for(PatternFamily family) {
    static const auto greetings =
        split_patterns(kGreetingPatterns, std::size(kGreetingPatterns));
    static const auto questions =
        split_patterns(kQuestionPatterns, std::size(kQuestionPatterns));
    static const auto answers = split_patterns(kAnswerPatterns, std::size(kAnswerPatterns));
    static const auto statements =
        split_patterns(kStatementPatterns, std::size(kStatementPatterns));
    switch (family) {
        case PatternFamily::kGreeting: return greetings;
        case PatternFamily::kQuestion: return questions;
        case PatternFamily::kAnswer: return answers;
        case PatternFamily::kStatement: return statements;
    }
    throw std::invalid_argument("unknown pattern family");
}

void SimulatorConfig::validate() const {
    if (num_speakers < 2 || num_speakers > 4) {
        throw std::invalid_argument("num_speakers must be between 2 and 4, got " +
                                    std::to_string(num_speakers));
    }
    if (num_turns < 1) throw std::invalid_argument("num_turns must be positive");
    if (min_words_per_turn < 1 || max_words_per_turn < min_words_per_turn) {
        throw std::invalid_argument("words-per-turn range is empty");
    }
    const auto check_probability = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
        }
    };
    check_probability(overlap_probability, "overlap_probability");
    check_probability(error_rate_at_boundaries, "error_rate_at_boundaries");
    check_probability(error_rate_interior, "error_rate_interior");
    if (!(posterior_noise >= 0.0)) {
        throw std::invalid_argument("posterior_noise must be non-negative");
    }
    if (frame_rate < 1) throw std::invalid_argument("frame_rate must be positive");
    if (!(word_duration_sec > 0.0)) {
        throw std::invalid_argument("word_duration_sec must be positive");
    }
    if (std::llround(word_duration_sec * frame_rate) < 1) {
        throw std::invalid_argument("word_duration_sec is shorter than one frame");
    }
}

SimulatedConversation generate(const SimulatorConfig& config) {
    config.validate();
    Rng rng(config.seed);
    const int num_speakers = config.num_speakers;

    // Plan the turns: family chain, speakers, words.
    std::vector<PlannedTurn> turns;
    int speaker = static_cast<int>(rng.below(static_cast<std::size_t>(num_speakers)));
    PatternFamily family = PatternFamily::kGreeting;
    for (int t = 0; t < config.num_turns; ++t) {
        PlannedTurn turn;
        turn.family = family;
        turn.speaker = speaker;
        const std::size_t target =
            static_cast<std::size_t>(config.min_words_per_turn) +
            rng.below(static_cast<std::size_t>(config.max_words_per_turn -
                                               config.min_words_per_turn + 1));
        const auto& patterns = patterns_for(family);
        while (turn.words.size() < target) {
            const auto& pattern = patterns[rng.below(patterns.size())];
            turn.words.insert(turn.words.end(), pattern.begin(), pattern.end());
        }
        turns.push_back(std::move(turn));

        family = next_family(family, rng);
        speaker = (speaker + 1 +
                   static_cast<int>(rng.below(static_cast<std::size_t>(num_speakers - 1)))) %
                  num_speakers;
    }

    // Lay out word timings. A turn that overlaps starts on the previous
    // turn's final word so both speakers are active for that span.
    const long long word_frames =
        std::max(1LL, std::llround(config.word_duration_sec * config.frame_rate));
    struct PlacedWord {
        WordRecord record;
        std::size_t turn = 0;
    };
    std::vector<PlacedWord> placed;
    long long cursor = 0;
    for (std::size_t t = 0; t < turns.size(); ++t) {
        long long start = cursor;
        if (t > 0 && rng.bernoulli(config.overlap_probability)) start -= word_frames;
        for (const std::string& text : turns[t].words) {
            PlacedWord w;
            w.record.text = text;
            w.record.start_frame = start;
            w.record.end_frame = start + word_frames;
            w.record.speaker = turns[t].speaker;
            w.turn = t;
            placed.push_back(std::move(w));
            start += word_frames;
        }
        cursor = start;
    }
    std::stable_sort(placed.begin(), placed.end(), [](const PlacedWord& a, const PlacedWord& b) {
        if (a.record.start_frame != b.record.start_frame) {
            return a.record.start_frame < b.record.start_frame;
        }
        return a.record.speaker < b.record.speaker;
    });

    SimulatedConversation conversation;
    conversation.reference.id = "sim-" + std::to_string(config.seed);
    conversation.turn_starts.assign(turns.size(), placed.size());
    for (std::size_t i = 0; i < placed.size(); ++i) {
        conversation.reference.words.push_back(placed[i].record);
        conversation.turn_starts[placed[i].turn] =
            std::min(conversation.turn_starts[placed[i].turn], i);
    }

    // Frame-level activity and its noisy posterior image.
    const std::size_t num_frames = static_cast<std::size_t>(cursor);
    conversation.activity.values =
        Tensor::zeros({num_frames, static_cast<std::size_t>(num_speakers)});
    for (const PlacedWord& w : placed) {
        for (long long f = w.record.start_frame; f < w.record.end_frame; ++f) {
            conversation.activity.values.at(static_cast<std::size_t>(f),
                                            static_cast<std::size_t>(w.record.speaker)) = 1.0;
        }
    }
    conversation.posteriors.frame_duration = 1.0 / config.frame_rate;
    if (config.posterior_noise == 0.0) {
        conversation.posteriors.values = conversation.activity.values;
    } else {
        conversation.posteriors.values = Tensor::zeros(conversation.activity.values.shape);
        for (std::size_t i = 0; i < conversation.activity.values.data.size(); ++i) {
            const double y = conversation.activity.values.data[i];
            const double logit = 4.0 * (2.0 * y - 1.0) + config.posterior_noise * rng.gaussian();
            conversation.posteriors.values.data[i] = sigmoid(logit);
        }
    }

    // Baseline labels: boundary shifts first, isolated interior flips second.
    const std::size_t num_words = conversation.reference.words.size();
    std::vector<int> labels;
    labels.reserve(num_words);
    for (const WordRecord& w : conversation.reference.words) labels.push_back(w.speaker);
    const auto reference_label = [&](std::size_t w) {
        return conversation.reference.words[w].speaker;
    };

    std::vector<std::size_t> boundaries(conversation.turn_starts.begin() + 1,
                                        conversation.turn_starts.end());
    for (std::size_t b : boundaries) {
        if (!rng.bernoulli(config.error_rate_at_boundaries)) continue;
        const long long magnitude = 1 + static_cast<long long>(rng.below(2));
        const long long delta = rng.bernoulli(0.5) ? magnitude : -magnitude;
        if (delta > 0) {
            // Boundary detected late: the new turn's opening words keep the
            // previous speaker.
            if (b == 0) continue;
            const int wrong = reference_label(b - 1);
            for (std::size_t w = b; w < std::min(b + static_cast<std::size_t>(delta), num_words);
                 ++w) {
                labels[w] = wrong;
            }
        } else {
            // Boundary detected early: the previous turn's closing words are
            // given to the new speaker.
            const int wrong = reference_label(b);
            const std::size_t from =
                b >= static_cast<std::size_t>(-delta) ? b - static_cast<std::size_t>(-delta) : 0;
            for (std::size_t w = from; w < b; ++w) labels[w] = wrong;
        }
    }
    std::size_t nearest_index = 0;
    for (std::size_t w = 0; w < num_words; ++w) {
        std::size_t nearest = num_words;
        if (!boundaries.empty()) {
            const auto distance = [&](std::size_t index) {
                const std::size_t b = boundaries[index];
                return w > b ? w - b : b - w;
            };
            while (nearest_index + 1 < boundaries.size() &&
                   distance(nearest_index + 1) <= distance(nearest_index)) {
                ++nearest_index;
            }
            nearest = distance(nearest_index);
        }
        if (nearest <= 2 || !rng.bernoulli(config.error_rate_interior)) continue;
        labels[w] = (reference_label(w) + 1 +
                     static_cast<int>(rng.below(static_cast<std::size_t>(num_speakers - 1)))) %
                    num_speakers;
    }

    conversation.baseline = conversation.reference;
    for (std::size_t w = 0; w < num_words; ++w) {
        conversation.baseline.words[w].speaker = labels[w];
        if (labels[w] != reference_label(w)) conversation.injected_errors.push_back(w);
    }
    return conversation;
}

SimulatedCorpus build_corpus(const SimulatorConfig& config, std::size_t num_conversations,
                             const CorpusOptions& options) {
    config.validate();
    if (num_conversations < 3) {
        throw std::invalid_argument("a corpus needs at least 3 conversations to split");
    }

    SimulatedCorpus corpus;
    corpus.conversations.reserve(num_conversations);
    corpus.word_scores.reserve(num_conversations);
    for (std::size_t i = 0; i < num_conversations; ++i) {
        SimulatorConfig conv_config = config;
        conv_config.seed = config.seed + i;
        SimulatedConversation conversation = generate(conv_config);
        char id[32];
        std::snprintf(id, sizeof(id), "conv-%06zu", i);
        conversation.reference.id = id;
        conversation.baseline.id = id;
        corpus.word_scores.push_back(extract_word_scores(
            conversation.posteriors, conversation.reference.words, options.median_frames));
        corpus.conversations.push_back(std::move(conversation));
    }

    const std::size_t num_val = std::max<std::size_t>(1, num_conversations / 10);
    const std::size_t num_test = num_val;
    const std::size_t num_train = num_conversations - num_val - num_test;

    const auto split_of = [&](std::size_t i) -> CorpusSplit& {
        if (i < num_train) return corpus.train;
        if (i < num_train + num_val) return corpus.validation;
        return corpus.test;
    };

    for (std::size_t i = 0; i < num_conversations; ++i) {
        CorpusSplit& split = split_of(i);
        split.conversation_indices.push_back(i);
        const SimulatedConversation& conversation = corpus.conversations[i];
        std::vector<int> reference_labels;
        reference_labels.reserve(conversation.reference.words.size());
        for (const WordRecord& w : conversation.reference.words) {
            reference_labels.push_back(w.speaker);
        }
        TrainingHarvest harvest = harvest_training_windows(
            conversation.baseline.words, reference_labels, corpus.word_scores[i],
            options.windowing);
        corpus.windows_total += harvest.windows_total;
        corpus.windows_ineligible += harvest.windows_ineligible;
        corpus.windows_single_speaker += harvest.windows_single_speaker;
        corpus.windows_unsupervisable += harvest.windows_unsupervisable;
        for (TrainingWindow& window : harvest.windows) {
            split.windows.push_back(std::move(window));
        }
    }
    return corpus;
}

} // namespace aglsec
