#include "aglsec/tokenizer.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace aglsec {

namespace {
constexpr std::size_t kChunkLength = 4;
}

std::vector<std::string> chunk_word(const std::string& word) {
    if (word.empty()) throw std::invalid_argument("cannot tokenize an empty word");
    if (word.size() <= kChunkLength) return {word};
    std::vector<std::string> chunks;
    for (std::size_t pos = 0; pos < word.size(); pos += kChunkLength) {
        chunks.push_back(word.substr(pos, kChunkLength));
    }
    return chunks;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus_words, std::size_t max_ids) {
    if (max_ids < 2) {
        throw std::invalid_argument("vocabulary needs room for at least one chunk plus unknown");
    }
    std::map<std::string, std::size_t> counts;
    for (const std::string& word : corpus_words) {
        for (const std::string& chunk : chunk_word(word)) counts[chunk] += 1;
    }

    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > max_ids - 1) ranked.resize(max_ids - 1);

    std::vector<std::string> chunks;
    chunks.reserve(ranked.size());
    for (auto& [chunk, count] : ranked) chunks.push_back(std::move(chunk));
    return from_chunks(std::move(chunks));
}

Vocabulary Vocabulary::from_chunks(std::vector<std::string> chunks) {
    Vocabulary vocab;
    vocab.chunks_ = std::move(chunks);
    for (std::size_t i = 0; i < vocab.chunks_.size(); ++i) {
        if (vocab.chunks_[i].empty()) {
            throw std::invalid_argument("vocabulary chunk " + std::to_string(i) + " is empty");
        }
        if (!vocab.ids_.emplace(vocab.chunks_[i], i + 1).second) {
            throw std::invalid_argument("vocabulary repeats chunk '" + vocab.chunks_[i] + "'");
        }
    }
    return vocab;
}

std::size_t Vocabulary::id_of(const std::string& chunk) const {
    auto it = ids_.find(chunk);
    return it == ids_.end() ? kUnknownId : it->second;
}

TokenizedWindow tokenize(const std::vector<std::string>& words, const Vocabulary& vocab) {
    if (words.empty()) throw std::invalid_argument("cannot tokenize an empty word list");
    TokenizedWindow window;
    for (const std::string& word : words) {
        window.word_boundaries.push_back(window.sub_word_ids.size());
        bool first = true;
        for (const std::string& chunk : chunk_word(word)) {
            window.sub_word_ids.push_back(vocab.id_of(chunk));
            window.is_first_subword.push_back(first ? 1 : 0);
            first = false;
        }
    }
    return window;
}

}  // namespace aglsec
