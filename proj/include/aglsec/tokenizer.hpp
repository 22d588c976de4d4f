#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace aglsec {

// Sub-word view of one window of words. Words of at most four characters map
// to a single token; longer words are cut into four-character chunks, so the
// token sequence is at least as long as the word sequence.
struct TokenizedWindow {
    std::vector<std::size_t> sub_word_ids;
    std::vector<std::size_t> word_boundaries;    // index of each word's first token
    std::vector<unsigned char> is_first_subword; // one flag per token

    std::size_t num_words() const { return word_boundaries.size(); }
    std::size_t num_tokens() const { return sub_word_ids.size(); }
};

// Splits one word into its sub-word chunks.
std::vector<std::string> chunk_word(const std::string& word);

// Fixed chunk inventory built from a training corpus. Id 0 is reserved for
// out-of-vocabulary chunks; known chunks take ids 1 onward, most frequent
// first, ties broken lexicographically.
class Vocabulary {
  public:
    static constexpr std::size_t kUnknownId = 0;

    Vocabulary() = default;

    // Counts chunks over the corpus words and keeps at most max_ids - 1 of
    // them, leaving room for the unknown id.
    static Vocabulary build(const std::vector<std::string>& corpus_words, std::size_t max_ids);

    // Reconstructs a vocabulary from its serialized chunk list.
    static Vocabulary from_chunks(std::vector<std::string> chunks);

    std::size_t id_of(const std::string& chunk) const;

    // All known chunks in id order (position i holds id i + 1).
    const std::vector<std::string>& chunks() const { return chunks_; }

    // Number of distinct ids including the unknown id.
    std::size_t id_count() const { return chunks_.size() + 1; }

  private:
    std::vector<std::string> chunks_;
    std::unordered_map<std::string, std::size_t> ids_;
};

TokenizedWindow tokenize(const std::vector<std::string>& words, const Vocabulary& vocab);

}  // namespace aglsec
