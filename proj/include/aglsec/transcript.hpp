#pragma once

#include <string>
#include <vector>

namespace aglsec {

// One transcribed word with its frame span and speaker attribution.
// The frame span is start-inclusive, end-exclusive.
struct WordRecord {
    std::string text;
    long long start_frame = 0;
    long long end_frame = 0;
    int speaker = 0;

    bool operator==(const WordRecord&) const = default;
};

struct LabeledTranscript {
    std::string id;
    std::vector<WordRecord> words;

    bool operator==(const LabeledTranscript&) const = default;
};

// True when both carry the same word sequence (labels and timings aside).
inline bool same_word_sequence(const LabeledTranscript& a, const LabeledTranscript& b) {
    if (a.words.size() != b.words.size()) return false;
    for (std::size_t i = 0; i < a.words.size(); ++i) {
        if (a.words[i].text != b.words[i].text) return false;
    }
    return true;
}

} // namespace aglsec
