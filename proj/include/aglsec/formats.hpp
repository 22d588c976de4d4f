#pragma once

#include <string>
#include <vector>

#include "aglsec/diarization.hpp"
#include "aglsec/scores.hpp"
#include "aglsec/transcript.hpp"

namespace aglsec {

// Text formats used by the command-line tools. Serializers print doubles with
// %.17g so parse(serialize(x)) reproduces x exactly; parsers throw FormatError
// naming the 1-based line of the first problem.

// Line-oriented transcript: "<word_index> <word> <speaker_id>". Carries no
// timings; parsed words get zero frame spans.
std::string serialize_transcript(const LabeledTranscript& transcript);
LabeledTranscript parse_transcript(const std::string& content, const std::string& id);

// NIST-shaped CTM: "<recording> <channel> <start_sec> <dur_sec> <word>", one
// word per line, an optional trailing confidence accepted when parsing.
// Seconds convert to frames through frame_rate.
std::string serialize_ctm(const std::vector<WordRecord>& words, const std::string& recording,
                          int frame_rate, const std::string& channel = "1");
std::vector<WordRecord> parse_ctm(const std::string& content, int frame_rate);

// Joins CTM timings with transcript labels by line index. Word texts must
// match position by position.
LabeledTranscript join_words_with_labels(const std::vector<WordRecord>& timed_words,
                                         const LabeledTranscript& labels);

struct RttmSegment {
    std::string recording;
    double onset_sec = 0.0;
    double duration_sec = 0.0;
    int speaker = 0;

    bool operator==(const RttmSegment&) const = default;
};

// Maximal contiguous single-speaker spans of the transcript's words.
std::vector<RttmSegment> segments_from_words(const LabeledTranscript& transcript,
                                             int frame_rate);

// Standard 10-field SPEAKER lines; speakers are named spk<id>.
std::string serialize_rttm(const std::vector<RttmSegment>& segments);
std::vector<RttmSegment> parse_rttm(const std::string& content);

// Posterior matrix: header "T S frame_rate", then T rows of S values.
std::string serialize_posteriors(const FramePosteriorMatrix& posteriors);
FramePosteriorMatrix parse_posteriors(const std::string& content);

// Word scores: header "N S", then N rows of S values plus a trailing 0/1
// low-confidence flag.
std::string serialize_scores(const std::vector<SpeakerScoreVector>& scores);
std::vector<SpeakerScoreVector> parse_scores(const std::string& content);

} // namespace aglsec
