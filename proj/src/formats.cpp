#include "aglsec/formats.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "aglsec/error.hpp"

namespace aglsec {
namespace {

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::vector<std::string> split_lines(const std::string& content) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string::npos) end = content.size();
        lines.push_back(content.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

[[noreturn]] void fail(const char* format_name, std::size_t line_no, const std::string& what) {
    throw FormatError(std::string(format_name) + " line " + std::to_string(line_no) + ": " +
                      what);
}

double parse_double(const std::string& field, const char* format_name, std::size_t line_no,
                    const char* what) {
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size() || field.empty() || errno == ERANGE) {
        fail(format_name, line_no, std::string("cannot parse ") + what + " '" + field + "'");
    }
    return value;
}

long long parse_integer(const std::string& field, const char* format_name, std::size_t line_no,
                        const char* what) {
    errno = 0;
    char* end = nullptr;
    const long long value = std::strtoll(field.c_str(), &end, 10);
    if (end != field.c_str() + field.size() || field.empty() || errno == ERANGE) {
        fail(format_name, line_no, std::string("cannot parse ") + what + " '" + field + "'");
    }
    return value;
}

void require_plain_token(const std::string& token, const char* what) {
    if (token.empty()) throw std::invalid_argument(std::string(what) + " is empty");
    for (char c : token) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            throw std::invalid_argument(std::string(what) + " '" + token +
                                        "' contains whitespace");
        }
    }
}

long long seconds_to_frames(double seconds, int frame_rate) {
    return std::llround(seconds * frame_rate);
}

} // namespace

std::string serialize_transcript(const LabeledTranscript& transcript) {
    std::string out;
    for (std::size_t i = 0; i < transcript.words.size(); ++i) {
        const WordRecord& w = transcript.words[i];
        require_plain_token(w.text, "word");
        if (w.speaker < 0) {
            throw std::invalid_argument("speaker ids must be non-negative, got " +
                                        std::to_string(w.speaker));
        }
        out += std::to_string(i) + " " + w.text + " " + std::to_string(w.speaker) + "\n";
    }
    return out;
}

LabeledTranscript parse_transcript(const std::string& content, const std::string& id) {
    LabeledTranscript transcript;
    transcript.id = id;
    const auto lines = split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto fields = split_fields(lines[i]);
        if (fields.size() != 3) {
            fail("transcript", i + 1,
                 "expected 3 fields (index word speaker), got " + std::to_string(fields.size()));
        }
        const long long index = parse_integer(fields[0], "transcript", i + 1, "word index");
        if (index != static_cast<long long>(i)) {
            fail("transcript", i + 1,
                 "word index " + fields[0] + " does not match line position " +
                     std::to_string(i));
        }
        const long long speaker = parse_integer(fields[2], "transcript", i + 1, "speaker id");
        if (speaker < 0) fail("transcript", i + 1, "speaker id is negative");
        WordRecord w;
        w.text = fields[1];
        w.speaker = static_cast<int>(speaker);
        transcript.words.push_back(std::move(w));
    }
    return transcript;
}

std::string serialize_ctm(const std::vector<WordRecord>& words, const std::string& recording,
                          int frame_rate, const std::string& channel) {
    require_plain_token(recording, "recording id");
    require_plain_token(channel, "channel");
    if (frame_rate < 1) throw std::invalid_argument("frame_rate must be positive");
    std::string out;
    for (const WordRecord& w : words) {
        require_plain_token(w.text, "word");
        if (w.end_frame <= w.start_frame) {
            throw std::invalid_argument("word '" + w.text + "' has an empty frame span");
        }
        const double start_sec = static_cast<double>(w.start_frame) / frame_rate;
        const double dur_sec = static_cast<double>(w.end_frame - w.start_frame) / frame_rate;
        out += recording + " " + channel + " " + format_double(start_sec) + " " +
               format_double(dur_sec) + " " + w.text + "\n";
    }
    return out;
}

std::vector<WordRecord> parse_ctm(const std::string& content, int frame_rate) {
    if (frame_rate < 1) throw std::invalid_argument("frame_rate must be positive");
    std::vector<WordRecord> words;
    const auto lines = split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto fields = split_fields(lines[i]);
        if (fields.size() != 5 && fields.size() != 6) {
            fail("ctm", i + 1,
                 "expected 5 or 6 fields (recording channel start dur word [conf]), got " +
                     std::to_string(fields.size()));
        }
        const double start_sec = parse_double(fields[2], "ctm", i + 1, "start time");
        const double dur_sec = parse_double(fields[3], "ctm", i + 1, "duration");
        if (dur_sec <= 0.0) fail("ctm", i + 1, "duration must be positive");
        if (fields.size() == 6) parse_double(fields[5], "ctm", i + 1, "confidence");
        WordRecord w;
        w.text = fields[4];
        w.start_frame = seconds_to_frames(start_sec, frame_rate);
        w.end_frame = seconds_to_frames(start_sec + dur_sec, frame_rate);
        if (w.end_frame <= w.start_frame) w.end_frame = w.start_frame + 1;
        words.push_back(std::move(w));
    }
    return words;
}

LabeledTranscript join_words_with_labels(const std::vector<WordRecord>& timed_words,
                                         const LabeledTranscript& labels) {
    if (timed_words.size() != labels.words.size()) {
        throw FormatError("word/timing list has " + std::to_string(timed_words.size()) +
                          " words but the transcript has " +
                          std::to_string(labels.words.size()));
    }
    LabeledTranscript joined;
    joined.id = labels.id;
    for (std::size_t i = 0; i < timed_words.size(); ++i) {
        if (timed_words[i].text != labels.words[i].text) {
            throw FormatError("word " + std::to_string(i) + " is '" + timed_words[i].text +
                              "' in the timing file but '" + labels.words[i].text +
                              "' in the transcript");
        }
        WordRecord w = timed_words[i];
        w.speaker = labels.words[i].speaker;
        joined.words.push_back(std::move(w));
    }
    return joined;
}

std::vector<RttmSegment> segments_from_words(const LabeledTranscript& transcript,
                                             int frame_rate) {
    if (frame_rate < 1) throw std::invalid_argument("frame_rate must be positive");
    std::vector<RttmSegment> segments;
    long long seg_start = 0;
    long long seg_end = 0;
    int seg_speaker = -1;
    const auto flush = [&] {
        if (seg_speaker < 0) return;
        RttmSegment segment;
        segment.recording = transcript.id;
        segment.onset_sec = static_cast<double>(seg_start) / frame_rate;
        segment.duration_sec = static_cast<double>(seg_end - seg_start) / frame_rate;
        segment.speaker = seg_speaker;
        segments.push_back(std::move(segment));
    };
    for (const WordRecord& w : transcript.words) {
        if (w.speaker == seg_speaker && w.start_frame <= seg_end) {
            seg_end = std::max(seg_end, w.end_frame);
            continue;
        }
        flush();
        seg_start = w.start_frame;
        seg_end = w.end_frame;
        seg_speaker = w.speaker;
    }
    flush();
    return segments;
}

std::string serialize_rttm(const std::vector<RttmSegment>& segments) {
    std::string out;
    for (const RttmSegment& s : segments) {
        require_plain_token(s.recording, "recording id");
        if (s.speaker < 0) throw std::invalid_argument("speaker ids must be non-negative");
        out += "SPEAKER " + s.recording + " 1 " + format_double(s.onset_sec) + " " +
               format_double(s.duration_sec) + " <NA> <NA> spk" + std::to_string(s.speaker) +
               " <NA> <NA>\n";
    }
    return out;
}

std::vector<RttmSegment> parse_rttm(const std::string& content) {
    std::vector<RttmSegment> segments;
    const auto lines = split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto fields = split_fields(lines[i]);
        if (fields.size() != 10) {
            fail("rttm", i + 1, "expected 10 fields, got " + std::to_string(fields.size()));
        }
        if (fields[0] != "SPEAKER") {
            fail("rttm", i + 1, "expected a SPEAKER record, got '" + fields[0] + "'");
        }
        RttmSegment segment;
        segment.recording = fields[1];
        segment.onset_sec = parse_double(fields[3], "rttm", i + 1, "onset");
        segment.duration_sec = parse_double(fields[4], "rttm", i + 1, "duration");
        const std::string& name = fields[7];
        if (name.size() < 4 || name.compare(0, 3, "spk") != 0) {
            fail("rttm", i + 1, "speaker name '" + name + "' is not of the form spk<id>");
        }
        segment.speaker =
            static_cast<int>(parse_integer(name.substr(3), "rttm", i + 1, "speaker id"));
        segments.push_back(std::move(segment));
    }
    return segments;
}

std::string serialize_posteriors(const FramePosteriorMatrix& posteriors) {
    posteriors.validate();
    const long long frame_rate = std::llround(1.0 / posteriors.frame_duration);
    if (frame_rate < 1 || 1.0 / static_cast<double>(frame_rate) != posteriors.frame_duration) {
        throw std::invalid_argument("frame duration does not correspond to an integer rate");
    }
    std::string out = std::to_string(posteriors.num_frames()) + " " +
                      std::to_string(posteriors.num_speakers()) + " " +
                      std::to_string(frame_rate) + "\n";
    for (std::size_t t = 0; t < posteriors.num_frames(); ++t) {
        for (std::size_t s = 0; s < posteriors.num_speakers(); ++s) {
            if (s > 0) out += " ";
            out += format_double(posteriors.values.at(t, s));
        }
        out += "\n";
    }
    return out;
}

FramePosteriorMatrix parse_posteriors(const std::string& content) {
    const auto lines = split_lines(content);
    if (lines.empty()) throw FormatError("posteriors: empty input, expected a T S rate header");
    const auto header = split_fields(lines[0]);
    if (header.size() != 3) {
        fail("posteriors", 1,
             "expected header 'T S frame_rate', got " + std::to_string(header.size()) +
                 " fields");
    }
    const long long num_frames = parse_integer(header[0], "posteriors", 1, "frame count");
    const long long num_speakers = parse_integer(header[1], "posteriors", 1, "speaker count");
    const long long frame_rate = parse_integer(header[2], "posteriors", 1, "frame rate");
    if (num_frames < 0 || num_speakers < 1 || frame_rate < 1) {
        fail("posteriors", 1, "header values out of range");
    }
    if (lines.size() != static_cast<std::size_t>(num_frames) + 1) {
        throw FormatError("posteriors: header promises " + std::to_string(num_frames) +
                          " rows but the file has " + std::to_string(lines.size() - 1));
    }

    FramePosteriorMatrix posteriors;
    posteriors.frame_duration = 1.0 / static_cast<double>(frame_rate);
    posteriors.values = Tensor::zeros({static_cast<std::size_t>(num_frames),
                                       static_cast<std::size_t>(num_speakers)});
    for (long long t = 0; t < num_frames; ++t) {
        const auto fields = split_fields(lines[static_cast<std::size_t>(t) + 1]);
        if (fields.size() != static_cast<std::size_t>(num_speakers)) {
            fail("posteriors", static_cast<std::size_t>(t) + 2,
                 "expected " + std::to_string(num_speakers) + " values, got " +
                     std::to_string(fields.size()));
        }
        for (long long s = 0; s < num_speakers; ++s) {
            const double value =
                parse_double(fields[static_cast<std::size_t>(s)], "posteriors",
                             static_cast<std::size_t>(t) + 2, "posterior");
            if (!(value >= 0.0 && value <= 1.0)) {
                fail("posteriors", static_cast<std::size_t>(t) + 2,
                     "posterior " + fields[static_cast<std::size_t>(s)] +
                         " lies outside [0, 1]");
            }
            posteriors.values.at(static_cast<std::size_t>(t), static_cast<std::size_t>(s)) =
                value;
        }
    }
    return posteriors;
}

std::string serialize_scores(const std::vector<SpeakerScoreVector>& scores) {
    const std::size_t num_speakers = scores.empty() ? 0 : scores[0].scores.size();
    std::string out = std::to_string(scores.size()) + " " + std::to_string(num_speakers) + "\n";
    for (const SpeakerScoreVector& row : scores) {
        if (row.scores.size() != num_speakers) {
            throw std::invalid_argument("score rows disagree on the speaker count");
        }
        for (double v : row.scores) out += format_double(v) + " ";
        out += row.low_confidence ? "1\n" : "0\n";
    }
    return out;
}

std::vector<SpeakerScoreVector> parse_scores(const std::string& content) {
    const auto lines = split_lines(content);
    if (lines.empty()) throw FormatError("scores: empty input, expected an N S header");
    const auto header = split_fields(lines[0]);
    if (header.size() != 2) {
        fail("scores", 1, "expected header 'N S', got " + std::to_string(header.size()) +
                              " fields");
    }
    const long long num_rows = parse_integer(header[0], "scores", 1, "row count");
    const long long num_speakers = parse_integer(header[1], "scores", 1, "speaker count");
    if (num_rows < 0 || num_speakers < 0 || (num_rows > 0 && num_speakers < 1)) {
        fail("scores", 1, "header values out of range");
    }
    if (lines.size() != static_cast<std::size_t>(num_rows) + 1) {
        throw FormatError("scores: header promises " + std::to_string(num_rows) +
                          " rows but the file has " + std::to_string(lines.size() - 1));
    }

    std::vector<SpeakerScoreVector> scores;
    for (long long r = 0; r < num_rows; ++r) {
        const std::size_t line_no = static_cast<std::size_t>(r) + 2;
        const auto fields = split_fields(lines[line_no - 1]);
        if (fields.size() != static_cast<std::size_t>(num_speakers) + 1) {
            fail("scores", line_no,
                 "expected " + std::to_string(num_speakers) + " scores plus a flag, got " +
                     std::to_string(fields.size()) + " fields");
        }
        SpeakerScoreVector row;
        for (long long s = 0; s < num_speakers; ++s) {
            row.scores.push_back(
                parse_double(fields[static_cast<std::size_t>(s)], "scores", line_no, "score"));
        }
        const std::string& flag = fields.back();
        if (flag == "0") row.low_confidence = false;
        else if (flag == "1") row.low_confidence = true;
        else fail("scores", line_no, "low-confidence flag must be 0 or 1, got '" + flag + "'");
        scores.push_back(std::move(row));
    }
    return scores;
}

} // namespace aglsec
