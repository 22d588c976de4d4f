#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "aglsec/transcript.hpp"

namespace aglsec {

enum class AlignKind { kCorrect, kSubstitution, kInsertion, kDeletion };

// Marks the missing side of an insertion or deletion pair.
inline constexpr std::size_t kAlignGap = static_cast<std::size_t>(-1);

struct AlignedPair {
    std::size_t ref = kAlignGap;
    std::size_t hyp = kAlignGap;
    AlignKind kind = AlignKind::kCorrect;
};

struct AlignmentResult {
    std::vector<AlignedPair> pairs;
    std::size_t correct = 0;
    std::size_t substitutions = 0;
    std::size_t insertions = 0;
    std::size_t deletions = 0;

    std::size_t edit_cost() const { return substitutions + insertions + deletions; }
};

// Merges per-speaker word streams into one sequence ordered by start frame,
// ties by speaker id then original position. Callers align references through
// this when the transcript interleaves overlapping speakers.
LabeledTranscript serialize_by_start_time(const LabeledTranscript& transcript);

// Minimum-edit-distance word alignment with unit substitution, insertion and
// deletion costs. Equal-cost backtraces prefer match, then substitution, then
// deletion, then insertion.
AlignmentResult align_words(const LabeledTranscript& reference,
                            const LabeledTranscript& hypothesis);

struct WderBreakdown {
    double wder = 0.0;
    std::size_t c_is = 0;        // correct words bearing the wrong speaker
    std::size_t s_is = 0;        // substituted words bearing the wrong speaker
    std::size_t denominator = 0; // aligned correct + substituted words
};

// Injective hypothesis-to-reference speaker assignment maximizing the number
// of aligned words whose speakers agree, brute-forced over all assignments.
// Ties pick the lexicographically smallest assignment; hypothesis speakers
// left without a reference partner are omitted.
std::vector<std::pair<int, int>> best_speaker_mapping(const AlignmentResult& alignment,
                                                      const std::vector<int>& ref_speakers,
                                                      const std::vector<int>& hyp_speakers);

// Word diarization error rate over the aligned correct + substituted words,
// after fixing the speaker mapping via best_speaker_mapping. Insertions and
// deletions do not participate.
WderBreakdown wder(const AlignmentResult& alignment, const std::vector<int>& ref_speakers,
                   const std::vector<int>& hyp_speakers);

// Same computation under a caller-fixed injective mapping. Hypothesis
// speakers missing from the mapping never agree.
WderBreakdown wder_with_mapping(const AlignmentResult& alignment,
                                const std::vector<int>& ref_speakers,
                                const std::vector<int>& hyp_speakers,
                                const std::vector<std::pair<int, int>>& mapping);

struct ErrorAccounting {
    std::size_t baseline_errors = 0;
    std::size_t fixed = 0;
    std::size_t broken = 0;
    std::size_t final_errors = 0;
    double corrected_pct = 0.0;  // 100 * fixed / baseline_errors, 0 when no errors
    double introduced_pct = 0.0; // 100 * broken / baseline_errors, 0 when no errors
};

// Compares baseline and corrected speaker labels against the reference over
// the aligned correct + substituted words. One speaker mapping serves both:
// overlap evidence comes from the baseline, and ids only the correction uses
// are placed by the tie rule. final_errors = baseline_errors - fixed + broken
// holds exactly.
ErrorAccounting error_accounting(const LabeledTranscript& baseline,
                                 const LabeledTranscript& corrected,
                                 const LabeledTranscript& reference);

struct ConversationReport {
    std::string id;
    WderBreakdown baseline_wder;
    WderBreakdown corrected_wder;
    ErrorAccounting accounting;
};

struct CorpusReport {
    std::vector<ConversationReport> conversations; // ordered by conversation id
    WderBreakdown baseline_total;
    WderBreakdown corrected_total;
    ErrorAccounting accounting_total;
};

// Scores each conversation and micro-aggregates the counts across the corpus.
// The three lists are matched by conversation id and must cover the same ids.
CorpusReport score_corpus(const std::vector<LabeledTranscript>& references,
                          const std::vector<LabeledTranscript>& baselines,
                          const std::vector<LabeledTranscript>& corrected);

// Human-oriented line report.
std::string render_report_text(const CorpusReport& report);

// Machine-readable key=value lines, one metric per line.
std::string render_report_key_values(const CorpusReport& report);

} // namespace aglsec
