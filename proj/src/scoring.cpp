#include "aglsec/scoring.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "aglsec/error.hpp"

namespace aglsec {
namespace {

std::string format_exact(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string format_rounded(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6f", value);
    return buffer;
}

std::string format_percent(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.1f%%", value);
    return buffer;
}

std::vector<int> speaker_column(const LabeledTranscript& t) {
    std::vector<int> speakers;
    speakers.reserve(t.words.size());
    for (const WordRecord& w : t.words) speakers.push_back(w.speaker);
    return speakers;
}

void check_alignment_indices(const AlignmentResult& alignment, std::size_t ref_size,
                             std::size_t hyp_size) {
    for (const AlignedPair& p : alignment.pairs) {
        const bool needs_ref = p.kind != AlignKind::kInsertion;
        const bool needs_hyp = p.kind != AlignKind::kDeletion;
        if (needs_ref && p.ref >= ref_size) {
            throw std::invalid_argument("alignment pair references word " +
                                        std::to_string(p.ref) + " outside the reference");
        }
        if (needs_hyp && p.hyp >= hyp_size) {
            throw std::invalid_argument("alignment pair references word " +
                                        std::to_string(p.hyp) + " outside the hypothesis");
        }
    }
}

struct AccountingCounts {
    std::size_t baseline_errors = 0;
    std::size_t fixed = 0;
    std::size_t broken = 0;
    std::size_t final_errors = 0;
};

ErrorAccounting accounting_from_counts(const AccountingCounts& c) {
    ErrorAccounting acc;
    acc.baseline_errors = c.baseline_errors;
    acc.fixed = c.fixed;
    acc.broken = c.broken;
    acc.final_errors = c.final_errors;
    if (c.baseline_errors > 0) {
        acc.corrected_pct =
            100.0 * static_cast<double>(c.fixed) / static_cast<double>(c.baseline_errors);
        acc.introduced_pct =
            100.0 * static_cast<double>(c.broken) / static_cast<double>(c.baseline_errors);
    }
    return acc;
}

} // namespace

LabeledTranscript serialize_by_start_time(const LabeledTranscript& transcript) {
    LabeledTranscript out = transcript;
    std::stable_sort(out.words.begin(), out.words.end(),
                     [](const WordRecord& a, const WordRecord& b) {
                         if (a.start_frame != b.start_frame) return a.start_frame < b.start_frame;
                         return a.speaker < b.speaker;
                     });
    return out;
}

AlignmentResult align_words(const LabeledTranscript& reference,
                            const LabeledTranscript& hypothesis) {
    const std::vector<WordRecord>& ref = reference.words;
    const std::vector<WordRecord>& hyp = hypothesis.words;
    if (ref.empty() && hyp.empty()) {
        throw std::invalid_argument("cannot align two empty transcripts");
    }

    const std::size_t n = ref.size();
    const std::size_t m = hyp.size();
    std::vector<std::vector<int>> cost(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = 1; i <= n; ++i) cost[i][0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) cost[0][j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const int diag = cost[i - 1][j - 1] + (ref[i - 1].text == hyp[j - 1].text ? 0 : 1);
            const int del = cost[i - 1][j] + 1;
            const int ins = cost[i][j - 1] + 1;
            cost[i][j] = std::min({diag, del, ins});
        }
    }

    AlignmentResult result;
    std::size_t i = n;
    std::size_t j = m;
    while (i > 0 || j > 0) {
        AlignedPair pair;
        const bool diag_ok = i > 0 && j > 0;
        if (diag_ok && ref[i - 1].text == hyp[j - 1].text &&
            cost[i][j] == cost[i - 1][j - 1]) {
            pair = {i - 1, j - 1, AlignKind::kCorrect};
            ++result.correct;
            --i, --j;
        } else if (diag_ok && cost[i][j] == cost[i - 1][j - 1] + 1) {
            pair = {i - 1, j - 1, AlignKind::kSubstitution};
            ++result.substitutions;
            --i, --j;
        } else if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
            pair = {i - 1, kAlignGap, AlignKind::kDeletion};
            ++result.deletions;
            --i;
        } else {
            pair = {kAlignGap, j - 1, AlignKind::kInsertion};
            ++result.insertions;
            --j;
        }
        result.pairs.push_back(pair);
    }
    std::reverse(result.pairs.begin(), result.pairs.end());
    return result;
}

namespace {

// Shared brute force behind best_speaker_mapping and error_accounting:
// aligned_speakers carries (ref, hyp) ids at every correct or substituted
// position; hyp_set may include extra ids to place (assigned purely by the
// tie rule when they have no overlap evidence).
std::vector<std::pair<int, int>> assign_speakers(
    const std::vector<std::pair<int, int>>& aligned_speakers, const std::set<int>& hyp_set,
    const std::set<int>& ref_set) {
    if (hyp_set.empty()) return {};

    const std::vector<int> hyp_ids(hyp_set.begin(), hyp_set.end());
    std::vector<int> targets(ref_set.begin(), ref_set.end());
    // Pad with ids that can never match so every assignment is injective even
    // when the hypothesis has more speakers than the reference.
    int sentinel = (targets.empty() ? 0 : targets.back()) + 1;
    while (targets.size() < hyp_ids.size()) targets.push_back(sentinel++);
    std::sort(targets.begin(), targets.end());

    std::map<int, std::size_t> hyp_pos;
    for (std::size_t k = 0; k < hyp_ids.size(); ++k) hyp_pos[hyp_ids[k]] = k;

    std::vector<int> best_assignment;
    long long best_score = -1;
    std::vector<int> perm = targets;
    do {
        long long score = 0;
        for (const auto& [r, h] : aligned_speakers) {
            if (perm[hyp_pos[h]] == r) ++score;
        }
        if (score > best_score) {
            best_score = score;
            best_assignment.assign(perm.begin(),
                                   perm.begin() + static_cast<std::ptrdiff_t>(hyp_ids.size()));
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::vector<std::pair<int, int>> mapping;
    for (std::size_t k = 0; k < hyp_ids.size(); ++k) {
        if (ref_set.count(best_assignment[k]) == 0) continue;
        mapping.emplace_back(hyp_ids[k], best_assignment[k]);
    }
    return mapping;
}

// Collects the (ref, hyp) speaker ids at aligned correct/substituted pairs.
std::vector<std::pair<int, int>> aligned_speaker_pairs(const AlignmentResult& alignment,
                                                       const std::vector<int>& ref_speakers,
                                                       const std::vector<int>& hyp_speakers) {
    std::vector<std::pair<int, int>> pairs;
    for (const AlignedPair& p : alignment.pairs) {
        if (p.kind != AlignKind::kCorrect && p.kind != AlignKind::kSubstitution) continue;
        pairs.emplace_back(ref_speakers[p.ref], hyp_speakers[p.hyp]);
    }
    return pairs;
}

} // namespace

std::vector<std::pair<int, int>> best_speaker_mapping(const AlignmentResult& alignment,
                                                      const std::vector<int>& ref_speakers,
                                                      const std::vector<int>& hyp_speakers) {
    check_alignment_indices(alignment, ref_speakers.size(), hyp_speakers.size());
    const auto aligned = aligned_speaker_pairs(alignment, ref_speakers, hyp_speakers);
    std::set<int> hyp_set;
    std::set<int> ref_set;
    for (const auto& [r, h] : aligned) {
        ref_set.insert(r);
        hyp_set.insert(h);
    }
    return assign_speakers(aligned, hyp_set, ref_set);
}

WderBreakdown wder(const AlignmentResult& alignment, const std::vector<int>& ref_speakers,
                   const std::vector<int>& hyp_speakers) {
    return wder_with_mapping(alignment, ref_speakers, hyp_speakers,
                             best_speaker_mapping(alignment, ref_speakers, hyp_speakers));
}

WderBreakdown wder_with_mapping(const AlignmentResult& alignment,
                                const std::vector<int>& ref_speakers,
                                const std::vector<int>& hyp_speakers,
                                const std::vector<std::pair<int, int>>& mapping) {
    check_alignment_indices(alignment, ref_speakers.size(), hyp_speakers.size());
    WderBreakdown breakdown;
    breakdown.denominator = alignment.correct + alignment.substitutions;
    if (breakdown.denominator == 0) {
        throw std::invalid_argument("no aligned words to score: every pair is an insertion "
                                    "or deletion");
    }

    std::map<int, int> mapped;
    std::set<int> targets_used;
    for (const auto& [h, r] : mapping) {
        if (!mapped.emplace(h, r).second) {
            throw std::invalid_argument("speaker mapping assigns hypothesis speaker " +
                                        std::to_string(h) + " twice");
        }
        if (!targets_used.insert(r).second) {
            throw std::invalid_argument("speaker mapping assigns reference speaker " +
                                        std::to_string(r) + " twice");
        }
    }

    for (const AlignedPair& p : alignment.pairs) {
        if (p.kind != AlignKind::kCorrect && p.kind != AlignKind::kSubstitution) continue;
        const auto it = mapped.find(hyp_speakers[p.hyp]);
        const bool speaker_ok = it != mapped.end() && it->second == ref_speakers[p.ref];
        if (speaker_ok) continue;
        if (p.kind == AlignKind::kCorrect) ++breakdown.c_is;
        else ++breakdown.s_is;
    }
    breakdown.wder = static_cast<double>(breakdown.c_is + breakdown.s_is) /
                     static_cast<double>(breakdown.denominator);
    return breakdown;
}

ErrorAccounting error_accounting(const LabeledTranscript& baseline,
                                 const LabeledTranscript& corrected,
                                 const LabeledTranscript& reference) {
    if (!same_word_sequence(baseline, corrected)) {
        throw std::invalid_argument("baseline and corrected transcripts carry different word "
                                    "sequences; correction must only relabel speakers");
    }

    const AlignmentResult alignment = align_words(reference, baseline);
    const std::vector<int> ref_sp = speaker_column(reference);
    const std::vector<int> base_sp = speaker_column(baseline);
    const std::vector<int> corr_sp = speaker_column(corrected);
    check_alignment_indices(alignment, ref_sp.size(), base_sp.size());

    // One mapping serves both label sets. Overlap evidence comes from the
    // baseline; ids the correction introduced are placed by the tie rule so
    // they can still be credited.
    const auto aligned = aligned_speaker_pairs(alignment, ref_sp, base_sp);
    std::set<int> hyp_set;
    std::set<int> ref_set;
    for (const auto& [r, h] : aligned) {
        ref_set.insert(r);
        hyp_set.insert(h);
    }
    for (const AlignedPair& p : alignment.pairs) {
        if (p.kind == AlignKind::kCorrect || p.kind == AlignKind::kSubstitution) {
            hyp_set.insert(corr_sp[p.hyp]);
        }
    }

    std::map<int, int> mapped;
    for (const auto& [h, r] : assign_speakers(aligned, hyp_set, ref_set)) {
        mapped[h] = r;
    }
    const auto agrees = [&](int hyp_speaker, int ref_speaker) {
        const auto it = mapped.find(hyp_speaker);
        return it != mapped.end() && it->second == ref_speaker;
    };

    AccountingCounts counts;
    for (const AlignedPair& p : alignment.pairs) {
        if (p.kind != AlignKind::kCorrect && p.kind != AlignKind::kSubstitution) continue;
        const bool base_wrong = !agrees(base_sp[p.hyp], ref_sp[p.ref]);
        const bool corr_wrong = !agrees(corr_sp[p.hyp], ref_sp[p.ref]);
        if (base_wrong) ++counts.baseline_errors;
        if (corr_wrong) ++counts.final_errors;
        if (base_wrong && !corr_wrong) ++counts.fixed;
        if (!base_wrong && corr_wrong) ++counts.broken;
    }
    return accounting_from_counts(counts);
}

CorpusReport score_corpus(const std::vector<LabeledTranscript>& references,
                          const std::vector<LabeledTranscript>& baselines,
                          const std::vector<LabeledTranscript>& corrected) {
    if (references.size() != baselines.size() || references.size() != corrected.size()) {
        throw std::invalid_argument("reference, baseline and corrected corpora differ in size");
    }

    const auto index_by_id = [](const std::vector<LabeledTranscript>& list, const char* role) {
        std::map<std::string, const LabeledTranscript*> index;
        for (const LabeledTranscript& t : list) {
            if (!index.emplace(t.id, &t).second) {
                throw std::invalid_argument(std::string("duplicate conversation id '") + t.id +
                                            "' among " + role + " transcripts");
            }
        }
        return index;
    };
    const auto refs = index_by_id(references, "reference");
    const auto bases = index_by_id(baselines, "baseline");
    const auto corrs = index_by_id(corrected, "corrected");

    CorpusReport report;
    AccountingCounts totals;
    for (const auto& [id, ref] : refs) {
        const auto base_it = bases.find(id);
        const auto corr_it = corrs.find(id);
        if (base_it == bases.end() || corr_it == corrs.end()) {
            throw std::invalid_argument("conversation '" + id +
                                        "' is missing a baseline or corrected transcript");
        }

        ConversationReport conv;
        conv.id = id;
        const std::vector<int> ref_sp = speaker_column(*ref);
        conv.baseline_wder = wder(align_words(*ref, *base_it->second), ref_sp,
                                  speaker_column(*base_it->second));
        conv.corrected_wder = wder(align_words(*ref, *corr_it->second), ref_sp,
                                   speaker_column(*corr_it->second));
        conv.accounting = error_accounting(*base_it->second, *corr_it->second, *ref);

        report.baseline_total.c_is += conv.baseline_wder.c_is;
        report.baseline_total.s_is += conv.baseline_wder.s_is;
        report.baseline_total.denominator += conv.baseline_wder.denominator;
        report.corrected_total.c_is += conv.corrected_wder.c_is;
        report.corrected_total.s_is += conv.corrected_wder.s_is;
        report.corrected_total.denominator += conv.corrected_wder.denominator;
        totals.baseline_errors += conv.accounting.baseline_errors;
        totals.fixed += conv.accounting.fixed;
        totals.broken += conv.accounting.broken;
        totals.final_errors += conv.accounting.final_errors;

        report.conversations.push_back(std::move(conv));
    }

    if (report.baseline_total.denominator > 0) {
        report.baseline_total.wder =
            static_cast<double>(report.baseline_total.c_is + report.baseline_total.s_is) /
            static_cast<double>(report.baseline_total.denominator);
    }
    if (report.corrected_total.denominator > 0) {
        report.corrected_total.wder =
            static_cast<double>(report.corrected_total.c_is + report.corrected_total.s_is) /
            static_cast<double>(report.corrected_total.denominator);
    }
    report.accounting_total = accounting_from_counts(totals);
    return report;
}

std::string render_report_text(const CorpusReport& report) {
    std::string out;
    const auto wder_line = [&](const char* label, const WderBreakdown& b) {
        out += "  ";
        out += label;
        out += " wder " + format_rounded(b.wder);
        out += "  c_is " + std::to_string(b.c_is);
        out += "  s_is " + std::to_string(b.s_is);
        out += "  denominator " + std::to_string(b.denominator);
        out += "\n";
    };
    const auto accounting_line = [&](const ErrorAccounting& a) {
        out += "  accounting baseline_errors " + std::to_string(a.baseline_errors);
        out += "  fixed " + std::to_string(a.fixed);
        out += "  broken " + std::to_string(a.broken);
        out += "  final " + std::to_string(a.final_errors);
        out += "  corrected " + format_percent(a.corrected_pct);
        out += "  introduced " + format_percent(a.introduced_pct);
        out += "\n";
    };

    for (const ConversationReport& conv : report.conversations) {
        out += "conversation " + conv.id + "\n";
        wder_line("baseline ", conv.baseline_wder);
        wder_line("corrected", conv.corrected_wder);
        accounting_line(conv.accounting);
    }
    out += "corpus (" + std::to_string(report.conversations.size()) + " conversations)\n";
    wder_line("baseline ", report.baseline_total);
    wder_line("corrected", report.corrected_total);
    accounting_line(report.accounting_total);
    return out;
}

std::string render_report_key_values(const CorpusReport& report) {
    std::string out;
    const auto emit_wder = [&](const std::string& prefix, const WderBreakdown& b) {
        out += prefix + ".wder=" + format_exact(b.wder) + "\n";
        out += prefix + ".c_is=" + std::to_string(b.c_is) + "\n";
        out += prefix + ".s_is=" + std::to_string(b.s_is) + "\n";
        out += prefix + ".denominator=" + std::to_string(b.denominator) + "\n";
    };
    const auto emit_accounting = [&](const std::string& prefix, const ErrorAccounting& a) {
        out += prefix + ".baseline_errors=" + std::to_string(a.baseline_errors) + "\n";
        out += prefix + ".fixed=" + std::to_string(a.fixed) + "\n";
        out += prefix + ".broken=" + std::to_string(a.broken) + "\n";
        out += prefix + ".final_errors=" + std::to_string(a.final_errors) + "\n";
        out += prefix + ".corrected_pct=" + format_exact(a.corrected_pct) + "\n";
        out += prefix + ".introduced_pct=" + format_exact(a.introduced_pct) + "\n";
    };

    for (const ConversationReport& conv : report.conversations) {
        const std::string base = "conversation." + conv.id;
        emit_wder(base + ".baseline", conv.baseline_wder);
        emit_wder(base + ".corrected", conv.corrected_wder);
        emit_accounting(base + ".accounting", conv.accounting);
    }
    out += "corpus.conversations=" + std::to_string(report.conversations.size()) + "\n";
    emit_wder("corpus.baseline", report.baseline_total);
    emit_wder("corpus.corrected", report.corrected_total);
    emit_accounting("corpus.accounting", report.accounting_total);
    return out;
}

} // namespace aglsec
