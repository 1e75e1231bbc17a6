#include "parsrec/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "parsrec/errors.hpp"
#include "parsrec/stats.hpp"
#include "parsrec/unicode.hpp"
#include "parsrec/version.hpp"

namespace parsrec {

using ordered_json = nlohmann::ordered_json;

std::string normalize_value(std::string_view v) {
    const auto composed = uni::compose_canonical(uni::decode_utf8(v));
    std::vector<char32_t> out;
    out.reserve(composed.size());
    bool pending_space = false;
    for (char32_t cp : composed) {
        if (uni::is_space(cp)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(U' ');
            pending_space = false;
        }
        out.push_back(cp);
    }
    return uni::encode_utf8(out);
}

namespace {

std::string fold_case(std::string_view s) {
    // ASCII-only folding; the case-insensitive mode is a convenience flag.
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::map<std::pair<std::string, std::string>, long long> field_counts(
    const ParsedReference& ref, const EvalConfig& config) {
    std::map<std::pair<std::string, std::string>, long long> counts;
    for (const auto& f : ref.fields) {
        std::string v = normalize_value(f.value);
        if (config.case_insensitive) v = fold_case(v);
        counts[{f.type, std::move(v)}] += 1;
    }
    return counts;
}

}  // namespace

MatchCounts match_fields(const ParsedReference& extracted, const ParsedReference& truth,
                         const EvalConfig& config) {
    const auto ec = field_counts(extracted, config);
    const auto tc = field_counts(truth, config);
    MatchCounts m;
    for (const auto& [key, count] : ec) {
        auto it = tc.find(key);
        if (it != tc.end()) m.tp += std::min(count, it->second);
    }
    m.fp = static_cast<long long>(extracted.size()) - m.tp;
    m.fn = static_cast<long long>(truth.size()) - m.tp;
    return m;
}

RefScore score_reference(const MatchCounts& counts) {
    RefScore s;
    s.counts = counts;
    const long long extracted = counts.tp + counts.fp;
    const long long truth = counts.tp + counts.fn;
    if (extracted == 0 && truth == 0) {
        s.precision = s.recall = s.f1 = 1.0;
        return s;
    }
    s.precision = extracted > 0 ? static_cast<double>(counts.tp) / static_cast<double>(extracted) : 0.0;
    s.recall = truth > 0 ? static_cast<double>(counts.tp) / static_cast<double>(truth) : 0.0;
    const double pr = s.precision + s.recall;
    s.f1 = pr > 0.0 ? 2.0 * s.precision * s.recall / pr : 0.0;
    return s;
}

CorpusReport evaluate_system(const std::string& system_name,
                             const std::map<std::string, ParsedReference>& outputs,
                             const std::vector<ReferenceRecord>& records,
                             const MetadataTypeSet& types, const EvalConfig& config) {
    if (outputs.size() != records.size())
        throw InvalidInput("evaluate_system: outputs do not cover the reference set");

    CorpusReport report;
    report.system = system_name;
    report.n_refs = records.size();

    MatchCounts totals;
    std::map<std::string, MatchCounts> per_type_totals;
    std::map<std::string, std::pair<double, std::size_t>> doc_acc;  // sum f1, count

    for (const auto& r : records) {
        auto it = outputs.find(r.ref_id);
        if (it == outputs.end())
            throw InvalidInput("evaluate_system: missing output for ref " + r.ref_id);
        if (!r.truth)
            throw InvalidInput("evaluate_system: record without ground truth: " + r.ref_id);

        const MatchCounts counts = match_fields(it->second, *r.truth, config);
        const RefScore score = score_reference(counts);
        totals.tp += counts.tp;
        totals.fp += counts.fp;
        totals.fn += counts.fn;
        report.per_ref.push_back({r.ref_id, score});
        auto& acc = doc_acc[r.doc_id];
        acc.first += score.f1;
        acc.second += 1;

        for (const auto& label : types.labels()) {
            ParsedReference eo, to;
            for (const auto& f : it->second.fields)
                if (f.type == label) eo.fields.push_back(f);
            for (const auto& f : r.truth->fields)
                if (f.type == label) to.fields.push_back(f);
            const MatchCounts tcounts = match_fields(eo, to, config);
            auto& agg = per_type_totals[label];
            agg.tp += tcounts.tp;
            agg.fp += tcounts.fp;
            agg.fn += tcounts.fn;
        }
    }

    report.totals = totals;
    const RefScore micro = score_reference(totals);
    report.micro_precision = micro.precision;
    report.micro_recall = micro.recall;
    report.micro_f1 = micro.f1;
    report.fp_rate = 1.0 - micro.precision;
    report.fn_rate = 1.0 - micro.recall;

    report.n_docs = doc_acc.size();
    double macro_sum = 0.0;
    for (const auto& [doc, acc] : doc_acc) {
        const double mean = acc.first / static_cast<double>(acc.second);
        report.doc_mean_f1[doc] = mean;
        macro_sum += mean;
    }
    report.macro_f1 = report.n_docs > 0 ? macro_sum / static_cast<double>(report.n_docs) : 0.0;

    for (const auto& label : types.labels())
        report.per_type_f1[label] = score_reference(per_type_totals[label]).f1;
    return report;
}

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw InvalidInput("paired_ttest: length mismatch");
    if (a.size() < 2) throw InvalidInput("paired_ttest: need at least 2 pairs");
    const std::size_t n = a.size();

    std::vector<double> d(n);
    bool all_zero = true;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = a[i] - b[i];
        if (d[i] != 0.0) all_zero = false;
    }
    TTestResult r;
    r.n = n;
    r.df = static_cast<double>(n - 1);
    if (all_zero) {
        r.no_difference = true;
        r.t = 0.0;
        r.p = 1.0;
        return r;
    }
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) {
        // Identical nonzero shift everywhere: infinitely significant.
        r.t = mean > 0.0 ? HUGE_VAL : -HUGE_VAL;
        r.p = 0.0;
        return r;
    }
    r.t = mean * std::sqrt(static_cast<double>(n)) / sd;
    r.p = student_t_two_sided_p(r.t, r.df);
    return r;
}

std::map<std::string, double> choice_distribution(const std::vector<std::string>& choices,
                                                  const std::vector<std::string>& registry_order) {
    if (choices.empty()) throw InvalidInput("choice_distribution: no choices");
    std::map<std::string, double> shares;
    for (const auto& id : registry_order) shares[id] = 0.0;
    for (const auto& c : choices) {
        auto it = shares.find(c);
        if (it == shares.end()) throw InvalidInput("choice_distribution: unregistered parser " + c);
        it->second += 1.0;
    }
    for (auto& [_, v] : shares) v /= static_cast<double>(choices.size());
    return shares;
}

std::string report_to_json(const CorpusReport& report) {
    ordered_json j;
    j["version"] = kVersion;
    j["system"] = report.system;
    j["n_refs"] = report.n_refs;
    j["n_docs"] = report.n_docs;
    j["micro_precision"] = report.micro_precision;
    j["micro_recall"] = report.micro_recall;
    j["micro_f1"] = report.micro_f1;
    j["macro_f1"] = report.macro_f1;
    j["fp_rate"] = report.fp_rate;
    j["fn_rate"] = report.fn_rate;
    j["counts"] = {{"tp", report.totals.tp}, {"fp", report.totals.fp}, {"fn", report.totals.fn}};
    j["per_type_f1"] = report.per_type_f1;
    j["doc_mean_f1"] = report.doc_mean_f1;
    if (!report.choice_distribution.empty())
        j["choice_distribution"] = report.choice_distribution;
    ordered_json per_ref = ordered_json::array();
    for (const auto& pr : report.per_ref) {
        per_ref.push_back({{"ref_id", pr.ref_id},
                           {"tp", pr.score.counts.tp},
                           {"fp", pr.score.counts.fp},
                           {"fn", pr.score.counts.fn},
                           {"precision", pr.score.precision},
                           {"recall", pr.score.recall},
                           {"f1", pr.score.f1}});
    }
    j["per_ref"] = std::move(per_ref);
    return j.dump(2);
}

CorpusReport report_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    CorpusReport r;
    r.system = j.value("system", "");
    r.n_refs = j.value("n_refs", std::size_t{0});
    r.n_docs = j.value("n_docs", std::size_t{0});
    r.micro_precision = j.value("micro_precision", 0.0);
    r.micro_recall = j.value("micro_recall", 0.0);
    r.micro_f1 = j.value("micro_f1", 0.0);
    r.macro_f1 = j.value("macro_f1", 0.0);
    r.fp_rate = j.value("fp_rate", 0.0);
    r.fn_rate = j.value("fn_rate", 0.0);
    if (j.contains("counts")) {
        r.totals.tp = j["counts"].value("tp", 0LL);
        r.totals.fp = j["counts"].value("fp", 0LL);
        r.totals.fn = j["counts"].value("fn", 0LL);
    }
    if (j.contains("per_type_f1"))
        r.per_type_f1 = j["per_type_f1"].get<std::map<std::string, double>>();
    if (j.contains("doc_mean_f1"))
        r.doc_mean_f1 = j["doc_mean_f1"].get<std::map<std::string, double>>();
    if (j.contains("choice_distribution"))
        r.choice_distribution = j["choice_distribution"].get<std::map<std::string, double>>();
    if (j.contains("per_ref")) {
        for (const auto& pj : j["per_ref"]) {
            PerRefScore pr;
            pr.ref_id = pj.value("ref_id", "");
            pr.score.counts.tp = pj.value("tp", 0LL);
            pr.score.counts.fp = pj.value("fp", 0LL);
            pr.score.counts.fn = pj.value("fn", 0LL);
            pr.score.precision = pj.value("precision", 0.0);
            pr.score.recall = pj.value("recall", 0.0);
            pr.score.f1 = pj.value("f1", 0.0);
            r.per_ref.push_back(std::move(pr));
        }
    }
    return r;
}

std::string per_ref_scores_csv(const std::vector<CorpusReport>& reports) {
    std::ostringstream out;
    out << "ref_id,system,tp,fp,fn,p,r,f1\n";
    out.setf(std::ios::fixed);
    out.precision(6);
    for (const auto& report : reports) {
        for (const auto& pr : report.per_ref) {
            out << pr.ref_id << ',' << report.system << ',' << pr.score.counts.tp << ','
                << pr.score.counts.fp << ',' << pr.score.counts.fn << ',' << pr.score.precision
                << ',' << pr.score.recall << ',' << pr.score.f1 << '\n';
        }
    }
    return out.str();
}

}  // namespace parsrec
