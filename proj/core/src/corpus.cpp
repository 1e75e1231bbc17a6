#include "parsrec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "parsrec/errors.hpp"
#include "parsrec/rng.hpp"

namespace parsrec {

using ordered_json = nlohmann::ordered_json;

namespace {

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::vector<Violation> validate_corpus(const Corpus& corpus, const MetadataTypeSet& types) {
    std::vector<Violation> out;
    std::set<std::string> ids;
    for (const auto& r : corpus.records) {
        if (r.ref_id.empty()) out.push_back({r.ref_id, "ref_id is empty"});
        if (r.doc_id.empty()) out.push_back({r.ref_id, "doc_id is empty"});
        if (r.raw.empty() || is_blank(r.raw)) out.push_back({r.ref_id, "raw reference string is empty"});
        if (!r.ref_id.empty() && !ids.insert(r.ref_id).second)
            out.push_back({r.ref_id, "duplicate ref_id"});
        if (r.truth) {
            for (const auto& f : r.truth->fields) {
                if (is_blank(f.value))
                    out.push_back({r.ref_id, "truth field with empty value (type " + f.type + ")"});
                if (!types.contains(f.type))
                    out.push_back({r.ref_id, "truth field with unconfigured type: " + f.type});
            }
        }
    }
    return out;
}

SplitAssignment split_corpus(const Corpus& corpus, const SplitFractions& fractions,
                             std::uint64_t seed) {
    const double f[3] = {fractions.train, fractions.meta, fractions.test};
    double sum = 0.0;
    for (double x : f) {
        if (x < 0.0) throw InvalidInput("split fractions must be non-negative");
        sum += x;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw InvalidInput("split fractions must sum to 1");

    std::vector<std::string> docs = corpus.doc_ids();
    std::mt19937_64 gen(derive_seed(seed, "split"));
    shuffle_pinned(docs, gen);

    // Largest-remainder rounding of the three quotas.
    const std::size_t n = docs.size();
    std::size_t base[3];
    double rem[3];
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double quota = f[i] * static_cast<double>(n);
        base[i] = static_cast<std::size_t>(std::floor(quota + 1e-9));
        rem[i] = quota - static_cast<double>(base[i]);
        assigned += base[i];
    }
    std::size_t leftover = n - assigned;
    int order[3] = {0, 1, 2};
    std::stable_sort(std::begin(order), std::end(order),
                     [&](int a, int b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; k < leftover; ++k) base[order[k % 3]] += 1;

    SplitAssignment out;
    out.seed = seed;
    out.fractions = fractions;
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        for (std::size_t k = 0; k < base[i] && pos < n; ++k, ++pos)
            out.by_doc[docs[pos]] = static_cast<Split>(i);
    }
    return out;
}

Corpus read_corpus_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open corpus file: " + path);
    Corpus corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception& e) {
            throw InvalidInput(path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
        }
        ReferenceRecord r;
        r.doc_id = j.value("doc_id", "");
        r.ref_id = j.value("ref_id", "");
        r.raw = j.value("ref", "");
        if (j.contains("truth")) {
            ParsedReference t;
            for (const auto& fj : j.at("truth"))
                t.add(fj.value("type", ""), fj.value("value", ""));
            r.truth = std::move(t);
        }
        corpus.records.push_back(std::move(r));
    }
    return corpus;
}

void write_corpus_jsonl(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write corpus file: " + path);
    for (const auto& r : corpus.records) {
        ordered_json j;
        j["doc_id"] = r.doc_id;
        j["ref_id"] = r.ref_id;
        j["ref"] = r.raw;
        if (r.truth) {
            ordered_json fields = ordered_json::array();
            for (const auto& f : r.truth->fields)
                fields.push_back(ordered_json{{"type", f.type}, {"value", f.value}});
            j["truth"] = std::move(fields);
        }
        out << j.dump() << "\n";
    }
}

void write_split_file(const SplitAssignment& split, const std::string& corpus_hash,
                      const std::string& path) {
    ordered_json j;
    j["seed"] = split.seed;
    j["fractions"] = {{"train", split.fractions.train},
                      {"meta", split.fractions.meta},
                      {"test", split.fractions.test}};
    j["corpus_hash"] = corpus_hash;
    ordered_json assignment = ordered_json::object();
    for (const auto& [doc, s] : split.by_doc) assignment[doc] = split_name(s);
    j["assignment"] = std::move(assignment);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write split file: " + path);
    out << j.dump(2) << "\n";
}

SplitAssignment read_split_file(const std::string& path, std::string* corpus_hash) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open split file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw InvalidInput(path + ": bad JSON: " + e.what());
    }
    SplitAssignment out;
    out.seed = j.value("seed", std::uint64_t{0});
    out.fractions.train = j.at("fractions").value("train", 0.0);
    out.fractions.meta = j.at("fractions").value("meta", 0.0);
    out.fractions.test = j.at("fractions").value("test", 0.0);
    for (const auto& [doc, name] : j.at("assignment").items()) {
        auto s = split_from_name(name.get<std::string>());
        if (!s) throw InvalidInput(path + ": unknown split name for doc " + doc);
        out.by_doc[doc] = *s;
    }
    if (corpus_hash) *corpus_hash = j.value("corpus_hash", "");
    return out;
}

std::vector<ReferenceRecord> records_in_split(const Corpus& corpus, const SplitAssignment& split,
                                              Split which) {
    std::vector<ReferenceRecord> out;
    for (const auto& r : corpus.records)
        if (split.of(r.doc_id) == which) out.push_back(r);
    return out;
}

std::size_t count_cross_split_duplicates(const Corpus& corpus, const SplitAssignment& split) {
    std::map<std::string, std::set<Split>> seen;
    for (const auto& r : corpus.records) seen[r.raw].insert(split.of(r.doc_id));
    std::size_t n = 0;
    for (const auto& [_, splits] : seen)
        if (splits.size() > 1) ++n;
    return n;
}

}  // namespace parsrec
