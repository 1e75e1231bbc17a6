#include "parsrec/extraction.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "parsrec/errors.hpp"
#include "parsrec/hash.hpp"
#include "parsrec/version.hpp"

namespace parsrec {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

ExtractionTable::ExtractionTable(std::vector<std::string> parser_ids,
                                 std::vector<std::string> ref_ids)
    : parser_ids_(std::move(parser_ids)), ref_ids_(std::move(ref_ids)) {
    for (std::size_t i = 0; i < parser_ids_.size(); ++i) parser_index_[parser_ids_[i]] = i;
    for (std::size_t i = 0; i < ref_ids_.size(); ++i) ref_index_[ref_ids_[i]] = i;
    cells_.resize(parser_ids_.size() * ref_ids_.size());
}

const ParseOutcome& ExtractionTable::cell(const std::string& parser_id,
                                          const std::string& ref_id) const {
    auto pit = parser_index_.find(parser_id);
    auto rit = ref_index_.find(ref_id);
    if (pit == parser_index_.end()) throw InvalidInput("extraction table: unknown parser " + parser_id);
    if (rit == ref_index_.end()) throw InvalidInput("extraction table: unknown ref " + ref_id);
    return cells_[pit->second * ref_ids_.size() + rit->second];
}

void ExtractionTable::set_cell(const std::string& parser_id, const std::string& ref_id,
                               ParseOutcome outcome) {
    auto pit = parser_index_.find(parser_id);
    auto rit = ref_index_.find(ref_id);
    if (pit == parser_index_.end()) throw InvalidInput("extraction table: unknown parser " + parser_id);
    if (rit == ref_index_.end()) throw InvalidInput("extraction table: unknown ref " + ref_id);
    cells_[pit->second * ref_ids_.size() + rit->second] = std::move(outcome);
}

std::string hash_refs(const std::vector<ReferenceRecord>& refs) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const auto& r : refs) {
        h = fnv1a64(r.ref_id, h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(r.raw, h);
        h = fnv1a64("\x1e", h);
    }
    return hex64(h);
}

namespace {

ordered_json fields_to_json(const ParsedReference& ref) {
    ordered_json fields = ordered_json::array();
    for (const auto& f : ref.fields)
        fields.push_back(ordered_json{{"type", f.type}, {"value", f.value}});
    return fields;
}

ParsedReference fields_from_json(const ordered_json& j) {
    ParsedReference out;
    for (const auto& fj : j) out.add(fj.value("type", ""), fj.value("value", ""));
    return out;
}

// One cache file per (parser, refs-hash): JSONL of per-ref outcomes.
bool load_parser_cache(const std::string& path, const std::vector<ReferenceRecord>& refs,
                       std::vector<ParseOutcome>& out) {
    std::ifstream in(path);
    if (!in) return false;
    std::map<std::string, ParseOutcome> by_ref;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception&) {
            return false;  // corrupt cache: recompute
        }
        ParseOutcome outcome;
        outcome.failed = j.value("failed", false);
        if (j.contains("fields")) outcome.fields = fields_from_json(j["fields"]);
        by_ref[j.value("ref_id", "")] = std::move(outcome);
    }
    out.clear();
    out.reserve(refs.size());
    for (const auto& r : refs) {
        auto it = by_ref.find(r.ref_id);
        if (it == by_ref.end()) return false;
        out.push_back(it->second);
    }
    return true;
}

void store_parser_cache(const std::string& path, const std::vector<ReferenceRecord>& refs,
                        const std::vector<ParseOutcome>& outcomes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) return;  // cache is best effort
    for (std::size_t i = 0; i < refs.size(); ++i) {
        ordered_json j;
        j["ref_id"] = refs[i].ref_id;
        j["failed"] = outcomes[i].failed;
        j["fields"] = fields_to_json(outcomes[i].fields);
        out << j.dump() << "\n";
    }
}

}  // namespace

ExtractionTable run_all_parsers(ParserRunner& runner, const std::vector<ReferenceRecord>& refs,
                                const std::string& cache_dir) {
    const auto& registry = runner.registry();
    if (registry.size() == 0) throw InvalidInput("run_all_parsers: empty registry");

    std::vector<std::string> ref_ids;
    ref_ids.reserve(refs.size());
    for (const auto& r : refs) ref_ids.push_back(r.ref_id);

    ExtractionTable table(registry.ids(), ref_ids);
    table.refs_hash = hash_refs(refs);

    if (!cache_dir.empty()) fs::create_directories(cache_dir);

    for (const auto& parser_id : registry.ids()) {
        std::vector<ParseOutcome> outcomes;
        const std::string cache_path =
            cache_dir.empty() ? ""
                              : (fs::path(cache_dir) /
                                 (parser_id + "." + table.refs_hash + ".jsonl")).string();
        const bool cached = !cache_path.empty() && load_parser_cache(cache_path, refs, outcomes);
        if (!cached) {
            outcomes.clear();
            outcomes.reserve(refs.size());
            for (const auto& r : refs) outcomes.push_back(runner.parse(parser_id, r.raw, r.ref_id));
            if (!cache_path.empty()) store_parser_cache(cache_path, refs, outcomes);
        }
        for (std::size_t i = 0; i < refs.size(); ++i)
            table.set_cell(parser_id, refs[i].ref_id, std::move(outcomes[i]));
    }
    return table;
}

void write_extraction_table(const ExtractionTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write extraction table: " + path);
    ordered_json header;
    header["kind"] = "extraction_table";
    header["version"] = kVersion;
    header["refs_hash"] = table.refs_hash;
    header["split"] = table.split;
    header["registry"] = table.parser_ids();
    out << header.dump() << "\n";
    for (const auto& parser_id : table.parser_ids()) {
        for (const auto& ref_id : table.ref_ids()) {
            const ParseOutcome& cell = table.cell(parser_id, ref_id);
            ordered_json j;
            j["parser_id"] = parser_id;
            j["ref_id"] = ref_id;
            j["failed"] = cell.failed;
            j["fields"] = fields_to_json(cell.fields);
            out << j.dump() << "\n";
        }
    }
}

ExtractionTable read_extraction_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open extraction table: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("extraction table is empty: " + path);
    ordered_json header;
    try {
        header = ordered_json::parse(line);
    } catch (const std::exception& e) {
        throw InvalidInput(path + ": bad header: " + e.what());
    }
    if (header.value("kind", "") != "extraction_table")
        throw InvalidInput(path + " is not an extraction table");

    const auto parser_ids = header.at("registry").get<std::vector<std::string>>();
    std::vector<std::string> ref_ids;
    struct Row {
        std::string parser_id, ref_id;
        ParseOutcome outcome;
    };
    std::vector<Row> rows;
    std::map<std::string, bool> seen_ref;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ordered_json j = ordered_json::parse(line);
        Row row;
        row.parser_id = j.value("parser_id", "");
        row.ref_id = j.value("ref_id", "");
        row.outcome.failed = j.value("failed", false);
        if (j.contains("fields")) row.outcome.fields = fields_from_json(j["fields"]);
        if (!seen_ref.count(row.ref_id)) {
            seen_ref[row.ref_id] = true;
            ref_ids.push_back(row.ref_id);
        }
        rows.push_back(std::move(row));
    }
    ExtractionTable table(parser_ids, ref_ids);
    table.refs_hash = header.value("refs_hash", "");
    table.split = header.value("split", "");
    for (auto& row : rows) table.set_cell(row.parser_id, row.ref_id, std::move(row.outcome));
    return table;
}

}  // namespace parsrec
