#pragma once

#include <map>
#include <string>
#include <vector>

#include "parsrec/parsers.hpp"
#include "parsrec/types.hpp"

namespace parsrec {

// Cached matrix of every parser's output on every reference of a split.
// Complete over the cross-product: a failed cell holds an empty
// ParsedReference with the failure flag set.
class ExtractionTable {
public:
    ExtractionTable() = default;
    ExtractionTable(std::vector<std::string> parser_ids, std::vector<std::string> ref_ids);

    const std::vector<std::string>& parser_ids() const { return parser_ids_; }
    const std::vector<std::string>& ref_ids() const { return ref_ids_; }
    std::size_t cell_count() const { return parser_ids_.size() * ref_ids_.size(); }

    const ParseOutcome& cell(const std::string& parser_id, const std::string& ref_id) const;
    void set_cell(const std::string& parser_id, const std::string& ref_id, ParseOutcome outcome);

    // Fingerprint of the (ref_id, raw) pairs the table was built over.
    std::string refs_hash;
    // Which split the refs came from ("" for ad hoc tables).
    std::string split;

private:
    std::vector<std::string> parser_ids_;
    std::vector<std::string> ref_ids_;
    std::map<std::string, std::size_t> parser_index_;
    std::map<std::string, std::size_t> ref_index_;
    std::vector<ParseOutcome> cells_;  // parser-major
};

// Content hash of a reference list, used as the cache key and for staleness
// checks.
std::string hash_refs(const std::vector<ReferenceRecord>& refs);

// Applies every registered parser to every reference. With a cache
// directory, per-parser results are persisted keyed by (parser_id,
// refs hash) and re-runs are served from disk.
ExtractionTable run_all_parsers(ParserRunner& runner, const std::vector<ReferenceRecord>& refs,
                                const std::string& cache_dir = "");

void write_extraction_table(const ExtractionTable& table, const std::string& path);
ExtractionTable read_extraction_table(const std::string& path);

}  // namespace parsrec
