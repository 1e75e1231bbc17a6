#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "parsrec/types.hpp"

namespace parsrec {

enum class ParserKind : std::uint8_t { Builtin, External };

struct ParserDescriptor {
    std::string parser_id;
    ParserKind kind = ParserKind::Builtin;
    // External only: argv of the child process speaking the line-delimited
    // JSON protocol on its standard streams.
    std::vector<std::string> command;
    int timeout_ms = 10000;
};

// Fixed-order parser registry; the ordering is load-bearing (tie-breaking).
struct ParserRegistry {
    std::vector<ParserDescriptor> parsers;

    std::size_t size() const { return parsers.size(); }
    std::vector<std::string> ids() const;
    const ParserDescriptor& at(const std::string& parser_id) const;
    bool contains(const std::string& parser_id) const;
};

struct ParseOutcome {
    ParsedReference fields;
    bool failed = false;  // crash, timeout or malformed response
};

// One extraction rule: a pattern applied to the raw string with capture
// groups mapped to metadata types (empty name = captured but not emitted).
// Full rules must match the entire string; partial rules are searched and
// may only fill types no earlier rule produced.
struct StyleTemplate {
    std::string pattern;
    std::vector<std::string> capture_types;
    bool full_match = true;
};

// A registry over a subset of the builtin parsers, in the given order.
ParserRegistry registry_from_builtin_ids(const std::vector<std::string>& ids);

// The ids shipped by builtin_registry(), in registry order:
//   bracket  - "[2] A.M. Acilar, A. Arslan, Title, Journal 36 (4) (2008) 8324-8332."
//   apa      - "Acilar, A. M., & Arslan, A. (2008). Title. Journal, 36(4), 8324-8332."
//   semi     - "Acilar AM; Arslan A; Title; Journal; 2008; 36(4); p. 8324."
//   dotnum   - "2. Acilar A.M., Arslan A. Title. Journal. 2008. Vol. 36. No. 4. P. 8324-8332."
//   plain    - "Acilar, A. M. & Arslan, A. Title. Journal 36, 8324-8332 (2008)."
//   generic  - weak fallback: year and page range only, any style
ParserRegistry builtin_registry();

// Pure template application for a builtin parser. Unknown ids throw.
ParseOutcome builtin_parse(const std::string& parser_id, const std::string& raw);
bool is_builtin(const std::string& parser_id);

// The template list backing a builtin parser (inspectable, e.g. for docs).
const std::vector<StyleTemplate>& builtin_templates(const std::string& parser_id);

class ExternalParserProcess;

// Dispatches to builtin implementations or to managed child processes.
// One process per external parser; requests to it are serialized. Fields
// with types outside the configured set are dropped with a warning.
class ParserRunner {
public:
    explicit ParserRunner(ParserRegistry registry,
                          MetadataTypeSet types = MetadataTypeSet::default_set());
    ~ParserRunner();

    ParserRunner(const ParserRunner&) = delete;
    ParserRunner& operator=(const ParserRunner&) = delete;

    const ParserRegistry& registry() const { return registry_; }
    ParseOutcome parse(const std::string& parser_id, const std::string& raw,
                       const std::string& ref_id = "");

private:
    ParserRegistry registry_;
    MetadataTypeSet types_;
    std::vector<std::unique_ptr<ExternalParserProcess>> processes_;
    std::uint64_t next_auto_id_ = 0;
};

// Registry file: JSON list of descriptors ({"parser_id", "kind", "command",
// "timeout_ms"}); builtin entries may omit everything but the id.
ParserRegistry registry_from_json_file(const std::string& path);
std::string registry_to_json(const ParserRegistry& registry);

}  // namespace parsrec
