#include "parsrec/parsers.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>

#include <nlohmann/json.hpp>

#include "parsrec/errors.hpp"
#include "parsrec/external_parser.hpp"

namespace parsrec {

using ordered_json = nlohmann::ordered_json;

namespace {

// Shared regex pieces. Dashes match the ASCII hyphen and the typographic
// en/em dashes.
const std::string kDash = R"((?:–|—|-))";
const std::string kName = R"([A-Z][A-Za-z'-]+)";

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

struct BuiltinParser {
    std::vector<StyleTemplate> templates;
    std::vector<std::regex> compiled;
};

std::map<std::string, BuiltinParser> make_builtins() {
    std::map<std::string, BuiltinParser> out;

    const auto add = [&](const std::string& id, std::vector<StyleTemplate> templates) {
        BuiltinParser p;
        p.templates = std::move(templates);
        for (const auto& t : p.templates)
            p.compiled.emplace_back(t.pattern, std::regex::ECMAScript | std::regex::optimize);
        out.emplace(id, std::move(p));
    };

    // bracket: "[2] A.M. Acilar, A. Arslan, Title, Journal 36 (4) (2008) 8324-8332."
    const std::string bracket_author = R"((?:[A-Z]\.)+\s+)" + kName;
    add("bracket",
        {
            {R"(^\s*\[(\d+)\]\s+()" + bracket_author + R"()((?:,\s+)" + bracket_author +
                 R"()*),\s+([^,]+),\s+([^,]+?)\s+(\d+)\s+\((\d+)\)\s+\((\d{4})\)\s+(\d+)(?:\s*)" +
                 kDash + R"(\s*(\d+))?\s*\.?\s*$)",
             {"", "author", "", "", "source", "volume", "issue", "year", "page", ""},
             true},
            {R"(^\s*\[(\d+)\]\s+()" + bracket_author + R"()((?:,\s+)" + bracket_author +
                 R"()*),\s+([^,]+),\s+([^,]+?)\s+(\d+)\s+\((\d{4})\)\s+(\d+)(?:\s*)" + kDash +
                 R"(\s*(\d+))?\s*\.?\s*$)",
             {"", "author", "", "", "source", "volume", "year", "page", ""},
             true},
            {R"(^\s*\[\d+\]\s+()" + bracket_author + R"())", {"author"}, false},
            {R"(\((\d{4})\))", {"year"}, false},
            {R"((\d+)\s*)" + kDash + R"(\s*\d+\s*\.?\s*$)", {"page"}, false},
        });

    // apa: "Acilar, A. M., & Arslan, A. (2008). Title. Journal, 36(4), 8324-8332."
    const std::string apa_author = kName + R"(,\s+(?:[A-Z]\.\s*)+)";
    add("apa",
        {
            {R"(^\s*()" + apa_author + R"()((?:,\s*)" + apa_author + R"()*(?:,?\s*&\s*)" +
                 apa_author + R"()?)\((\d{4})\)\.\s+([^.]+)\.\s+([^,]+),\s+(\d+)\((\d+)\),\s+(\d+)(?:\s*)" +
                 kDash + R"(\s*(\d+))?\s*\.?\s*$)",
             {"author", "", "year", "", "source", "volume", "issue", "page", ""},
             true},
            {R"(^\s*()" + apa_author + R"()((?:,\s*)" + apa_author + R"()*(?:,?\s*&\s*)" +
                 apa_author + R"()?)\((\d{4})\)\.\s+([^.]+)\.\s+([^,]+),\s+(\d+),\s+(\d+)(?:\s*)" +
                 kDash + R"(\s*(\d+))?\s*\.?\s*$)",
             {"author", "", "year", "", "source", "volume", "page", ""},
             true},
            {R"(^\s*()" + apa_author + ")(?:,|&|\\()", {"author"}, false},
            {R"(\((\d{4})\))", {"year"}, false},
            {R"(,\s+(\d+)\s*)" + kDash + R"(\s*\d+\s*\.?\s*$)", {"page"}, false},
        });

    // semi: "Acilar AM; Arslan A; Title; Journal; 2008; 36(4); p. 8324."
    const std::string semi_author = kName + R"(\s+[A-Z]{1,3})";
    add("semi",
        {
            {R"(^\s*()" + semi_author + R"()((?:;\s*)" + semi_author +
                 R"()*);\s*([^;]+);\s*([^;]+);\s*(\d{4});\s*(\d+)(?:\((\d+)\))?;\s*p\.\s*(\d+)\s*\.?\s*$)",
             {"author", "", "", "source", "year", "volume", "issue", "page"},
             true},
            {R"(^\s*()" + semi_author + R"();)", {"author"}, false},
            {R"(;\s*(\d{4})\s*;)", {"year"}, false},
            {R"(p\.\s*(\d+))", {"page"}, false},
        });

    // dotnum: "2. Acilar A.M., Arslan A. Title. Journal. 2008. Vol. 36. No. 4. P. 8324-8332."
    const std::string dot_author = kName + R"(\s+(?:[A-Z]\.)+)";
    add("dotnum",
        {
            {R"(^\s*(\d+)\.\s+()" + dot_author + R"()((?:,\s*)" + dot_author +
                 R"()*)\s+([^.;]+)\.\s+([^.;]+)\.\s+(\d{4})\.\s+Vol\.\s+(\d+)\.\s+(?:No\.\s+(\d+)\.\s+)?P\.\s+(\d+)(?:\s*)" +
                 kDash + R"(\s*(\d+))?\s*\.?\s*$)",
             {"", "author", "", "", "source", "year", "volume", "issue", "page", ""},
             true},
            {R"(^\s*\d+\.\s+()" + dot_author + R"())", {"author"}, false},
            {R"(\.\s+(\d{4})\.)", {"year"}, false},
            {R"(P\.\s+(\d+))", {"page"}, false},
        });

    // plain: "Acilar, A. M. & Arslan, A. Title. Journal 36, 8324-8332 (2008)."
    add("plain",
        {
            {R"(^\s*()" + apa_author + R"()((?:,\s*)" + apa_author + R"()*(?:&\s*)" + apa_author +
                 R"()?)([A-Z][^.;]*)\.\s+([^,]+?)\s+(\d+),\s+(\d+)(?:\s*)" + kDash +
                 R"(\s*(\d+))?\s+\((\d{4})\)\s*\.?\s*$)",
             {"author", "", "", "source", "volume", "page", "", "year"},
             true},
            {R"(^\s*()" + apa_author + R"())", {"author"}, false},
            {R"(\((\d{4})\)\s*\.?\s*$)", {"year"}, false},
            {R"((\d+)\s*)" + kDash + R"(\s*\d+\s+\()", {"page"}, false},
        });

    // generic: weak fallback, style-independent year and page only.
    add("generic",
        {
            {R"(\((\d{4})\))", {"year"}, false},
            {R"((?:^|[^0-9])((?:19|20)\d{2})(?![0-9]))", {"year"}, false},
            {R"((\d+)\s*)" + kDash + R"(\s*\d+)", {"page"}, false},
            {R"(p\.\s*(\d+))", {"page"}, false},
        });

    return out;
}

const std::map<std::string, BuiltinParser>& builtins() {
    static const std::map<std::string, BuiltinParser> instance = make_builtins();
    return instance;
}

}  // namespace

std::vector<std::string> ParserRegistry::ids() const {
    std::vector<std::string> out;
    out.reserve(parsers.size());
    for (const auto& p : parsers) out.push_back(p.parser_id);
    return out;
}

const ParserDescriptor& ParserRegistry::at(const std::string& parser_id) const {
    for (const auto& p : parsers)
        if (p.parser_id == parser_id) return p;
    throw InvalidInput("parser not registered: " + parser_id);
}

bool ParserRegistry::contains(const std::string& parser_id) const {
    return std::any_of(parsers.begin(), parsers.end(),
                       [&](const ParserDescriptor& p) { return p.parser_id == parser_id; });
}

ParserRegistry builtin_registry() {
    ParserRegistry r;
    for (const char* id : {"bracket", "apa", "semi", "dotnum", "generic"})
        r.parsers.push_back({id, ParserKind::Builtin, {}, 0});
    return r;
}

ParserRegistry registry_from_builtin_ids(const std::vector<std::string>& ids) {
    ParserRegistry r;
    for (const auto& id : ids) {
        if (!is_builtin(id)) throw InvalidInput("unknown builtin parser: " + id);
        if (r.contains(id)) throw InvalidInput("duplicate parser_id: " + id);
        r.parsers.push_back({id, ParserKind::Builtin, {}, 0});
    }
    if (r.parsers.empty()) throw InvalidInput("registry is empty");
    return r;
}

bool is_builtin(const std::string& parser_id) { return builtins().count(parser_id) > 0; }

const std::vector<StyleTemplate>& builtin_templates(const std::string& parser_id) {
    auto it = builtins().find(parser_id);
    if (it == builtins().end()) throw InvalidInput("unknown builtin parser: " + parser_id);
    return it->second.templates;
}

ParseOutcome builtin_parse(const std::string& parser_id, const std::string& raw) {
    auto it = builtins().find(parser_id);
    if (it == builtins().end()) throw InvalidInput("unknown builtin parser: " + parser_id);
    const BuiltinParser& parser = it->second;

    ParseOutcome out;
    std::vector<std::string> have_names;  // types already filled
    const auto has = [&](const std::string& type) {
        return std::find(have_names.begin(), have_names.end(), type) != have_names.end();
    };
    const auto emit = [&](const std::string& type, const std::string& value) {
        const std::string v = trim(value);
        if (v.empty()) return;
        out.fields.add(type, v);
        have_names.push_back(type);
    };

    bool matched_full = false;
    for (std::size_t ti = 0; ti < parser.templates.size(); ++ti) {
        const StyleTemplate& tpl = parser.templates[ti];
        if (tpl.full_match) {
            if (matched_full) continue;
            std::smatch m;
            if (!std::regex_match(raw, m, parser.compiled[ti])) continue;
            matched_full = true;
            for (std::size_t g = 0; g < tpl.capture_types.size(); ++g) {
                const std::string& type = tpl.capture_types[g];
                if (type.empty() || !m[g + 1].matched) continue;
                emit(type, m[g + 1].str());
            }
        } else {
            // Partial rule: only fills types nothing earlier produced.
            bool wanted = false;
            for (const auto& type : tpl.capture_types)
                if (!type.empty() && !has(type)) wanted = true;
            if (!wanted) continue;
            std::smatch m;
            if (!std::regex_search(raw, m, parser.compiled[ti])) continue;
            for (std::size_t g = 0; g < tpl.capture_types.size(); ++g) {
                const std::string& type = tpl.capture_types[g];
                if (type.empty() || has(type) || !m[g + 1].matched) continue;
                emit(type, m[g + 1].str());
            }
        }
    }
    return out;
}

ParserRunner::ParserRunner(ParserRegistry registry, MetadataTypeSet types)
    : registry_(std::move(registry)), types_(std::move(types)) {
    processes_.resize(registry_.size());
}

ParserRunner::~ParserRunner() = default;

ParseOutcome ParserRunner::parse(const std::string& parser_id, const std::string& raw,
                                 const std::string& ref_id) {
    std::size_t index = registry_.size();
    for (std::size_t i = 0; i < registry_.size(); ++i)
        if (registry_.parsers[i].parser_id == parser_id) index = i;
    if (index == registry_.size()) throw InvalidInput("parser not registered: " + parser_id);
    const ParserDescriptor& desc = registry_.parsers[index];

    if (desc.kind == ParserKind::Builtin) return builtin_parse(parser_id, raw);

    if (!processes_[index])
        processes_[index] = std::make_unique<ExternalParserProcess>(desc.command, desc.timeout_ms);
    std::string id = ref_id;
    if (id.empty()) id = "auto" + std::to_string(next_auto_id_++);
    ParseOutcome out = processes_[index]->request(id, raw);

    // Responses may carry types outside the configured set; those fields
    // are dropped and count nowhere.
    std::vector<MetadataField> kept;
    for (auto& f : out.fields.fields) {
        if (types_.contains(f.type)) {
            kept.push_back(std::move(f));
        } else {
            std::cerr << "parser " << parser_id << ": dropping field of unknown type '" << f.type
                      << "'\n";
        }
    }
    out.fields.fields = std::move(kept);
    return out;
}

ParserRegistry registry_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open registry file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw InvalidInput(path + ": bad JSON: " + e.what());
    }
    ParserRegistry r;
    for (const auto& pj : j.at("parsers")) {
        ParserDescriptor d;
        d.parser_id = pj.at("parser_id").get<std::string>();
        const std::string kind = pj.value("kind", "builtin");
        if (kind == "builtin") {
            if (!is_builtin(d.parser_id))
                throw InvalidInput("registry names unknown builtin parser: " + d.parser_id);
            d.kind = ParserKind::Builtin;
        } else if (kind == "external") {
            d.kind = ParserKind::External;
            d.command = pj.at("command").get<std::vector<std::string>>();
            d.timeout_ms = pj.value("timeout_ms", 10000);
            if (d.command.empty())
                throw InvalidInput("external parser needs a command: " + d.parser_id);
        } else {
            throw InvalidInput("unknown parser kind: " + kind);
        }
        if (r.contains(d.parser_id)) throw InvalidInput("duplicate parser_id: " + d.parser_id);
        r.parsers.push_back(std::move(d));
    }
    if (r.parsers.empty()) throw InvalidInput("registry is empty: " + path);
    return r;
}

std::string registry_to_json(const ParserRegistry& registry) {
    ordered_json parsers = ordered_json::array();
    for (const auto& d : registry.parsers) {
        ordered_json pj;
        pj["parser_id"] = d.parser_id;
        pj["kind"] = d.kind == ParserKind::Builtin ? "builtin" : "external";
        if (d.kind == ParserKind::External) {
            pj["command"] = d.command;
            pj["timeout_ms"] = d.timeout_ms;
        }
        parsers.push_back(std::move(pj));
    }
    return ordered_json{{"parsers", std::move(parsers)}}.dump(2);
}

}  // namespace parsrec
