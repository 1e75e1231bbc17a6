#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace parsrec {

// A metadata type is a short lowercase label from a configured closed set.
using MetadataType = std::string;

// The closed, ordered set of metadata types a run is configured with.
// Order is fixed and used wherever per-type results are reported.
class MetadataTypeSet {
public:
    MetadataTypeSet() = default;
    explicit MetadataTypeSet(std::vector<std::string> labels);

    static MetadataTypeSet default_set();

    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return labels_.size(); }
    bool contains(const std::string& label) const;
    // -1 when the label is not configured.
    int index_of(const std::string& label) const;

private:
    std::vector<std::string> labels_;
};

struct MetadataField {
    MetadataType type;
    std::string value;

    bool operator==(const MetadataField&) const = default;
};

// Multiset of fields: repeated types are expected (several authors) and
// repeated identical fields count with multiplicity.
struct ParsedReference {
    std::vector<MetadataField> fields;

    bool empty() const { return fields.empty(); }
    std::size_t size() const { return fields.size(); }
    void add(MetadataType type, std::string value) {
        fields.push_back({std::move(type), std::move(value)});
    }
    // All values carried for one type, in emission order.
    std::vector<std::string> values_of(const std::string& type) const;

    bool operator==(const ParsedReference&) const = default;
};

struct ReferenceRecord {
    std::string ref_id;
    std::string doc_id;
    std::string raw;
    std::optional<ParsedReference> truth;
};

struct Corpus {
    std::vector<ReferenceRecord> records;

    std::size_t size() const { return records.size(); }
    // Distinct doc ids in order of first appearance.
    std::vector<std::string> doc_ids() const;
};

enum class Split : std::uint8_t { Train = 0, Meta = 1, Test = 2 };

const char* split_name(Split s);
std::optional<Split> split_from_name(const std::string& name);

struct SplitFractions {
    double train = 0.4;
    double meta = 0.3;
    double test = 0.3;
};

struct SplitAssignment {
    std::map<std::string, Split> by_doc;
    std::uint64_t seed = 0;
    SplitFractions fractions;

    Split of(const std::string& doc_id) const;
    std::size_t count(Split s) const;
};

struct Violation {
    std::string ref_id;  // empty when the violation is corpus-level
    std::string rule;
};

}  // namespace parsrec
