#include "parsrec/types.hpp"

#include <algorithm>
#include <set>

#include "parsrec/errors.hpp"

namespace parsrec {

MetadataTypeSet::MetadataTypeSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    std::set<std::string> seen;
    for (const auto& l : labels_) {
        if (l.empty()) throw InvalidInput("metadata type label must be non-empty");
        if (!seen.insert(l).second) throw InvalidInput("duplicate metadata type label: " + l);
    }
}

MetadataTypeSet MetadataTypeSet::default_set() {
    return MetadataTypeSet({"author", "source", "year", "volume", "issue", "page"});
}

bool MetadataTypeSet::contains(const std::string& label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

int MetadataTypeSet::index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    return it == labels_.end() ? -1 : static_cast<int>(it - labels_.begin());
}

std::vector<std::string> ParsedReference::values_of(const std::string& type) const {
    std::vector<std::string> out;
    for (const auto& f : fields)
        if (f.type == type) out.push_back(f.value);
    return out;
}

std::vector<std::string> Corpus::doc_ids() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& r : records)
        if (seen.insert(r.doc_id).second) out.push_back(r.doc_id);
    return out;
}

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Meta: return "meta";
        case Split::Test: return "test";
    }
    return "?";
}

std::optional<Split> split_from_name(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "meta") return Split::Meta;
    if (name == "test") return Split::Test;
    return std::nullopt;
}

Split SplitAssignment::of(const std::string& doc_id) const {
    auto it = by_doc.find(doc_id);
    if (it == by_doc.end()) throw InvalidInput("doc_id not covered by split: " + doc_id);
    return it->second;
}

std::size_t SplitAssignment::count(Split s) const {
    std::size_t n = 0;
    for (const auto& [_, v] : by_doc)
        if (v == s) ++n;
    return n;
}

}  // namespace parsrec
