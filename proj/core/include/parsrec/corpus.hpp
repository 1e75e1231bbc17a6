#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "parsrec/types.hpp"

namespace parsrec {

// Invariant checks over a corpus. Violations are data, not failures: an
// empty list means the corpus is valid.
std::vector<Violation> validate_corpus(const Corpus& corpus, const MetadataTypeSet& types);

// Deterministic by-document split. Documents are shuffled with a pinned
// Fisher-Yates keyed by `seed` and assigned so realized counts match the
// fractions under largest-remainder rounding.
SplitAssignment split_corpus(const Corpus& corpus, const SplitFractions& fractions,
                             std::uint64_t seed);

// Corpus file format: JSON Lines, one record per line:
//   {"doc_id": "...", "ref_id": "...", "ref": "...", "truth": [{"type": ..., "value": ...}]}
// with "truth" omitted for unlabeled data.
Corpus read_corpus_jsonl(const std::string& path);
void write_corpus_jsonl(const Corpus& corpus, const std::string& path);

// Split file: JSON object with the assignment plus recorded seed, fractions
// and the hash of the corpus it was computed from.
void write_split_file(const SplitAssignment& split, const std::string& corpus_hash,
                      const std::string& path);
SplitAssignment read_split_file(const std::string& path, std::string* corpus_hash = nullptr);

// Records of one split, in corpus order.
std::vector<ReferenceRecord> records_in_split(const Corpus& corpus, const SplitAssignment& split,
                                              Split which);

// Reference strings that occur in more than one split (the split is by
// document, so identical strings may legally land on both sides).
std::size_t count_cross_split_duplicates(const Corpus& corpus, const SplitAssignment& split);

}  // namespace parsrec
