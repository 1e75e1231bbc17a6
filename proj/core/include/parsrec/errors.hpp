#pragma once

#include <stdexcept>
#include <string>

namespace parsrec {

// Rejected input: bad flags, malformed files, contract violations at the
// boundary. The CLI maps this to exit code 2.
class InvalidInput : public std::runtime_error {
public:
    explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

// A consumed artifact no longer matches the manifest it was built from.
// The CLI maps this to exit code 3; the message names the stale artifact.
class StaleArtifact : public std::runtime_error {
public:
    explicit StaleArtifact(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace parsrec
