#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace parsrec {

// FNV-1a, 64 bit. Content fingerprints for staleness checks, not security.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xCBF29CE484222325ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x00000100000001B3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t h);

// Fingerprint of a file's raw bytes. Throws std::runtime_error if unreadable.
std::string hash_file(const std::string& path);

}  // namespace parsrec
