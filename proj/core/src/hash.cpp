#include "parsrec/hash.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace parsrec {

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for hashing: " + path);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
        if (!in) break;
    }
    return hex64(h);
}

}  // namespace parsrec
