#pragma once

namespace parsrec {

inline constexpr const char* kVersion = "0.3.0";

}  // namespace parsrec
