#pragma once

namespace zenopm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace zenopm
