#pragma once

namespace kpzlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kpzlab
