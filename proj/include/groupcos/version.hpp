#pragma once

namespace groupcos {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace groupcos
