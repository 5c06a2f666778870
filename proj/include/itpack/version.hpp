#pragma once

namespace itpack {

inline constexpr const char* kToolName = "itpack";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace itpack
