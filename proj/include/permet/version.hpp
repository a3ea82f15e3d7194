#pragma once

namespace permet {

inline constexpr const char* kToolName = "permet";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace permet
