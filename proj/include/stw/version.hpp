#pragma once

namespace stw {

inline constexpr const char* kToolName = "stellwerk";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace stw
