#pragma once

namespace tsvf {

inline constexpr const char* kToolName = "tsvf_lab";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace tsvf
