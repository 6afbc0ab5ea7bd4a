#pragma once

namespace msq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace msq
