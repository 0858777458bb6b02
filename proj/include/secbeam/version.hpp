#pragma once

namespace secbeam {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace secbeam
