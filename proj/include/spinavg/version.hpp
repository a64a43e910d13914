#pragma once

namespace spinavg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace spinavg
