#pragma once

namespace restartbandit {

inline constexpr const char* kVersion = "0.1.0";

} // namespace restartbandit
