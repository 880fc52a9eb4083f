#pragma once

namespace cvteleport {

inline constexpr const char* kVersion = "0.1.0";

} // namespace cvteleport
