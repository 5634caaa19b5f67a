#pragma once

namespace rtlab {
inline constexpr const char* kVersion = "0.1.0";
}
