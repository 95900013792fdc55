#pragma once

namespace runlab {
inline constexpr const char* kVersion = "runlab 0.1.0";
}
