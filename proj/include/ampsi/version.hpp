#pragma once

namespace ampsi {
inline constexpr const char* kVersion = "0.1.0";
}
