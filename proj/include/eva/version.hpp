#pragma once

namespace eva {
inline constexpr const char *kVersion = "0.1.0";
}
