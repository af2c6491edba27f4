#pragma once

namespace nvsim {

inline constexpr const char* version = "0.1.0";

}  // namespace nvsim
