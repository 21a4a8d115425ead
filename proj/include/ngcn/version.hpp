#pragma once

namespace ngcn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ngcn
