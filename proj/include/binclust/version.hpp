#pragma once

namespace binclust {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace binclust
