#pragma once

namespace meandim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace meandim
