#pragma once

namespace peapod {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace peapod
