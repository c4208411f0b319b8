#pragma once

#include <cstddef>

namespace peapod::tol {

inline constexpr double hermitian = 1e-10;
inline constexpr double unitary = 1e-10;
inline constexpr double normalization = 1e-12;
// Lines closer than this are treated as one degenerate line.
inline constexpr double merge_hz = 1.0;

}  // namespace peapod::tol

namespace peapod {

inline constexpr std::size_t kPropagatorDimLimit = 1024;
inline constexpr std::size_t kStateDimLimit = 262144;

}  // namespace peapod
