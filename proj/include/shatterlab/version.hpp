#pragma once

#include "shatterlab/philox.hpp"

namespace shatterlab {

inline constexpr const char* kToolName = "shatterlab";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kPrngContract = rng::kStreamContract;

}  // namespace shatterlab
