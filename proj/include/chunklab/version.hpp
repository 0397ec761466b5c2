#pragma once

namespace chunklab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace chunklab
