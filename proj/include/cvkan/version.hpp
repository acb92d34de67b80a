#pragma once

namespace cvkan {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cvkan
