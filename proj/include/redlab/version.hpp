#pragma once

namespace redlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace redlab
