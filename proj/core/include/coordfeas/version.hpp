#pragma once

namespace coordfeas {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace coordfeas
