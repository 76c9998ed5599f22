#pragma once

namespace econokin {

inline constexpr const char* version = "0.1.0";

}  // namespace econokin
