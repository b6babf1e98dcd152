#pragma once

namespace logifit {

inline constexpr const char* version = "0.1.0";

} // namespace logifit
