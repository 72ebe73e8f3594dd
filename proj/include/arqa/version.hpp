#pragma once

namespace arqa {

inline constexpr const char* kVersion = "0.1.0";

} // namespace arqa
