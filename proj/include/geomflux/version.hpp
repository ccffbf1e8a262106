#pragma once

namespace geomflux {

inline constexpr const char* kVersion = "0.1.0";

} // namespace geomflux
