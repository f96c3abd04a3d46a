// version.hpp
#pragma once

namespace eib {
inline constexpr const char* kVersion = "0.1.0";
}
