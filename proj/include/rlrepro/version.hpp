#pragma once

#include <string_view>

namespace rlrepro {

inline constexpr std::string_view tool_name = "rlrepro";
inline constexpr std::string_view tool_version = "0.1.0";

}  // namespace rlrepro
