#pragma once

namespace plap {

inline constexpr const char* version = "0.1.0";

}  // namespace plap
