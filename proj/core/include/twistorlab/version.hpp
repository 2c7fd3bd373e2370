#pragma once

namespace twistorlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace twistorlab
