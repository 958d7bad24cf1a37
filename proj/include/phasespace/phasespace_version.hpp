#pragma once

namespace phasespace {

inline constexpr const char* kVersion = "0.1.0";

} // namespace phasespace
