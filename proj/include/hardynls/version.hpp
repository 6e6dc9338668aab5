/// \file version.hpp
/// Library version, echoed into every output-file header for provenance.

#pragma once

namespace hardynls {

inline constexpr const char* version_string = "1.0.0";

}  // namespace hardynls
