#pragma once

#include <string_view>

namespace qjudge::cli::demo_data {

/// Contents of a bundled demo file; throws Error(FileNotFound) for unknown names.
std::string_view file(std::string_view name);

}  // namespace qjudge::cli::demo_data
