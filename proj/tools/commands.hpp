#pragma once

#include <CLI11.hpp>

namespace clsid::cli {

/// Registers every subcommand on @p app; the selected one runs from the
/// callback and throws clsid errors on failure.
void register_commands(CLI::App& app);

}  // namespace clsid::cli
