#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "clsid/error.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop identification, NMPC-DCBF planning and navigation episodes"};
  app.require_subcommand(1);
  clsid::cli::register_commands(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const clsid::ValidationError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
