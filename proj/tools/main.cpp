#include <exception>
#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Minimize ReLU networks over their input space."};
  app.require_subcommand(1);
  int exit_code = drlp::cli::kOk;
  drlp::cli::register_commands(app, exit_code);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : drlp::cli::kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return drlp::cli::kIoError;
  }
  return exit_code;
}
