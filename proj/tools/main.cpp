#include <iostream>

#include "cli.hpp"
#include "fracdiff/errors.hpp"

// Exit status: 0 success, 1 failed verification, 2 bad configuration, 3 I/O error,
// 4 numerical or domain error.
int main(int argc, char** argv) {
  using namespace fracdiff;
  try {
    const auto cfg = cli::parse_config(argc, argv, std::cout);
    if (!cfg) return 0;
    return cli::run_command(*cfg, std::cerr);
  } catch (const cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cli::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
