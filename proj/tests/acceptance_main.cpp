// Standalone acceptance runner: `acceptance_tests [ff|lattice|all]`.
// Exit code 0 when every criterion passes, 1 otherwise.

#include <iostream>

#include "confcount/harness.hpp"

int main(int argc, char** argv) {
  const std::string suite = argc > 1 ? argv[1] : "all";
  try {
    const auto report = confcount::harness::acceptance(suite, std::cerr);
    confcount::harness::print_report(report, std::cout);
    return report.all_pass() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance suite error: " << e.what() << '\n';
    return 1;
  }
}
