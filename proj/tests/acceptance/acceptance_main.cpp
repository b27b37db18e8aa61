// Prints one PASS/FAIL line per acceptance criterion. Exit status is nonzero
// when any selected criterion fails.
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <set>
#include <string>

#include "nlsis/suite.hpp"

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      selected.insert(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: " << argv[0] << " [--criterion N]...\n";
      return 2;
    }
  }
  bool all = true;
  for (const auto& r : nlsis::run_criteria(selected)) {
    std::cout << (r.passed ? "PASS" : "FAIL") << " criterion " << r.id << " [" << r.name << "] "
              << r.seconds << " s: " << r.detail << std::endl;
    all = all && r.passed;
  }
  return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
