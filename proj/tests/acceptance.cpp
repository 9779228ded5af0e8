// Acceptance binary: one PASS/FAIL line per criterion, exit 1 if any fails.
// Optional arguments: --seed S, --threads N, --only 1,3,9

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "qheat/acceptance.hpp"

int main(int argc, char** argv) {
  qheat::acceptance::AcceptanceOptions o;
#ifdef QHEAT_EXE
  o.executable = QHEAT_EXE;
#endif
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i], value = argv[i + 1];
    if (key == "--seed") o.seed = std::stoull(value);
    else if (key == "--threads") o.threads = static_cast<unsigned>(std::stoul(value));
    else if (key == "--only") {
      std::stringstream ss(value);
      for (std::string id; std::getline(ss, id, ',');) o.only.insert(std::stoi(id));
    } else {
      std::cerr << "unknown argument " << key << "\n";
      return 2;
    }
  }
  std::cout << "# seed: " << o.seed << "\n";
  int failed = 0, total = 0;
  qheat::acceptance::run_acceptance(o, [&](const qheat::acceptance::CriterionResult& r) {
    std::cout << qheat::acceptance::format_line(r) << std::flush;
    failed += !r.pass;
    ++total;
  });
  std::cout << "# result: " << total - failed << "/" << total << " criteria passed\n";
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
