// Runs the acceptance suite; one PASS/FAIL line per criterion, exit 0 iff all pass.

#include <wedflow/acceptance.hpp>

#include <filesystem>
#include <iostream>

int main(int argc, char** argv) {
  wedflow::RunConfig cfg;
  cfg.output_dir = argc > 1 ? argv[1] : "acceptance_out";
  std::filesystem::remove_all(cfg.output_dir);
  const auto results = wedflow::acceptance::run_all(cfg, std::cout);
  int failed = 0;
  for (const auto& r : results) failed += !r.passed;
  std::cout << (results.size() - static_cast<std::size_t>(failed)) << "/" << results.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
