// Writes the synthetic pipeline inputs used by scripts/fixture_pipeline.sh.
#include <cstdint>
#include <iostream>
#include <string>

#include "support/fixtures.hpp"

int main(int argc, char** argv) {
  if (argc < 2 || argc > 3) {
    std::cerr << "usage: make_fixtures DIR [SEED]\n";
    return 1;
  }
  std::uint64_t seed = argc == 3 ? std::stoull(argv[2]) : 1;
  xlemb::fixtures::write_pipeline_fixtures(argv[1], seed);
  return 0;
}
