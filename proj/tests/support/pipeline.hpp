#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace xlemb::fixtures {

// In-process run of the CLI on write_pipeline_fixtures() inputs:
// filter-corpus and train-embeddings per language, align, bli, knn,
// mine-rules, context-sim, classify and report. Inputs go to <work>/inputs,
// everything produced to <work>/out.
struct PipelineRun {
  int status = 0;              // first nonzero exit code, else 0
  std::string failed_step;     // empty on success
  std::string log;             // stderr of every step
  std::map<std::string, std::string> stdout_by_step;
};

PipelineRun run_fixture_pipeline(const std::filesystem::path& work, bool write_inputs = true);

// Invokes xlemb::cli::run_cli with argv[0] = "xlemb".
int run_xlemb(const std::vector<std::string>& args, std::string* out = nullptr, std::string* err = nullptr);

// Relative path -> file contents for every regular file below `root`,
// skipping run manifests.
std::map<std::string, std::string> snapshot_outputs(const std::filesystem::path& root);

}  // namespace xlemb::fixtures
