#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlemb/alignment.hpp"
#include "xlemb/classify.hpp"
#include "xlemb/context_similarity.hpp"
#include "xlemb/corpus.hpp"
#include "xlemb/rules.hpp"

namespace xlemb::cli {

inline constexpr const char* kVersion = "0.1.0";

// Everything a subcommand can be configured with. Loaded from a sectioned
// key = value file, then overridden by command-line flags.
struct RunConfig {
  TokenizerConfig tokenizer;
  SgnsConfig sgns;
  AlignmentConfig alignment;
  double train_fraction = 0.8;
  std::uint64_t lexicon_split_seed = 1;
  MiningConfig mining;
  std::string stopwords_dir;  // empty: bundled lists; "none": no stopwords
  SimVariant variant = SimVariant::Literal;
  std::size_t top_m = 3;
  LogRegConfig logreg;
  double threshold = 0.5;
  std::uint64_t dataset_split_seed = 1;
  std::map<std::string, std::string> embeddings;  // lang -> path
  std::map<std::string, std::string> lexicons;    // lang -> path (pivot -> lang)
  std::map<std::string, std::string> datasets;    // lang -> path
  std::string output;
};

// Sets `section.key`. Throws Error(Config) naming the field on unknown keys
// or unparsable values.
void set_field(RunConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value);

// Format: '#' or ';' comments, "[section]" headers, "key = value" lines.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

void validate(const RunConfig& cfg);

// Section -> key -> value, with every field present.
nlohmann::ordered_json snapshot(const RunConfig& cfg);

// Exit status: 0 success, 1 usage or configuration error, 2 data or format
// error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace xlemb::cli
