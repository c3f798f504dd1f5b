#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fnd::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInvariant = 3;

// Everything that determines a run. Serialized as a flat JSON object with
// exactly these keys; command-line flags override values read from a file.
struct RunConfig {
  std::string data_path;
  std::string data_format = "auto";  // auto, jsonl or csv
  double train_ratio = 0.6;
  double validation_ratio = 0.2;
  double test_ratio = 0.2;
  std::uint64_t seed = 42;
  std::size_t k = 5;
  double sigma = 0.95;
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;
  std::size_t dense_dim = 32;
  std::size_t max_seq_len = 100;
  std::string pooling = "attention";
  std::size_t epochs_per_round = 10;
  std::string reject_policy = "drop";
  std::string sentiment_encoder = "lexicon";  // lexicon or precomputed
  std::string sentiment_sidecar;
  std::string output_dir = "runs/latest";
};

RunConfig default_run_config();
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const std::filesystem::path& path, const RunConfig& config);
// Throws ConfigError for out-of-range values and missing input files.
void validate(const RunConfig& config);

// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fnd::cli
