#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace cli {

// Command-line overrides applied on top of the config file.
struct Overrides {
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::string out;   // empty keeps the config value
  int threads = 0;   // 0 keeps the config value
  bool skip_first_coord = false;
};

struct Config {
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
  bool skip_first_coord = false;
  nlohmann::json generator;  // resolved: name + all parameters
  std::vector<double> sigma_grid;
  std::vector<double> theta_grid;
  double t = 1.0;
  std::int64_t s = 2;
  std::vector<int> p_grid{1};
  int k = 0;  // 0 means one cluster per generator class
  bool baseline_dm = false;
  bool baseline_pca = false;
  nlohmann::json extend;       // null when absent
  nlohmann::json reconstruct;  // null when absent
  nlohmann::json align;        // null when absent
  // Experiment identity: every resolved field that affects the numbers,
  // excluding execution details (out, threads). Hashed into manifests.
  nlohmann::json canonical;
};

// Any pipeline failure; code doubles as the process exit code and follows the
// library's status taxonomy.
struct CliError {
  int code;
  std::string message;
};

Config load_config(const std::string& path, const Overrides& overrides);

int cmd_generate(const Config& config);
int cmd_embed(const Config& config);
int cmd_extend(const Config& config);
int cmd_reconstruct(const Config& config);
int cmd_align(const Config& config);
int cmd_cluster(const Config& config);
int cmd_evaluate(const Config& config);
int cmd_sweep(const Config& config);

}  // namespace cli
