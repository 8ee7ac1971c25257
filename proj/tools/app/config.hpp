#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "meanfield/dynamics.hpp"
#include "meanfield/ensemble.hpp"
#include "meanfield/kernels.hpp"
#include "meanfield/scaling.hpp"

namespace meanfield::app {

/// Every knob of a run as one flat record. Built by parse_config and not
/// modified afterwards.
struct RunConfig {
  ModelParams model;
  ExponentSet exponents;
  IntegratorConfig integrator;  // dt = 0 selects the stability guard
  InitialLaw law;

  std::size_t n = 64;
  std::size_t m = 0;  // reference size for couple; 0 means m_factor * n
  std::vector<std::size_t> n_list;
  std::size_t trials = 50;
  double m_factor = 16.0;
  double m_oracle_factor = 64.0;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir = "out";
  int threads = 0;  // 0 = all available

  bool use_scaling = false;
  double t_eval = 0.0;
  std::string which = "kappa";
  double c_const = 1.0;
  std::size_t samples = 100000;
  double sigma = 0.0;
  double k_cap = 0.0;
  bool write_trials = false;

  // Effective text of every key, in table order, for the manifest.
  std::vector<std::pair<std::string, std::string>> echo;
  // Where each explicitly set key came from ("<file>:<line>" or "command line").
  std::map<std::string, std::string> origin;
};

struct ConfigSource {
  std::optional<std::filesystem::path> file;
  std::vector<std::string> overrides;  // "key=value", applied after the file
};

/// Reads `key = value` lines (`#` starts a comment), applies overrides, fills
/// defaults and validates. Unknown keys, duplicates, type mismatches and
/// constraint breaches throw ConfigError naming the key and its line.
RunConfig parse_config(const ConfigSource& source);

/// Same, from text already in memory; `name` labels error messages.
RunConfig parse_config_text(const std::string& text, const std::string& name,
                            const std::vector<std::string>& overrides = {});

struct KeyHelp {
  std::string key;
  std::string default_value;
  std::string description;
};
/// All keys with defaults, in table order.
std::vector<KeyHelp> config_keys();

/// Threads to use: a command-line setting wins, then MEANFIELD_THREADS, then
/// the config file; 0 resolves to the number of available processors.
int resolve_threads(const RunConfig& cfg, const char* env_value);

}  // namespace meanfield::app
