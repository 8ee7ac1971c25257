#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string_view>

#include <omp.h>

#include "meanfield/errors.hpp"

namespace meanfield::app {
namespace {

// Thrown by value parsers; the caller adds key and line.
struct BadValue {
  std::string message;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_integer(std::string_view text, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw BadValue{std::string("expected ") + what + ", got '" + std::string(text) + "'"};
  }
  return value;
}

double parse_real(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    throw BadValue{"expected a finite number, got '" + std::string(text) + "'"};
  }
  return value;
}

bool parse_bool(std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw BadValue{"expected true or false, got '" + std::string(text) + "'"};
}

template <typename F>
auto parse_list(std::string_view text, F&& item) {
  std::vector<decltype(item(std::string_view{}))> out;
  if (trim(text).empty()) throw BadValue{"expected a comma separated list, got nothing"};
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(item(trim(text.substr(start, comma - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct ParseState {
  RunConfig cfg;
  std::vector<double> position_mean{0.0};
  std::vector<double> velocity_mean{0.0};
};

using Assign = std::function<void(ParseState&, std::string_view)>;
// Empty string when the value is acceptable, otherwise the reason.
using Check = std::function<std::string(const ParseState&)>;

struct KeySpec {
  const char* name;
  const char* default_value;
  const char* help;
  Assign assign;
  Check check;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

template <typename Get>
Check greater_than(Get get, double bound, const char* name) {
  return [=](const ParseState& s) -> std::string {
    const double v = get(s);
    if (v > bound) return {};
    return std::string(name) + " must be > " + fmt(bound) + " (got " + fmt(v) + ")";
  };
}

template <typename Get>
Check at_least(Get get, double bound, const char* name) {
  return [=](const ParseState& s) -> std::string {
    const double v = get(s);
    if (v >= bound) return {};
    return std::string(name) + " must be >= " + fmt(bound) + " (got " + fmt(v) + ")";
  };
}

template <typename Get>
Check open_unit(Get get, const char* name) {
  return [=](const ParseState& s) -> std::string {
    const double v = get(s);
    if (v > 0.0 && v < 1.0) return {};
    return std::string(name) + " must lie in (0, 1) (got " + fmt(v) + ")";
  };
}

Check mean_length(std::vector<double> ParseState::*member, const char* name) {
  return [=](const ParseState& s) -> std::string {
    const std::size_t len = (s.*member).size();
    if (len == 1 || len == static_cast<std::size_t>(s.cfg.model.dim)) return {};
    return std::string(name) + " needs 1 or d = " + std::to_string(s.cfg.model.dim) +
           " values (got " + std::to_string(len) + ")";
  };
}

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = [] {
    std::vector<KeySpec> t;
    auto real = [](double RunConfig::*field) {
      return [=](ParseState& s, std::string_view v) { s.cfg.*field = parse_real(v); };
    };
    auto model_real = [](double ModelParams::*field) {
      return [=](ParseState& s, std::string_view v) { s.cfg.model.*field = parse_real(v); };
    };
    auto exp_real = [](double ExponentSet::*field) {
      return [=](ParseState& s, std::string_view v) { s.cfg.exponents.*field = parse_real(v); };
    };
    auto count = [](std::size_t RunConfig::*field) {
      return [=](ParseState& s, std::string_view v) {
        s.cfg.*field = parse_integer<std::size_t>(v, "a non-negative integer");
      };
    };
    auto get_model = [](double ModelParams::*field) {
      return [=](const ParseState& s) { return s.cfg.model.*field; };
    };
    auto get_exp = [](double ExponentSet::*field) {
      return [=](const ParseState& s) { return s.cfg.exponents.*field; };
    };
    auto get_real = [](double RunConfig::*field) {
      return [=](const ParseState& s) { return s.cfg.*field; };
    };
    auto get_count = [](std::size_t RunConfig::*field) {
      return [=](const ParseState& s) { return static_cast<double>(s.cfg.*field); };
    };

    // model
    t.push_back({"d", "2", "spatial dimension (d >= 2)",
                 [](ParseState& s, std::string_view v) {
                   s.cfg.model.dim = parse_integer<int>(v, "an integer");
                 },
                 [](const ParseState& s) -> std::string {
                   const int d = s.cfg.model.dim;
                   if (d < 2) return "d must satisfy d >= 2 (got " + std::to_string(d) + ")";
                   if (d > kMaxDim) {
                     return "d must not exceed " + std::to_string(kMaxDim) + " (got " +
                            std::to_string(d) + ")";
                   }
                   return {};
                 }});
    t.push_back({"lambda", "1", "interaction and confinement strength", model_real(&ModelParams::lambda),
                 at_least(get_model(&ModelParams::lambda), 0.0, "lambda")});
    t.push_back({"beta", "1", "alignment strength", model_real(&ModelParams::beta),
                 at_least(get_model(&ModelParams::beta), 0.0, "beta")});
    t.push_back({"gamma_damp", "1", "linear damping", model_real(&ModelParams::gamma_damp),
                 greater_than(get_model(&ModelParams::gamma_damp), 0.0, "gamma_damp")});
    t.push_back({"c_d", "1", "Newtonian normalization C_d", model_real(&ModelParams::c_d),
                 greater_than(get_model(&ModelParams::c_d), 0.0, "c_d")});
    t.push_back({"epsilon", "0.1", "force cut-off and mollifier width", model_real(&ModelParams::epsilon),
                 greater_than(get_model(&ModelParams::epsilon), 0.0, "epsilon")});
    t.push_back({"delta", "0.1", "alignment denominator regularizer", model_real(&ModelParams::delta),
                 greater_than(get_model(&ModelParams::delta), 0.0, "delta")});
    t.push_back({"r_cut", "10", "velocity cutoff radius R", model_real(&ModelParams::r_cut),
                 greater_than(get_model(&ModelParams::r_cut), 0.0, "r_cut")});
    t.push_back({"pair_force", "true", "include the pair force",
                 [](ParseState& s, std::string_view v) { s.cfg.model.pair_force = parse_bool(v); },
                 nullptr});
    t.push_back({"local_velocity_index", "j",
                 "velocity in the local average: j (neighbors) or i (self)",
                 [](ParseState& s, std::string_view v) {
                   if (v == "j") {
                     s.cfg.model.alignment = AlignmentIndex::Neighbor;
                   } else if (v == "i") {
                     s.cfg.model.alignment = AlignmentIndex::Self;
                   } else {
                     throw BadValue{"expected j or i, got '" + std::string(v) + "'"};
                   }
                 },
                 nullptr});
    t.push_back({"use_scaling", "false",
                 "derive epsilon, delta, r_cut from N via theta and vartheta",
                 [](ParseState& s, std::string_view v) { s.cfg.use_scaling = parse_bool(v); },
                 nullptr});

    // exponents
    t.push_back({"theta", "0.04", "epsilon = N^-theta", exp_real(&ExponentSet::theta),
                 open_unit(get_exp(&ExponentSet::theta), "theta")});
    t.push_back({"vartheta", "0.02", "delta = 1/sqrt(vartheta ln N)", exp_real(&ExponentSet::vartheta),
                 open_unit(get_exp(&ExponentSet::vartheta), "vartheta")});
    t.push_back({"alpha", "0.06", "deviation threshold exponent", exp_real(&ExponentSet::alpha),
                 open_unit(get_exp(&ExponentSet::alpha), "alpha")});
    t.push_back({"kappa", "0.12", "force concentration exponent", exp_real(&ExponentSet::kappa),
                 open_unit(get_exp(&ExponentSet::kappa), "kappa")});
    t.push_back({"gamma_exp", "0.05", "envelope concentration exponent", exp_real(&ExponentSet::gamma_exp),
                 open_unit(get_exp(&ExponentSet::gamma_exp), "gamma_exp")});
    t.push_back({"eta", "0.12", "alignment concentration exponent", exp_real(&ExponentSet::eta),
                 open_unit(get_exp(&ExponentSet::eta), "eta")});
    t.push_back({"mu", "0.05", "mollifier-gradient concentration exponent", exp_real(&ExponentSet::mu),
                 open_unit(get_exp(&ExponentSet::mu), "mu")});

    // integrator
    t.push_back({"dt", "0", "time step; 0 picks the largest guarded step",
                 [](ParseState& s, std::string_view v) { s.cfg.integrator.dt = parse_real(v); },
                 at_least([](const ParseState& s) { return s.cfg.integrator.dt; }, 0.0, "dt")});
    t.push_back({"t_end", "1", "final time",
                 [](ParseState& s, std::string_view v) { s.cfg.integrator.t_end = parse_real(v); },
                 at_least([](const ParseState& s) { return s.cfg.integrator.t_end; }, 0.0, "t_end")});
    t.push_back({"scheme", "rk4", "rk4 or euler",
                 [](ParseState& s, std::string_view v) {
                   if (v == "rk4") {
                     s.cfg.integrator.scheme = Scheme::RK4;
                   } else if (v == "euler") {
                     s.cfg.integrator.scheme = Scheme::Euler;
                   } else {
                     throw BadValue{"expected rk4 or euler, got '" + std::string(v) + "'"};
                   }
                 },
                 nullptr});
    t.push_back({"snapshot_stride", "1", "steps between stored snapshots",
                 [](ParseState& s, std::string_view v) {
                   s.cfg.integrator.snapshot_stride =
                       parse_integer<std::size_t>(v, "a non-negative integer");
                 },
                 at_least([](const ParseState& s) {
                   return static_cast<double>(s.cfg.integrator.snapshot_stride);
                 }, 1.0, "snapshot_stride")});

    // initial law
    t.push_back({"position_mean", "0", "position mean (one value or d values, comma separated)",
                 [](ParseState& s, std::string_view v) { s.position_mean = parse_list(v, parse_real); },
                 mean_length(&ParseState::position_mean, "position_mean")});
    t.push_back({"position_std", "1", "position standard deviation",
                 [](ParseState& s, std::string_view v) { s.cfg.law.position_std = parse_real(v); },
                 greater_than([](const ParseState& s) { return s.cfg.law.position_std; }, 0.0,
                              "position_std")});
    t.push_back({"velocity_mean", "0", "velocity mean (one value or d values, comma separated)",
                 [](ParseState& s, std::string_view v) { s.velocity_mean = parse_list(v, parse_real); },
                 mean_length(&ParseState::velocity_mean, "velocity_mean")});
    t.push_back({"velocity_std", "1", "velocity standard deviation",
                 [](ParseState& s, std::string_view v) { s.cfg.law.velocity_std = parse_real(v); },
                 greater_than([](const ParseState& s) { return s.cfg.law.velocity_std; }, 0.0,
                              "velocity_std")});

    // run
    t.push_back({"n", "64", "particle count for simulate and couple", count(&RunConfig::n),
                 at_least(get_count(&RunConfig::n), 1.0, "n")});
    t.push_back({"m", "0", "reference size for couple; 0 means m_factor * n", count(&RunConfig::m),
                 nullptr});
    t.push_back({"n_list", "64,128,256", "particle counts for sweep, concentration, assumptions",
                 [](ParseState& s, std::string_view v) {
                   s.cfg.n_list = parse_list(v, [](std::string_view item) {
                     return parse_integer<std::size_t>(item, "a non-negative integer");
                   });
                 },
                 [](const ParseState& s) -> std::string {
                   for (std::size_t n : s.cfg.n_list) {
                     if (n < 1) return "every entry of n_list must be >= 1";
                   }
                   return {};
                 }});
    t.push_back({"trials", "50", "Monte Carlo trials per N", count(&RunConfig::trials),
                 at_least(get_count(&RunConfig::trials), 1.0, "trials")});
    t.push_back({"m_factor", "16", "reference ensemble size over N", real(&RunConfig::m_factor),
                 at_least(get_real(&RunConfig::m_factor), 1.0, "m_factor")});
    t.push_back({"m_oracle_factor", "64", "oracle ensemble size over N",
                 real(&RunConfig::m_oracle_factor),
                 at_least(get_real(&RunConfig::m_oracle_factor), 1.0, "m_oracle_factor")});
    t.push_back({"master_seed", "0", "master seed of every random stream",
                 [](ParseState& s, std::string_view v) {
                   s.cfg.master_seed = parse_integer<std::uint64_t>(v, "an unsigned integer");
                 },
                 nullptr});
    t.push_back({"output_dir", "out", "directory for outputs and the manifest",
                 [](ParseState& s, std::string_view v) {
                   if (v.empty()) throw BadValue{"expected a path"};
                   s.cfg.output_dir = std::string(v);
                 },
                 nullptr});
    t.push_back({"threads", "0", "worker threads; 0 uses every processor",
                 [](ParseState& s, std::string_view v) {
                   s.cfg.threads = parse_integer<int>(v, "an integer");
                 },
                 at_least([](const ParseState& s) { return static_cast<double>(s.cfg.threads); },
                          0.0, "threads")});

    // subcommand options
    t.push_back({"t_eval", "0", "evaluation time for concentration and assumptions",
                 real(&RunConfig::t_eval), at_least(get_real(&RunConfig::t_eval), 0.0, "t_eval")});
    t.push_back({"which", "kappa", "concentration set: kappa, gamma, eta, mu or all",
                 [](ParseState& s, std::string_view v) {
                   if (v != "kappa" && v != "gamma" && v != "eta" && v != "mu" && v != "all") {
                     throw BadValue{"expected kappa, gamma, eta, mu or all, got '" +
                                    std::string(v) + "'"};
                   }
                   s.cfg.which = std::string(v);
                 },
                 nullptr});
    t.push_back({"c_const", "1", "generic constant C in reported bounds", real(&RunConfig::c_const),
                 greater_than(get_real(&RunConfig::c_const), 0.0, "c_const")});
    t.push_back({"samples", "100000", "samples per kernel-check property", count(&RunConfig::samples),
                 at_least(get_count(&RunConfig::samples), 1.0, "samples")});
    t.push_back({"sigma", "0", "first-moment bandwidth for assumptions; 0 means epsilon",
                 real(&RunConfig::sigma), at_least(get_real(&RunConfig::sigma), 0.0, "sigma")});
    t.push_back({"k_cap", "0", "singular cap multiplier for assumptions; 0 means 3^d",
                 real(&RunConfig::k_cap), at_least(get_real(&RunConfig::k_cap), 0.0, "k_cap")});
    t.push_back({"write_trials", "false", "sweep also writes one deviation CSV per trial",
                 [](ParseState& s, std::string_view v) { s.cfg.write_trials = parse_bool(v); },
                 nullptr});
    return t;
  }();
  return table;
}

const KeySpec* find_key(std::string_view name) {
  for (const auto& k : key_table()) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

struct Entry {
  std::string value;
  std::string origin;
};

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
  throw ConfigError(origin + ": " + message);
}

RunConfig build(const std::map<std::string, Entry>& entries) {
  ParseState state;
  for (const auto& spec : key_table()) {
    const auto it = entries.find(spec.name);
    const std::string& text = it != entries.end() ? it->second.value : spec.default_value;
    const std::string origin = it != entries.end() ? it->second.origin : "default";
    try {
      spec.assign(state, text);
    } catch (const BadValue& e) {
      fail(origin, "key '" + std::string(spec.name) + "': " + e.message);
    }
    std::string shown;
    for (std::size_t start = 0;;) {
      const std::size_t comma = text.find(',', start);
      shown += trim(std::string_view(text).substr(start, comma - start));
      if (comma == std::string::npos) break;
      shown += ',';
      start = comma + 1;
    }
    state.cfg.echo.emplace_back(spec.name, shown);
    if (it != entries.end()) state.cfg.origin[spec.name] = origin;
  }
  for (const auto& spec : key_table()) {
    if (!spec.check) continue;
    const std::string problem = spec.check(state);
    if (problem.empty()) continue;
    const auto it = entries.find(spec.name);
    fail(it != entries.end() ? it->second.origin : "default",
         "key '" + std::string(spec.name) + "': " + problem);
  }

  RunConfig cfg = std::move(state.cfg);
  const int d = cfg.model.dim;
  auto expand = [d](const std::vector<double>& values) {
    Vec out(d);
    for (int k = 0; k < d; ++k) out[k] = values.size() == 1 ? values[0] : values[k];
    return out;
  };
  cfg.law.position_mean = expand(state.position_mean);
  cfg.law.velocity_mean = expand(state.velocity_mean);
  return cfg;
}

void apply_overrides(std::map<std::string, Entry>& entries,
                     const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail("command line", "expected key=value, got '" + item + "'");
    const std::string key(trim(std::string_view(item).substr(0, eq)));
    const std::string value(trim(std::string_view(item).substr(eq + 1)));
    if (!find_key(key)) fail("command line", "unknown key '" + key + "'");
    entries[key] = {value, "command line"};
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& name,
                            const std::vector<std::string>& overrides) {
  std::map<std::string, Entry> entries;
  std::map<std::string, std::size_t> first_line;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string origin = name + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(origin, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) fail(origin, "missing key before '='");
    if (!find_key(key)) fail(origin, "unknown key '" + key + "'");
    if (const auto seen = first_line.find(key); seen != first_line.end()) {
      fail(origin, "duplicate key '" + key + "' (first set at line " +
                       std::to_string(seen->second) + ")");
    }
    first_line[key] = line_no;
    entries[key] = {value, origin};
  }
  apply_overrides(entries, overrides);
  return build(entries);
}

RunConfig parse_config(const ConfigSource& source) {
  if (!source.file) return parse_config_text("", "<none>", source.overrides);
  std::ifstream in(*source.file, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + source.file->string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), source.file->string(), source.overrides);
}

std::vector<KeyHelp> config_keys() {
  std::vector<KeyHelp> out;
  for (const auto& k : key_table()) out.push_back({k.name, k.default_value, k.help});
  return out;
}

int resolve_threads(const RunConfig& cfg, const char* env_value) {
  int threads = cfg.threads;
  const auto it = cfg.origin.find("threads");
  const bool from_command_line = it != cfg.origin.end() && it->second == "command line";
  if (!from_command_line && env_value != nullptr && *env_value != '\0') {
    try {
      threads = parse_integer<int>(trim(env_value), "an integer");
    } catch (const BadValue& e) {
      throw ConfigError("MEANFIELD_THREADS: " + e.message);
    }
    if (threads < 0) throw ConfigError("MEANFIELD_THREADS must be >= 0");
  }
  return threads > 0 ? threads : omp_get_num_procs();
}

}  // namespace meanfield::app
