#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"
#include "meanfield/concentration.hpp"
#include "meanfield/coupling.hpp"
#include "meanfield/dynamics.hpp"
#include "meanfield/errors.hpp"
#include "meanfield/kernel_checks.hpp"
#include "meanfield/scaling.hpp"
#include "meanfield/snapshot_io.hpp"
#include "meanfield/stats.hpp"

#ifndef MEANFIELD_VERSION
#define MEANFIELD_VERSION "0.0.0"
#endif

namespace meanfield::app {
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int exit_code = kExitOk;
  std::vector<fs::path> artifacts;  // relative to the output directory
};

using Command = std::function<Outcome(const RunConfig&, std::ostream&)>;

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

ModelParams params_at(const RunConfig& cfg, double n) {
  return cfg.use_scaling ? scaled_params(cfg.model, n, cfg.exponents) : cfg.model;
}

IntegratorConfig integrator_for(const RunConfig& cfg, const ModelParams& p, double t_end) {
  IntegratorConfig ic = cfg.integrator;
  ic.t_end = t_end;
  if (!(ic.dt > 0.0)) ic.dt = t_end > 0.0 ? guarded_dt(t_end, p) : dt_max(p);
  return ic;
}

std::size_t reference_size(const RunConfig& cfg, std::size_t n) {
  if (cfg.m > 0) return cfg.m;
  return static_cast<std::size_t>(std::llround(cfg.m_factor * static_cast<double>(n)));
}

void require_n_list(const RunConfig& cfg, const char* command) {
  if (cfg.n_list.empty()) throw ConfigError(std::string(command) + ": n_list is empty");
}

Outcome cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  const ModelParams p = params_at(cfg, static_cast<double>(cfg.n));
  const IntegratorConfig ic = integrator_for(cfg, p, cfg.integrator.t_end);
  const PhaseEnsemble start = sample_initial(cfg.law, cfg.n, cfg.master_seed);
  const auto snapshots = evolve(start, SelfInteracting{}, p, ic);
  write_trajectory(cfg.output_dir / "trajectory", snapshots);

  Outcome out;
  for (const auto& entry : fs::directory_iterator(cfg.output_dir / "trajectory")) {
    if (entry.is_regular_file()) out.artifacts.push_back(fs::path("trajectory") / entry.path().filename());
  }
  log << "simulate: N=" << cfg.n << " dt=" << format_double(ic.dt) << " steps=" << ic.steps()
      << " snapshots=" << snapshots.size() << '\n';
  return out;
}

Outcome cmd_couple(const RunConfig& cfg, std::ostream& log) {
  const ModelParams p = params_at(cfg, static_cast<double>(cfg.n));
  const IntegratorConfig ic = integrator_for(cfg, p, cfg.integrator.t_end);
  const std::size_t m = reference_size(cfg, cfg.n);
  const DeviationRecord record =
      run_coupled_trial(cfg.n, m, cfg.law, p, ic, cfg.exponents.alpha, cfg.master_seed);
  auto file = open_output(cfg.output_dir / "deviation.csv");
  write_deviation_csv(file, record);
  log << "couple: N=" << cfg.n << " M=" << m << " final sup deviation "
      << format_double(record.final_sup()) << '\n';
  return {kExitOk, {"deviation.csv"}};
}

Outcome cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  require_n_list(cfg, "sweep");
  SweepOptions o;
  o.n_list = cfg.n_list;
  o.trials = cfg.trials;
  o.exponents = cfg.exponents;
  o.law = cfg.law;
  o.params = cfg.model;
  o.integrator = cfg.integrator;
  o.m_factor = cfg.m_factor;
  o.master_seed = cfg.master_seed;
  const auto rows = sweep_exceedance(o);

  Outcome out;
  {
    auto file = open_output(cfg.output_dir / "sweep.csv");
    write_sweep_csv(file, rows);
    out.artifacts.emplace_back("sweep.csv");
  }
  if (cfg.write_trials) {
    for (const auto& row : rows) {
      for (std::size_t k = 0; k < row.records.size(); ++k) {
        const fs::path rel = fs::path("trials") /
                             ("N" + std::to_string(row.n_particles) + "_trial" + std::to_string(k) + ".csv");
        auto file = open_output(cfg.output_dir / rel);
        write_deviation_csv(file, row.records[k]);
        out.artifacts.push_back(rel);
      }
    }
  }
  log << std::left << std::setw(8) << "N" << std::setw(24) << "epsilon" << std::setw(10) << "hits"
      << std::setw(24) << "p_hat" << "mean_final_sup\n";
  for (const auto& r : rows) {
    log << std::setw(8) << r.n_particles << std::setw(24) << format_double(r.epsilon)
        << std::setw(10) << r.estimate.hits << std::setw(24) << format_double(r.estimate.p_hat)
        << format_double(r.mean_final_sup) << '\n';
  }
  return out;
}

Outcome cmd_concentration(const RunConfig& cfg, std::ostream& log) {
  require_n_list(cfg, "concentration");
  std::vector<ConcentrationSet> sets;
  if (cfg.which == "all") {
    sets = {ConcentrationSet::Kappa, ConcentrationSet::Gamma, ConcentrationSet::Eta,
            ConcentrationSet::Mu};
  } else {
    sets = {parse_concentration_set(cfg.which)};
  }
  std::vector<ConcentrationEstimate> rows;
  for (ConcentrationSet which : sets) {
    for (std::size_t n : cfg.n_list) {
      ConcentrationOptions o;
      o.which = which;
      o.n = n;
      o.trials = cfg.trials;
      o.law = cfg.law;
      o.params = cfg.model;
      o.exponents = cfg.exponents;
      o.use_scaling = cfg.use_scaling;
      o.t_eval = cfg.t_eval;
      o.integrator = cfg.integrator;
      o.m_oracle_factor = cfg.m_oracle_factor;
      o.c_const = cfg.c_const;
      o.seed = cfg.master_seed;
      rows.push_back(estimate_set_probability(o));
      const auto& r = rows.back();
      log << to_string(which) << " N=" << n << " hits=" << r.hits << '/' << r.trials
          << " p_hat=" << format_double(r.p_hat) << '\n';
    }
  }
  auto file = open_output(cfg.output_dir / "concentration.csv");
  write_concentration_csv(file, rows);
  return {kExitOk, {"concentration.csv"}};
}

Outcome cmd_assumptions(const RunConfig& cfg, std::ostream& log) {
  require_n_list(cfg, "assumptions");
  auto file = open_output(cfg.output_dir / "assumptions.csv");
  file << "N,epsilon,delta,R,t,sup_first_moment,sup_grad_mollifier_conv,sup_singular_conv,"
          "query_count\n";
  for (std::size_t n : cfg.n_list) {
    const ModelParams p = params_at(cfg, static_cast<double>(n));
    PhaseEnsemble ensemble = sample_initial(cfg.law, n, derive_seed(cfg.master_seed, n, 0));
    if (cfg.t_eval > 0.0) {
      const IntegratorConfig ic = integrator_for(cfg, p, cfg.t_eval);
      ic.validate(p);
      for (std::size_t k = 0; k < ic.steps(); ++k) {
        ensemble = step(ensemble, SelfInteracting{}, p, ic.dt, ic.scheme);
      }
    }
    const auto queries = default_query_points(ensemble);
    const AssumptionReport r =
        assumption_estimates(ensemble, p, queries, {cfg.sigma, cfg.k_cap});
    file << n << ',' << format_double(p.epsilon) << ',' << format_double(p.delta) << ','
         << format_double(p.r_cut) << ',' << format_double(ensemble.time()) << ','
         << format_double(r.sup_first_moment) << ',' << format_double(r.sup_grad_mollifier_conv)
         << ',' << format_double(r.sup_singular_conv) << ',' << r.query_count << '\n';
    log << "assumptions N=" << n << " first_moment=" << format_double(r.sup_first_moment)
        << " grad_mollifier=" << format_double(r.sup_grad_mollifier_conv)
        << " singular=" << format_double(r.sup_singular_conv) << '\n';
  }
  return {kExitOk, {"assumptions.csv"}};
}

Outcome cmd_validate(const RunConfig& cfg, std::ostream& log) {
  const ScalingReport report =
      scaling_report(cfg.model.dim, static_cast<double>(std::max<std::size_t>(cfg.n, 2)),
                     cfg.exponents);
  auto file = open_output(cfg.output_dir / "validate.csv");
  file << "name,lower,value,upper,status\n";
  log << std::left << std::setw(16) << "constraint" << std::setw(20) << "lower" << std::setw(20)
      << "value" << std::setw(20) << "upper" << "status\n";
  for (const auto& c : report.constraints) {
    const char* status = c.ok ? "ok" : "VIOLATED";
    file << c.name << ',' << format_double(c.lower) << ',' << format_double(c.value) << ','
         << format_double(c.upper) << ',' << status << '\n';
    log << std::setw(16) << c.name << std::setw(20) << format_double(c.lower) << std::setw(20)
        << format_double(c.value) << std::setw(20) << format_double(c.upper) << status << '\n';
  }
  if (!report.valid) {
    log << "invalid exponent set:";
    for (const auto& v : report.violations) log << ' ' << v;
    log << '\n';
    return {kExitValidation, {"validate.csv"}};
  }
  log << "rate terms:";
  for (double term : report.n_terms) log << ' ' << format_double(term);
  log << "\nn = " << format_double(report.n_rate) << '\n';
  for (const auto& note : report.discrepancies) log << "discrepancy: " << note << '\n';
  const VarthetaAdmissibility adm =
      vartheta_admissibility(report.n_rate, cfg.c_const, cfg.integrator.t_end, cfg.exponents);
  log << "vartheta admissible for C=" << format_double(cfg.c_const)
      << " t=" << format_double(cfg.integrator.t_end) << ": "
      << (adm.admissible ? "yes" : "no") << " (upper " << format_double(adm.upper) << ")\n";
  return {kExitOk, {"validate.csv"}};
}

Outcome cmd_kernel_check(const RunConfig& cfg, std::ostream& log) {
  const ModelParams p = params_at(cfg, static_cast<double>(std::max<std::size_t>(cfg.n, 2)));
  KernelCheckOptions o;
  o.samples = cfg.samples;
  o.seed = cfg.master_seed;
  const auto checks = kernel_property_suite(p, o);
  auto file = open_output(cfg.output_dir / "kernel_check.csv");
  file << "property,samples,max_ratio,tolerance,violations,status\n";
  bool all_ok = true;
  for (const auto& c : checks) {
    const char* status = c.ok() ? "ok" : "FAIL";
    all_ok = all_ok && c.ok();
    file << c.name << ',' << c.samples << ',' << format_double(c.max_ratio) << ','
         << format_double(c.tolerance) << ',' << c.violations << ',' << status << '\n';
    log << std::left << std::setw(24) << c.name << " max ratio " << std::setw(24)
        << format_double(c.max_ratio) << status << '\n';
  }
  return {all_ok ? kExitOk : kExitValidation, {"kernel_check.csv"}};
}

const std::map<std::string, Command, std::less<>>& commands() {
  static const std::map<std::string, Command, std::less<>> table = {
      {"simulate", cmd_simulate},       {"couple", cmd_couple},
      {"sweep", cmd_sweep},             {"concentration", cmd_concentration},
      {"assumptions", cmd_assumptions}, {"validate", cmd_validate},
      {"kernel-check", cmd_kernel_check},
  };
  return table;
}

void write_manifest(std::string_view name, const RunConfig& cfg, int threads,
                    const Outcome& outcome, double seconds) {
  nlohmann::ordered_json manifest;
  manifest["tool"] = "meanfield";
  manifest["version"] = MEANFIELD_VERSION;
  manifest["subcommand"] = std::string(name);
  nlohmann::ordered_json echo = nlohmann::ordered_json::object();
  for (const auto& [key, value] : cfg.echo) echo[key] = value;
  manifest["config"] = echo;
  manifest["master_seed"] = cfg.master_seed;
  manifest["threads"] = threads;
  manifest["exit_code"] = outcome.exit_code;
  auto artifacts = nlohmann::ordered_json::array();
  std::vector<fs::path> sorted = outcome.artifacts;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& rel : sorted) {
    const fs::path full = cfg.output_dir / rel;
    artifacts.push_back({{"path", rel.generic_string()},
                         {"bytes", fs::file_size(full)},
                         {"sha256", sha256_file(full)}});
  }
  manifest["artifacts"] = artifacts;
  manifest["wall_time_seconds"] = seconds;
  auto file = open_output(cfg.output_dir / "manifest.json");
  file << manifest.dump(2) << '\n';
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {"simulate",    "couple",   "sweep",
                                                 "concentration", "assumptions", "validate",
                                                 "kernel-check"};
  return names;
}

int run_subcommand(std::string_view name, const RunConfig& cfg, int threads, std::ostream& log) {
  const auto it = commands().find(name);
  if (it == commands().end()) throw ConfigError("unknown subcommand '" + std::string(name) + "'");
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(cfg.output_dir);
  const Outcome outcome = it->second(cfg, log);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(name, cfg, threads, outcome, seconds);
  return outcome.exit_code;
}

int exit_code_for(std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const ConfigError&) {
    return kExitConfig;
  } catch (const IntegrationError&) {
    return kExitNumerical;
  } catch (...) {
    return kExitOther;
  }
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buffer[1 << 16];
  while (in.read(buffer, sizeof buffer) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buffer, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx, digest, &length);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int k = 0; k < length; ++k) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
  }
  return hex.str();
}

}  // namespace meanfield::app
