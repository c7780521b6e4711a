// probitar command-line front end. Talks to the core library exclusively
// through the C API in probitar.h.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "probitar.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitStatWarning = 3;
constexpr int kExitNumeric = 4;

struct CliError {
  int exit_code;
  std::string message;
};

int map_status(int rc) {
  switch (rc) {
    case PAR_ENUMERIC:
      return kExitNumeric;
    default:
      return kExitUsage;
  }
}

void check(int rc) {
  if (rc != PAR_OK) throw CliError{map_status(rc), par_last_error()};
}

// RAII wrappers over the opaque C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  explicit Handle(T* p) : ptr(p) {}
  ~Handle() { reset(); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& o) noexcept : ptr(o.ptr) { o.ptr = nullptr; }
  Handle& operator=(Handle&& o) noexcept {
    if (this != &o) {
      reset();
      ptr = o.ptr;
      o.ptr = nullptr;
    }
    return *this;
  }
  void reset() {
    if (ptr) Free(ptr);
    ptr = nullptr;
  }
  T** out() {
    reset();
    return &ptr;
  }
  T* get() const { return ptr; }
  explicit operator bool() const { return ptr != nullptr; }
};

using ParamsHandle = Handle<par_params, par_params_free>;
using CovHandle = Handle<par_covspec, par_covspec_free>;
using PanelHandle = Handle<par_panel, par_panel_free>;
using RawHandle = Handle<par_raw, par_raw_free>;
using FitHandle = Handle<par_fit, par_fit_free>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  par_string_free(s);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError{kExitUsage, "cannot open " + path};
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw CliError{kExitUsage, "cannot write " + path};
  out << body;
}

// The simulation design of the two-species study: one standardized
// ARMA(3,1) covariate and negatively correlated noise.
const char* kPaperSec5Params = R"({
  "k": 2, "p": 1, "d": 1,
  "A": [[[0.3, -0.5], [0.2, 0.7]]],
  "B": [[-0.4], [0.6]],
  "C": [0.2, 0.4],
  "R": [[1.0, -0.2], [-0.2, 1.0]]
})";
const char* kPaperSec5Covariate = "arma:ar=0.4,-0.2,0.1;ma=0.3;sd=1";

struct CovariateSpec {
  std::string text = "none";

  CovHandle build(int d) const {
    CovHandle cov;
    if (text == "none" || text.empty()) {
      if (d != 0)
        throw CliError{kExitUsage,
                       "covariate spec 'none' but the model has d = " +
                           std::to_string(d)};
      check(par_covspec_none(cov.out()));
      return cov;
    }
    if (text.rfind("arma:", 0) != 0)
      throw CliError{kExitUsage,
                     "unknown covariate spec '" + text +
                         "' (expected none or arma:ar=..;ma=..;sd=..)"};
    std::vector<double> ar, ma;
    double sd = 1.0;
    std::stringstream body(text.substr(5));
    std::string part;
    while (std::getline(body, part, ';')) {
      const auto eq = part.find('=');
      if (eq == std::string::npos)
        throw CliError{kExitUsage, "bad covariate field '" + part + "'"};
      const std::string key = part.substr(0, eq);
      std::stringstream vals(part.substr(eq + 1));
      std::string num;
      std::vector<double> parsed;
      while (std::getline(vals, num, ',')) {
        if (num.empty()) continue;
        try {
          std::size_t pos = 0;
          parsed.push_back(std::stod(num, &pos));
          if (pos != num.size()) throw std::invalid_argument(num);
        } catch (const std::exception&) {
          throw CliError{kExitUsage,
                         "bad number '" + num + "' in covariate spec"};
        }
      }
      if (key == "ar")
        ar = parsed;
      else if (key == "ma")
        ma = parsed;
      else if (key == "sd" && parsed.size() == 1)
        sd = parsed[0];
      else
        throw CliError{kExitUsage, "bad covariate field '" + part + "'"};
    }
    if (d < 1)
      throw CliError{kExitUsage, "ARMA covariates need a model with d >= 1"};
    check(par_covspec_arma(d, ar.data(), static_cast<int>(ar.size()),
                           ma.data(), static_cast<int>(ma.size()), sd,
                           cov.out()));
    return cov;
  }
};

// Config files hold long option names as keys: either TOML-style
// `key = value` lines or one flat JSON object. Values for options already
// given on the command line are dropped, so flags override the file.
std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::string& path) {
  const std::string text = read_file(path);
  std::vector<std::pair<std::string, std::string>> entries;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded())
      throw CliError{kExitUsage, "config file " + path + " is not valid JSON"};
    for (const auto& [key, value] : j.items()) {
      std::string joined;
      if (value.is_array()) {
        for (const auto& v : value) {
          if (!joined.empty()) joined += ',';
          joined += v.is_string() ? v.get<std::string>() : v.dump();
        }
      } else {
        joined = value.is_string() ? value.get<std::string>() : value.dump();
      }
      entries.emplace_back(key, joined);
    }
    return entries;
  }
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CliError{kExitUsage, "config " + path + " line " +
                                     std::to_string(lineno) +
                                     ": expected key = value"};
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\'')))
      value = value.substr(1, value.size() - 2);
    entries.emplace_back(std::move(key), std::move(value));
  }
  return entries;
}

// Rewrites argv, replacing `--config file` with the file's entries for
// options the user did not pass explicitly.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config_path;
  std::vector<std::string> out;
  out.reserve(args.size());
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (config_path.empty()) return out;
  for (const auto& [key, value] : read_config_file(config_path)) {
    const std::string flag = "--" + key;
    bool given = false;
    for (const auto& a : out)
      if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
    if (given) continue;
    if (value == "true") {
      out.push_back(flag);
    } else if (value == "false") {
      continue;
    } else {
      out.push_back(flag);
      out.push_back(value);
    }
  }
  return out;
}

struct CommonOpts {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir = ".";
  bool strict = false;

  fs::path out(const std::string& name) const {
    fs::create_directories(out_dir);
    return fs::path(out_dir) / name;
  }
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool seed_required) {
  auto* seed = cmd->add_option("--seed", opts.seed,
                               "RNG seed (stochastic commands require it)");
  if (seed_required) seed->required();
  cmd->add_option("--threads", opts.threads,
                  "worker threads (default: PROBIT_AR_THREADS or hardware)");
  cmd->add_option("--out-dir", opts.out_dir, "output directory");
  cmd->add_flag("--strict", opts.strict,
                "exit 3 on statistical warnings (boundary, PD repair)");
  // handled in expand_config before parsing; registered for --help only
  cmd->add_option("--config",
                  "TOML or JSON config file keyed by long option names; "
                  "flags override file values");
}

par_fit_options fit_options(const CommonOpts& common, int p, int ghk_draws,
                            std::uint64_t seed) {
  par_fit_options o;
  par_fit_options_defaults(&o);
  o.lag_order = p;
  o.threads = common.threads;
  o.ghk_draws = ghk_draws;
  o.seed = seed;
  return o;
}

ParamsHandle load_params(const std::string& params_file, bool preset) {
  ParamsHandle params;
  if (preset) {
    check(par_params_from_json(kPaperSec5Params, params.out()));
  } else if (!params_file.empty()) {
    check(par_params_from_json(read_file(params_file).c_str(), params.out()));
  } else {
    throw CliError{kExitUsage, "need --params <file> or --preset paper-sec5"};
  }
  return params;
}

// ---- simulate ----------------------------------------------------------

struct SimulateArgs {
  CommonOpts common;
  std::string params_file;
  std::string preset;
  CovariateSpec covariate;
  int n = 50;
  int horizon = 100;
  int burn_in = 500;
  bool covariate_given = false;
};

int cmd_simulate(const SimulateArgs& args) {
  const bool preset = args.preset == "paper-sec5";
  if (!args.preset.empty() && !preset)
    throw CliError{kExitUsage, "unknown preset '" + args.preset + "'"};
  ParamsHandle params = load_params(args.params_file, preset);
  int k = 0, p = 0, d = 0;
  check(par_params_dims(params.get(), &k, &p, &d));

  CovariateSpec cov_spec = args.covariate;
  if (!args.covariate_given)
    cov_spec.text =
        preset && d == 1 ? kPaperSec5Covariate : (d == 0 ? "none" : cov_spec.text);
  CovHandle cov = cov_spec.build(d);

  PanelHandle panel;
  check(par_simulate_panel(params.get(), cov.get(), args.n, args.horizon,
                           args.burn_in, args.common.seed, panel.out()));
  check(par_panel_save_csv(panel.get(), args.common.out("panel.csv").c_str()));
  char* truth = nullptr;
  check(par_params_to_json(params.get(), &truth));
  write_file(args.common.out("truth.json").string(), take_string(truth));
  std::cout << "wrote " << args.common.out("panel.csv").string() << " and "
            << args.common.out("truth.json").string() << "\n";
  return kExitOk;
}

// ---- estimate ----------------------------------------------------------

struct EstimateArgs {
  CommonOpts common;
  std::string panel_file;
  std::string method = "two-step";
  int lag_order = 1;
  int ghk_draws = 0;
};

int cmd_estimate(const EstimateArgs& args) {
  PanelHandle panel;
  check(par_panel_load_csv(args.panel_file.c_str(), panel.out()));
  const par_fit_options opts = fit_options(args.common, args.lag_order,
                                           args.ghk_draws, args.common.seed);
  FitHandle fit;
  if (args.method == "two-step") {
    check(par_fit_two_step(panel.get(), &opts, fit.out()));
  } else if (args.method == "one-step") {
    check(par_fit_one_step(panel.get(), &opts, fit.out()));
  } else {
    throw CliError{kExitUsage, "unknown method '" + args.method + "'"};
  }

  char* json = nullptr;
  check(par_fit_to_json(fit.get(), &json));
  write_file(args.common.out("estimate.json").string(), take_string(json));
  char* table = nullptr;
  check(par_fit_format_table(fit.get(), &table));
  const std::string table_text = take_string(table);
  write_file(args.common.out("estimate.txt").string(), table_text);
  std::cout << table_text;

  int pd_repaired = 0, any_boundary = 0;
  check(par_fit_flags(fit.get(), &pd_repaired, &any_boundary));
  if (args.common.strict && (pd_repaired || any_boundary))
    return kExitStatWarning;
  return kExitOk;
}

// ---- replicate ---------------------------------------------------------

struct ReplicateArgs {
  CommonOpts common;
  std::string params_file;
  std::string preset;
  CovariateSpec covariate;
  bool covariate_given = false;
  int n = 50;
  int horizon = 100;
  int burn_in = 500;
  int sims = 200;
  std::string method = "two-step";
  int ghk_draws = 0;
};

int cmd_replicate(const ReplicateArgs& args) {
  const bool preset = args.preset == "paper-sec5";
  if (!args.preset.empty() && !preset)
    throw CliError{kExitUsage, "unknown preset '" + args.preset + "'"};
  if (args.method != "two-step" && args.method != "one-step")
    throw CliError{kExitUsage, "unknown method '" + args.method + "'"};
  ParamsHandle params = load_params(args.params_file, preset);
  int k = 0, p = 0, d = 0;
  check(par_params_dims(params.get(), &k, &p, &d));
  CovariateSpec cov_spec = args.covariate;
  if (!args.covariate_given)
    cov_spec.text =
        preset && d == 1 ? kPaperSec5Covariate : (d == 0 ? "none" : cov_spec.text);
  CovHandle cov = cov_spec.build(d);

  const int n_params = k * (1 + p * k + d) + k * (k - 1) / 2;
  std::vector<double> truth(n_params), mean(n_params), mse(n_params),
      bias(n_params), variance(n_params);
  char* names_joined = nullptr;
  const par_fit_options opts =
      fit_options(args.common, p, args.ghk_draws, args.common.seed);
  check(par_replicate(params.get(), cov.get(), args.n, args.horizon,
                      args.burn_in, args.sims, args.method == "one-step",
                      &opts, args.common.seed, truth.data(), mean.data(),
                      mse.data(), bias.data(), variance.data(),
                      &names_joined));
  std::vector<std::string> names;
  {
    std::stringstream ss(take_string(names_joined));
    std::string line;
    while (std::getline(ss, line)) names.push_back(line);
  }

  std::ostringstream human, machine;
  human << "Parameter    True Value  Mean Estimate        MSE       Bias   Variance\n";
  machine << "parameter,true,mean,mse,bias,variance\n";
  machine.precision(17);
  for (int i = 0; i < n_params; ++i) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%-12s %10.3f %14.3f %10.3f %10.3f %10.3f\n",
                  names[i].c_str(), truth[i], mean[i], mse[i], bias[i],
                  variance[i]);
    human << buf;
    machine << names[i] << ',' << truth[i] << ',' << mean[i] << ',' << mse[i]
            << ',' << bias[i] << ',' << variance[i] << '\n';
  }
  write_file(args.common.out("replicate.txt").string(), human.str());
  write_file(args.common.out("replicate.csv").string(), machine.str());
  std::cout << human.str();
  return kExitOk;
}

// ---- bootstrap ---------------------------------------------------------

struct BootstrapArgs {
  CommonOpts common;
  std::string panel_file;
  std::string fit_file;
  int B = 1000;
  double level = 0.95;
  CovariateSpec covariate;
  bool resample = false;
  bool covariate_given = false;
};

int cmd_bootstrap(const BootstrapArgs& args) {
  if (args.B < 100) throw CliError{kExitUsage, "--B must be at least 100"};
  PanelHandle panel;
  check(par_panel_load_csv(args.panel_file.c_str(), panel.out()));
  FitHandle fit;
  check(par_fit_from_json(read_file(args.fit_file).c_str(), fit.out()));

  CovHandle cov;
  if (args.covariate_given && !args.resample) {
    int d = 0;
    check(par_panel_dims(panel.get(), nullptr, nullptr, nullptr, &d));
    cov = args.covariate.build(d);
  }
  FitHandle with_ci;
  check(par_bootstrap_ci(fit.get(), panel.get(), cov.get(), args.B,
                         args.level, args.common.seed, args.common.threads,
                         with_ci.out()));

  char* json = nullptr;
  check(par_fit_to_json(with_ci.get(), &json));
  write_file(args.common.out("bootstrap.json").string(), take_string(json));
  char* table = nullptr;
  check(par_fit_format_intervals(with_ci.get(), &table));
  const std::string table_text = take_string(table);
  write_file(args.common.out("bootstrap.txt").string(), table_text);
  std::cout << table_text;
  return kExitOk;
}

// ---- prep --------------------------------------------------------------

struct PrepArgs {
  CommonOpts common;
  std::string in_file;
  double quantile = 1.0 / 3.0;
  std::vector<std::string> responses;
  std::vector<std::string> covariates;
};

int cmd_prep(const PrepArgs& args) {
  RawHandle raw;
  check(par_raw_load_csv(args.in_file.c_str(), raw.out()));
  RawHandle binary;
  check(par_raw_binarize(raw.get(), args.quantile, binary.out()));
  RawHandle complete, mask;
  check(par_raw_impute(binary.get(), args.common.seed, complete.out(),
                       mask.out()));

  std::vector<const char*> resp, covs;
  for (const auto& s : args.responses) resp.push_back(s.c_str());
  for (const auto& s : args.covariates) covs.push_back(s.c_str());
  PanelHandle panel;
  check(par_raw_assemble(complete.get(), resp.data(),
                         static_cast<int>(resp.size()), covs.data(),
                         static_cast<int>(covs.size()), panel.out()));
  check(par_panel_save_csv(panel.get(), args.common.out("panel.csv").c_str()));
  check(par_raw_save_csv(mask.get(), args.common.out("mask.csv").c_str()));
  int n = 0, T = 0, k = 0, d = 0;
  check(par_panel_dims(panel.get(), &n, &T, &k, &d));
  std::cout << "wrote " << args.common.out("panel.csv").string() << " (n=" << n
            << ", T=" << T << ", k=" << k << ", d=" << d << ") and "
            << args.common.out("mask.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"autoregressive probit binary time series: simulation, "
               "pseudo-likelihood estimation, bootstrap inference"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "simulate a panel and write CSV");
  add_common(c_sim, sim.common, true);
  c_sim->add_option("--params", sim.params_file, "model parameter JSON file");
  c_sim->add_option("--preset", sim.preset,
                    "paper-sec5: the bundled two-species design");
  c_sim->add_option("--n", sim.n, "number of paths");
  c_sim->add_option("--T", sim.horizon, "horizon");
  c_sim->add_option("--burn-in", sim.burn_in, "burn-in steps");
  c_sim->add_option("--covariate", sim.covariate.text,
                    "none or arma:ar=..;ma=..;sd=..")
      ->each([&sim](const std::string&) { sim.covariate_given = true; });

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "fit a panel CSV");
  add_common(c_est, est.common, false);
  c_est->add_option("--panel", est.panel_file, "panel CSV")->required();
  c_est->add_option("--method", est.method, "two-step (default) or one-step");
  c_est->add_option("--p", est.lag_order, "lag order");
  c_est->add_option("--ghk-draws", est.ghk_draws, "GHK draws (one-step, k >= 3)");

  ReplicateArgs rep;
  auto* c_rep = app.add_subcommand(
      "replicate", "Monte-Carlo study: simulate and re-estimate");
  add_common(c_rep, rep.common, true);
  c_rep->add_option("--params", rep.params_file, "model parameter JSON file");
  c_rep->add_option("--preset", rep.preset,
                    "paper-sec5: the bundled two-species design");
  c_rep->add_option("--n", rep.n, "number of paths");
  c_rep->add_option("--T", rep.horizon, "horizon");
  c_rep->add_option("--burn-in", rep.burn_in, "burn-in steps");
  c_rep->add_option("--sims", rep.sims, "number of replicates");
  c_rep->add_option("--method", rep.method, "two-step or one-step");
  c_rep->add_option("--ghk-draws", rep.ghk_draws, "GHK draws (one-step, k >= 3)");
  c_rep->add_option("--covariate", rep.covariate.text,
                    "none or arma:ar=..;ma=..;sd=..")
      ->each([&rep](const std::string&) { rep.covariate_given = true; });

  BootstrapArgs boot;
  auto* c_boot = app.add_subcommand(
      "bootstrap", "parametric bootstrap confidence intervals");
  add_common(c_boot, boot.common, true);
  c_boot->add_option("--panel", boot.panel_file, "panel CSV (template shape)")
      ->required();
  c_boot->add_option("--fit", boot.fit_file, "estimate JSON")->required();
  c_boot->add_option("--B", boot.B, "bootstrap replicates (>= 100)");
  c_boot->add_option("--level", boot.level, "confidence level, e.g. 0.95");
  c_boot->add_option("--covariate", boot.covariate.text,
                     "regenerate covariates: arma:..; default resamples paths")
      ->each([&boot](const std::string&) { boot.covariate_given = true; });
  c_boot->add_flag("--resample-covariates", boot.resample,
                   "resample whole observed covariate paths (default)");

  PrepArgs prep;
  auto* c_prep = app.add_subcommand(
      "prep", "long CSV -> binarize -> impute -> assembled panel CSV");
  add_common(c_prep, prep.common, true);
  c_prep->add_option("--in", prep.in_file, "long-format CSV")->required();
  c_prep->add_option("--quantile", prep.quantile,
                     "binarization quantile (default 1/3)");
  c_prep->add_option("--responses", prep.responses, "response series names")
      ->required()
      ->delimiter(',');
  c_prep->add_option("--covariates", prep.covariates, "covariate series names")
      ->delimiter(',');

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    // CLI11 parses the reversed remainder vector
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    reversed.pop_back();  // program name
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.exit_code;
  }

  try {
    if (c_sim->parsed()) return cmd_simulate(sim);
    if (c_est->parsed()) return cmd_estimate(est);
    if (c_rep->parsed()) return cmd_replicate(rep);
    if (c_boot->parsed()) return cmd_bootstrap(boot);
    if (c_prep->parsed()) return cmd_prep(prep);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
