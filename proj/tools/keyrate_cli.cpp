// Command-line frontend: single evaluations, per-cell optimization, grid
// scans and the verification suites. Configuration comes from a JSON file
// (see default_config_json below); CLI flags override file values.
//
// Exit codes: 0 success, 1 verification failure, 2 config error.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "keyrate/channel.hpp"
#include "keyrate/key_rate.hpp"
#include "keyrate/optimizer.hpp"
#include "keyrate/oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
  keyrate::ChannelParams channel;
  double kappa = 1e-15;
  double eps_cor = 1e-15;
  std::vector<int> grid_k = {3, 4, 5, 6};
  std::vector<int> grid_sx_exponents = {5, 6, 7, 8, 9, 10, 11};
  keyrate::OptimizationConfig optimizer;
  std::string format = "table";
  std::string out_path;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double get_number(const json& obj, const std::string& section, const std::string& key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw ConfigError("config field " + section + "." + key + ": expected a number");
  return obj[key].get<double>();
}

std::vector<int> get_int_list(const json& obj, const std::string& section,
                              const std::string& key, std::vector<int> fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_array())
    throw ConfigError("config field " + section + "." + key + ": expected an array");
  std::vector<int> out;
  for (const auto& v : obj[key]) {
    if (!v.is_number_integer())
      throw ConfigError("config field " + section + "." + key + ": expected integers");
    out.push_back(v.get<int>());
  }
  if (out.empty())
    throw ConfigError("config field " + section + "." + key + ": empty grid");
  return out;
}

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  if (path.empty()) return cfg;

  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  if (root.contains("channel")) {
    const json& ch = root["channel"];
    cfg.channel.p_ap = get_number(ch, "channel", "p_ap", cfg.channel.p_ap);
    cfg.channel.p_dc = get_number(ch, "channel", "p_dc", cfg.channel.p_dc);
    cfg.channel.e_mis = get_number(ch, "channel", "e_mis", cfg.channel.e_mis);
    cfg.channel.eta_ch = get_number(ch, "channel", "eta_ch", cfg.channel.eta_ch);
    cfg.channel.eta_sys = get_number(ch, "channel", "eta_sys", cfg.channel.eta_sys);
  }
  if (root.contains("security")) {
    const json& sec = root["security"];
    cfg.kappa = get_number(sec, "security", "kappa", cfg.kappa);
    cfg.eps_cor = get_number(sec, "security", "eps_cor", cfg.eps_cor);
  }
  if (root.contains("grid")) {
    const json& grid = root["grid"];
    cfg.grid_k = get_int_list(grid, "grid", "k", cfg.grid_k);
    cfg.grid_sx_exponents = get_int_list(grid, "grid", "sx_exponents", cfg.grid_sx_exponents);
  }
  if (root.contains("optimizer")) {
    const json& opt = root["optimizer"];
    cfg.optimizer.restarts =
        static_cast<int>(get_number(opt, "optimizer", "restarts", cfg.optimizer.restarts));
    cfg.optimizer.seed = static_cast<std::uint64_t>(
        get_number(opt, "optimizer", "seed", static_cast<double>(cfg.optimizer.seed)));
    cfg.optimizer.spacing_min =
        get_number(opt, "optimizer", "spacing_min", cfg.optimizer.spacing_min);
    cfg.optimizer.mu_min = get_number(opt, "optimizer", "mu_min", cfg.optimizer.mu_min);
    cfg.optimizer.tolerance = get_number(opt, "optimizer", "tolerance", cfg.optimizer.tolerance);
    cfg.optimizer.max_evals =
        static_cast<int>(get_number(opt, "optimizer", "max_evals", cfg.optimizer.max_evals));
  }
  if (root.contains("output")) {
    const json& out = root["output"];
    if (out.contains("format")) cfg.format = out["format"].get<std::string>();
    if (out.contains("path")) cfg.out_path = out["path"].get<std::string>();
  }

  try {
    cfg.channel.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config field channel: ") + e.what());
  }
  if (!(cfg.kappa > 0.0 && cfg.kappa < 1.0))
    throw ConfigError("config field security.kappa: must lie in (0,1)");
  if (!(cfg.eps_cor > 0.0 && cfg.eps_cor < 1.0))
    throw ConfigError("config field security.eps_cor: must lie in (0,1)");
  return cfg;
}

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_sci6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.5e", v);
  return buf;
}

std::string join(const std::vector<double>& values, const char* sep,
                 std::string (*fmt)(double)) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += fmt(values[i]);
  }
  return out;
}

struct ScanRow {
  int k = 0;
  double s_x = 0.0;
  keyrate::OptimizationResult result;
};

constexpr const char* kCsvHeader =
    "k,s_x,rate,rate_e5,eps_sec,p_x,mu,p_mu,feasible,converged,evaluations";

std::string csv_row(const ScanRow& row) {
  const auto& r = row.result;
  std::string line;
  line += std::to_string(row.k);
  line += ',' + fmt_full(row.s_x);
  line += ',' + fmt_full(r.report.rate);
  line += ',' + fmt_full(r.report.rate * 1e5);
  line += ',' + fmt_full(r.report.eps_sec);
  line += ',' + fmt_full(r.best.p_x);
  line += ',' + join(r.best.mu, ";", fmt_full);
  line += ',' + join(r.best.p_mu, ";", fmt_full);
  line += ',' + std::string(r.report.feasible ? "1" : "0");
  line += ',' + std::string(r.converged ? "1" : "0");
  line += ',' + std::to_string(r.evaluations);
  return line;
}

json json_row(const ScanRow& row) {
  const auto& r = row.result;
  return json{{"k", row.k},
              {"s_x", row.s_x},
              {"rate", r.report.rate},
              {"rate_e5", r.report.rate * 1e5},
              {"eps_sec", r.report.eps_sec},
              {"p_x", r.best.p_x},
              {"mu", r.best.mu},
              {"p_mu", r.best.p_mu},
              {"feasible", r.report.feasible},
              {"converged", r.converged},
              {"evaluations", r.evaluations}};
}

// R' display data: (sx_exponent, k) -> published baseline rate (x 1e-5).
std::map<std::pair<int, int>, double> load_baseline(const std::string& path) {
  std::map<std::pair<int, int>, double> out;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open baseline file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    int ex = 0, k = 0;
    double v = 0.0;
    char c1 = 0, c2 = 0;
    if (ss >> ex >> c1 >> k >> c2 >> v) out[{ex, k}] = v;
  }
  return out;
}

std::string default_baseline_path(const char* argv0) {
  // next to the installed binary first, then the source-tree copy
  std::error_code ec;
  fs::path exe = fs::canonical(fs::path(argv0), ec);
  if (!ec) {
    fs::path share = exe.parent_path().parent_path() / "share" / "keyrate" /
                     "baseline_rates.csv";
    if (fs::exists(share, ec)) return share.string();
  }
#ifdef KEYRATE_BASELINE_FILE
  return KEYRATE_BASELINE_FILE;
#else
  return {};
#endif
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + out_path);
  out << text;
}

std::string render_table(const std::vector<ScanRow>& rows,
                         const std::map<std::pair<int, int>, double>& baseline) {
  std::vector<int> ks, exps;
  for (const auto& row : rows) {
    if (std::find(ks.begin(), ks.end(), row.k) == ks.end()) ks.push_back(row.k);
    const int ex = static_cast<int>(std::llround(std::log10(row.s_x)));
    if (std::find(exps.begin(), exps.end(), ex) == exps.end()) exps.push_back(ex);
  }
  std::sort(ks.begin(), ks.end());
  std::sort(exps.begin(), exps.end());

  std::ostringstream out;
  out << "# optimized key rate R_e5 = R * 1e5 per (s_x, k)\n";
  out << "s_x";
  for (int k : ks) {
    if (!baseline.empty()) out << "\tR'_e5(k=" << k << ")";
    out << "\tR_e5(k=" << k << ")";
  }
  out << '\n';
  for (int ex : exps) {
    out << "1e" << ex;
    for (int k : ks) {
      const auto it = std::find_if(rows.begin(), rows.end(), [&](const ScanRow& r) {
        return r.k == k &&
               static_cast<int>(std::llround(std::log10(r.s_x))) == ex;
      });
      if (!baseline.empty()) {
        const auto b = baseline.find({ex, k});
        out << '\t' << (b == baseline.end() ? "-" : fmt_sci6(b->second));
      }
      out << '\t' << (it == rows.end() ? "-" : fmt_sci6(it->result.report.rate * 1e5));
    }
    out << '\n';
  }
  return out.str();
}

std::string render_rows(const std::vector<ScanRow>& rows, const std::string& format,
                        const std::map<std::pair<int, int>, double>& baseline) {
  if (format == "csv") {
    std::string text = std::string(kCsvHeader) + "\n";
    for (const auto& row : rows) text += csv_row(row) + "\n";
    return text;
  }
  if (format == "json") {
    json arr = json::array();
    for (const auto& row : rows) arr.push_back(json_row(row));
    return arr.dump(2) + "\n";
  }
  if (format == "table") return render_table(rows, baseline);
  throw ConfigError("unknown output format: " + format);
}

json report_to_json(const keyrate::KeyRateReport& report) {
  return json{{"rate", report.rate},
              {"rate_raw", report.rate_raw},
              {"rate_e5", report.rate * 1e5},
              {"final_length", report.final_length},
              {"eps_sec", report.eps_sec},
              {"e_p", report.e_p},
              {"e_z1", report.e_z1},
              {"lambda_ec", report.lambda_ec},
              {"deviation_x", report.deviation_x},
              {"b", report.b},
              {"feasible", report.feasible},
              {"vacuous_gamma", report.vacuous_gamma},
              {"iterations", report.iterations}};
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("flag " + flag + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw ConfigError("flag " + flag + ": empty list");
  return out;
}

int run_rate(const RunConfig& cfg, const std::string& mu_text, const std::string& pmu_text,
             double p_x, double s_x, double eps_sec_fixed) {
  const std::vector<double> mu = parse_double_list(mu_text, "--mu");
  std::vector<double> p_mu = pmu_text.empty()
                                 ? std::vector<double>(mu.size(), 1.0 / mu.size())
                                 : parse_double_list(pmu_text, "--pmu");
  if (p_mu.size() == mu.size()) {
    // tolerate round-off in hand-typed probabilities
    double sum = 0.0;
    for (double p : p_mu) sum += p;
    if (sum > 0.0)
      for (double& p : p_mu) p /= sum;
  }
  const keyrate::IntensityProfile profile(mu, p_mu);
  const keyrate::ObservedStats observed = keyrate::observe(cfg.channel, profile);

  keyrate::KeyRateReport report;
  if (eps_sec_fixed > 0.0) {
    keyrate::SecurityBudget budget;
    budget.eps_sec = eps_sec_fixed;
    budget.eps_cor = cfg.eps_cor;
    report = keyrate::key_rate(profile, observed, p_x, s_x, budget);
  } else {
    report = keyrate::solve_security_fixed_point(profile, observed, p_x, s_x, cfg.kappa,
                                                 cfg.eps_cor);
  }

  if (cfg.format == "json") {
    write_output(report_to_json(report).dump(2) + "\n", cfg.out_path);
  } else {
    std::ostringstream out;
    out << "rate         " << fmt_full(report.rate) << "\n"
        << "rate_e5      " << fmt_full(report.rate * 1e5) << "\n"
        << "rate_raw     " << fmt_full(report.rate_raw) << "\n"
        << "final_length " << fmt_full(report.final_length) << "\n"
        << "eps_sec      " << fmt_full(report.eps_sec) << "\n"
        << "e_p          " << fmt_full(report.e_p) << "\n"
        << "e_z1         " << fmt_full(report.e_z1) << "\n"
        << "lambda_ec    " << fmt_full(report.lambda_ec) << "\n"
        << "deviation_x  " << fmt_full(report.deviation_x) << "\n"
        << "feasible     " << (report.feasible ? 1 : 0) << "\n"
        << "vacuous_gamma " << (report.vacuous_gamma ? 1 : 0) << "\n"
        << "iterations   " << report.iterations << "\n";
    write_output(out.str(), cfg.out_path);
  }
  return 0;
}

int run_scan(const RunConfig& cfg, const std::string& baseline_path) {
  std::map<std::pair<int, int>, double> baseline;
  if (!baseline_path.empty()) baseline = load_baseline(baseline_path);

  std::vector<int> ks = cfg.grid_k;
  std::vector<int> exps = cfg.grid_sx_exponents;
  std::sort(ks.begin(), ks.end());
  std::sort(exps.begin(), exps.end());

  std::vector<ScanRow> rows;
  for (int k : ks) {
    std::optional<keyrate::ParameterPoint> hint;  // warm start along the column
    for (int ex : exps) {
      keyrate::OptimizationConfig opt = cfg.optimizer;
      opt.k = k;
      opt.s_x = std::pow(10.0, ex);
      ScanRow row;
      row.k = k;
      row.s_x = opt.s_x;
      row.result = keyrate::optimize(cfg.channel, opt, cfg.kappa, cfg.eps_cor, hint);
      if (row.result.converged) hint = row.result.best;
      rows.push_back(std::move(row));
    }
  }
  // rows are generated in (k, s_x) order already; emit deterministically
  write_output(render_rows(rows, cfg.format, baseline), cfg.out_path);
  return 0;
}

int run_optimize(const RunConfig& cfg, int k, double s_x) {
  keyrate::OptimizationConfig opt = cfg.optimizer;
  opt.k = k;
  opt.s_x = s_x;
  ScanRow row;
  row.k = k;
  row.s_x = s_x;
  row.result = keyrate::optimize(cfg.channel, opt, cfg.kappa, cfg.eps_cor);
  write_output(render_rows({row}, cfg.format == "table" ? "csv" : cfg.format, {}),
               cfg.out_path);
  return 0;
}

int run_verify(std::uint64_t seed, int trials, int coverage_trials, bool exploratory_k2) {
  using clock = std::chrono::steady_clock;
  bool failed = false;

  for (int k : {3, 5}) {
    const auto t0 = clock::now();
    const keyrate::ValidityReport rep = keyrate::bound_validity_check(trials, k, seed);
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    const bool ok = rep.total_violations() == 0;
    failed = failed || !ok;
    std::cout << (ok ? "PASS" : "FAIL") << " bound validity k=" << k << ": "
              << rep.total_violations() << " violations in " << rep.trials << " trials ("
              << fmt_sci6(secs) << " s)\n";
  }

  {
    const auto t0 = clock::now();
    const keyrate::CoverageReport rep = keyrate::coverage_check(0.1, 1000, 3, coverage_trials, seed);
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    failed = failed || !rep.pass;
    std::cout << (rep.pass ? "PASS" : "FAIL") << " deviation coverage: empirical rate "
              << fmt_full(rep.empirical_rate) << " vs threshold " << fmt_full(rep.threshold)
              << " (" << fmt_sci6(secs) << " s)\n";
  }

  if (exploratory_k2) {
    const keyrate::ValidityReport rep = keyrate::bound_validity_check(trials, 2, seed);
    std::cout << "INFO k=2 exploratory: " << rep.total_violations() << " violations in "
              << rep.trials
              << " trials (single-intensity variant is not a valid bound; rate"
                 " computations require k >= 3)\n";
  }

  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-key decoy-state BB84 key-rate calculator"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file");

  // rate
  auto* rate_cmd = app.add_subcommand("rate", "evaluate one explicit parameter point");
  std::string mu_text, pmu_text;
  double rate_px = 0.9, rate_sx = 1e7, rate_eps_sec = 0.0;
  rate_cmd->add_option("--mu", mu_text, "comma-separated intensities, decreasing")->required();
  rate_cmd->add_option("--pmu", pmu_text, "comma-separated usage probabilities");
  rate_cmd->add_option("--px", rate_px, "X-basis probability");
  rate_cmd->add_option("--sx", rate_sx, "raw key length");
  rate_cmd->add_option("--eps-sec", rate_eps_sec,
                       "fixed secrecy parameter (default: resolve eps_sec = kappa * length)");

  // optimize
  auto* opt_cmd = app.add_subcommand("optimize", "optimize a single (k, s_x) cell");
  int opt_k = 3;
  double opt_sx = 1e7;
  opt_cmd->add_option("--k", opt_k, "number of intensities");
  opt_cmd->add_option("--sx", opt_sx, "raw key length");

  // scan
  auto* scan_cmd = app.add_subcommand("scan", "optimize a (k, s_x) grid");
  std::string baseline_path;
  bool with_baseline = false;
  scan_cmd->add_option("--baseline", baseline_path,
                       "baseline reference file for the table view");
  scan_cmd->add_flag("--with-baseline", with_baseline,
                     "include bundled published baseline rates in the table view");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run the verification oracles");
  int verify_trials = 1000, coverage_trials = 10000;
  bool exploratory_k2 = false;
  verify_cmd->add_option("--trials", verify_trials, "bound-validity trials");
  verify_cmd->add_option("--coverage-trials", coverage_trials, "coverage trials");
  verify_cmd->add_flag("--k2-exploratory", exploratory_k2,
                       "also report the (invalid) k=2 variant violation count");

  // shared overrides
  std::string format_override, out_override;
  double seed_override = -1.0, restarts_override = -1.0;
  for (auto* cmd : {rate_cmd, opt_cmd, scan_cmd}) {
    cmd->add_option("--format", format_override, "table|csv|json");
    cmd->add_option("--out", out_override, "output path (default stdout)");
  }
  for (auto* cmd : {opt_cmd, scan_cmd, verify_cmd}) {
    cmd->add_option("--seed", seed_override, "RNG seed");
  }
  for (auto* cmd : {opt_cmd, scan_cmd}) {
    cmd->add_option("--restarts", restarts_override, "optimizer restarts");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (!format_override.empty()) cfg.format = format_override;
    if (!out_override.empty()) cfg.out_path = out_override;
    if (seed_override >= 0.0) cfg.optimizer.seed = static_cast<std::uint64_t>(seed_override);
    if (restarts_override >= 0.0) cfg.optimizer.restarts = static_cast<int>(restarts_override);

    if (rate_cmd->parsed())
      return run_rate(cfg, mu_text, pmu_text, rate_px, rate_sx, rate_eps_sec);
    if (opt_cmd->parsed()) return run_optimize(cfg, opt_k, opt_sx);
    if (scan_cmd->parsed()) {
      if (with_baseline && baseline_path.empty())
        baseline_path = default_baseline_path(argv[0]);
      return run_scan(cfg, baseline_path);
    }
    if (verify_cmd->parsed())
      return run_verify(cfg.optimizer.seed, verify_trials, coverage_trials, exploratory_k2);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
