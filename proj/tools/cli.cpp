#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "coxgibbs/coxgibbs.hpp"

namespace coxgibbs::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kLungCovariates = {"age",       "sex",      "ph.ecog", "ph.karno",
                                                  "pat.karno", "meal.cal", "wt.loss"};

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    parts.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
  }
  return parts;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k) out += sep;
    out += parts[k];
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& flag) {
  std::vector<double> values;
  for (const auto& part : split(s, ',')) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size() || !std::isfinite(v)) {
      throw UsageError(flag + ": '" + part + "' is not a number");
    }
    values.push_back(v);
  }
  if (values.empty()) throw UsageError(flag + ": expected a comma-separated list of numbers");
  return values;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open '" + path.string() + "'");
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw UsageError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

/// Keys of a resolved config that name outputs; excluded from the hash so a
/// replay into another directory keeps the same identity.
bool is_output_key(const std::string& key) { return key == "out" || key == "out-prefix"; }

std::string manifest_hash(const std::string& subcommand, const json& config) {
  json identity = json::object();
  identity["subcommand"] = subcommand;
  json cfg = json::object();
  for (const auto& [k, v] : config.items()) {
    if (!is_output_key(k)) cfg[k] = v;
  }
  identity["config"] = cfg;
  return fnv1a_hex(identity.dump());
}

/// Canonical argv that re-creates a resolved config.
std::vector<std::string> config_to_args(const std::string& subcommand, const json& config) {
  std::vector<std::string> args{subcommand};
  for (const auto& [k, v] : config.items()) {
    if (v.is_boolean()) {
      if (v.get<bool>()) args.push_back("--" + k);
    } else if (v.is_null()) {
      continue;
    } else if (v.is_number_float()) {
      args.push_back("--" + k);
      args.push_back(format_double(v.get<double>()));
    } else if (v.is_number()) {
      args.push_back("--" + k);
      args.push_back(v.dump());
    } else {
      args.push_back("--" + k);
      args.push_back(v.get<std::string>());
    }
  }
  return args;
}

void write_manifest(const fs::path& path, const std::string& subcommand, const json& config,
                    const std::vector<std::string>& inputs, const std::vector<std::string>& outputs,
                    std::uint64_t seed, const std::string& hash) {
  json m = json::object();
  m["tool"] = "coxgibbs";
  m["tool_version"] = kToolVersion;
  m["rng_stream_version"] = Rng::kStreamVersion;
  m["subcommand"] = subcommand;
  m["config"] = config;
  m["args"] = config_to_args(subcommand, config);
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["seed"] = seed;
  m["timestamp"] = utc_timestamp();
  m["manifest_hash"] = hash;
  write_text(path, m.dump(2) + "\n");
}

std::string samples_csv(const Chain& chain) {
  std::string s;
  for (Index k = 0; k < chain.p(); ++k) {
    if (k) s += ',';
    s += "beta_" + std::to_string(k + 1);
  }
  s += '\n';
  char buf[40];
  for (Index r = 0; r < chain.length(); ++r) {
    for (Index k = 0; k < chain.p(); ++k) {
      if (k) s += ',';
      const int len = std::snprintf(buf, sizeof buf, "%.17g", chain.samples(r, k));
      s.append(buf, static_cast<std::size_t>(len));
    }
    s += '\n';
  }
  return s;
}

// --- shared data flags -------------------------------------------------------

struct DataFlags {
  std::string path;
  std::string preset = "none";
  std::string time_col = "time";
  std::string status_col = "status";
  int event_code = 1;
  std::string covariates;
  std::string na_scope = "selected";

  CLI::Option* time_opt = nullptr;
  CLI::Option* status_opt = nullptr;
  CLI::Option* code_opt = nullptr;
  CLI::Option* cov_opt = nullptr;
  CLI::Option* na_opt = nullptr;

  void add(CLI::App* app) {
    app->add_option("--data", path, "Input CSV (header row, comma-separated)")->required();
    app->add_option("--preset", preset, "Column preset: none or lung")
        ->check(CLI::IsMember({"none", "lung"}));
    time_opt = app->add_option("--time-col", time_col, "Observed-time column");
    status_opt = app->add_option("--status-col", status_col, "Status column");
    code_opt = app->add_option("--event-code", event_code, "Status code that marks an event");
    cov_opt = app->add_option("--covariates", covariates,
                              "Comma-separated covariate columns (default: every other column)");
    na_opt = app->add_option("--na-scope", na_scope,
                             "Rows dropped for missing values in: selected columns or all columns")
                 ->check(CLI::IsMember({"selected", "all"}));
  }

  /// Applies the preset to flags the user did not set.
  void resolve() {
    if (preset == "lung") {
      if (!time_opt->count()) time_col = "time";
      if (!status_opt->count()) status_col = "status";
      if (!code_opt->count()) event_code = 2;
      if (!cov_opt->count()) covariates = join(kLungCovariates, ",");
      if (!na_opt->count()) na_scope = "all";
    }
    if (covariates.empty()) {
      std::ifstream f(path);
      if (!f) throw UsageError("--data: cannot open '" + path + "'");
      std::string header;
      std::getline(f, header);
      std::vector<std::string> cols;
      for (auto c : split(header, ',')) {
        c.erase(std::remove(c.begin(), c.end(), '"'), c.end());
        c.erase(std::remove(c.begin(), c.end(), '\r'), c.end());
        if (c != time_col && c != status_col) cols.push_back(c);
      }
      covariates = join(cols, ",");
    }
    preset = "none";
  }

  CsvSchema schema() const {
    CsvSchema s;
    s.time_col = time_col;
    s.status_col = status_col;
    s.status_event_code = event_code;
    s.covariate_cols = split(covariates, ',');
    s.missing = na_scope == "all" ? MissingScope::all_columns : MissingScope::selected_columns;
    return s;
  }

  void to_config(json& cfg) const {
    cfg["data"] = path;
    cfg["time-col"] = time_col;
    cfg["status-col"] = status_col;
    cfg["event-code"] = event_code;
    cfg["covariates"] = covariates;
    cfg["na-scope"] = na_scope;
  }
};

// --- simulate -----------------------------------------------------------------

struct SimulateFlags {
  long n = 300;
  std::string beta = "1.0,0.5,-1.5,3.0";
  double rounding = 0.0;
  double censor_rate = 1.0;
  std::uint64_t seed = 1;
  std::string out;
};

int do_simulate(const SimulateFlags& f, std::ostream& out) {
  SynthConfig cfg;
  cfg.n = f.n;
  cfg.beta0 = to_vector(parse_doubles(f.beta, "--beta"));
  cfg.rounding = f.rounding;
  cfg.censor_rate = f.censor_rate;
  cfg.seed = f.seed;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  json config = json::object();
  config["n"] = f.n;
  config["beta"] = f.beta;
  config["rounding"] = f.rounding;
  config["censor-rate"] = f.censor_rate;
  config["seed"] = f.seed;
  config["out"] = f.out;
  const std::string hash = manifest_hash("simulate", config);

  const SurvivalDataset data = generate(cfg);
  std::ostringstream csv;
  write_csv(data, csv);
  write_text(f.out, csv.str());
  const std::string manifest = f.out + ".manifest.json";
  write_manifest(manifest, "simulate", config, {}, {f.out}, f.seed, hash);
  out << "simulate: wrote " << data.n() << " rows (" << data.event_count() << " events) to " << f.out << "\n";
  return kSuccess;
}

// --- fit ------------------------------------------------------------------------

struct FitFlags {
  DataFlags data;
  std::string method = "gs4cox";
  int iters = 1000;
  int burnin = 500;
  double w = 1.0;
  double prior_var = 100.0;
  std::string ties = "breslow";
  bool no_correction = false;
  double scale = -1.0;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::string out_prefix;
  CLI::Option* scale_opt = nullptr;
};

void check_fit_flags(const FitFlags& f) {
  if (f.iters < 1) throw UsageError("--iters must be >= 1");
  if (f.burnin < 0 || f.burnin >= f.iters) throw UsageError("--burnin must satisfy 0 <= burnin < iters");
  if (!(f.w > 0.0)) throw UsageError("--w must be > 0");
  if (!(f.prior_var > 0.0)) throw UsageError("--prior-var must be > 0");
  if (!(f.alpha > 0.0 && f.alpha < 1.0)) throw UsageError("--alpha must be in (0, 1)");
  if (f.no_correction && f.method != "gs4cox") throw UsageError("--no-correction applies to gs4cox only");
  if (f.iters - f.burnin < 20) throw UsageError("need at least 20 post-burn-in iterations for the summary");
}

json fit_config(const FitFlags& f) {
  json cfg = json::object();
  cfg["method"] = f.method;
  f.data.to_config(cfg);
  cfg["iters"] = f.iters;
  cfg["burnin"] = f.burnin;
  cfg["w"] = f.w;
  cfg["prior-var"] = f.prior_var;
  cfg["ties"] = f.ties;
  cfg["no-correction"] = f.no_correction;
  if (f.scale >= 0.0) cfg["scale"] = f.scale;
  cfg["alpha"] = f.alpha;
  cfg["seed"] = f.seed;
  cfg["out-prefix"] = f.out_prefix;
  return cfg;
}

int do_fit(FitFlags& f, std::ostream& out) {
  f.data.resolve();
  check_fit_flags(f);
  const json config = fit_config(f);
  const std::string hash = manifest_hash("fit", config);

  const LoadResult loaded = load_csv(f.data.path, f.data.schema());
  const SurvivalDataset& data = loaded.data;
  const Ties ties = parse_ties(f.ties);
  const SamplerKind kind = parse_sampler(f.method);

  FitConfig cfg;
  cfg.iterations = f.iters;
  cfg.burn_in = f.burnin;
  cfg.learning_rate = f.w;
  cfg.seed = f.seed;
  cfg.prior = PriorSpec::isotropic(data.p(), f.prior_var);
  cfg.threads = threads_from_env();

  Chain chain;
  std::optional<double> acceptance;
  Index pair_count = 0;
  if (kind == SamplerKind::gs4cox) {
    const PairContrasts pairs = build_pair_contrasts(data);
    pair_count = pairs.size();
    chain = run_gibbs(pairs, cfg);
    if (!f.no_correction) {
      chain = correct(chain, data, ties);
      if (!chain.corrected) throw NumericalError(chain.diagnostic);
    }
  } else {
    const MhReport mh = run_mh(data, cfg, ties, f.scale >= 0.0 ? std::optional<double>(f.scale) : std::nullopt);
    chain = mh.chain;
    acceptance = mh.acceptance_rate;
  }
  const ChainSummary summary = summarize(chain, f.alpha);

  json report = json::object();
  report["method"] = f.method;
  report["covariates"] = data.column_names();
  report["estimates"] = to_json(summary.posterior_mean);
  report["ci_lo"] = to_json(summary.credible_lo);
  report["ci_hi"] = to_json(summary.credible_hi);
  report["ess"] = to_json(summary.ess_per_param);
  report["ess_avg"] = summary.ess_avg;
  report["esr"] = summary.esr;
  if (acceptance) report["acceptance_rate"] = *acceptance;
  report["correction"] = chain.correction ? to_json(*chain.correction) : json::array();
  report["n"] = data.n();
  report["events"] = data.event_count();
  report["rows_dropped"] = loaded.dropped_rows;
  if (kind == SamplerKind::gs4cox) report["pairs"] = pair_count;
  report["wall_seconds"] = chain.wall_seconds;
  report["config"] = config;
  report["manifest_hash"] = hash;

  json sidecar = json::object();
  sidecar["seed"] = chain.seed;
  sidecar["iterations"] = f.iters;
  sidecar["burn_in"] = f.burnin;
  sidecar["learning_rate"] = f.w;
  sidecar["corrected"] = chain.corrected;
  sidecar["correction"] = chain.correction ? to_json(*chain.correction) : json::array();
  sidecar["wall_seconds"] = chain.wall_seconds;
  if (acceptance) sidecar["acceptance_rate"] = *acceptance;
  sidecar["manifest_hash"] = hash;

  const std::string report_path = f.out_prefix + ".report.json";
  const std::string samples_path = f.out_prefix + ".samples.csv";
  const std::string sidecar_path = f.out_prefix + ".samples.json";
  const std::string manifest_path = f.out_prefix + ".manifest.json";
  write_text(samples_path, samples_csv(chain));
  write_text(sidecar_path, sidecar.dump(2) + "\n");
  write_text(report_path, report.dump(2) + "\n");
  write_manifest(manifest_path, "fit", config, {f.data.path}, {report_path, samples_path, sidecar_path}, f.seed,
                 hash);

  out << "fit: " << f.method << " on " << data.n() << " subjects (" << loaded.dropped_rows
      << " rows dropped), ess_avg " << summary.ess_avg << ", report " << report_path << "\n";
  return kSuccess;
}

// --- calibrate ------------------------------------------------------------------

struct CalibrateFlags {
  DataFlags data;
  std::string method = "gs4cox";
  int bootstrap = 100;
  double alpha = 0.05;
  double tol = 0.001;
  int max_rounds = 1000;
  int inner_iters = 600;
  int inner_burnin = 200;
  double w0 = 1.0;
  double prior_var = 100.0;
  std::string ties = "breslow";
  std::uint64_t seed = 1;
  std::string out;
};

int do_calibrate(CalibrateFlags& f, std::ostream& out) {
  f.data.resolve();
  if (f.bootstrap < 1) throw UsageError("--bootstrap must be >= 1");
  if (!(f.alpha > 0.0 && f.alpha < 1.0)) throw UsageError("--alpha must be in (0, 1)");
  if (!(f.tol > 0.0)) throw UsageError("--tol must be > 0");
  if (f.max_rounds < 1) throw UsageError("--max-rounds must be >= 1");
  if (f.inner_iters < 1 || f.inner_burnin < 0 || f.inner_burnin >= f.inner_iters) {
    throw UsageError("--inner-burnin must satisfy 0 <= inner-burnin < inner-iters");
  }
  if (!(f.w0 > 0.0)) throw UsageError("--w0 must be > 0");
  if (!(f.prior_var > 0.0)) throw UsageError("--prior-var must be > 0");

  json config = json::object();
  config["method"] = f.method;
  f.data.to_config(config);
  config["bootstrap"] = f.bootstrap;
  config["alpha"] = f.alpha;
  config["tol"] = f.tol;
  config["max-rounds"] = f.max_rounds;
  config["inner-iters"] = f.inner_iters;
  config["inner-burnin"] = f.inner_burnin;
  config["w0"] = f.w0;
  config["prior-var"] = f.prior_var;
  config["ties"] = f.ties;
  config["seed"] = f.seed;
  config["out"] = f.out;
  const std::string hash = manifest_hash("calibrate", config);

  const LoadResult loaded = load_csv(f.data.path, f.data.schema());
  GpcConfig cfg;
  cfg.bootstrap_count = f.bootstrap;
  cfg.alpha = f.alpha;
  cfg.tol = f.tol;
  cfg.max_rounds = f.max_rounds;
  cfg.inner_fit.iterations = f.inner_iters;
  cfg.inner_fit.burn_in = f.inner_burnin;
  cfg.inner_fit.learning_rate = f.w0;
  cfg.inner_fit.prior = PriorSpec::isotropic(loaded.data.p(), f.prior_var);
  cfg.seed = f.seed;
  cfg.ties = parse_ties(f.ties);
  cfg.threads = threads_from_env();
  const GpcResult result = calibrate(loaded.data, parse_sampler(f.method), cfg);

  json trace = json::array();
  for (const auto& r : result.trace) {
    json row = json::object();
    row["round"] = r.round;
    row["w"] = r.w;
    row["coverage"] = r.coverage;
    row["replicates_used"] = r.replicates_used;
    trace.push_back(row);
  }
  json doc = json::object();
  doc["method"] = f.method;
  doc["w"] = result.w;
  doc["converged"] = result.converged;
  doc["target"] = to_json(result.target);
  doc["trace"] = trace;
  doc["dropped"] = result.dropped;
  doc["config"] = config;
  doc["manifest_hash"] = hash;
  write_text(f.out, doc.dump(2) + "\n");
  write_manifest(f.out + ".manifest.json", "calibrate", config, {f.data.path}, {f.out}, f.seed, hash);
  out << "calibrate: " << f.method << " w = " << result.w << " after " << result.trace.size() << " round(s)"
      << (result.converged ? " (converged)" : "") << "\n";
  return kSuccess;
}

// --- bench ------------------------------------------------------------------------

struct BenchFlags {
  std::string sizes = "300";
  std::string learning_rates = "1.0";
  std::string betas = "1.0,0.5,-1.5,3.0";
  std::string roundings = "0";
  std::string methods = "gs4cox,mh";
  int reps = 1;
  int iters = 1000;
  int burnin = 500;
  double prior_var = 100.0;
  std::string ties = "breslow";
  std::uint64_t seed = 1;
  std::string out;
};

struct BenchScenario {
  long n;
  double w;
  std::string beta_text;
  Eigen::VectorXd beta0;
  double rounding;
  std::string label;
};

struct BenchRow {
  std::string scenario;
  std::string method;
  int replicate = 0;
  double ess = std::nan("");
  double esr = std::nan("");
  double mean_abs_err = std::nan("");
  double wall_seconds = std::nan("");
  std::string error;
};

BenchRow run_bench_cell(const BenchScenario& sc, std::size_t scenario_index, int rep, const std::string& method,
                        const BenchFlags& f) {
  BenchRow row;
  row.scenario = sc.label;
  row.method = method;
  row.replicate = rep;
  try {
    SynthConfig sim;
    sim.n = sc.n;
    sim.beta0 = sc.beta0;
    sim.rounding = sc.rounding;
    sim.seed = derive_seed(f.seed, {scenario_index, static_cast<std::uint64_t>(rep)});
    const SurvivalDataset data = generate(sim);
    const Ties ties = parse_ties(f.ties);
    FitConfig cfg;
    cfg.iterations = f.iters;
    cfg.burn_in = f.burnin;
    cfg.learning_rate = sc.w;
    cfg.prior = PriorSpec::isotropic(data.p(), f.prior_var);
    cfg.seed = derive_seed(f.seed, {scenario_index, static_cast<std::uint64_t>(rep), method == "mh" ? 1u : 0u});
    const Eigen::VectorXd reference = mple(data, NewtonOptions{}, ties);
    const Chain chain = fit_chain(data, parse_sampler(method), cfg, ties);
    const ChainSummary s = summarize(chain, 0.05);
    row.ess = s.ess_avg;
    row.esr = s.esr;
    row.mean_abs_err = (s.posterior_mean - reference).cwiseAbs().mean();
    row.wall_seconds = chain.wall_seconds;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

int do_bench(const BenchFlags& f, std::ostream& out) {
  if (f.reps < 1) throw UsageError("--reps must be >= 1");
  if (f.iters < 1 || f.burnin < 0 || f.burnin >= f.iters || f.iters - f.burnin < 20) {
    throw UsageError("--burnin must satisfy 0 <= burnin and iters - burnin >= 20");
  }
  std::vector<std::string> methods = split(f.methods, ',');
  for (const auto& m : methods) {
    if (m != "gs4cox" && m != "mh") throw UsageError("--methods: unknown method '" + m + "'");
  }
  parse_ties(f.ties);

  std::vector<BenchScenario> scenarios;
  for (double n : parse_doubles(f.sizes, "--sizes")) {
    if (n < 2 || n != std::floor(n)) throw UsageError("--sizes: entries must be integers >= 2");
    for (double w : parse_doubles(f.learning_rates, "--learning-rates")) {
      if (!(w > 0.0)) throw UsageError("--learning-rates: entries must be > 0");
      for (const auto& beta_text : split(f.betas, ';')) {
        const auto beta = parse_doubles(beta_text, "--betas");
        for (double r : parse_doubles(f.roundings, "--roundings")) {
          if (r < 0.0) throw UsageError("--roundings: entries must be >= 0");
          BenchScenario sc{static_cast<long>(n), w, beta_text, to_vector(beta), r, ""};
          sc.label = "n=" + std::to_string(sc.n) + " w=" + format_double(w) + " beta=(" + beta_text +
                     ") r=" + format_double(r);
          scenarios.push_back(std::move(sc));
        }
      }
    }
  }

  struct Cell {
    std::size_t scenario;
    int rep;
    std::string method;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    for (int r = 0; r < f.reps; ++r) {
      for (const auto& m : methods) cells.push_back({s, r, m});
    }
  }
  std::vector<BenchRow> rows(cells.size());
  const int workers = std::max(1, std::min<int>(threads_from_env(), static_cast<int>(cells.size())));
  auto work = [&](std::size_t first) {
    for (std::size_t c = first; c < cells.size(); c += static_cast<std::size_t>(workers)) {
      rows[c] = run_bench_cell(scenarios[cells[c].scenario], cells[c].scenario, cells[c].rep, cells[c].method, f);
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work, static_cast<std::size_t>(t));
  }

  json config = json::object();
  config["sizes"] = f.sizes;
  config["learning-rates"] = f.learning_rates;
  config["betas"] = f.betas;
  config["roundings"] = f.roundings;
  config["methods"] = f.methods;
  config["reps"] = f.reps;
  config["iters"] = f.iters;
  config["burnin"] = f.burnin;
  config["prior-var"] = f.prior_var;
  config["ties"] = f.ties;
  config["seed"] = f.seed;
  config["out"] = f.out;
  const std::string hash = manifest_hash("bench", config);

  std::ostringstream csv;
  csv << "scenario,method,replicate,n,w,rounding,beta0,ess,esr,mean_abs_err_vs_mple,wall_seconds,status,error\n";
  auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
  int failures = 0;
  for (std::size_t c = 0; c < rows.size(); ++c) {
    const BenchRow& r = rows[c];
    const BenchScenario& sc = scenarios[cells[c].scenario];
    failures += r.error.empty() ? 0 : 1;
    csv << csv_field(r.scenario) << ',' << r.method << ',' << r.replicate << ',' << sc.n << ',' << format_double(sc.w)
        << ',' << format_double(sc.rounding) << ',' << csv_field(sc.beta_text) << ',' << num(r.ess) << ','
        << num(r.esr) << ',' << num(r.mean_abs_err) << ',' << num(r.wall_seconds) << ','
        << (r.error.empty() ? "ok" : "failed") << ',' << csv_field(r.error) << '\n';
  }
  write_text(f.out, csv.str());
  write_manifest(f.out + ".manifest.json", "bench", config, {}, {f.out}, f.seed, hash);
  out << "bench: " << rows.size() << " rows (" << failures << " failed) written to " << f.out << "\n";
  return kSuccess;
}

// --- entry point ------------------------------------------------------------------

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int do_replay(const std::string& manifest_path, const std::string& out_override, std::ostream& out,
              std::ostream& err) {
  const json m = read_json(manifest_path);
  if (!m.contains("subcommand") || !m.contains("config")) {
    throw UsageError("'" + manifest_path + "' is not a coxgibbs manifest");
  }
  const std::string sub = m["subcommand"].get<std::string>();
  if (sub == "replay") throw UsageError("cannot replay a replay manifest");
  json config = m["config"];
  if (!out_override.empty()) {
    if (config.contains("out-prefix")) config["out-prefix"] = out_override;
    if (config.contains("out")) config["out"] = out_override;
  }
  return dispatch(config_to_args(sub, config), out, err);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"coxgibbs: Bayesian Cox regression by Polya-Gamma Gibbs sampling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic exponential Cox dataset");
  simulate->add_option("--n", sim.n, "Number of subjects")->capture_default_str();
  simulate->add_option("--beta", sim.beta, "True coefficients, comma-separated")->capture_default_str();
  simulate->add_option("--rounding", sim.rounding, "Round times to multiples of r (0 = off)")->capture_default_str();
  simulate->add_option("--censor-rate", sim.censor_rate, "Rate of the exponential censoring time")
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output CSV path")->required();

  FitFlags fit;
  auto* fit_cmd = app.add_subcommand("fit", "Sample the generalized posterior with GS4Cox or MH-Hessian");
  fit_cmd->add_option("--method", fit.method, "gs4cox or mh")->check(CLI::IsMember({"gs4cox", "mh"}));
  fit.data.add(fit_cmd);
  fit_cmd->add_option("--iters", fit.iters, "Total iterations M")->capture_default_str();
  fit_cmd->add_option("--burnin", fit.burnin, "Burn-in m*")->capture_default_str();
  fit_cmd->add_option("--w", fit.w, "Learning rate")->capture_default_str();
  fit_cmd->add_option("--prior-var", fit.prior_var, "Prior N(0, v I) variance")->capture_default_str();
  fit_cmd->add_option("--ties", fit.ties, "breslow or efron")->check(CLI::IsMember({"breslow", "efron"}));
  fit_cmd->add_flag("--no-correction", fit.no_correction, "Skip the finite-sample correction (gs4cox)");
  fit.scale_opt = fit_cmd->add_option("--scale", fit.scale, "MH proposal scale s (default 2.38/sqrt(P))");
  fit_cmd->add_option("--alpha", fit.alpha, "Credible interval level 1 - alpha")->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Random seed")->capture_default_str();
  fit_cmd->add_option("--out-prefix", fit.out_prefix, "Prefix for report, samples and manifest")->required();

  CalibrateFlags cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Calibrate the learning rate by bootstrap coverage (GPC)");
  cal_cmd->add_option("--method", cal.method, "gs4cox or mh")->check(CLI::IsMember({"gs4cox", "mh"}));
  cal.data.add(cal_cmd);
  cal_cmd->add_option("--bootstrap", cal.bootstrap, "Bootstrap replicates per round")->capture_default_str();
  cal_cmd->add_option("--alpha", cal.alpha, "Nominal miscoverage")->capture_default_str();
  cal_cmd->add_option("--tol", cal.tol, "Coverage tolerance")->capture_default_str();
  cal_cmd->add_option("--max-rounds", cal.max_rounds, "Maximum rounds")->capture_default_str();
  cal_cmd->add_option("--inner-iters", cal.inner_iters, "Iterations per bootstrap fit")->capture_default_str();
  cal_cmd->add_option("--inner-burnin", cal.inner_burnin, "Burn-in per bootstrap fit")->capture_default_str();
  cal_cmd->add_option("--w0", cal.w0, "Starting learning rate")->capture_default_str();
  cal_cmd->add_option("--prior-var", cal.prior_var, "Prior N(0, v I) variance")->capture_default_str();
  cal_cmd->add_option("--ties", cal.ties, "breslow or efron")->check(CLI::IsMember({"breslow", "efron"}));
  cal_cmd->add_option("--seed", cal.seed, "Random seed")->capture_default_str();
  cal_cmd->add_option("--out", cal.out, "Calibration JSON path")->required();

  BenchFlags bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a synthetic scenario grid for both samplers");
  bench_cmd->add_option("--sizes", bench.sizes, "Sample sizes, comma-separated")->capture_default_str();
  bench_cmd->add_option("--learning-rates", bench.learning_rates, "Learning rates, comma-separated")
      ->capture_default_str();
  bench_cmd->add_option("--betas", bench.betas, "True coefficient vectors, ';'-separated")->capture_default_str();
  bench_cmd->add_option("--roundings", bench.roundings, "Tie rounding parameters, comma-separated")
      ->capture_default_str();
  bench_cmd->add_option("--methods", bench.methods, "Samplers, comma-separated")->capture_default_str();
  bench_cmd->add_option("--reps", bench.reps, "Replications per scenario")->capture_default_str();
  bench_cmd->add_option("--iters", bench.iters, "Iterations M")->capture_default_str();
  bench_cmd->add_option("--burnin", bench.burnin, "Burn-in m*")->capture_default_str();
  bench_cmd->add_option("--prior-var", bench.prior_var, "Prior N(0, v I) variance")->capture_default_str();
  bench_cmd->add_option("--ties", bench.ties, "breslow or efron")->check(CLI::IsMember({"breslow", "efron"}));
  bench_cmd->add_option("--seed", bench.seed, "Random seed")->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "Output CSV path")->required();

  std::string manifest_path, replay_out;
  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("--manifest", manifest_path, "Manifest JSON written by a previous run")->required();
  replay->add_option("--out", replay_out, "Override the recorded output path or prefix");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  if (simulate->parsed()) return do_simulate(sim, out);
  if (fit_cmd->parsed()) return do_fit(fit, out);
  if (cal_cmd->parsed()) return do_calibrate(cal, out);
  if (bench_cmd->parsed()) return do_bench(bench, out);
  return do_replay(manifest_path, replay_out, out, err);
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message) {
  json e = json::object();
  e["error"] = kind;
  e["message"] = message;
  err << e.dump() << "\n";
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int threads_from_env() {
  const char* v = std::getenv("COXGIBBS_THREADS");
  if (!v || !*v) return 0;
  char* end = nullptr;
  const long t = std::strtol(v, &end, 10);
  if (*end != '\0' || t < 0) return 0;
  return static_cast<int>(std::min<long>(t, 256));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    print_error(err, e.kind(), e.what());
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    print_error(err, "error", e.what());
    return kRuntimeFailure;
  }
}

}  // namespace coxgibbs::cli
