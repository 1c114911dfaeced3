// relinfo command-line front end. Talks to the library only through the C API.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "relinfo/relinfo.h"

namespace {

using nlohmann::json;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Failure {
  int exit_code;
  std::string message;
};

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{kExitValidation, msg}; }

void check(relinfo_status status) {
  if (status == RELINFO_OK) return;
  const int code = relinfo_status_is_validation(status) ? kExitValidation : kExitNumerical;
  throw Failure{code, std::string(relinfo_status_name(status)) + ": " + relinfo_last_error()};
}

std::string number_text(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
std::string number_text(T v) {
  return std::to_string(v);
}

// ---- options shared by every subcommand ----

struct Common {
  std::string out;
  std::string csv;
  std::uint64_t seed = 20090615;
  std::uint64_t draws = 10000;
  unsigned workers = 0;
  double max_rel_se = 0.0;
  std::string log_scale = "natural";
};

// Reproducible echo of the resolved inputs, in flag order.
class Inputs {
 public:
  template <class T>
  void add(const std::string& flag, const T& value) {
    json_[flag] = value;
    argv_.push_back("--" + flag);
    argv_.push_back(number_text(value));
  }
  void add(const std::string& flag, const std::string& value) {
    json_[flag] = value;
    argv_.push_back("--" + flag);
    argv_.push_back(value);
  }
  void add(const std::string& flag, const std::vector<double>& values) {
    json_[flag] = values;
    if (values.empty()) return;
    std::string joined;
    for (std::size_t i = 0; i < values.size(); ++i) joined += (i ? "," : "") + number_text(values[i]);
    argv_.push_back("--" + flag);
    argv_.push_back(joined);
  }
  json to_json(const std::string& command) const {
    json j = json_;
    std::vector<std::string> argv{command};
    argv.insert(argv.end(), argv_.begin(), argv_.end());
    j["argv"] = argv;
    return j;
  }

 private:
  json json_ = json::object();
  std::vector<std::string> argv_;
};

struct Report {
  std::string command;
  Inputs inputs;
  json results = json::object();
  json warnings = json::array();
  std::optional<std::uint64_t> seed;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
};

double lod_scale(const Common& c) { return c.log_scale == "log10" ? 1.0 / std::log(10.0) : 1.0; }

relinfo_mc_config mc_config(const Common& c) {
  relinfo_mc_config mc;
  relinfo_mc_config_default(&mc);
  mc.n_draws = c.draws;
  mc.seed = c.seed;
  mc.worker_hint = c.workers;
  mc.max_relative_se = c.max_rel_se;
  return mc;
}

void echo_mc(Report& r, const Common& c) {
  r.inputs.add("seed", c.seed);
  r.inputs.add("draws", c.draws);
  if (c.max_rel_se > 0.0) r.inputs.add("max-rel-se", c.max_rel_se);
  r.inputs.add("log-scale", c.log_scale);
  r.seed = c.seed;
}

json flags_json(std::uint32_t flags) {
  json out = json::array();
  if (flags & RELINFO_FLAG_NULL_IMPUTATION_ORIENTATION) out.push_back("null_imputation_orientation");
  if (flags & RELINFO_FLAG_DELTA_METHOD_SE) out.push_back("delta_method_se");
  if (flags & RELINFO_FLAG_CENSORED_RANK_RESAMPLING) out.push_back("censored_rank_resampling");
  return out;
}

json value_json(double value, const char* method, double se) {
  return json{{"value", value}, {"method", method}, {"se", se}};
}

json result_json(const relinfo_result& r, double scale) {
  json j = value_json(r.estimate, relinfo_method_name(r.method), r.mc_standard_error);
  j["observed_lod"] = r.numerator * scale;
  j["expected_complete_lod"] = r.denominator * scale;
  j["n_draws"] = r.n_draws;
  j["seed"] = r.seed;
  j["sentinel_count"] = r.sentinel_count;
  j["flags"] = flags_json(r.flags);
  return j;
}

json estimate_json(const relinfo_estimate& e, double scale) {
  json j = value_json(e.mean * scale, relinfo_method_name(RELINFO_METHOD_MONTE_CARLO), e.standard_error * scale);
  j["n_effective"] = e.n_effective;
  j["sentinel_count"] = e.sentinel_count;
  return j;
}

std::string utc_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    long long v = 0;
    const auto res = std::from_chars(epoch, epoch + std::strlen(epoch), v);
    if (res.ec == std::errc() && *res.ptr == '\0') t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kExitValidation, "io: cannot write " + path};
  out << text;
  if (!out) throw Failure{kExitValidation, "io: write failed for " + path};
}

void emit(const Report& r, const Common& c) {
  json doc;
  doc["command"] = r.command;
  doc["inputs"] = r.inputs.to_json(r.command);
  doc["results"] = r.results;
  json prov;
  prov["version"] = relinfo_version();
  prov["generator"] = relinfo_generator_id();
  prov["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  prov["timestamp"] = utc_timestamp();
  prov["lod_units"] = c.log_scale == "log10" ? "log10" : "natural log";
  doc["provenance"] = prov;
  doc["warnings"] = r.warnings;
  write_text(c.out, doc.dump(2) + "\n");

  if (!c.csv.empty()) {
    if (r.csv_header.empty()) usage_error("--csv: this command produces no table");
    std::ostringstream os;
    for (std::size_t i = 0; i < r.csv_header.size(); ++i) os << (i ? "," : "") << r.csv_header[i];
    os << "\n";
    for (const auto& row : r.csv_rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
      os << "\n";
    }
    write_text(c.csv, os.str());
  }
}

void add_common(CLI::App* sub, Common& c, std::uint64_t default_draws, bool monte_carlo = true) {
  c.draws = default_draws;
  sub->add_option("--out", c.out, "Report path (default: stdout)");
  sub->add_option("--csv", c.csv, "Optional flat CSV table path");
  sub->add_option("--log-scale", c.log_scale, "Display scale for lod values")
      ->check(CLI::IsMember({"natural", "log10"}))
      ->capture_default_str();
  if (!monte_carlo) return;
  sub->add_option("--seed", c.seed, "Base seed")->capture_default_str();
  sub->add_option("--draws", c.draws, "Monte Carlo draws")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--workers", c.workers, "Worker threads (0 = all cores)")->envname("RELINFO_WORKERS");
  sub->add_option("--max-rel-se", c.max_rel_se, "Stop early once the relative SE reaches this (0 = off)")
      ->check(CLI::NonNegativeNumber);
}

relinfo_route parse_route(const std::string& s) {
  if (s == "auto") return RELINFO_ROUTE_AUTOMATIC;
  if (s == "imputation") return RELINFO_ROUTE_IMPUTATION;
  return RELINFO_ROUTE_MONTE_CARLO;
}

// ---- binomial subcommands ----

struct BinomialArgs {
  std::uint64_t x = 0;
  std::uint64_t n_obs = 0;
  std::uint64_t n_missing = 0;
  double p0 = 0.5;
  std::optional<double> p1;

  relinfo_binomial data() const { return relinfo_binomial{x, n_obs, n_missing}; }

  void add_to(CLI::App* sub, bool p1_required) {
    sub->add_option("--x", x, "Observed successes")->required();
    sub->add_option("--n-obs", n_obs, "Observed trials")->required();
    sub->add_option("--n-missing", n_missing, "Missing trials")->required();
    sub->add_option("--p0", p0, "Null success probability")->required();
    auto* opt = sub->add_option("--p1", p1, "Fixed alternative (default: observed MLE)");
    if (p1_required) opt->required();
  }

  void echo(Report& r) const {
    r.inputs.add("x", x);
    r.inputs.add("n-obs", n_obs);
    r.inputs.add("n-missing", n_missing);
    r.inputs.add("p0", p0);
    if (p1) r.inputs.add("p1", *p1);
  }
};

void run_binom_ri(const BinomialArgs& a, const std::string& route_name, const Common& c, Report& r) {
  a.echo(r);
  r.inputs.add("route", route_name);
  echo_mc(r, c);
  const double scale = lod_scale(c);
  const relinfo_binomial data = a.data();
  const relinfo_mc_config mc = mc_config(c);
  const relinfo_route route = parse_route(route_name);

  double mle = 0.0;
  check(relinfo_binomial_mle(&data, &mle));
  r.results["observed_mle"] = value_json(mle, relinfo_method_name(RELINFO_METHOD_CLOSED_FORM), 0.0);

  relinfo_result ri1{};
  if (a.p1) {
    check(relinfo_binomial_ri1_fixed_pair(&data, *a.p1, a.p0, route, &mc, &ri1));
  } else {
    check(relinfo_binomial_ri1(&data, a.p0, route, &mc, &ri1));
  }
  r.results["ri1"] = result_json(ri1, scale);

  if (!a.p1) {
    double closed = 0.0;
    check(relinfo_binomial_ri1_closed_form(&data, &closed));
    r.results["ri1_closed_form"] = value_json(closed, relinfo_method_name(RELINFO_METHOD_CLOSED_FORM), 0.0);
    relinfo_result ri0{};
    check(relinfo_binomial_ri0(&data, a.p0, &ri0));
    r.results["ri0"] = result_json(ri0, scale);
    r.results["ri0"]["orientation"] = "imputed_over_observed";
  }
}

void run_ri_y(const BinomialArgs& a, const Common& c, Report& r) {
  a.echo(r);
  echo_mc(r, c);
  const double scale = lod_scale(c);
  const relinfo_binomial data = a.data();
  const relinfo_mc_config mc = mc_config(c);
  std::vector<double> samples(c.draws);
  std::uint64_t sentinels = 0;
  check(relinfo_binomial_ri_y_samples(&data, *a.p1, a.p0, &mc, samples.data(), samples.size(), &sentinels));
  relinfo_estimate recip{};
  double spread = 0.0;
  check(relinfo_ri_y_summary(samples.data(), samples.size(), &recip, &spread));

  relinfo_result ri1{};
  check(relinfo_binomial_ri1_fixed_pair(&data, *a.p1, a.p0, RELINFO_ROUTE_IMPUTATION, nullptr, &ri1));
  r.results["mean_reciprocal_ri_y"] = estimate_json(recip, 1.0);
  r.results["reciprocal_ri1"] = value_json(1.0 / ri1.estimate, relinfo_method_name(ri1.method), 0.0);
  r.results["ri1"] = result_json(ri1, scale);
  r.results["ri_y_sd"] = value_json(spread, relinfo_method_name(RELINFO_METHOD_MONTE_CARLO), 0.0);
  r.results["sentinel_count"] = sentinels;
  if (sentinels > 0) {
    r.warnings.push_back(std::to_string(sentinels) + " draws had a zero complete-data lod and were excluded");
  }
  r.csv_header = {"draw", "ri_y"};
  for (std::size_t i = 0; i < samples.size(); ++i) r.csv_rows.push_back({std::to_string(i), number_text(samples[i])});
}

void run_lod_var(const BinomialArgs& a, const Common& c, Report& r) {
  a.echo(r);
  echo_mc(r, c);
  const double scale = lod_scale(c);
  const relinfo_binomial data = a.data();
  const relinfo_mc_config mc = mc_config(c);
  relinfo_result var{};
  check(relinfo_binomial_lod_ratio_variance(&data, a.p0, &mc, &var));
  json v = value_json(var.estimate, relinfo_method_name(var.method), var.mc_standard_error);
  v["observed_lod"] = var.numerator * scale;
  v["lod_variance"] = var.denominator * scale * scale;
  v["n_draws"] = var.n_draws;
  v["seed"] = var.seed;
  r.results["lod_ratio_variance"] = v;

  relinfo_lod_gap gap{};
  check(relinfo_binomial_expected_lod_gap(&data, a.p0, &mc, &gap));
  r.results["expected_lod_at_complete_mle"] = estimate_json(gap.at_complete_mle, scale);
  r.results["expected_lod_at_observed_mle"] = estimate_json(gap.at_observed_mle, scale);
  r.results["expected_lod_gap"] = estimate_json(gap.gap, scale);
  r.results["dominance_violations"] = gap.dominance_violations;
  r.results["observed_lod"] = value_json(gap.observed_lod * scale, relinfo_method_name(RELINFO_METHOD_CLOSED_FORM), 0.0);
  if (gap.dominance_violations > 0) {
    r.warnings.push_back("per-draw lod at the complete-data MLE fell below the fixed-alternative lod");
  }
}

// ---- Cox ----

struct CoxArgs {
  std::string data;
  std::string mode = "correct";
  std::size_t n_new = 0;
  std::vector<double> new_covariates;
  std::vector<double> beta0;
  std::string ties = "breslow";
  double new_censoring_rate = 0.0;
  double tail_rate = 0.0;
  double baseline_scale = 1.0;
};

struct SurvivalHandle {
  relinfo_survival* p = nullptr;
  ~SurvivalHandle() { relinfo_survival_destroy(p); }
};

void run_cox_ri(const CoxArgs& a, const Common& c, Report& r) {
  r.inputs.add("data", a.data);
  r.inputs.add("mode", a.mode);
  r.inputs.add("n-new", a.n_new);
  r.inputs.add("new-covariates", a.new_covariates);
  r.inputs.add("beta0", a.beta0);
  r.inputs.add("ties", a.ties);
  r.inputs.add("new-censoring-rate", a.new_censoring_rate);
  if (a.tail_rate > 0.0) r.inputs.add("tail-rate", a.tail_rate);
  r.inputs.add("baseline-scale", a.baseline_scale);
  echo_mc(r, c);

  SurvivalHandle data;
  check(relinfo_survival_read_csv(a.data.c_str(), &data.p));
  const std::size_t dim = relinfo_survival_dim(data.p);
  if (!a.beta0.empty() && a.beta0.size() != dim) usage_error("--beta0 needs one value per covariate");
  if (a.new_covariates.size() % dim != 0) usage_error("--new-covariates length must be a multiple of the covariate count");

  const relinfo_ties ties = a.ties == "jitter" ? RELINFO_TIES_JITTER : RELINFO_TIES_BRESLOW;
  std::vector<double> beta(dim), se(dim);
  int iterations = 0;
  check(relinfo_cox_fit(data.p, ties, beta.data(), se.data(), dim, &iterations));
  json fit = json::array();
  for (std::size_t j = 0; j < dim; ++j) {
    json b = value_json(beta[j], "partial_likelihood_newton", se[j]);
    b["covariate"] = relinfo_survival_covariate_name(data.p, j);
    fit.push_back(b);
  }
  r.results["fit"] = fit;
  r.results["fit_iterations"] = iterations;
  r.results["n_subjects"] = relinfo_survival_size(data.p);
  r.results["n_events"] = relinfo_survival_events(data.p);

  relinfo_cox_options opts;
  relinfo_cox_options_default(&opts);
  opts.conditioning = a.mode == "naive" ? RELINFO_CONDITION_CENSORED_DATA : RELINFO_CONDITION_RANK_DATA;
  opts.n_new = a.n_new;
  opts.new_covariates = a.new_covariates.empty() ? nullptr : a.new_covariates.data();
  opts.new_covariate_rows = a.new_covariates.size() / dim;
  opts.beta_null = a.beta0.empty() ? nullptr : a.beta0.data();
  opts.new_censoring_rate = a.new_censoring_rate;
  opts.tail_rate = a.tail_rate;
  opts.baseline_scale = a.baseline_scale;
  opts.ties = ties;
  const relinfo_mc_config mc = mc_config(c);
  relinfo_result ri{};
  check(relinfo_cox_ri1(data.p, &opts, &mc, &ri));
  r.results["ri1"] = result_json(ri, lod_scale(c));
  r.results["ri1"]["conditioning"] = a.mode == "naive" ? "censored_data" : "rank_data";
  if (a.mode == "naive" && ri.estimate > 1.0) {
    r.warnings.push_back("ri1 exceeds 1 under censored-data conditioning");
  }
  if (ri.flags & RELINFO_FLAG_CENSORED_RANK_RESAMPLING) {
    r.warnings.push_back("censoring times held fixed while resampling ranks; the resampling is approximate");
  }
}

// ---- paired simulation ----

struct DossArgs {
  std::size_t datasets = 100;
  std::size_t n_subjects = 20;
  double censoring = 0.2;
  std::size_t n_new = 5;
  double beta = 0.5;
  double baseline_rate = 1.0;
};

void run_doss(const DossArgs& a, const Common& c, Report& r) {
  r.inputs.add("datasets", a.datasets);
  r.inputs.add("n-subjects", a.n_subjects);
  r.inputs.add("censoring", a.censoring);
  r.inputs.add("n-new", a.n_new);
  r.inputs.add("beta", a.beta);
  r.inputs.add("baseline-rate", a.baseline_rate);
  echo_mc(r, c);

  relinfo_doss_config cfg;
  relinfo_doss_config_default(&cfg);
  cfg.n_datasets = a.datasets;
  cfg.n_subjects = a.n_subjects;
  cfg.censoring_fraction = a.censoring;
  cfg.n_new = a.n_new;
  cfg.beta = a.beta;
  cfg.baseline_rate = a.baseline_rate;
  const relinfo_mc_config mc = mc_config(c);
  relinfo_doss_run* raw = nullptr;
  check(relinfo_doss_replication(&cfg, &mc, &raw));
  std::unique_ptr<relinfo_doss_run, void (*)(relinfo_doss_run*)> run(raw, relinfo_doss_run_destroy);
  relinfo_doss_summary s{};
  check(relinfo_doss_run_summary(run.get(), &s));

  r.results["n_datasets"] = s.n_rows;
  r.results["skipped_datasets"] = s.skipped;
  r.results["naive_above_one"] = s.naive_above_one;
  r.results["fraction_naive_above_one"] =
      value_json(s.fraction_naive_above_one, "count_over_datasets", 0.0);
  r.results["correct_above_one_plus_3se"] = s.correct_above_bound;
  if (s.n_rows < a.datasets) {
    r.warnings.push_back("only " + std::to_string(s.n_rows) + " of " + std::to_string(a.datasets) +
                         " datasets could be fitted");
  }
  if (s.skipped > 0) r.warnings.push_back(std::to_string(s.skipped) + " simulated datasets skipped (fit failed)");

  r.csv_header = {"dataset", "seed", "censored_fraction", "naive_ri1", "naive_se", "correct_ri1", "correct_se"};
  json rows = json::array();
  for (std::size_t i = 0; i < s.n_rows; ++i) {
    relinfo_doss_row row{};
    check(relinfo_doss_run_row(run.get(), i, &row));
    rows.push_back({{"dataset_seed", row.dataset_seed},
                    {"censored_fraction", row.censored_fraction},
                    {"naive", result_json(row.naive, lod_scale(c))},
                    {"correct_uncensored", result_json(row.correct_uncensored, lod_scale(c))}});
    r.csv_rows.push_back({std::to_string(i), std::to_string(row.dataset_seed), number_text(row.censored_fraction),
                          number_text(row.naive.estimate), number_text(row.naive.mc_standard_error),
                          number_text(row.correct_uncensored.estimate),
                          number_text(row.correct_uncensored.mc_standard_error)});
  }
  r.results["datasets"] = rows;
}

// ---- combine ----

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kExitValidation, "io: cannot open " + path};
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

double get_number(const json& obj, const char* key, std::size_t index) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    usage_error("study " + std::to_string(index) + ": '" + key + "' must be a number");
  }
  return it->get<double>();
}

std::uint64_t get_count(const json& obj, const char* key, std::size_t index) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_unsigned()) {
    usage_error("study " + std::to_string(index) + ": '" + key + "' must be a nonnegative integer");
  }
  return it->get<std::uint64_t>();
}

void require_same(std::optional<double>& shared, double value, const char* key, std::size_t index) {
  if (!shared) {
    shared = value;
  } else if (*shared != value) {
    usage_error("study " + std::to_string(index) + ": '" + key +
                "' differs from earlier studies; studies must share one hypothesis pair");
  }
}

void run_combine(const std::string& path, const std::optional<double>& p1_flag, const Common& c, Report& r) {
  r.inputs.add("studies", path);
  if (p1_flag) r.inputs.add("p1", *p1_flag);
  r.inputs.add("log-scale", c.log_scale);
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Failure{kExitValidation, "parse: " + path + ": " + e.what()};
  }
  if (!doc.is_array() || doc.empty()) usage_error(path + ": expected a nonempty JSON list of studies");

  const bool binomial = doc.front().is_object() && doc.front().contains("x");
  std::optional<double> p0, p1 = p1_flag;
  std::vector<std::string> labels;
  std::vector<relinfo_binomial> data;
  std::vector<relinfo_study> summaries;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& s = doc[i];
    if (!s.is_object()) usage_error("study " + std::to_string(i) + ": expected an object");
    for (const auto& [key, _] : s.items()) {
      static const std::vector<std::string> binomial_keys{"label", "x", "n_obs", "n_missing", "p0", "p1"};
      static const std::vector<std::string> summary_keys{"label", "lod", "ri1", "p0", "p1"};
      const auto& allowed = binomial ? binomial_keys : summary_keys;
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        usage_error("study " + std::to_string(i) + ": unknown key '" + key + "'");
      }
    }
    labels.push_back(s.contains("label") && s["label"].is_string() ? s["label"].get<std::string>()
                                                                    : "study" + std::to_string(i + 1));
    require_same(p0, get_number(s, "p0", i), "p0", i);
    if (s.contains("p1")) {
      require_same(p1, get_number(s, "p1", i), "p1", i);
    } else if (!binomial) {
      usage_error("study " + std::to_string(i) + ": summaries must state 'p1' so the shared pair can be checked");
    }
    if (binomial) {
      data.push_back({get_count(s, "x", i), get_count(s, "n_obs", i), get_count(s, "n_missing", i)});
    } else {
      summaries.push_back({get_number(s, "lod", i), get_number(s, "ri1", i)});
    }
  }
  const double scale = lod_scale(c);
  const char* closed = relinfo_method_name(RELINFO_METHOD_CLOSED_FORM);
  double pooled = 0.0, alt = 0.0;
  if (binomial) {
    summaries.resize(data.size());
    check(relinfo_binomial_study_summaries(data.data(), data.size(), *p0, p1 ? *p1 : -1.0, summaries.data(), &pooled,
                                           &alt));
  }
  double combined = 0.0;
  check(relinfo_combine_weighted_harmonic(summaries.data(), summaries.size(), &combined));

  json studies = json::array();
  r.csv_header = {"label", "lod", "ri1"};
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    studies.push_back({{"label", labels[i]},
                       {"lod", value_json(summaries[i].lod_observed * scale, closed, 0.0)},
                       {"ri1", value_json(summaries[i].ri1, closed, 0.0)}});
    r.csv_rows.push_back({labels[i], number_text(summaries[i].lod_observed * scale), number_text(summaries[i].ri1)});
  }
  r.results["studies"] = studies;
  r.results["combined_ri1"] = value_json(combined, "weighted_harmonic", 0.0);
  r.results["p0"] = *p0;
  if (binomial) {
    r.results["p1"] = alt;
    r.results["p1_source"] = p1 ? "shared_input" : "pooled_observed_mle";
    r.results["pooled_ri1"] = value_json(pooled, closed, 0.0);
  } else {
    r.results["p1"] = *p1;
  }
}

// ---- design ----

struct DesignHandle {
  relinfo_design* p = nullptr;
  ~DesignHandle() { relinfo_design_destroy(p); }
};

json sx_json(const relinfo_design* d, bool centered) {
  double v = 0.0;
  check(relinfo_design_sx(d, centered ? 1 : 0, &v));
  std::int64_t num = 0, den = 1;
  int exact = 0;
  check(relinfo_design_sx_exact(d, centered ? 1 : 0, &num, &den, &exact));
  json j = value_json(v, exact ? "exact_rational" : "floating_point", 0.0);
  if (exact) j["exact"] = std::to_string(num) + "/" + std::to_string(den);
  j["n_points"] = relinfo_design_size(d);
  return j;
}

std::string percent_text(double ratio) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::llround(ratio * 100.0) << "%";
  return os.str();
}

void run_design(const std::string& a_spec, const std::string& b_spec, bool centered, Report& r) {
  r.inputs.add("design-a", a_spec);
  r.inputs.add("design-b", b_spec);
  if (centered) r.inputs.add("centered", std::string("true"));
  DesignHandle a, b;
  check(relinfo_design_load(a_spec.c_str(), &a.p));
  check(relinfo_design_load(b_spec.c_str(), &b.p));
  double ratio = 0.0;
  check(relinfo_design_variance_ratio(a.p, b.p, centered ? 1 : 0, &ratio));
  r.results["sx_a"] = sx_json(a.p, centered);
  r.results["sx_b"] = sx_json(b.p, centered);
  json ratio_json = value_json(ratio, "sx_ratio", 0.0);
  ratio_json["display"] = percent_text(ratio);
  r.results["variance_ratio"] = ratio_json;
  r.results["centered"] = centered;
  if (a_spec == "base-doubled" && b_spec == "interlaced" && !centered) {
    r.warnings.push_back(
        "an externally reported comparison of these layouts, 0.346/0.139 = 2.5, is not an S_x quantity and is "
        "not reproduced here; by S_x the interlaced layout carries slightly less information");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative information for hypothesis tests with missing data"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI/TOML file of flag values (sections named after subcommands)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_version_flag("--version", std::string(relinfo_version()));

  std::map<const CLI::App*, Common> commons;
  Report report;

  BinomialArgs binom;
  std::string route = "auto";
  auto* binom_ri = app.add_subcommand("binom-ri", "RI1 and RI0 for a binomial with missing trials");
  binom.add_to(binom_ri, false);
  binom_ri->add_option("--route", route, "Expectation route")
      ->check(CLI::IsMember({"auto", "imputation", "mc"}))
      ->capture_default_str();
  add_common(binom_ri, commons[binom_ri], 10000);

  BinomialArgs riy_args;
  auto* ri_y = app.add_subcommand("ri-y", "Per-draw relative information at a sharp alternative");
  riy_args.add_to(ri_y, true);

  BinomialArgs var_args;
  auto* lod_var = app.add_subcommand("lod-var", "Variance of the complete-data lod and the expected-lod gap");
  var_args.add_to(lod_var, false);

  CoxArgs cox;
  auto* cox_ri = app.add_subcommand("cox-ri", "RI1 for adding subjects to a Cox study");
  cox_ri->add_option("--data", cox.data, "Survival CSV (time,status,covariates...)")->required()->check(CLI::ExistingFile);
  cox_ri->add_option("--mode", cox.mode, "correct: condition on ranks; naive: on the censored data")
      ->check(CLI::IsMember({"correct", "naive"}))
      ->capture_default_str();
  cox_ri->add_option("--n-new", cox.n_new, "New subjects")->capture_default_str();
  cox_ri->add_option("--new-covariates", cox.new_covariates, "Row-major covariates of the new subjects")
      ->delimiter(',');
  cox_ri->add_option("--beta0", cox.beta0, "Null coefficients (default 0)")->delimiter(',');
  cox_ri->add_option("--ties", cox.ties, "Tie handling")
      ->check(CLI::IsMember({"breslow", "jitter"}))
      ->capture_default_str();
  cox_ri->add_option("--new-censoring-rate", cox.new_censoring_rate, "Exponential censoring rate for new subjects")
      ->check(CLI::NonNegativeNumber);
  cox_ri->add_option("--tail-rate", cox.tail_rate, "Baseline hazard rate past the last event (0 = derived)")
      ->check(CLI::NonNegativeNumber);
  cox_ri->add_option("--baseline-scale", cox.baseline_scale, "Multiplier on the estimated baseline")
      ->check(CLI::PositiveNumber);

  std::string studies_path;
  std::optional<double> combine_p1;
  auto* combine = app.add_subcommand("combine", "Combine RI1 across independent studies");
  combine->add_option("--studies", studies_path, "JSON list of studies")->required();
  combine->add_option("--p1", combine_p1, "Shared alternative for binomial studies (default: pooled MLE)");

  std::string design_a, design_b;
  bool centered = false;
  auto* design = app.add_subcommand("design-eval", "S_x and variance ratio of two regression designs");
  design->add_option("--design-a", design_a, "Reference design: file, preset or expression")->required();
  design->add_option("--design-b", design_b, "Competing design: file, preset or expression")->required();
  design->add_flag("--centered", centered, "Use centered S_x");

  DossArgs doss;
  auto* doss_cmd = app.add_subcommand("doss-replication", "Paired naive/correct Cox RI1 over simulated datasets");
  doss_cmd->add_option("--datasets", doss.datasets, "Datasets to fit")->capture_default_str();
  doss_cmd->add_option("--n-subjects", doss.n_subjects, "Subjects per dataset")->capture_default_str();
  doss_cmd->add_option("--censoring", doss.censoring, "Targeted censored fraction")->capture_default_str();
  doss_cmd->add_option("--n-new", doss.n_new, "New subjects")->capture_default_str();
  doss_cmd->add_option("--beta", doss.beta, "True coefficient of the binary covariate")->capture_default_str();
  doss_cmd->add_option("--baseline-rate", doss.baseline_rate, "Exponential baseline hazard")->capture_default_str();

  add_common(ri_y, commons[ri_y], 10000);
  add_common(lod_var, commons[lod_var], 10000);
  add_common(cox_ri, commons[cox_ri], 2000);
  add_common(combine, commons[combine], 0, false);
  add_common(design, commons[design], 0, false);
  add_common(doss_cmd, commons[doss_cmd], 2000);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    const Common& common = commons.at(sub);
    report.command = sub->get_name();
    if (sub == binom_ri) run_binom_ri(binom, route, common, report);
    if (sub == ri_y) run_ri_y(riy_args, common, report);
    if (sub == lod_var) run_lod_var(var_args, common, report);
    if (sub == cox_ri) run_cox_ri(cox, common, report);
    if (sub == combine) run_combine(studies_path, combine_p1, common, report);
    if (sub == design) run_design(design_a, design_b, centered, report);
    if (sub == doss_cmd) run_doss(doss, common, report);
    emit(report, common);
  } catch (const Failure& f) {
    std::cerr << "relinfo: " << f.message << "\n";
    return f.exit_code;
  }
  return 0;
}
