#include "relinfo/relinfo.h"

#include <cmath>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "relinfo/binomial.hpp"
#include "relinfo/combine.hpp"
#include "relinfo/cox.hpp"
#include "relinfo/design.hpp"
#include "relinfo/error.hpp"
#include "relinfo/survival.hpp"

struct relinfo_survival {
  relinfo::SurvivalDataset data;
};

struct relinfo_doss_run {
  relinfo::DossReplicationSummary summary;
};

struct relinfo_design {
  relinfo::Design design;
};

namespace {

using namespace relinfo;

thread_local std::string g_last_error;

relinfo_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return RELINFO_ERR_INVALID_ARGUMENT;
    case ErrorCode::parse: return RELINFO_ERR_PARSE;
    case ErrorCode::io: return RELINFO_ERR_IO;
    case ErrorCode::domain: return RELINFO_ERR_DOMAIN;
    case ErrorCode::boundary: return RELINFO_ERR_BOUNDARY;
    case ErrorCode::undefined_measure: return RELINFO_ERR_UNDEFINED_MEASURE;
    case ErrorCode::instability: return RELINFO_ERR_INSTABILITY;
    case ErrorCode::unsupported: return RELINFO_ERR_UNSUPPORTED;
    case ErrorCode::oracle_unavailable: return RELINFO_ERR_ORACLE_UNAVAILABLE;
    case ErrorCode::estimation_failure: return RELINFO_ERR_ESTIMATION_FAILURE;
    case ErrorCode::degenerate_data: return RELINFO_ERR_DEGENERATE_DATA;
    case ErrorCode::separation: return RELINFO_ERR_SEPARATION;
    case ErrorCode::rank_deficient: return RELINFO_ERR_RANK_DEFICIENT;
    case ErrorCode::data_integrity: return RELINFO_ERR_DATA_INTEGRITY;
  }
  return RELINFO_ERR_INTERNAL;
}

relinfo_status set_error(relinfo_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <class Fn>
relinfo_status guarded(Fn&& fn) {
  try {
    fn();
    return RELINFO_OK;
  } catch (const Error& e) {
    return set_error(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(RELINFO_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(RELINFO_ERR_INTERNAL, e.what());
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

BinomialObserved to_observed(const relinfo_binomial* data) {
  require(data, "data");
  BinomialObserved obs{data->successes, data->n_observed, data->n_missing};
  obs.validate();
  return obs;
}

MCConfig to_mc(const relinfo_mc_config* config) {
  MCConfig mc;
  if (config != nullptr) {
    mc.n_draws = config->n_draws;
    mc.seed = config->seed;
    mc.worker_hint = config->worker_hint;
    if (config->max_relative_se > 0.0) mc.max_relative_se = config->max_relative_se;
  }
  return mc;
}

ExpectationRoute to_route(relinfo_route route) {
  switch (route) {
    case RELINFO_ROUTE_AUTOMATIC: return ExpectationRoute::automatic;
    case RELINFO_ROUTE_IMPUTATION: return ExpectationRoute::imputation;
    case RELINFO_ROUTE_MONTE_CARLO: return ExpectationRoute::monte_carlo;
  }
  fail(ErrorCode::invalid_argument, "unknown expectation route");
}

TieMode to_ties(relinfo_ties ties) {
  switch (ties) {
    case RELINFO_TIES_BRESLOW: return TieMode::breslow;
    case RELINFO_TIES_JITTER: return TieMode::jitter;
  }
  fail(ErrorCode::invalid_argument, "unknown tie mode");
}

relinfo_method to_c(Method m) {
  switch (m) {
    case Method::closed_form: return RELINFO_METHOD_CLOSED_FORM;
    case Method::sufficient_stat_imputation: return RELINFO_METHOD_SUFFICIENT_STAT_IMPUTATION;
    case Method::monte_carlo: return RELINFO_METHOD_MONTE_CARLO;
  }
  return RELINFO_METHOD_MONTE_CARLO;
}

relinfo_result to_c(const RelInfoResult& r) {
  relinfo_result out{};
  out.estimate = r.estimate;
  out.mc_standard_error = r.mc_standard_error;
  out.numerator = r.numerator;
  out.denominator = r.denominator;
  out.n_draws = r.n_draws;
  out.seed = r.seed;
  out.sentinel_count = r.sentinel_count;
  out.method = to_c(r.method);
  out.flags = r.flags;
  return out;
}

relinfo_estimate to_c(const MCEstimate& e) {
  return relinfo_estimate{e.mean, e.standard_error, e.n_effective, e.sentinel_count};
}

}  // namespace

extern "C" {

const char* relinfo_version(void) { return "0.1.0"; }
const char* relinfo_generator_id(void) { return kGeneratorId; }
const char* relinfo_last_error(void) { return g_last_error.c_str(); }

const char* relinfo_status_name(relinfo_status status) {
  switch (status) {
    case RELINFO_OK: return "ok";
    case RELINFO_ERR_INVALID_ARGUMENT: return to_string(ErrorCode::invalid_argument);
    case RELINFO_ERR_PARSE: return to_string(ErrorCode::parse);
    case RELINFO_ERR_IO: return to_string(ErrorCode::io);
    case RELINFO_ERR_DOMAIN: return to_string(ErrorCode::domain);
    case RELINFO_ERR_BOUNDARY: return to_string(ErrorCode::boundary);
    case RELINFO_ERR_UNDEFINED_MEASURE: return to_string(ErrorCode::undefined_measure);
    case RELINFO_ERR_INSTABILITY: return to_string(ErrorCode::instability);
    case RELINFO_ERR_UNSUPPORTED: return to_string(ErrorCode::unsupported);
    case RELINFO_ERR_ORACLE_UNAVAILABLE: return to_string(ErrorCode::oracle_unavailable);
    case RELINFO_ERR_ESTIMATION_FAILURE: return to_string(ErrorCode::estimation_failure);
    case RELINFO_ERR_DEGENERATE_DATA: return to_string(ErrorCode::degenerate_data);
    case RELINFO_ERR_SEPARATION: return to_string(ErrorCode::separation);
    case RELINFO_ERR_RANK_DEFICIENT: return to_string(ErrorCode::rank_deficient);
    case RELINFO_ERR_DATA_INTEGRITY: return to_string(ErrorCode::data_integrity);
    case RELINFO_ERR_BUFFER_TOO_SMALL: return "buffer_too_small";
    case RELINFO_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

int relinfo_status_is_validation(relinfo_status status) {
  return status >= RELINFO_ERR_INVALID_ARGUMENT && status < RELINFO_ERR_DOMAIN ? 1 : 0;
}

void relinfo_mc_config_default(relinfo_mc_config* config) {
  if (config == nullptr) return;
  const MCConfig mc;
  config->n_draws = mc.n_draws;
  config->seed = mc.seed;
  config->worker_hint = mc.worker_hint;
  config->max_relative_se = 0.0;
}

const char* relinfo_method_name(relinfo_method method) {
  switch (method) {
    case RELINFO_METHOD_CLOSED_FORM: return to_string(Method::closed_form);
    case RELINFO_METHOD_SUFFICIENT_STAT_IMPUTATION: return to_string(Method::sufficient_stat_imputation);
    case RELINFO_METHOD_MONTE_CARLO: return to_string(Method::monte_carlo);
  }
  return "unknown";
}

// ---- binomial ----

relinfo_status relinfo_binomial_lod(const relinfo_binomial* data, double p_alt, double p_null, double* out) {
  return guarded([&] {
    require(out, "lod");
    const auto model = binomial_model();
    *out = lod(model, make_hypothesis_pair(model, p_null, p_alt), to_observed(data));
  });
}

relinfo_status relinfo_binomial_mle(const relinfo_binomial* data, double* mle) {
  return guarded([&] {
    require(mle, "mle");
    *mle = binomial_model().mle(to_observed(data));
  });
}

relinfo_status relinfo_binomial_ri1_closed_form(const relinfo_binomial* data, double* out) {
  return guarded([&] {
    require(out, "ri1");
    *out = ri1_closed_form(to_observed(data));
  });
}

relinfo_status relinfo_binomial_ri1(const relinfo_binomial* data, double p_null, relinfo_route route,
                                    const relinfo_mc_config* config, relinfo_result* result) {
  return guarded([&] {
    require(result, "result");
    *result = to_c(ri1(binomial_model(), to_observed(data), p_null, Ri1Options{to_route(route), to_mc(config)}));
  });
}

relinfo_status relinfo_binomial_ri1_fixed_pair(const relinfo_binomial* data, double p_alt, double p_null,
                                               relinfo_route route, const relinfo_mc_config* config,
                                               relinfo_result* result) {
  return guarded([&] {
    require(result, "result");
    const auto model = binomial_model();
    const auto obs = to_observed(data);
    const double theta_ob = detail::interior_mle(model, obs);
    *result = to_c(ri1_at(model, obs, make_hypothesis_pair(model, p_null, p_alt), theta_ob,
                          Ri1Options{to_route(route), to_mc(config)}));
  });
}

relinfo_status relinfo_binomial_ri1_enumerated(const relinfo_binomial* data, double p_null, std::uint64_t cap,
                                               double* out) {
  return guarded([&] {
    require(out, "ri1");
    const auto model = binomial_model();
    const auto obs = to_observed(data);
    const double theta_ob = detail::interior_mle(model, obs);
    const auto pair = make_hypothesis_pair(model, p_null, theta_ob);
    const double numerator = lod(model, pair, obs);
    detail::require_positive_lod(numerator);
    const double expected =
        enumerate_expectation(obs, theta_ob, [&](const BinomialComplete& c) { return lod(model, pair, c); }, cap);
    *out = numerator / expected;
  });
}

relinfo_status relinfo_binomial_ri0(const relinfo_binomial* data, double p_null, relinfo_result* result) {
  return guarded([&] {
    require(result, "result");
    *result = to_c(ri0(binomial_model(), to_observed(data), p_null));
  });
}

relinfo_status relinfo_binomial_ri_y_samples(const relinfo_binomial* data, double p_alt, double p_null,
                                             const relinfo_mc_config* config, double* samples, size_t capacity,
                                             std::uint64_t* sentinel_count) {
  if (config != nullptr && capacity < config->n_draws) {
    return set_error(RELINFO_ERR_BUFFER_TOO_SMALL, "sample buffer smaller than n_draws");
  }
  return guarded([&] {
    require(config, "config");
    require(samples, "samples");
    const auto model = binomial_model();
    RiYOptions options;
    options.mc = to_mc(config);
    const auto out = ri_y_samples(model, to_observed(data), make_hypothesis_pair(model, p_null, p_alt), options);
    std::copy(out.samples.begin(), out.samples.end(), samples);
    if (sentinel_count != nullptr) *sentinel_count = out.sentinel_count;
  });
}

relinfo_status relinfo_ri_y_summary(const double* samples, size_t n, relinfo_estimate* reciprocal, double* spread) {
  return guarded([&] {
    require(samples, "samples");
    RiYSamples s;
    s.samples.assign(samples, samples + n);
    for (double v : s.samples) {
      if (!std::isfinite(v)) ++s.sentinel_count;
    }
    if (reciprocal != nullptr) *reciprocal = to_c(reciprocal_mean(s));
    if (spread != nullptr) *spread = ri_y_spread(s);
  });
}

relinfo_status relinfo_binomial_lod_ratio_variance(const relinfo_binomial* data, double p_null,
                                                   const relinfo_mc_config* config, relinfo_result* result) {
  return guarded([&] {
    require(result, "result");
    *result = to_c(lod_ratio_variance(binomial_model(), to_observed(data), p_null, to_mc(config)));
  });
}

relinfo_status relinfo_binomial_expected_lod_gap(const relinfo_binomial* data, double p_null,
                                                 const relinfo_mc_config* config, relinfo_lod_gap* gap) {
  return guarded([&] {
    require(gap, "gap");
    const LodGap g = expected_lod_gap(binomial_model(), to_observed(data), p_null, to_mc(config));
    gap->at_complete_mle = to_c(g.at_complete_mle);
    gap->at_observed_mle = to_c(g.at_observed_mle);
    gap->gap = to_c(g.gap);
    gap->dominance_violations = g.dominance_violations;
    gap->observed_lod = g.observed_lod;
  });
}

// ---- survival ----

relinfo_status relinfo_survival_read_csv(const char* path, relinfo_survival** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new relinfo_survival{read_survival_csv(path)};
  });
}

relinfo_status relinfo_survival_create(size_t n, size_t dim, const double* times, const int* status,
                                       const double* covariates, relinfo_survival** out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) {
      require(times, "times");
      require(status, "status");
      require(covariates, "covariates");
    }
    std::vector<SurvivalRecord> records(n);
    for (size_t i = 0; i < n; ++i) {
      if (status[i] != 0 && status[i] != 1) {
        fail(ErrorCode::invalid_argument, "record " + std::to_string(i) + ": status must be 0 or 1");
      }
      records[i].time = times[i];
      records[i].status = status[i] ? EventStatus::event : EventStatus::censored;
      records[i].covariates.assign(covariates + i * dim, covariates + (i + 1) * dim);
    }
    *out = new relinfo_survival{SurvivalDataset(std::move(records), dim)};
  });
}

void relinfo_survival_destroy(relinfo_survival* data) { delete data; }
size_t relinfo_survival_size(const relinfo_survival* data) { return data ? data->data.size() : 0; }
size_t relinfo_survival_dim(const relinfo_survival* data) { return data ? data->data.covariate_dim() : 0; }
size_t relinfo_survival_events(const relinfo_survival* data) { return data ? data->data.event_count() : 0; }

const char* relinfo_survival_covariate_name(const relinfo_survival* data, size_t j) {
  if (data == nullptr || j >= data->data.covariate_dim()) return nullptr;
  return data->data.covariate_names()[j].c_str();
}

relinfo_status relinfo_cox_fit(const relinfo_survival* data, relinfo_ties ties, double* beta, double* se, size_t dim,
                               int* iterations) {
  return guarded([&] {
    require(data, "data");
    require(beta, "beta");
    if (dim != data->data.covariate_dim()) fail(ErrorCode::invalid_argument, "dim does not match the dataset");
    const CoxFit fit = fit_partial_likelihood(extract_rank_data(data->data, to_ties(ties)));
    for (size_t j = 0; j < dim; ++j) {
      beta[j] = fit.beta(static_cast<Eigen::Index>(j));
      if (se != nullptr) se[j] = fit.se(static_cast<Eigen::Index>(j));
    }
    if (iterations != nullptr) *iterations = fit.iterations;
  });
}

void relinfo_cox_options_default(relinfo_cox_options* options) {
  if (options == nullptr) return;
  *options = relinfo_cox_options{};
  options->conditioning = RELINFO_CONDITION_RANK_DATA;
  options->baseline_scale = 1.0;
  options->ties = RELINFO_TIES_BRESLOW;
}

relinfo_status relinfo_cox_ri1(const relinfo_survival* data, const relinfo_cox_options* options,
                               const relinfo_mc_config* config, relinfo_result* result) {
  return guarded([&] {
    require(data, "data");
    require(options, "options");
    require(result, "result");
    const auto dim = static_cast<Eigen::Index>(data->data.covariate_dim());
    Eigen::MatrixXd new_cov;
    if (options->new_covariates != nullptr && options->new_covariate_rows > 0) {
      new_cov.resize(static_cast<Eigen::Index>(options->new_covariate_rows), dim);
      for (Eigen::Index i = 0; i < new_cov.rows(); ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) new_cov(i, j) = options->new_covariates[i * dim + j];
      }
    }
    std::optional<Eigen::VectorXd> beta_null;
    if (options->beta_null != nullptr) beta_null = Eigen::Map<const Eigen::VectorXd>(options->beta_null, dim);
    CoxRiOptions opts;
    if (config != nullptr) {
      opts.mc = to_mc(config);
    }
    opts.ties = to_ties(options->ties);
    opts.new_censoring_rate = options->new_censoring_rate;
    if (options->tail_rate > 0.0) opts.tail_rate = options->tail_rate;
    if (options->baseline_scale != 0.0) opts.baseline_scale = options->baseline_scale;
    Conditioning cond;
    switch (options->conditioning) {
      case RELINFO_CONDITION_RANK_DATA: cond = Conditioning::rank_data; break;
      case RELINFO_CONDITION_CENSORED_DATA: cond = Conditioning::censored_data; break;
      default: fail(ErrorCode::invalid_argument, "unknown conditioning");
    }
    *result = to_c(ri1_cox(cond, data->data, options->n_new, new_cov, beta_null, opts).ri);
  });
}

relinfo_status relinfo_ri_w_wald(double observed_stat, double observed_var, double complete_stat_mean,
                                 double complete_stat_var, double theta_null, double* out) {
  return guarded([&] {
    require(out, "ri_w");
    *out = ri_w_wald(observed_stat, observed_var, complete_stat_mean, complete_stat_var, theta_null);
  });
}

// ---- paired simulation ----

void relinfo_doss_config_default(relinfo_doss_config* config) {
  if (config == nullptr) return;
  const DossReplicationConfig d;
  config->n_datasets = d.n_datasets;
  config->n_subjects = d.simulation.n_subjects;
  config->censoring_fraction = d.simulation.censoring_fraction;
  config->n_new = d.n_new;
  config->beta = d.simulation.beta;
  config->baseline_rate = d.simulation.baseline_rate;
}

relinfo_status relinfo_doss_replication(const relinfo_doss_config* config, const relinfo_mc_config* mc,
                                        relinfo_doss_run** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    DossReplicationConfig d;
    d.n_datasets = config->n_datasets;
    d.simulation.n_subjects = config->n_subjects;
    d.simulation.censoring_fraction = config->censoring_fraction;
    d.simulation.beta = config->beta;
    d.simulation.baseline_rate = config->baseline_rate;
    d.n_new = config->n_new;
    if (mc != nullptr) d.ri.mc = to_mc(mc);
    *out = new relinfo_doss_run{doss_replication(d)};
  });
}

void relinfo_doss_run_destroy(relinfo_doss_run* run) { delete run; }

relinfo_status relinfo_doss_run_summary(const relinfo_doss_run* run, relinfo_doss_summary* summary) {
  return guarded([&] {
    require(run, "run");
    require(summary, "summary");
    summary->n_rows = run->summary.rows.size();
    summary->skipped = run->summary.skipped;
    summary->naive_above_one = run->summary.naive_above_one;
    summary->correct_above_bound = run->summary.correct_above_bound;
    summary->fraction_naive_above_one = run->summary.fraction_naive_above_one;
  });
}

relinfo_status relinfo_doss_run_row(const relinfo_doss_run* run, size_t index, relinfo_doss_row* row) {
  return guarded([&] {
    require(run, "run");
    require(row, "row");
    if (index >= run->summary.rows.size()) fail(ErrorCode::invalid_argument, "row index out of range");
    const auto& r = run->summary.rows[index];
    row->dataset_seed = r.dataset_seed;
    row->censored_fraction = r.censored_fraction;
    row->naive = to_c(r.naive);
    row->correct_uncensored = to_c(r.correct_uncensored);
  });
}

// ---- combine ----

relinfo_status relinfo_combine_weighted_harmonic(const relinfo_study* studies, size_t n, double* out) {
  return guarded([&] {
    require(out, "ri1");
    if (n > 0) require(studies, "studies");
    std::vector<StudySummary> s(n);
    for (size_t i = 0; i < n; ++i) {
      s[i].lod_observed = studies[i].lod_observed;
      s[i].ri1 = studies[i].ri1;
    }
    *out = combine_weighted_harmonic(s);
  });
}

relinfo_status relinfo_binomial_study_summaries(const relinfo_binomial* studies, size_t n, double p_null,
                                                double p_alt, relinfo_study* studies_out, double* pooled_ri1,
                                                double* shared_alt) {
  return guarded([&] {
    if (n > 0) require(studies, "studies");
    std::vector<BinomialObserved> obs;
    for (size_t i = 0; i < n; ++i) obs.push_back(to_observed(&studies[i]));
    std::optional<double> alt;
    if (p_alt >= 0.0) alt = p_alt;
    const PooledBinomial pooled = binomial_study_summaries(obs, p_null, alt);
    if (studies_out != nullptr) {
      for (size_t i = 0; i < n; ++i) studies_out[i] = {pooled.studies[i].lod_observed, pooled.studies[i].ri1};
    }
    if (pooled_ri1 != nullptr) *pooled_ri1 = pooled.pooled_ri1;
    if (shared_alt != nullptr) *shared_alt = pooled.theta_alt;
  });
}

// ---- design ----

relinfo_status relinfo_design_load(const char* spec, relinfo_design** out) {
  return guarded([&] {
    require(spec, "spec");
    require(out, "out");
    *out = new relinfo_design{load_design(spec)};
  });
}

relinfo_status relinfo_design_from_points(const double* points, size_t n, relinfo_design** out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) require(points, "points");
    *out = new relinfo_design{Design(std::vector<double>(points, points + n))};
  });
}

void relinfo_design_destroy(relinfo_design* design) { delete design; }
size_t relinfo_design_size(const relinfo_design* design) { return design ? design->design.size() : 0; }

relinfo_status relinfo_design_sx(const relinfo_design* design, int centered, double* out) {
  return guarded([&] {
    require(design, "design");
    require(out, "sx");
    *out = sx(design->design, centered != 0);
  });
}

relinfo_status relinfo_design_sx_exact(const relinfo_design* design, int centered, std::int64_t* num,
                                       std::int64_t* den, int* exact) {
  return guarded([&] {
    require(design, "design");
    require(exact, "exact");
    const auto r = sx_exact(design->design, centered != 0);
    *exact = r ? 1 : 0;
    if (r) {
      if (num != nullptr) *num = r->num;
      if (den != nullptr) *den = r->den;
    }
  });
}

relinfo_status relinfo_design_variance_ratio(const relinfo_design* a, const relinfo_design* b, int centered,
                                             double* out) {
  return guarded([&] {
    require(a, "a");
    require(b, "b");
    require(out, "ratio");
    *out = variance_ratio(a->design, b->design, centered != 0);
  });
}

}  // extern "C"
