#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "relinfo/rng.hpp"

namespace relinfo {

struct MCConfig {
  std::uint64_t n_draws = 10000;
  std::uint64_t seed = kDefaultSeed;
  unsigned worker_hint = 0;  // 0 = hardware concurrency
  // Adaptive stop: end after the first block whose relative SE is at or below this.
  std::optional<double> max_relative_se;

  void validate(bool standard_errors = true) const;
};

struct MCEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::uint64_t n_effective = 0;
  std::uint64_t sentinel_count = 0;

  std::uint64_t n_draws() const { return n_effective + sentinel_count; }
};

// Draws are evaluated in blocks of this size when adaptive stopping is on.
inline constexpr std::uint64_t kAdaptiveBlock = 1000;

unsigned resolve_workers(unsigned hint, std::uint64_t n_tasks);

/// Runs body(begin, end) over [0, n) split into fixed chunks across workers.
/// If several chunks throw, the exception from the lowest chunk is rethrown.
void parallel_for_chunks(std::uint64_t n, unsigned workers,
                         const std::function<void(std::uint64_t, std::uint64_t)>& body);

/// Evaluates fn(index, rng) for index in [first, last) into out[index - first].
/// Each index gets the substream (seed, index), so the output does not depend
/// on the worker count.
template <class T, class Fn>
void evaluate_draws(const MCConfig& config, std::uint64_t first, std::uint64_t last, std::span<T> out,
                    Fn&& fn) {
  const std::uint64_t n = last - first;
  parallel_for_chunks(n, resolve_workers(config.worker_hint, n), [&](std::uint64_t b, std::uint64_t e) {
    for (std::uint64_t i = b; i < e; ++i) {
      DrawRng rng(config.seed, first + i);
      out[i] = fn(first + i, rng);
    }
  });
}

template <class Fn>
auto mc_map(const MCConfig& config, Fn&& fn) {
  using T = std::decay_t<std::invoke_result_t<Fn&, std::uint64_t, DrawRng&>>;
  std::vector<T> out(config.n_draws);
  evaluate_draws<T>(config, 0, config.n_draws, std::span<T>(out), fn);
  return out;
}

/// Sum in index order by recursive halving; fixed association for fixed input.
double pairwise_sum(std::span<const double> values);

/// Mean and its standard error over the finite entries; non-finite entries are
/// counted as sentinels.
MCEstimate summarize_mean(std::span<const double> values);

/// Unbiased sample variance over the finite entries, with a standard error
/// from the fourth central moment.
MCEstimate summarize_variance(std::span<const double> values);

/// Monte Carlo estimate of E[functional(draw(rng))].
template <class Draw, class Functional>
MCEstimate mc_expectation(Draw&& draw, Functional&& functional, const MCConfig& config) {
  config.validate();
  auto value_of = [&](std::uint64_t, DrawRng& rng) -> double {
    return static_cast<double>(functional(draw(rng)));
  };
  if (!config.max_relative_se) {
    return summarize_mean(mc_map(config, value_of));
  }
  std::vector<double> values;
  values.reserve(config.n_draws);
  MCEstimate estimate;
  while (values.size() < config.n_draws) {
    const std::uint64_t first = values.size();
    const std::uint64_t last = std::min<std::uint64_t>(config.n_draws, first + kAdaptiveBlock);
    values.resize(last);
    evaluate_draws<double>(config, first, last, std::span<double>(values).subspan(first), value_of);
    estimate = summarize_mean(values);
    if (estimate.n_effective >= 2 && estimate.mean != 0.0 &&
        estimate.standard_error <= *config.max_relative_se * std::abs(estimate.mean)) {
      break;
    }
  }
  return estimate;
}

/// Monte Carlo estimate of Var[functional(draw(rng))].
template <class Draw, class Functional>
MCEstimate mc_variance(Draw&& draw, Functional&& functional, const MCConfig& config) {
  config.validate();
  return summarize_variance(mc_map(config, [&](std::uint64_t, DrawRng& rng) -> double {
    return static_cast<double>(functional(draw(rng)));
  }));
}

}  // namespace relinfo
