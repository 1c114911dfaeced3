#include "relinfo/mc_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "relinfo/error.hpp"

namespace relinfo {

namespace {

constexpr std::uint64_t kChunk = 64;

double pairwise_sum_range(const double* data, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_range(data, half) + pairwise_sum_range(data + half, n - half);
}

std::vector<double> finite_values(std::span<const double> values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) {
    if (std::isfinite(v)) out.push_back(v);
  }
  return out;
}

bool all_equal(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

void MCConfig::validate(bool standard_errors) const {
  if (n_draws == 0) fail(ErrorCode::invalid_argument, "n_draws must be positive");
  if (standard_errors && n_draws < 2) {
    fail(ErrorCode::invalid_argument, "n_draws must be at least 2 when standard errors are requested");
  }
  if (max_relative_se && !(*max_relative_se > 0.0)) {
    fail(ErrorCode::invalid_argument, "max_relative_se must be positive");
  }
}

unsigned resolve_workers(unsigned hint, std::uint64_t n_tasks) {
  unsigned workers = hint != 0 ? hint : std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t chunks = (n_tasks + kChunk - 1) / kChunk;
  return static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(workers, chunks)));
}

void parallel_for_chunks(std::uint64_t n, unsigned workers,
                         const std::function<void(std::uint64_t, std::uint64_t)>& body) {
  if (n == 0) return;
  if (workers <= 1) {
    for (std::uint64_t b = 0; b < n; b += kChunk) body(b, std::min(n, b + kChunk));
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::uint64_t first_error_chunk = n;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t b = next.fetch_add(kChunk);
      if (b >= n) return;
      try {
        body(b, std::min(n, b + kChunk));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (b < first_error_chunk) {
          first_error_chunk = b;
          first_error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_range(values.data(), values.size());
}

MCEstimate summarize_mean(std::span<const double> values) {
  std::vector<double> finite = finite_values(values);
  MCEstimate est;
  est.n_effective = finite.size();
  est.sentinel_count = values.size() - finite.size();
  if (finite.empty()) {
    fail(ErrorCode::estimation_failure, "every Monte Carlo draw produced a non-finite value");
  }
  const double n = static_cast<double>(finite.size());
  if (all_equal(finite)) {
    est.mean = finite.front();
    est.standard_error = 0.0;
    return est;
  }
  est.mean = pairwise_sum(finite) / n;
  if (finite.size() < 2) {
    est.standard_error = std::numeric_limits<double>::infinity();
    return est;
  }
  std::vector<double> sq(finite.size());
  std::transform(finite.begin(), finite.end(), sq.begin(), [&](double x) { return (x - est.mean) * (x - est.mean); });
  const double var = pairwise_sum(sq) / (n - 1.0);
  est.standard_error = std::sqrt(var / n);
  return est;
}

MCEstimate summarize_variance(std::span<const double> values) {
  std::vector<double> finite = finite_values(values);
  MCEstimate est;
  est.n_effective = finite.size();
  est.sentinel_count = values.size() - finite.size();
  if (finite.size() < 2) {
    fail(ErrorCode::estimation_failure, "variance estimate needs at least two finite draws");
  }
  if (all_equal(finite)) return est;
  const double n = static_cast<double>(finite.size());
  const double mean = pairwise_sum(finite) / n;
  std::vector<double> d2(finite.size()), d4(finite.size());
  for (std::size_t i = 0; i < finite.size(); ++i) {
    const double d = finite[i] - mean;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
  }
  const double s2 = pairwise_sum(d2) / (n - 1.0);
  const double m4 = pairwise_sum(d4) / n;
  est.mean = s2;
  // Var(s^2) ~ (m4 - s^4 (n-3)/(n-1)) / n
  const double var_s2 = (m4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n;
  est.standard_error = std::sqrt(std::max(0.0, var_s2));
  return est;
}

}  // namespace relinfo
