#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace rlin {

/// Runs f(i) for i in [0, n) on `jobs` threads and returns the results in
/// index order, so merged output does not depend on the thread count.
template <class R, class F>
std::vector<R> run_indexed(std::size_t n, unsigned jobs, F&& f) {
  std::vector<R> out(n);
  jobs = std::max(1u, jobs);
  if (jobs == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::thread> th;
  for (unsigned j = 0; j < jobs; ++j)
    th.emplace_back([&, j] {
      for (std::size_t i = j; i < n; i += jobs) out[i] = f(i);
    });
  for (auto& t : th) t.join();
  return out;
}

/// Bernoulli mean with its standard error.
struct Estimate {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  double mean() const { return trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0; }
  double stderr_() const {
    if (trials == 0) return 0.0;
    double p = mean();
    return std::sqrt(p * (1 - p) / static_cast<double>(trials));
  }
};

/// Counts how many of n seeded trials succeed. Trial i sees seed base ^ i.
template <class F>
Estimate count_hits(std::size_t n, unsigned jobs, F&& trial) {
  auto r = run_indexed<std::uint8_t>(n, jobs, [&](std::size_t i) { return static_cast<std::uint8_t>(trial(i) ? 1 : 0); });
  Estimate e;
  e.trials = n;
  for (auto x : r) e.hits += x;
  return e;
}

struct CsvRow {
  long long n = 0;
  long long b = 0;
  std::uint64_t seed = 0;
  double estimate = 0;
  double stderr_ = 0;
  double bound = 0;
};

/// Writes "# key=value" config lines, the column header and the rows.
inline void write_csv(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& config, const std::vector<CsvRow>& rows) {
  for (const auto& [k, v] : config) os << "# " << k << "=" << v << "\n";
  os << "n,b,seed,estimate,stderr,bound\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%lld,%lld,%llu,%.10g,%.10g,%.10g\n", r.n, r.b, static_cast<unsigned long long>(r.seed), r.estimate,
                  r.stderr_, r.bound);
    os << buf;
  }
}

}  // namespace rlin
