#include "fgmtail/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include "fgmtail/errors.hpp"

namespace fgmtail {

namespace {

int resolve_workers(int requested, std::int64_t chunks) {
  int w = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  w = std::max(w, 1);
  return static_cast<int>(std::min<std::int64_t>(w, std::max<std::int64_t>(chunks, 1)));
}

// Runs make_chunk(c) for every chunk on a pool of workers, then folds the
// per-chunk accumulators left to right in chunk order.
template <class Acc, class MakeChunk>
Acc run_chunked(std::int64_t samples, int workers, const Acc& empty, MakeChunk make_chunk) {
  const std::int64_t chunks = (samples + kChunkSize - 1) / kChunkSize;
  std::vector<std::optional<Acc>> parts(static_cast<std::size_t>(chunks));
  std::atomic<std::int64_t> next{0};
  auto work = [&] {
    for (std::int64_t c = next++; c < chunks; c = next++) {
      const std::int64_t begin = c * kChunkSize;
      const std::int64_t count = std::min(kChunkSize, samples - begin);
      parts[static_cast<std::size_t>(c)].emplace(make_chunk(c, count));
    }
  };
  const int w = resolve_workers(workers, chunks);
  if (w == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    for (int i = 0; i < w; ++i) pool.emplace_back(work);
  }
  Acc total = empty;
  for (auto& p : parts) total.merge(*p);
  return total;
}

// Draws `count` portfolios of `pairs` FGM pairs from chunk stream `chunk` and
// hands each row (first nx x-losses, first ny y-losses) to `visit`.
template <class Visit>
void simulate_chunk(const FgmModel& model, int pairs, int nx, int ny, std::uint64_t seed, StreamDomain domain,
                    std::int64_t chunk, std::int64_t count, Visit&& visit) {
  RngStream rng(seed, stream_id(static_cast<std::uint32_t>(domain), static_cast<std::uint64_t>(chunk)));
  std::vector<double> xs(static_cast<std::size_t>(pairs));
  std::vector<double> ys(static_cast<std::size_t>(pairs));
  for (std::int64_t j = 0; j < count; ++j) {
    double s = 0.0;
    double t = 0.0;
    for (int i = 0; i < pairs; ++i) {
      const auto [x, y] = model.sample_pair(rng);
      xs[static_cast<std::size_t>(i)] = x;
      ys[static_cast<std::size_t>(i)] = y;
      if (i < nx) s += x;
      if (i < ny) t += y;
    }
    visit(PortfolioRow{std::span<const double>(xs).first(static_cast<std::size_t>(nx)),
                       std::span<const double>(ys).first(static_cast<std::size_t>(ny)), s, t});
  }
}

double power(double x, double beta) {
  if (beta == 1.0) return x;
  if (beta == 2.0) return x * x;
  if (beta == 0.0) return 1.0;
  return std::pow(x, beta);
}

struct CountAccumulator {
  std::int64_t hits = 0;
  std::int64_t rows = 0;
  void merge(const CountAccumulator& o) {
    hits += o.hits;
    rows += o.rows;
  }
};

struct ComponentAccumulator {
  std::int64_t joint = 0;
  std::int64_t component = 0;
  std::int64_t rows = 0;
  void merge(const ComponentAccumulator& o) {
    joint += o.joint;
    component += o.component;
    rows += o.rows;
  }
};

EstimateReport frequency_report(std::int64_t hits, std::int64_t rows, std::uint64_t seed) {
  EstimateReport r;
  const double p = static_cast<double>(hits) / static_cast<double>(rows);
  r.estimate = p;
  r.numerator_sum = static_cast<double>(hits);
  r.denominator_hits = hits;
  r.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(rows));
  r.samples = rows;
  r.seed = seed;
  return r;
}

void validate_common(int n, int k, std::int64_t samples) {
  if (n < 1) throw ConfigError("portfolio size n must be at least 1");
  if (k < 1 || k > n) throw ConfigError("asset index k must lie in [1, n]");
  if (samples < 1) throw ConfigError("sample count N must be at least 1");
}

}  // namespace

double stderr_ratio(const RatioMoments& m) {
  if (m.sum_b == 0.0) return 0.0;
  const double r = m.sum_a / m.sum_b;
  const double q = m.sum_a2 - 2.0 * r * m.sum_ab + r * r * m.sum_b2;
  return std::sqrt(std::max(0.0, q)) / std::abs(m.sum_b);
}

MomentAccumulator::MomentAccumulator(std::span<const TailMomentQuery> queries, int k)
    : queries_(queries.begin(), queries.end()), k_(k), cells_(queries.size()) {}

void MomentAccumulator::add(const PortfolioRow& row) {
  ++rows_;
  const double xk = row.x[static_cast<std::size_t>(k_ - 1)];
  for (std::size_t i = 0; i < queries_.size(); ++i) {
    const auto& q = queries_[i];
    if (xk > q.zeta * q.x && row.s > q.x && row.t > q.y) {
      const double v = power(xk, q.beta);
      auto& c = cells_[i];
      c.sum += v;
      c.sum_sq += v * v;
      ++c.hits;
    }
  }
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  rows_ += other.rows_;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    cells_[i].sum += other.cells_[i].sum;
    cells_[i].sum_sq += other.cells_[i].sum_sq;
    cells_[i].hits += other.cells_[i].hits;
  }
}

std::vector<EstimateReport> MomentAccumulator::reports(std::uint64_t seed) const {
  std::vector<EstimateReport> out;
  out.reserve(cells_.size());
  for (const auto& c : cells_) {
    EstimateReport r;
    r.numerator_sum = c.sum;
    r.denominator_hits = c.hits;
    r.samples = rows_;
    r.seed = seed;
    if (c.hits > 0) {
      const double h = static_cast<double>(c.hits);
      r.estimate = c.sum / h;
      // the indicator b satisfies b^2 = b and a b = a
      r.std_error = stderr_ratio({c.sum, c.sum_sq, h, h, c.sum, rows_});
    }
    out.push_back(r);
  }
  return out;
}

void validate_plan(const SimulationPlan& plan) {
  validate_common(plan.n, plan.k, plan.samples);
  const bool nonnegative = plan.model.f().nonnegative_support() && plan.model.g().nonnegative_support();
  for (const auto& q : plan.queries) {
    if (q.n != plan.n || q.k != plan.k) throw ConfigError("every query must share the plan's n and k");
    if (!(q.beta >= 0.0) || std::isinf(q.beta)) throw ConfigError("beta must be a finite nonnegative number");
    if (!(q.zeta >= 0.0 && q.zeta <= 1.0)) throw ConfigError("zeta must lie in [0, 1]");
    if (std::isnan(q.x) || std::isnan(q.y)) throw ConfigError("thresholds must not be NaN");
    if (q.zeta == 0.0 && std::floor(q.beta) != q.beta && !nonnegative) {
      throw ConfigError("a non-integer beta with zeta = 0 requires nonnegative losses");
    }
  }
}

std::vector<EstimateReport> run_plan(const SimulationPlan& plan) {
  validate_plan(plan);
  std::vector<TailMomentQuery> queries = plan.queries;
  if (plan.link_thresholds) {
    for (auto& q : queries) q.y = q.x;
  }
  const MomentAccumulator empty(queries, plan.k);
  const auto total = run_chunked(plan.samples, plan.workers, empty, [&](std::int64_t c, std::int64_t count) {
    MomentAccumulator acc(queries, plan.k);
    simulate_chunk(plan.model, plan.n, plan.n, plan.n, plan.seed, StreamDomain::kPortfolio, c, count,
                   [&acc](const PortfolioRow& row) { acc.add(row); });
    return acc;
  });
  return total.reports(plan.seed);
}

std::vector<EstimateReport> run_queries_on_rows(std::span<const TailMomentQuery> queries, int k,
                                                std::span<const std::vector<double>> rows) {
  MomentAccumulator acc(queries, k);
  for (const auto& r : rows) {
    if (r.size() % 2 != 0 || r.size() < 2) throw ConfigError("row must hold n x-losses followed by n y-losses");
    const std::size_t n = r.size() / 2;
    if (k < 1 || static_cast<std::size_t>(k) > n) throw ConfigError("asset index k must lie in [1, n]");
    const std::span<const double> xs(r.data(), n);
    const std::span<const double> ys(r.data() + n, n);
    double s = 0.0;
    double t = 0.0;
    for (double v : xs) s += v;
    for (double v : ys) t += v;
    acc.add({xs, ys, s, t});
  }
  return acc.reports(0);
}

EstimateReport estimate_joint_tail(const SimulationPlan& plan, double x, double y) {
  validate_common(plan.n, plan.k, plan.samples);
  if (plan.link_thresholds) y = x;
  const auto total = run_chunked(plan.samples, plan.workers, CountAccumulator{}, [&](std::int64_t c, std::int64_t count) {
    CountAccumulator acc;
    simulate_chunk(plan.model, plan.n, plan.n, plan.n, plan.seed, StreamDomain::kPortfolio, c, count,
                   [&](const PortfolioRow& row) {
                     ++acc.rows;
                     if (row.s > x && row.t > y) ++acc.hits;
                   });
    return acc;
  });
  return frequency_report(total.hits, total.rows, plan.seed);
}

EstimateReport estimate_component_ratio(const SimulationPlan& plan, double u, double x, double y) {
  validate_common(plan.n, plan.k, plan.samples);
  if (plan.n < 2) throw ConfigError("component ratio requires n >= 2");
  if (!(u > 0.0 && u < 1.0)) throw ConfigError("component ratio requires u in (0, 1)");
  if (plan.link_thresholds) y = x;
  const std::size_t k = static_cast<std::size_t>(plan.k - 1);
  const auto total =
      run_chunked(plan.samples, plan.workers, ComponentAccumulator{}, [&](std::int64_t c, std::int64_t count) {
        ComponentAccumulator acc;
        simulate_chunk(plan.model, plan.n, plan.n, plan.n, plan.seed, StreamDomain::kPortfolio, c, count,
                       [&](const PortfolioRow& row) {
                         ++acc.rows;
                         if (row.s > x && row.t > y) {
                           ++acc.joint;
                           if (row.x[k] > u * x) ++acc.component;
                         }
                       });
        return acc;
      });
  EstimateReport r;
  r.samples = total.rows;
  r.seed = plan.seed;
  r.denominator_hits = total.joint;
  r.numerator_sum = static_cast<double>(total.component);
  if (total.joint > 0) {
    const double a = static_cast<double>(total.component);
    const double b = static_cast<double>(total.joint);
    r.estimate = a / b;
    r.std_error = stderr_ratio({a, a, b, b, a, total.rows});
  }
  return r;
}

EstimateReport estimate_mixed_joint_tail(const FgmModel& model, int n, int m, double x, double y,
                                         std::int64_t samples, std::uint64_t seed, int workers) {
  if (n < 1 || m < 1) throw ConfigError("line sizes must be at least 1");
  validate_common(1, 1, samples);
  const int pairs = std::max(n, m);
  const auto total = run_chunked(samples, workers, CountAccumulator{}, [&](std::int64_t c, std::int64_t count) {
    CountAccumulator acc;
    simulate_chunk(model, pairs, n, m, seed, StreamDomain::kMixedPortfolio, c, count, [&](const PortfolioRow& row) {
      ++acc.rows;
      if (row.s > x && row.t > y) ++acc.hits;
    });
    return acc;
  });
  return frequency_report(total.hits, total.rows, seed);
}

EstimateReport estimate_star_sum_tail(const Margin& base, int num_full, int num_min, double threshold,
                                      std::int64_t samples, std::uint64_t seed, StreamDomain domain, int workers) {
  if (num_full < 0 || num_min < 0 || num_full + num_min < 1) throw ConfigError("star sum needs at least one draw");
  if (num_full + num_min > 64) throw ConfigError("star sum supports at most 64 draws");
  validate_common(1, 1, samples);
  const MinSquaredMargin min_law(base);
  // one stream family per (domain, num_full, num_min); chunk index in the low bits
  const std::uint32_t dom = (static_cast<std::uint32_t>(domain) << 16) |
                            static_cast<std::uint32_t>(num_full << 8) | static_cast<std::uint32_t>(num_min);
  const auto total = run_chunked(samples, workers, CountAccumulator{}, [&](std::int64_t c, std::int64_t count) {
    CountAccumulator acc;
    RngStream rng(seed, stream_id(dom, static_cast<std::uint64_t>(c)));
    for (std::int64_t j = 0; j < count; ++j) {
      double s = 0.0;
      for (int i = 0; i < num_full; ++i) s += base.sample(rng);
      for (int i = 0; i < num_min; ++i) s += min_law.sample(rng);
      ++acc.rows;
      if (s > threshold) ++acc.hits;
    }
    return acc;
  });
  return frequency_report(total.hits, total.rows, seed);
}

ExpansionEstimate estimate_joint_tail_by_expansion(const FgmModel& model, int n, double x, double y,
                                                   std::int64_t samples, std::uint64_t seed, int workers) {
  using Key = std::pair<int, int>;
  std::map<Key, EstimateReport> x_tails;
  std::map<Key, EstimateReport> y_tails;
  for (const auto& c : compositions(n)) {
    const Key kx{c.x_full(), c.x_min()};
    const Key ky{c.y_full(), c.y_min()};
    if (!x_tails.contains(kx)) {
      x_tails.emplace(kx, estimate_star_sum_tail(model.f(), kx.first, kx.second, x, samples, seed,
                                                 StreamDomain::kStarSumX, workers));
    }
    if (!y_tails.contains(ky)) {
      y_tails.emplace(ky, estimate_star_sum_tail(model.g(), ky.first, ky.second, y, samples, seed,
                                                 StreamDomain::kStarSumY, workers));
    }
  }
  auto lookup = [](const std::map<Key, EstimateReport>& m) {
    return [&m](int full, int min, double) { return *m.at({full, min}).estimate; };
  };
  ExpansionEstimate out;
  out.value = joint_tail_expansion(n, model.theta(), x, y, lookup(x_tails), lookup(y_tails));

  // Independent composite-tail estimates: var = sum over tails of (dE/dp)^2 var(p).
  std::map<Key, double> dx;
  std::map<Key, double> dy;
  for (const auto& term : expansion_terms(n, model.theta())) {
    const Key kx{term.parts.x_full(), term.parts.x_min()};
    const Key ky{term.parts.y_full(), term.parts.y_min()};
    dx[kx] += term.coeff_a * *y_tails.at(ky).estimate;
    dy[ky] += term.coeff_a * *x_tails.at(kx).estimate;
  }
  double var = 0.0;
  for (const auto& [key, d] : dx) var += d * d * x_tails.at(key).std_error * x_tails.at(key).std_error;
  for (const auto& [key, d] : dy) var += d * d * y_tails.at(key).std_error * y_tails.at(key).std_error;
  out.std_error = std::sqrt(var);
  return out;
}

}  // namespace fgmtail
