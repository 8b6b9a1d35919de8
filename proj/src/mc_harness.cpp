#include "gevmq/mc_harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <omp.h>

#include "gevmq/errors.hpp"
#include "gevmq/gev.hpp"
#include "gevmq/multi_quantile.hpp"
#include "gevmq/rng.hpp"

namespace gevmq {

void ExperimentGrid::validate() const {
  if (xi_list.empty()) throw DomainError("xi list must not be empty");
  if (estimators.empty()) throw DomainError("estimator list must not be empty");
  if (reps < 1) throw DomainError("reps must be at least 1");
  if (n < 100) throw DomainError("sample size n must be at least 100");
  if (xi_list.size() >= (1u << 22)) throw DomainError("too many xi values");
  for (Estimator e : estimators) {
    if (e == Estimator::DEH && (deh_k < 1 || deh_k >= deh_n)) throw DomainError("DEH needs 1 <= k < deh_n");
    if (e == Estimator::MQ && n < mq_min_sample(m_triples))
      throw DomainError("n is too small for m_triples = " + std::to_string(m_triples));
  }
}

namespace {

using Clock = std::chrono::steady_clock;
constexpr std::uint64_t kTripleCell = 1ULL << 23;

struct Slot {
  std::array<double, 4> est{};
  std::array<bool, 4> ok{};
  std::array<double, 4> ms{};
};

std::size_t idx(Estimator e) { return static_cast<std::size_t>(e); }

void run_replicate(const ExperimentGrid& g, std::size_t xi_index, std::size_t rep, const TripleSet* M, Slot& slot) {
  const double xi = g.xi_list[xi_index];
  const GevParams theta(xi, 0.0, 1.0);
  std::vector<double> data;
  const bool need_main = std::any_of(g.estimators.begin(), g.estimators.end(), [](Estimator e) { return e != Estimator::DEH; });
  if (need_main) {
    Rng rng(stream_seed(g.master_seed, 2 * xi_index, rep));
    data = sample(theta, g.n, rng);
  }
  for (Estimator e : g.estimators) {
    const auto t0 = Clock::now();
    FitResult r;
    r.estimator = e;
    try {
      switch (e) {
        case Estimator::MQ: {
          r.xi_hat = estimate_xi_iterative(*M, data).xi_hat;
          r.valid = true;
          break;
        }
        case Estimator::MLE: r = mle_fit(data); break;
        case Estimator::PWM: r = pwm_fit(data); break;
        case Estimator::DEH: {
          Rng rng(stream_seed(g.master_seed, 2 * xi_index + 1, rep));
          const std::vector<double> tail = sample(theta, g.deh_n, rng);
          r = deh_fit(tail, g.deh_k);
          break;
        }
      }
    } catch (const EstimationError&) {
      r.valid = false;
    } catch (const RobustnessError&) {
      r.valid = false;
    }
    const auto k = idx(e);
    slot.est[k] = r.xi_hat;
    slot.ok[k] = r.valid && std::isfinite(r.xi_hat);
    slot.ms[k] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  }
}

std::vector<McReport> aggregate(const ExperimentGrid& g, std::size_t xi_index, const std::vector<Slot>& slots) {
  std::vector<McReport> out;
  const double xi = g.xi_list[xi_index];
  for (Estimator e : g.estimators) {
    const auto k = idx(e);
    McReport r;
    r.estimator = e;
    r.xi_true = xi;
    r.n = e == Estimator::DEH ? g.deh_n : g.n;
    r.reps = slots.size();
    double sum = 0.0, ms = 0.0;
    for (const Slot& s : slots) {
      ms += s.ms[k];
      if (!s.ok[k]) continue;
      ++r.reps_used;
      sum += s.est[k] - xi;
    }
    r.wall_time_ms = ms;
    r.failure_rate = static_cast<double>(r.reps - r.reps_used) / static_cast<double>(r.reps);
    if (r.reps_used == 0) {
      r.bias = std::nan("");
      r.std_error = std::nan("");
    } else {
      r.bias = sum / static_cast<double>(r.reps_used);
      double ss = 0.0;
      for (const Slot& s : slots)
        if (s.ok[k]) ss += (s.est[k] - xi - r.bias) * (s.est[k] - xi - r.bias);
      r.std_error_defined = r.reps_used > 1;
      r.std_error = r.std_error_defined ? std::sqrt(ss / static_cast<double>(r.reps_used - 1)) : 0.0;
    }
    out.push_back(r);
  }
  return out;
}

std::vector<McReport> run(const ExperimentGrid& g, bool parallel) {
  g.validate();
  const bool need_mq = std::find(g.estimators.begin(), g.estimators.end(), Estimator::MQ) != g.estimators.end();
  std::vector<McReport> all;
  for (std::size_t x = 0; x < g.xi_list.size(); ++x) {
    TripleSet M;
    if (need_mq) {
      Rng rng(stream_seed(g.master_seed, kTripleCell | x, 0));
      M = select_robust_triples(g.m_triples, g.xi_list[x], rng);
    }
    std::vector<Slot> slots(g.reps);
    const auto reps = static_cast<std::ptrdiff_t>(g.reps);
    if (parallel) {
      const int nt = g.threads > 0 ? g.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
      for (std::ptrdiff_t i = 0; i < reps; ++i)
        run_replicate(g, x, static_cast<std::size_t>(i), &M, slots[static_cast<std::size_t>(i)]);
    } else {
      for (std::ptrdiff_t i = 0; i < reps; ++i)
        run_replicate(g, x, static_cast<std::size_t>(i), &M, slots[static_cast<std::size_t>(i)]);
    }
    const auto part = aggregate(g, x, slots);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

}  // namespace

std::vector<McReport> run_grid(const ExperimentGrid& grid) { return run(grid, true); }
std::vector<McReport> run_grid_serial(const ExperimentGrid& grid) { return run(grid, false); }

std::string render_table(const std::vector<McReport>& reports) {
  std::vector<double> xis;
  std::vector<Estimator> ests;
  for (const auto& r : reports) {
    if (std::find(xis.begin(), xis.end(), r.xi_true) == xis.end()) xis.push_back(r.xi_true);
    if (std::find(ests.begin(), ests.end(), r.estimator) == ests.end()) ests.push_back(r.estimator);
  }
  std::ostringstream os;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%8s", "xi");
  os << buf;
  for (Estimator e : ests) {
    std::snprintf(buf, sizeof buf, "%10s", to_string(e).c_str());
    os << buf;
  }
  os << '\n';
  for (double xi : xis) {
    std::snprintf(buf, sizeof buf, "%8.2f", xi);
    os << buf;
    for (Estimator e : ests) {
      auto it = std::find_if(reports.begin(), reports.end(),
                             [&](const McReport& r) { return r.xi_true == xi && r.estimator == e; });
      if (it == reports.end() || it->failure_rate > 0.5 || !std::isfinite(it->std_error))
        std::snprintf(buf, sizeof buf, "%10s", "NaN");
      else
        std::snprintf(buf, sizeof buf, "%10.3f", it->std_error);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

namespace {
double percentile_sorted(const std::vector<double>& v, double p) {
  const double h = p * static_cast<double>(v.size() - 1);
  const auto j = static_cast<std::size_t>(std::floor(h));
  return j + 1 < v.size() ? v[j] + (h - static_cast<double>(j)) * (v[j + 1] - v[j]) : v.back();
}
}  // namespace

std::vector<TimingRow> timing_benchmark(double xi, const std::vector<std::size_t>& n_list, std::size_t reps,
                                        std::uint64_t seed, std::size_t m_triples) {
  if (reps < 1) throw DomainError("reps must be at least 1");
  const GevParams theta(xi, 0.0, 1.0);
  // Fits run single-threaded so the medians compare like with like.
  struct ThreadGuard {
    int saved = omp_get_max_threads();
    ThreadGuard() { omp_set_num_threads(1); }
    ~ThreadGuard() { omp_set_num_threads(saved); }
  } guard;
  std::vector<TimingRow> rows;
  for (std::size_t c = 0; c < n_list.size(); ++c) {
    const std::size_t n = n_list[c];
    if (n < 100) throw DomainError("timing needs n >= 100");
    const std::size_t m = std::min(m_triples, n / 10 - 2);
    Rng trng(stream_seed(seed, kTripleCell | c, 0));
    const TripleSet M = select_robust_triples(m, xi, trng);
    std::vector<double> tmq, tmle;
    for (std::size_t i = 0; i < reps; ++i) {
      Rng rng(stream_seed(seed, c, i));
      const std::vector<double> data = sample(theta, n, rng);
      auto t0 = Clock::now();
      try {
        (void)estimate_theta_mq(M, data);
      } catch (const std::exception&) {
      }
      auto t1 = Clock::now();
      (void)mle_fit(data);
      auto t2 = Clock::now();
      tmq.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      tmle.push_back(std::chrono::duration<double, std::milli>(t2 - t1).count());
    }
    std::sort(tmq.begin(), tmq.end());
    std::sort(tmle.begin(), tmle.end());
    rows.push_back({n, percentile_sorted(tmq, 0.5), percentile_sorted(tmq, 0.05), percentile_sorted(tmq, 0.95),
                    percentile_sorted(tmle, 0.5), percentile_sorted(tmle, 0.05), percentile_sorted(tmle, 0.95)});
  }
  return rows;
}

}  // namespace gevmq
