#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gevmq/classical.hpp"

namespace gevmq {

struct ExperimentGrid {
  std::vector<double> xi_list;
  std::size_t n = 1000;
  std::size_t reps = 1000;
  std::vector<Estimator> estimators{Estimator::MQ, Estimator::MLE, Estimator::PWM, Estimator::DEH};
  std::uint64_t master_seed = 1;
  std::size_t m_triples = 98;
  std::size_t deh_k = 100;
  std::size_t deh_n = 10000;  // DEH gets its own, larger samples
  int threads = 0;            // 0: OpenMP default

  // Throws DomainError on reps < 1, n < 100, empty lists, deh_k >= deh_n.
  void validate() const;
};

struct McReport {
  Estimator estimator = Estimator::MQ;
  double xi_true = 0.0;
  std::size_t n = 0;
  std::size_t reps = 0;       // replicates attempted
  std::size_t reps_used = 0;  // valid replicates
  double bias = 0.0;          // over valid replicates
  double std_error = 0.0;     // sample sd over valid replicates
  bool std_error_defined = false;
  double failure_rate = 0.0;
  double wall_time_ms = 0.0;  // summed fit time, not deterministic
};

// Replicate-parallel run; identical reports (timing aside) for any thread count.
std::vector<McReport> run_grid(const ExperimentGrid& grid);
std::vector<McReport> run_grid_serial(const ExperimentGrid& grid);

// Fixed-width text table of std errors (rows xi, columns estimators); a cell
// reads NaN when more than half of its replicates failed.
std::string render_table(const std::vector<McReport>& reports);

struct TimingRow {
  std::size_t n = 0;
  double mq_median_ms = 0, mq_p05_ms = 0, mq_p95_ms = 0;
  double mle_median_ms = 0, mle_p05_ms = 0, mle_p95_ms = 0;
};

// Single-threaded fit timings; absolute values are machine dependent.
std::vector<TimingRow> timing_benchmark(double xi, const std::vector<std::size_t>& n_list, std::size_t reps,
                                        std::uint64_t seed = 1, std::size_t m_triples = 98);

}  // namespace gevmq
