#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gevmq/classical.hpp"
#include "gevmq/multi_quantile.hpp"
#include "gevmq/rng.hpp"

namespace gevmq {

// Fewest blocks accepted by the estimators; plain blocking accepts any count.
inline constexpr std::size_t kMinBlocks = 30;

struct BlockConfig {
  std::size_t block_size = 1;
  std::size_t n_blocks = 0;

  // Throws DomainError if block_size < 1 or n_blocks < 1.
  BlockConfig(std::size_t block_size, std::size_t n_blocks);
  // n_blocks = floor(n / block_size); the remainder is discarded.
  static BlockConfig from_length(std::size_t n, std::size_t block_size);
};

std::vector<double> block_maxima(std::span<const double> data, const BlockConfig& cfg);

// MQ fit on the block maxima; needs n_blocks >= kMinBlocks. mu_hat and sigma_hat describe the maxima and
// absorb the unknown normalizing sequences.
FitResult bm_estimate(std::span<const double> data, const BlockConfig& cfg, const TripleSet& M,
                      const MqOptions& opt = {});

struct BootstrapInterval {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t resamples = 0;
  std::size_t failures = 0;
};

// Percentile interval for xi from resampling block maxima with replacement.
BootstrapInterval bm_bootstrap_xi(std::span<const double> data, const BlockConfig& cfg, const TripleSet& M,
                                  Rng& rng, std::size_t resamples = 199, double level = 0.95,
                                  const MqOptions& opt = {});

}  // namespace gevmq
