#include "gevmq/block_maxima.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gevmq/errors.hpp"

namespace gevmq {

BlockConfig::BlockConfig(std::size_t bs, std::size_t nb) : block_size(bs), n_blocks(nb) {
  if (block_size < 1) throw DomainError("block size must be at least 1");
  if (n_blocks < 1) throw DomainError("need at least one block");
}

namespace {
void require_estimable(const BlockConfig& cfg) {
  if (cfg.n_blocks < kMinBlocks)
    throw DomainError("need at least " + std::to_string(kMinBlocks) + " blocks for estimation, got " +
                      std::to_string(cfg.n_blocks));
}
}  // namespace

BlockConfig BlockConfig::from_length(std::size_t n, std::size_t bs) {
  if (bs < 1) throw DomainError("block size must be at least 1");
  return BlockConfig(bs, n / bs);
}

std::vector<double> block_maxima(std::span<const double> data, const BlockConfig& cfg) {
  if (data.size() < cfg.block_size * cfg.n_blocks)
    throw DomainError("data length " + std::to_string(data.size()) + " is shorter than block_size * n_blocks");
  std::vector<double> out(cfg.n_blocks);
  const auto nb = static_cast<std::ptrdiff_t>(cfg.n_blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const auto first = data.begin() + b * static_cast<std::ptrdiff_t>(cfg.block_size);
    out[static_cast<std::size_t>(b)] = *std::max_element(first, first + static_cast<std::ptrdiff_t>(cfg.block_size));
  }
  return out;
}

FitResult bm_estimate(std::span<const double> data, const BlockConfig& cfg, const TripleSet& M, const MqOptions& opt) {
  require_estimable(cfg);
  const std::vector<double> y = block_maxima(data, cfg);
  FitResult r;
  r.estimator = Estimator::MQ;
  try {
    const MqFit fit = estimate_theta_mq(M, y, opt);
    r.xi_hat = fit.theta.xi;
    r.mu_hat = fit.theta.mu;
    r.sigma_hat = fit.theta.sigma;
    r.valid = true;
  } catch (const EstimationError& e) {
    r.xi_hat = std::nan("");
    r.failure_reason = e.what();
  } catch (const RobustnessError& e) {
    r.xi_hat = std::nan("");
    r.failure_reason = e.what();
  }
  return r;
}

BootstrapInterval bm_bootstrap_xi(std::span<const double> data, const BlockConfig& cfg, const TripleSet& M, Rng& rng,
                                  std::size_t resamples, double level, const MqOptions& opt) {
  require_estimable(cfg);
  if (resamples < 2) throw DomainError("bootstrap needs at least 2 resamples");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0,1)");
  const std::vector<double> y = block_maxima(data, cfg);
  BootstrapInterval bi;
  bi.resamples = resamples;
  std::vector<double> est;
  std::vector<double> boot(y.size());
  for (std::size_t b = 0; b < resamples; ++b) {
    for (double& v : boot) v = y[static_cast<std::size_t>(rng.below(y.size()))];
    try {
      est.push_back(estimate_xi_iterative(M, boot, opt).xi_hat);
    } catch (const EstimationError&) {
      ++bi.failures;
    } catch (const RobustnessError&) {
      ++bi.failures;
    }
  }
  if (est.size() < 2) throw EstimationError("bootstrap failed on almost every resample");
  std::sort(est.begin(), est.end());
  auto pick = [&](double p) {
    const double h = p * static_cast<double>(est.size() - 1);
    const auto j = static_cast<std::size_t>(std::floor(h));
    const double f = h - static_cast<double>(j);
    return j + 1 < est.size() ? est[j] + f * (est[j + 1] - est[j]) : est.back();
  };
  bi.lo = pick(0.5 * (1.0 - level));
  bi.hi = pick(0.5 * (1.0 + level));
  return bi;
}

}  // namespace gevmq
