#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "zenopm/model.hpp"

// Closed-form predictions: the normal-approximation packet, final width,
// survival probability, and the measurement-uncertainty comparison.

namespace zenopm {

/// Single-Gaussian stand-in for the final packet (normal approximation of
/// the binomial weights). Good in the weak regime N*sigma >> 1.
struct GaussianApprox {
  double center;
  double width;
  double scale;  // amplitude at the center

  double amplitude(double q) const {
    const double dq = q - center;
    return scale * std::exp(-dq * dq / (4.0 * width * width));
  }

  double density(double q) const {
    const double a = amplitude(q);
    return a * a;
  }
};

/// Width of the final pointer probability density,
/// sigma_{N,r} = sqrt(2 r (1-r)/N + sigma^2). Never below sigma.
inline double final_width(const SystemState& state, const ZenoConfig& config) {
  const double r = state.r();
  const double sigma = config.sigma();
  return std::sqrt(2.0 * r * (1.0 - r) / static_cast<double>(config.stages()) + sigma * sigma);
}

inline GaussianApprox approx_final_packet(const SystemState& state, const ZenoConfig& config) {
  const double width = final_width(state, config);
  const double scale = std::sqrt(config.sigma()) / (std::pow(2.0 * kPi, 0.25) * width);
  return GaussianApprox{2.0 * state.r() - 1.0, width, scale};
}

/// Probability of surviving all N protection stages,
/// p_{N,r} = [2 r (1-r) / (N sigma^2) + 1]^(-1/2) = sigma / sigma_{N,r}.
inline double survival_probability(const SystemState& state, const ZenoConfig& config) {
  const double r = state.r();
  const double sigma = config.sigma();
  const double broadening =
      2.0 * r * (1.0 - r) / (static_cast<double>(config.stages()) * sigma * sigma);
  return std::pow(broadening + 1.0, -0.5);
}

/// Uncertainty of the expectation value from M projective (strong)
/// measurements: sqrt(4 r (1-r)) / sqrt(M).
inline double strong_uncertainty(const SystemState& state, std::int64_t photons) {
  if (photons < 1) throw std::domain_error("strong_uncertainty: photons must be >= 1");
  const double r = state.r();
  return std::sqrt(4.0 * r * (1.0 - r)) / std::sqrt(static_cast<double>(photons));
}

/// Uncertainty of the protectively measured expectation value with M photons
/// in: only p_{N,r} M of them survive to be detected.
inline double protective_uncertainty(const SystemState& state, const ZenoConfig& config,
                                     std::int64_t photons) {
  if (photons < 1) throw std::domain_error("protective_uncertainty: photons must be >= 1");
  const double detected = survival_probability(state, config) * static_cast<double>(photons);
  return final_width(state, config) / std::sqrt(detected);
}

/// Performance quantifier R = u_SM / u_PM. The photon budget cancels:
/// R = sqrt(4 r (1-r) sigma) / [2 r (1-r)/N + sigma^2]^(3/4).
/// R > 1 means the protective scheme yields the smaller uncertainty.
inline double performance_ratio(const SystemState& state, const ZenoConfig& config) {
  const double r = state.r();
  const double sigma = config.sigma();
  const double spread = 2.0 * r * (1.0 - r) / static_cast<double>(config.stages());
  return std::sqrt(4.0 * r * (1.0 - r) * sigma) / std::pow(spread + sigma * sigma, 0.75);
}

/// Limit of the performance quantifier for N -> infinity:
/// sqrt(4 r (1-r)) / sigma.
inline double performance_ratio_large_n(const SystemState& state, double sigma) {
  if (!(sigma > 0.0)) {
    throw std::domain_error("performance_ratio_large_n: sigma must be positive");
  }
  const double r = state.r();
  return std::sqrt(4.0 * r * (1.0 - r)) / sigma;
}

}  // namespace zenopm
