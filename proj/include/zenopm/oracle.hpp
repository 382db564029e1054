#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "zenopm/analytic.hpp"
#include "zenopm/model.hpp"
#include "zenopm/stats.hpp"

// Exact cross-checks for the closed-form predictions. The overlap of two
// unit-norm Gaussians of width sigma at centers a and b is
//   integral Phi(Q-a) Phi(Q-b) dQ = exp(-(a-b)^2 / (8 sigma^2)),
// and with one factor of Q (resp. Q^2) inserted the integral picks up the
// midpoint (a+b)/2 (resp. sigma^2 + midpoint^2). Everything here reduces to
// those three identities plus grid quadrature.

namespace zenopm {

/// Uniform evaluation grid for densities and quadrature.
struct GridSpec {
  double min_q = 0.0;
  double max_q = 0.0;
  std::int64_t points = 0;

  void validate() const {
    if (!(min_q < max_q)) throw std::domain_error("GridSpec: min must be below max");
    if (points < 2) throw std::domain_error("GridSpec: at least 2 points required");
  }

  double step() const { return (max_q - min_q) / static_cast<double>(points - 1); }
};

/// Default grid: all packet mass lies within 6 sigma of the center range
/// [-1, 1]; 8192 points resolve every width used in the sweeps.
inline GridSpec default_grid(const ZenoConfig& config) {
  const double margin = 6.0 * config.sigma();
  return GridSpec{-1.0 - margin, 1.0 + margin, 8192};
}

// Pairwise overlap sums are quadratic in the component count; guard against
// accidental blowups unless the caller opts in.
inline constexpr std::int64_t kPairwiseStageCap = 2000;

namespace detail {
inline void check_pairwise_cap(std::int64_t stages, bool allow_large, const char* where) {
  if (stages > kPairwiseStageCap && !allow_large) {
    throw std::domain_error(std::string(where) + ": pairwise sum over N = " +
                            std::to_string(stages) + " stages exceeds the cap of " +
                            std::to_string(kPairwiseStageCap) +
                            " (pass allow_large to override)");
  }
}
}  // namespace detail

/// Squared L2 norm of a packet via the closed-form pairwise overlaps.
inline double packet_norm_squared(const Wavepacket& packet, bool allow_large = false) {
  detail::check_pairwise_cap(static_cast<std::int64_t>(packet.size()) - 1, allow_large,
                             "packet_norm_squared");
  const auto& w = packet.weights();
  const auto& c = packet.centers();
  const double inv8s2 = 1.0 / (8.0 * packet.sigma() * packet.sigma());
  NeumaierSum acc;
  for (std::size_t n = 0; n < w.size(); ++n) acc.add(w[n] * w[n]);
  for (std::size_t n = 0; n < w.size(); ++n) {
    for (std::size_t m = n + 1; m < w.size(); ++m) {
      const double d = c[n] - c[m];
      const double e = d * d * inv8s2;
      if (e > 708.0) continue;
      acc.add(2.0 * w[n] * w[m] * std::exp(-e));
    }
  }
  return acc.value();
}

/// Exact survival probability: the squared norm of the final packet.
/// Unlike survival_probability() this makes no normal approximation.
inline double exact_survival(const SystemState& state, const ZenoConfig& config,
                             bool allow_large = false) {
  detail::check_pairwise_cap(config.stages(), allow_large, "exact_survival");
  return packet_norm_squared(exact_final_packet(state, config), true);
}

/// Exact norm and conditional pointer moments of the final density.
struct ExactMoments {
  double norm;      // survival probability
  double mean;      // conditional on survival
  double variance;  // conditional on survival
};

inline ExactMoments exact_moments(const SystemState& state, const ZenoConfig& config,
                                  bool allow_large = false) {
  detail::check_pairwise_cap(config.stages(), allow_large, "exact_moments");
  const Wavepacket packet = exact_final_packet(state, config);
  const auto& w = packet.weights();
  const auto& c = packet.centers();
  const double s2 = packet.sigma() * packet.sigma();
  const double inv8s2 = 1.0 / (8.0 * s2);
  NeumaierSum norm_sum, mean_sum, square_sum;
  for (std::size_t n = 0; n < w.size(); ++n) {
    for (std::size_t m = n; m < w.size(); ++m) {
      const double d = c[n] - c[m];
      const double e = d * d * inv8s2;
      if (e > 708.0) continue;
      const double pair = (m == n ? 1.0 : 2.0) * w[n] * w[m] * std::exp(-e);
      const double mid = 0.5 * (c[n] + c[m]);
      norm_sum.add(pair);
      mean_sum.add(pair * mid);
      square_sum.add(pair * (s2 + mid * mid));
    }
  }
  const double norm = norm_sum.value();
  const double mean = mean_sum.value() / norm;
  const double variance = std::max(square_sum.value() / norm - mean * mean, 0.0);
  return ExactMoments{norm, mean, variance};
}

/// |f_{N,r}(Q)|^2 sampled on a grid.
struct GridDensity {
  std::vector<double> q;
  std::vector<double> density;
};

inline GridDensity grid_density(const SystemState& state, const ZenoConfig& config,
                                const GridSpec& grid) {
  grid.validate();
  const Wavepacket packet = exact_final_packet(state, config);
  GridDensity out;
  out.q.resize(static_cast<std::size_t>(grid.points));
  out.density.resize(out.q.size());
  const double h = grid.step();
  for (std::size_t i = 0; i < out.q.size(); ++i) {
    const double q = grid.min_q + h * static_cast<double>(i);
    out.q[i] = q;
    out.density[i] = packet.density(q);
  }
  return out;
}

/// Composite trapezoid rule over tabulated values.
inline double trapezoid(const std::vector<double>& q, const std::vector<double>& v) {
  if (q.size() != v.size() || q.size() < 2) {
    throw std::domain_error("trapezoid: need >= 2 matching samples");
  }
  NeumaierSum acc;
  for (std::size_t i = 0; i + 1 < q.size(); ++i) {
    acc.add(0.5 * (q[i + 1] - q[i]) * (v[i] + v[i + 1]));
  }
  return acc.value();
}

/// Distance between the exact density and the squared normal approximation.
struct ApproxError {
  double sup_distance;
  double l1_distance;
  double weakness;  // (sigma N)^-1 diagnostic; approximation degrades above ~1
};

inline ApproxError approximation_error(const SystemState& state, const ZenoConfig& config,
                                       const GridSpec& grid) {
  grid.validate();
  const Wavepacket packet = exact_final_packet(state, config);
  const GaussianApprox approx = approx_final_packet(state, config);
  const double h = grid.step();
  std::vector<double> q(static_cast<std::size_t>(grid.points));
  std::vector<double> diff(q.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = grid.min_q + h * static_cast<double>(i);
    diff[i] = std::abs(packet.density(q[i]) - approx.density(q[i]));
    sup = std::max(sup, diff[i]);
  }
  return ApproxError{sup, trapezoid(q, diff), config.weakness()};
}

}  // namespace zenopm
