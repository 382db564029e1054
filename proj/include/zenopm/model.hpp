#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "zenopm/stats.hpp"

// Core model of a Zeno protective measurement of a two-outcome observable.
// Pointer positions are dimensionless: the coupling is normalized so the
// total shift lies in [-1, 1] and one stage moves the pointer by 1/N.

namespace zenopm {

inline constexpr double kPi = 3.14159265358979323846;

/// The protected qubit state, parametrized by the weight r of the |+>
/// component. The relative phase never enters a two-outcome measurement.
class SystemState {
 public:
  explicit SystemState(double r) : r_(r) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw std::domain_error("SystemState: r must lie in [0, 1]");
    }
  }

  double r() const { return r_; }

  /// Polar angle with r = cos^2(theta), in [0, pi/2].
  double theta() const { return std::acos(std::sqrt(r_)); }

 private:
  double r_;
};

/// Protocol parameters: number of Zeno stages and initial pointer width.
class ZenoConfig {
 public:
  ZenoConfig(std::int64_t stages, double sigma) : stages_(stages), sigma_(sigma) {
    if (stages < 1) throw std::domain_error("ZenoConfig: stages must be >= 1");
    if (!(sigma > 0.0)) throw std::domain_error("ZenoConfig: sigma must be positive");
  }

  std::int64_t stages() const { return stages_; }
  double sigma() const { return sigma_; }

  /// Pointer shift per stage in normalized units.
  double per_stage_shift() const { return 1.0 / static_cast<double>(stages_); }

  /// (sigma * N)^-1; the measurement is weak when this is well below 1.
  double weakness() const { return 1.0 / (sigma_ * static_cast<double>(stages_)); }

 private:
  std::int64_t stages_;
  double sigma_;
};

/// Unit-norm Gaussian amplitude (2 pi sigma^2)^(-1/4) exp(-(q-c)^2 / 4 sigma^2).
/// Its squared modulus is the normal density with standard deviation sigma.
inline double gaussian_amplitude(double q, double center, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("gaussian_amplitude: sigma must be positive");
  const double dq = q - center;
  return std::pow(2.0 * kPi * sigma * sigma, -0.25) * std::exp(-dq * dq / (4.0 * sigma * sigma));
}

/// Binomial probabilities C(N,n) r^n (1-r)^(N-n) for n = 0..N.
///
/// Anchored at the mode and filled outward with the term ratio
/// (N-n)/(n+1) * r/(1-r), then normalized with a compensated sum. Stays
/// accurate for N well beyond 1e4; naive factorials overflow near N = 170.
/// Far tails underflow to zero, which is harmless at double precision.
inline std::vector<double> binomial_weights(std::int64_t stages, double r) {
  if (stages < 1) throw std::domain_error("binomial_weights: stages must be >= 1");
  if (!(r >= 0.0 && r <= 1.0)) throw std::domain_error("binomial_weights: r must lie in [0, 1]");
  const std::size_t count = static_cast<std::size_t>(stages) + 1;
  std::vector<double> w(count, 0.0);
  if (r == 0.0) {
    w.front() = 1.0;
    return w;
  }
  if (r == 1.0) {
    w.back() = 1.0;
    return w;
  }
  const double n_stages = static_cast<double>(stages);
  const std::size_t mode = static_cast<std::size_t>(
      std::min(n_stages, std::floor((n_stages + 1.0) * r)));
  const double odds = r / (1.0 - r);
  w[mode] = 1.0;
  for (std::size_t n = mode; n + 1 < count; ++n) {
    w[n + 1] = w[n] * ((n_stages - static_cast<double>(n)) / (static_cast<double>(n) + 1.0)) * odds;
  }
  for (std::size_t n = mode; n > 0; --n) {
    w[n - 1] = w[n] * (static_cast<double>(n) / (n_stages - static_cast<double>(n) + 1.0)) / odds;
  }
  NeumaierSum total;
  for (double x : w) total.add(x);
  const double norm = total.value();
  for (double& x : w) x /= norm;
  return w;
}

/// A superposition of equal-width Gaussians: amplitude(Q) = sum of
/// w_n * Phi(Q - c_n). Weights are non-negative but need not sum to one;
/// the packet is in general unnormalized.
class Wavepacket {
 public:
  Wavepacket(std::vector<double> weights, std::vector<double> centers, double sigma)
      : weights_(std::move(weights)), centers_(std::move(centers)), sigma_(sigma) {
    if (weights_.empty() || weights_.size() != centers_.size()) {
      throw std::domain_error("Wavepacket: weights and centers must have equal length >= 1");
    }
    if (!(sigma > 0.0)) throw std::domain_error("Wavepacket: sigma must be positive");
    for (double w : weights_) {
      if (!(w >= 0.0)) throw std::domain_error("Wavepacket: weights must be non-negative");
    }
  }

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& centers() const { return centers_; }
  double sigma() const { return sigma_; }
  std::size_t size() const { return weights_.size(); }

  double amplitude(double q) const {
    const double inv4s2 = 1.0 / (4.0 * sigma_ * sigma_);
    const double scale = std::pow(2.0 * kPi * sigma_ * sigma_, -0.25);
    double acc = 0.0;
    for (std::size_t n = 0; n < weights_.size(); ++n) {
      const double dq = q - centers_[n];
      const double e = dq * dq * inv4s2;
      if (e > 708.0) continue;  // exp underflows
      acc += weights_[n] * std::exp(-e);
    }
    return scale * acc;
  }

  double density(double q) const {
    const double a = amplitude(q);
    return a * a;
  }

 private:
  std::vector<double> weights_;
  std::vector<double> centers_;
  double sigma_;
};

/// Pointer state before any stage: unit weight at the origin.
inline Wavepacket initial_packet(double sigma) {
  return Wavepacket({1.0}, {0.0}, sigma);
}

/// Final (unnormalized) pointer packet after all N stages: binomial weights
/// over centers (2n - N)/N. Its squared norm is the survival probability.
inline Wavepacket exact_final_packet(const SystemState& state, const ZenoConfig& config) {
  const std::int64_t n_stages = config.stages();
  std::vector<double> centers(static_cast<std::size_t>(n_stages) + 1);
  for (std::int64_t n = 0; n <= n_stages; ++n) {
    centers[static_cast<std::size_t>(n)] =
        static_cast<double>(2 * n - n_stages) / static_cast<double>(n_stages);
  }
  return Wavepacket(binomial_weights(n_stages, state.r()), std::move(centers), config.sigma());
}

/// One Zeno stage: every component (w, c) splits into (r w, c + shift) and
/// ((1-r) w, c - shift). Components landing on the same center merge.
///
/// All centers reachable from the initial packet are integer multiples of the
/// stage shift, so merging keys on the rounded integer index rather than on
/// float equality of centers.
inline Wavepacket stage_recurrence(const Wavepacket& packet, double shift, double r) {
  if (!(shift > 0.0)) throw std::domain_error("stage_recurrence: shift must be positive");
  if (!(r >= 0.0 && r <= 1.0)) throw std::domain_error("stage_recurrence: r must lie in [0, 1]");
  std::map<std::int64_t, double> merged;
  for (std::size_t i = 0; i < packet.size(); ++i) {
    const std::int64_t idx = std::llround(packet.centers()[i] / shift);
    merged[idx + 1] += r * packet.weights()[i];
    merged[idx - 1] += (1.0 - r) * packet.weights()[i];
  }
  std::vector<double> weights;
  std::vector<double> centers;
  weights.reserve(merged.size());
  centers.reserve(merged.size());
  for (const auto& [idx, w] : merged) {
    weights.push_back(w);
    centers.push_back(static_cast<double>(idx) * shift);
  }
  return Wavepacket(std::move(weights), std::move(centers), packet.sigma());
}

}  // namespace zenopm
