#include "zenopm/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "zenopm/analytic.hpp"
#include "zenopm/model.hpp"

namespace zenopm {
namespace {

// Trapezoid quadrature of the exact density over a wide window. With the
// integrand smooth and fully decayed inside the window, the composite
// trapezoid rule is spectrally accurate; the window (12 sigma beyond the
// center range) keeps the truncated tail mass far below every tolerance
// used here.
double quadrature_survival(const SystemState& state, const ZenoConfig& config,
                           std::int64_t points) {
  const double margin = 12.0 * config.sigma();
  const GridDensity table =
      grid_density(state, config, GridSpec{-1.0 - margin, 1.0 + margin, points});
  return trapezoid(table.q, table.density);
}

TEST(ExactSurvival, CertainForEigenstates) {
  EXPECT_NEAR(exact_survival(SystemState(1.0), ZenoConfig(9, 0.1)), 1.0, 1e-14);
  EXPECT_NEAR(exact_survival(SystemState(0.0), ZenoConfig(33, 0.2)), 1.0, 1e-14);
}

TEST(ExactSurvival, MatchesQuadratureOnStrongRegimePacket) {
  // Three well-separated components at sigma = 0.5: cross terms matter.
  const SystemState state(0.5);
  const ZenoConfig config(2, 0.5);
  const double closed = exact_survival(state, config);
  EXPECT_NEAR(closed, quadrature_survival(state, config, 1 << 21), 1e-10);
  EXPECT_NEAR(closed, 0.695182240260893, 1e-12);
}

TEST(ExactSurvival, MatchesQuadratureAcrossRegimes) {
  for (double r : {0.2, 0.5, 0.9}) {
    for (std::int64_t n : {std::int64_t{1}, std::int64_t{10}, std::int64_t{60}}) {
      for (double sigma : {0.05, 0.2}) {
        const SystemState state(r);
        const ZenoConfig config(n, sigma);
        EXPECT_NEAR(exact_survival(state, config), quadrature_survival(state, config, 1 << 20),
                    1e-10)
            << "r=" << r << " n=" << n << " sigma=" << sigma;
      }
    }
  }
}

TEST(ExactSurvival, ConsistentWithClosedFormInWeakRegime) {
  // The paper's approximate value at N = 100 is accurate to well under 1%.
  const double exact = exact_survival(SystemState(0.5), ZenoConfig(100, 0.1));
  const double approx = survival_probability(SystemState(0.5), ZenoConfig(100, 0.1));
  EXPECT_NEAR(exact, 0.816383018198128, 1e-12);
  EXPECT_LT(std::abs(exact - approx) / exact, 0.01);
}

TEST(ExactSurvival, MirrorSymmetryAndUnitBound) {
  for (double r : {0.05, 0.3, 0.45}) {
    for (std::int64_t n : {std::int64_t{4}, std::int64_t{37}}) {
      const ZenoConfig config(n, 0.1);
      const double p = exact_survival(SystemState(r), config);
      EXPECT_NEAR(p, exact_survival(SystemState(1.0 - r), config), 1e-12);
      EXPECT_LT(p, 1.0 - 1e-12);
    }
  }
}

TEST(ExactSurvival, PairwiseCapGuardsLargeN) {
  EXPECT_THROW(exact_survival(SystemState(0.5), ZenoConfig(2001, 0.1)), std::domain_error);
  // The override accepts the quadratic cost explicitly; this deep in the
  // weak regime the closed form is accurate to well below a percent.
  const double p = exact_survival(SystemState(0.5), ZenoConfig(2001, 0.1), true);
  const double closed = survival_probability(SystemState(0.5), ZenoConfig(2001, 0.1));
  EXPECT_NEAR(p, closed, 0.001 * closed);
  EXPECT_LT(p, 1.0);
}

TEST(ExactSurvival, PerStageProductMatchesFinalNorm) {
  // Conditional survival probabilities from the stage recurrence multiply up
  // to the closed-form survival.
  const double r = 0.35;
  const ZenoConfig config(12, 0.08);
  auto packet = initial_packet(config.sigma());
  double prev_norm = 1.0;
  double product = 1.0;
  for (std::int64_t k = 0; k < config.stages(); ++k) {
    packet = stage_recurrence(packet, config.per_stage_shift(), r);
    const double norm = packet_norm_squared(packet);
    product *= norm / prev_norm;
    prev_norm = norm;
  }
  EXPECT_NEAR(product, exact_survival(SystemState(r), config), 1e-10);
}

TEST(ExactMoments, TranslatedGaussianForEigenstate) {
  const ExactMoments m = exact_moments(SystemState(1.0), ZenoConfig(5, 0.1));
  EXPECT_NEAR(m.norm, 1.0, 1e-12);
  EXPECT_NEAR(m.mean, 1.0, 1e-12);
  EXPECT_NEAR(m.variance, 0.01, 1e-12);
}

TEST(ExactMoments, SymmetricStateHasZeroMean) {
  for (std::int64_t n : {std::int64_t{3}, std::int64_t{40}}) {
    const ExactMoments m = exact_moments(SystemState(0.5), ZenoConfig(n, 0.1));
    EXPECT_NEAR(m.mean, 0.0, 1e-12);
  }
  EXPECT_NEAR(exact_moments(SystemState(0.0), ZenoConfig(6, 0.1)).mean, -1.0, 1e-12);
}

TEST(ExactMoments, MeanNearExpectationAcrossWeakRegime) {
  // The exact conditional mean is only claimed to approach 2r - 1 where the
  // measurement is weak; it stays within 0.01 there.
  for (double r : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    for (std::int64_t n : {std::int64_t{25}, std::int64_t{50}, std::int64_t{100}}) {
      for (double sigma : {0.1, 0.2}) {
        if (n * sigma * sigma < 0.5) continue;
        const ExactMoments m = exact_moments(SystemState(r), ZenoConfig(n, sigma));
        EXPECT_NEAR(m.mean, 2.0 * r - 1.0, 0.01) << "r=" << r << " n=" << n;
        EXPECT_NEAR(m.norm, exact_survival(SystemState(r), ZenoConfig(n, sigma)), 1e-13);
      }
    }
  }
}

TEST(ExactMoments, MatchesQuadratureOracle) {
  // Independent moments from quadrature on [-2, 2] (the packet at sigma = 0.1
  // has no mass outside).
  const SystemState state(0.7);
  const ZenoConfig config(50, 0.1);
  const GridDensity table = grid_density(state, config, GridSpec{-2.0, 2.0, 1000001});
  std::vector<double> q1(table.q.size()), q2(table.q.size());
  for (std::size_t i = 0; i < table.q.size(); ++i) {
    q1[i] = table.q[i] * table.density[i];
    q2[i] = table.q[i] * table.q[i] * table.density[i];
  }
  const double norm = trapezoid(table.q, table.density);
  const double mean = trapezoid(table.q, q1) / norm;
  const double variance = trapezoid(table.q, q2) / norm - mean * mean;

  const ExactMoments m = exact_moments(state, config);
  EXPECT_NEAR(m.norm, norm, 1e-9);
  EXPECT_NEAR(m.mean, mean, 1e-9);
  EXPECT_NEAR(m.variance, variance, 1e-9);

  // Weak-regime agreement with the closed-form predictions.
  EXPECT_NEAR(m.mean, 0.4, 0.01);
  EXPECT_NEAR(std::sqrt(m.variance), final_width(state, config),
              0.02 * final_width(state, config));
}

TEST(GridDensity, PeakAtTranslatedCenter) {
  const GridDensity table =
      grid_density(SystemState(1.0), ZenoConfig(1, 0.1), GridSpec{-2.0, 2.0, 4001});
  std::size_t peak = 0;
  for (std::size_t i = 0; i < table.density.size(); ++i) {
    if (table.density[i] > table.density[peak]) peak = i;
  }
  EXPECT_NEAR(table.q[peak], 1.0, 1e-3 + 1e-12);  // one grid step
}

TEST(GridDensity, QuadratureApproachesClosedForm) {
  const SystemState state(0.7);
  const ZenoConfig config(10, 0.1);
  const GridDensity table = grid_density(state, config, GridSpec{-2.0, 2.0, 4001});
  EXPECT_NEAR(trapezoid(table.q, table.density), exact_survival(state, config), 1e-6);
}

TEST(GridDensity, MultimodalInStrongRegime) {
  // weakness = (sigma N)^-1 = 4: the packet resolves into separate spikes.
  const ZenoConfig config(5, 0.05);
  ASSERT_GT(config.weakness(), 1.0);
  const GridDensity table =
      grid_density(SystemState(0.5), config, GridSpec{-2.0, 2.0, 8001});
  int maxima = 0;
  for (std::size_t i = 1; i + 1 < table.density.size(); ++i) {
    if (table.density[i] > table.density[i - 1] && table.density[i] > table.density[i + 1] &&
        table.density[i] > 1e-6) {
      ++maxima;
    }
  }
  EXPECT_GE(maxima, 2);
}

TEST(GridDensity, RejectsMalformedGrid) {
  const SystemState state(0.5);
  const ZenoConfig config(5, 0.1);
  EXPECT_THROW(grid_density(state, config, GridSpec{1.0, -1.0, 100}), std::domain_error);
  EXPECT_THROW(grid_density(state, config, GridSpec{-1.0, 1.0, 1}), std::domain_error);
}

TEST(ApproximationError, VanishesForEigenstate) {
  const ZenoConfig config(8, 0.1);
  const ApproxError err =
      approximation_error(SystemState(1.0), config, default_grid(config));
  EXPECT_NEAR(err.sup_distance, 0.0, 1e-12);
  EXPECT_NEAR(err.l1_distance, 0.0, 1e-12);
}

TEST(ApproximationError, TracksTheWeaknessDiagnostic) {
  const SystemState state(0.7);
  const ZenoConfig weak(100, 0.1);
  const ZenoConfig strong(2, 0.1);
  const ApproxError weak_err = approximation_error(state, weak, default_grid(weak));
  const ApproxError strong_err = approximation_error(state, strong, default_grid(strong));
  EXPECT_LE(weak_err.l1_distance, 0.05);
  EXPECT_GT(strong_err.l1_distance, 0.2);
  EXPECT_NEAR(weak_err.weakness, 0.1, 1e-15);
  EXPECT_NEAR(strong_err.weakness, 5.0, 1e-15);
}

TEST(Trapezoid, RejectsMismatchedSamples) {
  EXPECT_THROW(trapezoid({0.0, 1.0}, {1.0}), std::domain_error);
  EXPECT_THROW(trapezoid({0.0}, {1.0}), std::domain_error);
}

}  // namespace
}  // namespace zenopm
