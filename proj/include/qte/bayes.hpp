#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qte/core.hpp"
#include "qte/divergence.hpp"
#include "qte/measurement.hpp"

namespace qte {

struct PriorPoint {
  double weight = 0.0;
  DensityMatrix state;
  std::optional<BlochVector> bloch;
};

/// Finitely supported prior over states. Weights are positive and sum to one
/// within 1e-12; all states share one dimension.
class DiscretePrior {
 public:
  explicit DiscretePrior(std::vector<PriorPoint> points);

  /// Rescales the weights to sum to one before validating.
  static DiscretePrior normalized(std::vector<PriorPoint> points);
  /// Qubit prior on Bloch vectors; uniform when `weights` is empty.
  static DiscretePrior from_bloch(std::span<const BlochVector> points, std::span<const double> weights = {});

  int dim() const noexcept { return points_.front().state.dim(); }
  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<PriorPoint>& points() const noexcept { return points_; }
  std::vector<double> weights() const;
  Matrix mean() const;

 private:
  std::vector<PriorPoint> points_;
};

/// Total map from outcome index to state.
class Estimator {
 public:
  explicit Estimator(std::vector<DensityMatrix> outcome_states);

  int dim() const noexcept { return outcome_states_.front().dim(); }
  std::size_t size() const noexcept { return outcome_states_.size(); }
  const DensityMatrix& operator[](std::size_t k) const { return outcome_states_[k]; }
  const std::vector<DensityMatrix>& outcome_states() const noexcept { return outcome_states_; }

 private:
  std::vector<DensityMatrix> outcome_states_;
};

inline constexpr double kNullProbability = 1e-15;

/// Throws NullSet when the outcome has marginal probability <= 1e-15.
DiscretePrior posterior(const DiscretePrior& prior, const Povm& p, std::size_t outcome);

/// Posterior-mean estimator. Outcomes the prior never produces are filled
/// with the prior mean.
Estimator bayes_estimator(const DiscretePrior& prior, const Povm& p);

/// Marginal outcome distribution p_pi(x) = sum_theta pi(theta) p(x|theta).
std::vector<double> marginal_probabilities(const DiscretePrior& prior, const Povm& p);

/// sum_x p(x|rho) D_f(rho, est(x)), with 0 * inf := 0. Returns +inf when a
/// reachable outcome has infinite loss. Reference route: one full bregman()
/// evaluation per outcome.
double risk(const DensityMatrix& rho, const Estimator& est, const Povm& p, const GeneratorFunction& g);

double average_risk(const DiscretePrior& prior, const Estimator& est, const Povm& p,
                    const GeneratorFunction& g);

/// Precomputes the estimator side of D_f(rho, est(x)) so that pointwise risk
/// over large state grids costs one spectral decomposition per state.
class RiskEvaluator {
 public:
  RiskEvaluator(const Estimator& est, const Povm& p, const GeneratorFunction& g);

  double operator()(const DensityMatrix& rho) const;
  /// Same as operator() with Tr f(rho) supplied by the caller.
  double with_trace_f(const DensityMatrix& rho, double trace_f_rho) const;

 private:
  struct OutcomeTerms {
    double trace_f_sigma = 0.0;
    double trace_fprime_sigma_sigma = 0.0;
    Matrix fprime_sigma;
    std::vector<Vector> kernel;  // only populated for zero-singular generators
  };
  const Povm* povm_;
  const GeneratorFunction* g_;
  std::vector<OutcomeTerms> terms_;
};

struct WorstCase {
  double value = 0.0;
  std::size_t index = 0;
};

/// Maximum pointwise risk over the probe states; first index wins ties.
WorstCase worst_case_risk(const Estimator& est, const Povm& p, const GeneratorFunction& g,
                          std::span<const DensityMatrix> probe);

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::uint64_t shots = 0;
};

/// Shot-sampled risk: draws outcomes from rho and averages the realised loss.
MonteCarloEstimate monte_carlo_risk(const DensityMatrix& rho, const Estimator& est, const Povm& p,
                                    const GeneratorFunction& g, std::uint64_t shots, std::uint64_t seed);

/// Fibonacci lattice on the unit sphere.
std::vector<BlochVector> fibonacci_sphere(std::size_t n);
/// Fibonacci shells at each radius (a single point for radius 0).
std::vector<BlochVector> ball_grid(std::size_t points_per_shell, std::span<const double> radii);
std::vector<DensityMatrix> states_from_bloch(std::span<const BlochVector> points);

/// The six Pauli eigenstates with equal weight. Its first three moments match
/// the uniform measure on pure qubit states.
DiscretePrior octahedron_prior();
/// The four SIC states with equal weight; matches the uniform measure up to
/// second moments.
DiscretePrior tetrahedron_prior();

/// Left and right sides of
///   E_pi E_{X|theta}[D(rho_theta, est) - D(rho_theta, bayes)] = sum_x p_pi(x) D(bayes(x), est(x)).
struct OptimalityGap {
  double risk_difference = 0.0;
  double divergence_sum = 0.0;
};

OptimalityGap bayes_optimality_gap(const DiscretePrior& prior, const Povm& p, const GeneratorFunction& g,
                                   const Estimator& rival);

struct DiscontinuityRow {
  int n = 0;
  BlochVector pi_outcome0, pi_outcome1;  // prior (1-1/n) |0><0| + (1/n) |1><1|
  BlochVector mu_outcome0, mu_outcome1;  // prior (1-1/n) |0><0| + (1/n) |+><+|
};

struct DiscontinuityReport {
  std::vector<DiscontinuityRow> rows;
  BlochVector pi_limit, mu_limit;  // outcome-1 states along each sequence
  double limit_distance_sq = 0.0;  // Tr(pi_limit - mu_limit)^2
  bool limits_differ = false;
};

/// Two prior sequences converging to the point mass on |0><0| whose Bayes
/// estimators under a sigma_z measurement disagree at the null outcome.
DiscontinuityReport discontinuity_demo(std::span<const int> ns);

}  // namespace qte
