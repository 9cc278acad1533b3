#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qte/bayes.hpp"
#include "qte/divergence.hpp"
#include "qte/measurement.hpp"

namespace qte {

enum class Loss { HilbertSchmidt, RelativeEntropy };

GeneratorFunction generator_for(Loss loss);
std::string_view loss_name(Loss loss);
/// Accepts "hs" and "rel".
std::optional<Loss> parse_loss(std::string_view name);

/// Moments of the outcome measure of a qubit POVM written as
/// weight_k (I + x_k . sigma).
struct PovmMoments {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();         // E[x]
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();       // E[x x^T]
  double norm_sq = 0.0;                                   // E[|x|^2]
  Eigen::Vector3d norm_sq_x = Eigen::Vector3d::Zero();    // E[|x|^2 x]
  bool rank_one = false;

  static PovmMoments of(const Povm& p);
  /// Moments shared by every rank-one spherical 2-design.
  static PovmMoments design();
};

struct QubitRiskParams {
  BlochVector theta;
  Loss loss = Loss::HilbertSchmidt;
  PovmMoments moments;
};

/// Risk of the uniform-prior Bayes estimator (I + x.sigma/3)/2 at rho_theta.
///   HS:  (|t|^2 + E|x|^2/9 + E[|x|^2 x].t/9 - 2/3 t^T E[xx^T] t) / 2
///   rel: -h((1+|t|)/2) + ln(9/2)/2 - (ln 2 / 2) t^T E[xx^T] t    (rank-one POVMs)
/// with h the binary entropy in nats.
double qubit_risk_closed_form(const QubitRiskParams& params);

/// 1/2 ln(9/2) - 1/6 ln 2.
double entropy_minimax_value();
inline constexpr double kHsMinimaxValue = 4.0 / 9.0;

struct LfpOptions {
  double rel_tol = 1e-8;
  int max_iterations = 10000;
  double initial_step = 50.0;
  /// Starting weights of the free component over the support grid; uniform
  /// when empty.
  std::vector<double> initial_weights;
};

struct LfpStage {
  int n = 0;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // average Bayes risk after each accepted step
};

struct LfpSearchState {
  int n = 0;
  DiscretePrior prior;
  double value = 0.0;
  std::vector<double> trace;  // trace of the final stage
  std::vector<LfpStage> stages;
};

/// Maximizes r(pi, bayes(pi)) over priors anchor/n + (1 - 1/n) pi with pi
/// supported on `support`, for each n of the schedule in turn (warm-started).
/// Each step reweights every support point multiplicatively by
/// exp(step * pointwise risk) and backtracks until the value does not decrease.
LfpSearchState lfp_search(const Povm& p, const GeneratorFunction& g, std::span<const int> n_schedule,
                          std::span<const DensityMatrix> support, const DiscretePrior& anchor,
                          const LfpOptions& options = {});

struct FixedPointWitness {
  double value = 0.0;          // r(pi, bayes(pi))
  double risk_spread = 0.0;    // max - min pointwise risk over the support of pi
  double value_after_step = 0.0;
};

/// A prior is stationary for the multiplicative ascent exactly when its own
/// Bayes estimator has constant risk across the prior's support.
FixedPointWitness lfp_fixed_point(const Povm& p, const GeneratorFunction& g, const DiscretePrior& prior,
                                  double step = 50.0);

struct NamedPovm {
  std::string name;
  Povm povm;
};

struct NamedPrior {
  std::string name;
  DiscretePrior prior;
};

/// Default candidate priors for the Bayes family used by minimax_scan.
std::vector<NamedPrior> default_candidate_priors();
/// Ball grid plus the octahedron vertices.
std::vector<BlochVector> default_probe_grid(std::size_t sphere_points = 1000);

struct WorstCaseRefined {
  double value = 0.0;
  BlochVector argmax;
};

/// Grid maximum of the pointwise risk followed by a projected pattern search
/// inside the Bloch ball from the best `starts` grid points.
WorstCaseRefined refined_worst_case(const Estimator& est, const Povm& p, const GeneratorFunction& g,
                                    std::span<const BlochVector> probe, std::size_t starts = 6);

struct ScanEntry {
  std::string name;
  bool is_design = false;
  double worst_case = 0.0;  // min over candidate priors of the refined worst-case risk
  BlochVector argmax;
  std::string best_prior;
  std::vector<double> per_prior;
};

struct MinimaxScanReport {
  std::vector<ScanEntry> entries;  // ascending worst_case, stable
  std::vector<std::string> prior_names;
  double minimum = 0.0;
  bool designs_attain_minimum = false;
};

MinimaxScanReport minimax_scan(const GeneratorFunction& g, std::span<const NamedPovm> candidates,
                               std::span<const BlochVector> probe, std::span<const NamedPrior> priors);

struct ConstancyReport {
  bool applicable = false;
  std::string note;
  double max = 0.0;
  double min = 0.0;
  double spread = 0.0;
};

/// Pointwise risk spread of the uniform-prior Bayes estimator over pure
/// states, for POVMs covariant under the tetrahedral unitary 2-design.
ConstancyReport covariant_risk_constancy(const Povm& p, const GeneratorFunction& g,
                                         std::span<const DensityMatrix> orbit);

}  // namespace qte
