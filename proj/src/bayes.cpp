#include "qte/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qte {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dims(int a, int b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension " << a << " does not match " << b;
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

// Likelihood table lik[i][x] = p(x | theta_i).
std::vector<std::vector<double>> likelihoods(const DiscretePrior& prior, const Povm& p) {
  std::vector<std::vector<double>> out;
  out.reserve(prior.size());
  for (const auto& pt : prior.points()) out.push_back(born_probabilities(p, pt.state));
  return out;
}

DensityMatrix hermitian_state(const Matrix& m) {
  Matrix h = 0.5 * (m + m.adjoint());
  h /= h.trace().real();
  return DensityMatrix(h);
}

}  // namespace

DiscretePrior::DiscretePrior(std::vector<PriorPoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw Error(ErrorCode::InvalidArgument, "prior has no support points");
  double total = 0.0;
  for (const auto& pt : points_) {
    if (!(pt.weight > 0.0)) throw Error(ErrorCode::InvalidArgument, "prior weights must be positive");
    require_dims(pt.state.dim(), points_.front().state.dim(), "prior support");
    total += pt.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "prior weights sum to " << total << ", expected 1";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
}

DiscretePrior DiscretePrior::normalized(std::vector<PriorPoint> points) {
  double total = 0.0;
  for (const auto& pt : points) total += pt.weight;
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "prior weights must be positive");
  for (auto& pt : points) pt.weight /= total;
  return DiscretePrior(std::move(points));
}

DiscretePrior DiscretePrior::from_bloch(std::span<const BlochVector> points, std::span<const double> weights) {
  if (!weights.empty() && weights.size() != points.size())
    throw Error(ErrorCode::InvalidArgument, "prior weights and points differ in length");
  std::vector<PriorPoint> pts;
  pts.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    pts.push_back({weights.empty() ? 1.0 : weights[i], bloch_to_density(points[i]), points[i]});
  return normalized(std::move(pts));
}

std::vector<double> DiscretePrior::weights() const {
  std::vector<double> w;
  w.reserve(points_.size());
  for (const auto& pt : points_) w.push_back(pt.weight);
  return w;
}

Matrix DiscretePrior::mean() const {
  Matrix m = Matrix::Zero(dim(), dim());
  for (const auto& pt : points_) m += pt.weight * pt.state.matrix();
  return m;
}

Estimator::Estimator(std::vector<DensityMatrix> outcome_states) : outcome_states_(std::move(outcome_states)) {
  if (outcome_states_.empty()) throw Error(ErrorCode::InvalidArgument, "estimator has no outcomes");
  for (const auto& s : outcome_states_) require_dims(s.dim(), outcome_states_.front().dim(), "estimator");
}

std::vector<double> marginal_probabilities(const DiscretePrior& prior, const Povm& p) {
  require_dims(prior.dim(), p.dim, "prior vs POVM");
  std::vector<double> marg(p.size(), 0.0);
  for (const auto& pt : prior.points()) {
    auto probs = born_probabilities(p, pt.state);
    for (std::size_t x = 0; x < probs.size(); ++x) marg[x] += pt.weight * probs[x];
  }
  return marg;
}

DiscretePrior posterior(const DiscretePrior& prior, const Povm& p, std::size_t outcome) {
  require_dims(prior.dim(), p.dim, "prior vs POVM");
  if (outcome >= p.size()) throw Error(ErrorCode::InvalidArgument, "outcome index out of range");
  auto lik = likelihoods(prior, p);
  double marginal = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i) marginal += prior.points()[i].weight * lik[i][outcome];
  if (!(marginal > kNullProbability)) {
    std::ostringstream os;
    os << "outcome " << outcome << " lies in the null set of the prior (marginal " << marginal << ")";
    throw Error(ErrorCode::NullSet, os.str());
  }
  std::vector<PriorPoint> pts;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    double w = prior.points()[i].weight * lik[i][outcome] / marginal;
    if (w > 0.0) pts.push_back({w, prior.points()[i].state, prior.points()[i].bloch});
  }
  return DiscretePrior::normalized(std::move(pts));
}

Estimator bayes_estimator(const DiscretePrior& prior, const Povm& p) {
  require_dims(prior.dim(), p.dim, "prior vs POVM");
  auto lik = likelihoods(prior, p);
  const int d = p.dim;
  std::vector<DensityMatrix> states;
  states.reserve(p.size());
  const Matrix prior_mean = prior.mean();
  for (std::size_t x = 0; x < p.size(); ++x) {
    Matrix num = Matrix::Zero(d, d);
    double marginal = 0.0;
    for (std::size_t i = 0; i < prior.size(); ++i) {
      double w = prior.points()[i].weight * lik[i][x];
      marginal += w;
      num += w * prior.points()[i].state.matrix();
    }
    states.push_back(marginal > kNullProbability ? hermitian_state(num / marginal)
                                                 : hermitian_state(prior_mean));
  }
  return Estimator(std::move(states));
}

double risk(const DensityMatrix& rho, const Estimator& est, const Povm& p, const GeneratorFunction& g) {
  require_dims(rho.dim(), est.dim(), "state vs estimator");
  if (est.size() != p.size()) throw Error(ErrorCode::InvalidArgument, "estimator and POVM differ in outcome count");
  auto probs = born_probabilities(p, rho);
  double total = 0.0;
  for (std::size_t x = 0; x < probs.size(); ++x) {
    if (probs[x] <= kNullProbability) continue;
    auto d = bregman(g, rho, est[x]);
    if (!d.finite) return kInf;
    total += probs[x] * d.value;
  }
  return total;
}

double average_risk(const DiscretePrior& prior, const Estimator& est, const Povm& p, const GeneratorFunction& g) {
  double total = 0.0;
  for (const auto& pt : prior.points()) {
    double r = risk(pt.state, est, p, g);
    if (std::isinf(r)) return kInf;
    total += pt.weight * r;
  }
  return total;
}

RiskEvaluator::RiskEvaluator(const Estimator& est, const Povm& p, const GeneratorFunction& g)
    : povm_(&p), g_(&g) {
  require_dims(est.dim(), p.dim, "estimator vs POVM");
  if (est.size() != p.size()) throw Error(ErrorCode::InvalidArgument, "estimator and POVM differ in outcome count");
  terms_.reserve(est.size());
  for (const auto& sigma : est.outcome_states()) {
    auto spec = spectral_decompose(sigma.hermitian());
    OutcomeTerms t;
    Eigen::VectorXd fp = Eigen::VectorXd::Zero(spec.eigenvalues.size());
    for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) {
      double lambda = std::clamp(spec.eigenvalues[k], 0.0, 1.0);
      t.trace_f_sigma += g.f(lambda);
      if (g.zero_singular && lambda <= kSupportThreshold) {
        t.kernel.push_back(spec.eigenvectors.col(k));
        continue;
      }
      fp[k] = g.f_prime(lambda);
      t.trace_fprime_sigma_sigma += fp[k] * lambda;
    }
    t.fprime_sigma = spec.eigenvectors * fp.cast<Complex>().asDiagonal() * spec.eigenvectors.adjoint();
    terms_.push_back(std::move(t));
  }
}

double RiskEvaluator::operator()(const DensityMatrix& rho) const {
  return with_trace_f(rho, trace_function(*g_, rho.hermitian()));
}

double RiskEvaluator::with_trace_f(const DensityMatrix& rho, double trace_f_rho) const {
  auto probs = born_probabilities(*povm_, rho);
  double total = 0.0;
  for (std::size_t x = 0; x < probs.size(); ++x) {
    if (probs[x] <= kNullProbability) continue;
    const auto& t = terms_[x];
    for (const auto& v : t.kernel)
      if ((v.adjoint() * rho.matrix() * v)(0, 0).real() > kSupportThreshold) return kInf;
    double linear = (t.fprime_sigma * rho.matrix()).trace().real() - t.trace_fprime_sigma_sigma;
    double d = trace_f_rho - t.trace_f_sigma - linear;
    if (d < 0.0 && d >= -tol::kEigenClip) d = 0.0;
    total += probs[x] * d;
  }
  return total;
}

WorstCase worst_case_risk(const Estimator& est, const Povm& p, const GeneratorFunction& g,
                          std::span<const DensityMatrix> probe) {
  if (probe.empty()) throw Error(ErrorCode::InvalidArgument, "probe grid is empty");
  RiskEvaluator eval(est, p, g);
  WorstCase wc{-kInf, 0};
  for (std::size_t i = 0; i < probe.size(); ++i) {
    double r = eval(probe[i]);
    if (r > wc.value) wc = {r, i};
  }
  return wc;
}

MonteCarloEstimate monte_carlo_risk(const DensityMatrix& rho, const Estimator& est, const Povm& p,
                                    const GeneratorFunction& g, std::uint64_t shots, std::uint64_t seed) {
  auto counts = sample_outcomes(p, rho, shots, seed);
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& c : counts) {
    if (c.count == 0) continue;
    auto d = bregman(g, rho, est[c.index]);
    if (!d.finite) return {kInf, kInf, shots};
    double n = static_cast<double>(c.count);
    sum += n * d.value;
    sum_sq += n * d.value * d.value;
  }
  const double n = static_cast<double>(shots);
  double mean = sum / n;
  double var = std::max(0.0, sum_sq / n - mean * mean);
  return {mean, std::sqrt(var / n), shots};
}

std::vector<BlochVector> fibonacci_sphere(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sphere grid needs at least one point");
  std::vector<BlochVector> out;
  out.reserve(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden * static_cast<double>(i);
    out.push_back({r * std::cos(phi), r * std::sin(phi), z});
  }
  return out;
}

std::vector<BlochVector> ball_grid(std::size_t points_per_shell, std::span<const double> radii) {
  std::vector<BlochVector> out;
  auto sphere = fibonacci_sphere(points_per_shell);
  for (double r : radii) {
    if (r < 0.0 || r > 1.0) throw Error(ErrorCode::InvalidArgument, "shell radius outside [0, 1]");
    if (r == 0.0) {
      out.push_back({0, 0, 0});
      continue;
    }
    for (const auto& v : sphere) out.push_back({r * v.x, r * v.y, r * v.z});
  }
  return out;
}

std::vector<DensityMatrix> states_from_bloch(std::span<const BlochVector> points) {
  std::vector<DensityMatrix> out;
  out.reserve(points.size());
  for (const auto& v : points) out.push_back(bloch_to_density(v));
  return out;
}

DiscretePrior octahedron_prior() {
  const std::vector<BlochVector> pts{{0, 0, 1}, {0, 0, -1}, {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
  return DiscretePrior::from_bloch(pts);
}

DiscretePrior tetrahedron_prior() {
  const double s = 1.0 / std::sqrt(3.0);
  const std::vector<BlochVector> pts{{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  return DiscretePrior::from_bloch(pts);
}

OptimalityGap bayes_optimality_gap(const DiscretePrior& prior, const Povm& p, const GeneratorFunction& g,
                                   const Estimator& rival) {
  Estimator bayes = bayes_estimator(prior, p);
  OptimalityGap gap;
  gap.risk_difference = average_risk(prior, rival, p, g) - average_risk(prior, bayes, p, g);
  auto marg = marginal_probabilities(prior, p);
  for (std::size_t x = 0; x < marg.size(); ++x) {
    if (marg[x] <= kNullProbability) continue;
    auto d = bregman(g, bayes[x], rival[x]);
    if (!d.finite) {
      gap.divergence_sum = kInf;
      break;
    }
    gap.divergence_sum += marg[x] * d.value;
  }
  return gap;
}

DiscontinuityReport discontinuity_demo(std::span<const int> ns) {
  if (ns.empty()) throw Error(ErrorCode::InvalidArgument, "discontinuity demo needs at least one n");
  const Povm pz = z_povm();
  const BlochVector zero{0, 0, 1}, one{0, 0, -1}, plus{1, 0, 0};
  DiscontinuityReport report;
  for (int n : ns) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "sequence index n must be at least 2");
    const double tail = 1.0 / n;
    const std::vector<double> w{1.0 - tail, tail};
    const std::vector<BlochVector> pi_pts{zero, one}, mu_pts{zero, plus};
    Estimator pi_est = bayes_estimator(DiscretePrior::from_bloch(pi_pts, w), pz);
    Estimator mu_est = bayes_estimator(DiscretePrior::from_bloch(mu_pts, w), pz);
    report.rows.push_back({n, density_to_bloch(pi_est[0]), density_to_bloch(pi_est[1]),
                           density_to_bloch(mu_est[0]), density_to_bloch(mu_est[1])});
  }
  report.pi_limit = report.rows.back().pi_outcome1;
  report.mu_limit = report.rows.back().mu_outcome1;
  Matrix delta = bloch_to_density(report.pi_limit).matrix() - bloch_to_density(report.mu_limit).matrix();
  report.limit_distance_sq = hs_norm_sq(delta);
  report.limits_differ = report.limit_distance_sq >= 0.5;
  return report;
}

}  // namespace qte
