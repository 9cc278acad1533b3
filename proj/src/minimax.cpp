#include "qte/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qte {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Row-major vectorization: v[a*d + b] = m(a, b).
Eigen::RowVectorXcd vec_row(const Matrix& m) {
  const auto d = m.rows();
  Eigen::RowVectorXcd v(d * d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) v[a * d + b] = m(a, b);
  return v;
}

// Column c with Rho_row . c = Tr(F rho).
Eigen::VectorXcd trace_column(const Matrix& f) {
  const auto d = f.rows();
  Eigen::VectorXcd c(d * d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) c[a * d + b] = f(b, a);
  return c;
}

Matrix unvec(const Eigen::VectorXcd& v, Eigen::Index d) {
  Matrix m(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) m(a, b) = v[a * d + b];
  return m;
}

// Average Bayes risk r(w, bayes(w)) over a fixed set of support states,
// batched as dense products so the ascent can afford thousands of steps.
class BayesRiskModel {
 public:
  BayesRiskModel(const Povm& p, const GeneratorFunction& g, std::vector<DensityMatrix> states)
      : g_(g), states_(std::move(states)), d_(p.dim) {
    const auto n = static_cast<Eigen::Index>(states_.size());
    const auto k = static_cast<Eigen::Index>(p.size());
    rho_.resize(n, d_ * d_);
    trace_f_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (states_[i].dim() != d_) throw Error(ErrorCode::DimensionMismatch, "support state dimension mismatch");
      rho_.row(i) = vec_row(states_[i].matrix());
      trace_f_[i] = trace_function(g_, states_[i].hermitian());
    }
    Eigen::MatrixXcd effects(d_ * d_, k);
    for (Eigen::Index x = 0; x < k; ++x) effects.col(x) = trace_column(p.effects[x].op());
    lik_ = (rho_ * effects).real().cwiseMax(0.0);
  }

  Eigen::Index size() const { return static_cast<Eigen::Index>(states_.size()); }
  const Eigen::MatrixXd& likelihood() const { return lik_; }

  // Returns the average risk and fills the pointwise risk of every support
  // state under the Bayes estimator of w.
  double evaluate(const Eigen::VectorXd& w, Eigen::VectorXd& pointwise) const {
    const auto n = size();
    const auto k = lik_.cols();
    Eigen::MatrixXd wl = lik_.array().colwise() * w.array();
    Eigen::VectorXd marginal = wl.colwise().sum().transpose();
    Eigen::MatrixXcd numer = rho_.transpose() * wl.cast<Complex>();
    Matrix prior_mean = unvec(rho_.transpose() * w.cast<Complex>(), d_);

    Eigen::MatrixXcd fcols(d_ * d_, k);
    Eigen::VectorXd offset(k);  // -Tr f(sigma) + Tr f'(sigma) sigma
    std::vector<std::vector<Vector>> kernels(k);
    for (Eigen::Index x = 0; x < k; ++x) {
      Matrix sigma = marginal[x] > kNullProbability ? Matrix(unvec(numer.col(x), d_) / marginal[x]) : prior_mean;
      sigma = 0.5 * (sigma + sigma.adjoint());
      sigma /= sigma.trace().real();
      auto spec = spectral_decompose(HermitianMatrix(sigma, 1e-9));
      Eigen::VectorXd fp = Eigen::VectorXd::Zero(d_);
      double tf = 0.0, tfs = 0.0;
      for (Eigen::Index j = 0; j < d_; ++j) {
        double lambda = std::clamp(spec.eigenvalues[j], 0.0, 1.0);
        tf += g_.f(lambda);
        if (g_.zero_singular && lambda <= kSupportThreshold) {
          kernels[x].push_back(spec.eigenvectors.col(j));
          continue;
        }
        fp[j] = g_.f_prime(lambda);
        tfs += fp[j] * lambda;
      }
      Matrix f = spec.eigenvectors * fp.cast<Complex>().asDiagonal() * spec.eigenvectors.adjoint();
      fcols.col(x) = trace_column(f);
      offset[x] = -tf + tfs;
    }
    Eigen::MatrixXd cross = (rho_ * fcols).real();
    pointwise.resize(n);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0.0;
      for (Eigen::Index x = 0; x < k; ++x) {
        if (lik_(i, x) <= kNullProbability) continue;
        bool outside = false;
        for (const auto& v : kernels[x])
          if ((v.adjoint() * states_[i].matrix() * v)(0, 0).real() > kSupportThreshold) outside = true;
        if (outside) {
          r = kInf;
          break;
        }
        double dval = trace_f_[i] + offset[x] - cross(i, x);
        if (dval < 0.0 && dval >= -tol::kEigenClip) dval = 0.0;
        r += lik_(i, x) * dval;
      }
      pointwise[i] = r;
      if (w[i] > 0.0) total += w[i] * r;
    }
    return total;
  }

 private:
  GeneratorFunction g_;
  std::vector<DensityMatrix> states_;
  Eigen::Index d_;
  Eigen::MatrixXcd rho_;
  Eigen::VectorXd trace_f_;
  Eigen::MatrixXd lik_;
};

// One multiplicative step on `free` using the gradient `grad`.
Eigen::VectorXd reweight(const Eigen::VectorXd& free, const Eigen::VectorXd& grad, double step) {
  double top = -kInf;
  for (Eigen::Index j = 0; j < grad.size(); ++j)
    if (std::isfinite(grad[j])) top = std::max(top, grad[j]);
  Eigen::VectorXd out(free.size());
  for (Eigen::Index j = 0; j < free.size(); ++j) {
    double gj = std::isfinite(grad[j]) ? grad[j] : top;
    out[j] = free[j] * std::exp(step * (gj - top));
  }
  double s = out.sum();
  out /= s;
  // Keep every weight strictly positive so the prior stays a valid DiscretePrior.
  out = out.cwiseMax(1e-300);
  return out / out.sum();
}

double binary_entropy(double q) { return -xlogx(q) - xlogx(1.0 - q); }

}  // namespace

GeneratorFunction generator_for(Loss loss) {
  return loss == Loss::HilbertSchmidt ? hs_generator() : entropy_generator();
}

std::string_view loss_name(Loss loss) { return loss == Loss::HilbertSchmidt ? "hs" : "rel"; }

std::optional<Loss> parse_loss(std::string_view name) {
  if (name == "hs") return Loss::HilbertSchmidt;
  if (name == "rel") return Loss::RelativeEntropy;
  return std::nullopt;
}

PovmMoments PovmMoments::of(const Povm& p) {
  auto xs = effect_bloch_vectors(p);
  PovmMoments m;
  m.rank_one = true;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double w = p.effects[k].weight;
    const double nsq = xs[k].squaredNorm();
    m.mean += w * xs[k];
    m.second += w * xs[k] * xs[k].transpose();
    m.norm_sq += w * nsq;
    m.norm_sq_x += w * nsq * xs[k];
    if (std::abs(nsq - 1.0) > 1e-9) m.rank_one = false;
  }
  return m;
}

PovmMoments PovmMoments::design() {
  PovmMoments m;
  m.second = Eigen::Matrix3d::Identity() / 3.0;
  m.norm_sq = 1.0;
  m.rank_one = true;
  return m;
}

double qubit_risk_closed_form(const QubitRiskParams& params) {
  const Eigen::Vector3d t = params.theta.vec();
  const double r = t.norm();
  if (r > 1.0 + tol::kBlochNorm) {
    std::ostringstream os;
    os << "Bloch vector has norm " << r << " > 1";
    throw Error(ErrorCode::InvalidState, os.str());
  }
  const auto& m = params.moments;
  const double quad = t.dot(m.second * t);
  if (params.loss == Loss::HilbertSchmidt)
    return 0.5 * (r * r + m.norm_sq / 9.0 + m.norm_sq_x.dot(t) / 9.0 - 2.0 / 3.0 * quad);
  if (!m.rank_one)
    throw Error(ErrorCode::InvalidArgument, "relative-entropy closed form needs a rank-one POVM");
  const double q = std::min(1.0, (1.0 + r) / 2.0);
  return -binary_entropy(q) + 0.5 * std::log(4.5) - 0.5 * std::log(2.0) * quad;
}

double entropy_minimax_value() { return 0.5 * std::log(4.5) - std::log(2.0) / 6.0; }

LfpSearchState lfp_search(const Povm& p, const GeneratorFunction& g, std::span<const int> n_schedule,
                          std::span<const DensityMatrix> support, const DiscretePrior& anchor,
                          const LfpOptions& options) {
  if (support.empty()) throw Error(ErrorCode::InvalidArgument, "LFP support grid is empty");
  if (n_schedule.empty()) throw Error(ErrorCode::InvalidArgument, "LFP n-schedule is empty");
  if (anchor.dim() != p.dim) throw Error(ErrorCode::DimensionMismatch, "anchor and POVM differ in dimension");
  auto marg = marginal_probabilities(anchor, p);
  for (std::size_t x = 0; x < marg.size(); ++x)
    if (!(marg[x] > kNullProbability)) {
      std::ostringstream os;
      os << "anchor measure gives zero probability to outcome " << x;
      throw Error(ErrorCode::InvalidArgument, os.str());
    }

  const auto na = static_cast<Eigen::Index>(anchor.size());
  const auto ng = static_cast<Eigen::Index>(support.size());
  std::vector<DensityMatrix> states;
  for (const auto& pt : anchor.points()) states.push_back(pt.state);
  states.insert(states.end(), support.begin(), support.end());
  BayesRiskModel model(p, g, std::move(states));

  Eigen::VectorXd anchor_w(na);
  for (Eigen::Index j = 0; j < na; ++j) anchor_w[j] = anchor.points()[j].weight;
  Eigen::VectorXd free = Eigen::VectorXd::Constant(ng, 1.0 / static_cast<double>(ng));
  if (!options.initial_weights.empty()) {
    if (static_cast<Eigen::Index>(options.initial_weights.size()) != ng)
      throw Error(ErrorCode::InvalidArgument, "initial weights do not match the support grid");
    for (Eigen::Index j = 0; j < ng; ++j) free[j] = options.initial_weights[j];
    if (!(free.minCoeff() > 0.0)) throw Error(ErrorCode::InvalidArgument, "initial weights must be positive");
    free /= free.sum();
  }

  auto combine = [&](int n, const Eigen::VectorXd& f) {
    Eigen::VectorXd w(na + ng);
    w.head(na) = anchor_w / n;
    w.tail(ng) = (1.0 - 1.0 / n) * f;
    return w;
  };

  std::vector<LfpStage> stages;
  Eigen::VectorXd pointwise;
  for (int n : n_schedule) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "regularization index n must be at least 2");
    LfpStage stage;
    stage.n = n;
    double value = model.evaluate(combine(n, free), pointwise);
    stage.trace.push_back(value);
    double step = options.initial_step;
    for (int it = 0; it < options.max_iterations; ++it) {
      Eigen::VectorXd grad = pointwise.tail(ng);
      bool accepted = false;
      Eigen::VectorXd trial, trial_pointwise;
      double trial_value = value;
      for (int bt = 0; bt < 60; ++bt) {
        trial = reweight(free, grad, step);
        trial_value = model.evaluate(combine(n, trial), trial_pointwise);
        if (trial_value >= value) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      ++stage.iterations;
      if (!accepted) {
        stage.converged = true;
        break;
      }
      double rel = (trial_value - value) / std::max(std::abs(value), 1e-300);
      free = std::move(trial);
      pointwise = std::move(trial_pointwise);
      value = trial_value;
      stage.trace.push_back(value);
      step = std::min(step * 2.0, 1e8);
      if (rel < options.rel_tol) {
        stage.converged = true;
        break;
      }
    }
    for (std::size_t t = 1; t < stage.trace.size(); ++t)
      if (stage.trace[t] < stage.trace[t - 1] - 1e-12 * std::abs(stage.trace[t - 1]))
        throw Error(ErrorCode::Internal, "least-favourable-prior trace is not monotone");
    stage.value = value;
    stages.push_back(std::move(stage));
  }

  const int n = stages.back().n;
  Eigen::VectorXd w = combine(n, free);
  std::vector<PriorPoint> pts;
  for (Eigen::Index j = 0; j < na; ++j) pts.push_back({w[j], anchor.points()[j].state, anchor.points()[j].bloch});
  for (Eigen::Index j = 0; j < ng; ++j) {
    std::optional<BlochVector> b;
    if (p.dim == 2) b = density_to_bloch(support[j]);
    pts.push_back({w[na + j], support[j], b});
  }
  double value = stages.back().value;
  std::vector<double> trace = stages.back().trace;
  return {n, DiscretePrior::normalized(std::move(pts)), value, std::move(trace), std::move(stages)};
}

FixedPointWitness lfp_fixed_point(const Povm& p, const GeneratorFunction& g, const DiscretePrior& prior,
                                  double step) {
  std::vector<DensityMatrix> states;
  Eigen::VectorXd w(static_cast<Eigen::Index>(prior.size()));
  for (std::size_t j = 0; j < prior.size(); ++j) {
    states.push_back(prior.points()[j].state);
    w[static_cast<Eigen::Index>(j)] = prior.points()[j].weight;
  }
  BayesRiskModel model(p, g, std::move(states));
  FixedPointWitness out;
  Eigen::VectorXd pointwise;
  out.value = model.evaluate(w, pointwise);
  out.risk_spread = pointwise.maxCoeff() - pointwise.minCoeff();
  Eigen::VectorXd moved = reweight(w, pointwise, step);
  out.value_after_step = model.evaluate(moved, pointwise);
  return out;
}

std::vector<NamedPrior> default_candidate_priors() {
  std::vector<NamedPrior> out;
  out.push_back({"uniform-sphere", octahedron_prior()});
  out.push_back({"tetrahedron", tetrahedron_prior()});
  auto fib = fibonacci_sphere(64);
  out.push_back({"fibonacci-64", DiscretePrior::from_bloch(fib)});
  const std::vector<BlochVector> half{{0, 0, .5}, {0, 0, -.5}, {.5, 0, 0}, {-.5, 0, 0}, {0, .5, 0}, {0, -.5, 0}};
  out.push_back({"shell-0.5", DiscretePrior::from_bloch(half)});
  const std::vector<BlochVector> centre{{0, 0, 0}};
  out.push_back({"maximally-mixed", DiscretePrior::from_bloch(centre)});
  return out;
}

std::vector<BlochVector> default_probe_grid(std::size_t sphere_points) {
  const std::vector<double> radii{0.0, 0.25, 0.5, 0.75, 1.0};
  auto grid = ball_grid(sphere_points, radii);
  for (const auto& pt : octahedron_prior().points()) grid.push_back(*pt.bloch);
  return grid;
}

WorstCaseRefined refined_worst_case(const Estimator& est, const Povm& p, const GeneratorFunction& g,
                                    std::span<const BlochVector> probe, std::size_t starts) {
  if (probe.empty()) throw Error(ErrorCode::InvalidArgument, "probe grid is empty");
  RiskEvaluator eval(est, p, g);
  auto at = [&](const Eigen::Vector3d& v) { return eval(bloch_to_density(BlochVector::from(v))); };
  std::vector<double> values(probe.size());
  for (std::size_t i = 0; i < probe.size(); ++i) values[i] = eval(bloch_to_density(probe[i]));
  std::vector<std::size_t> order(probe.size());
  std::iota(order.begin(), order.end(), 0);
  starts = std::min(starts, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(starts), order.end(),
                    [&](std::size_t a, std::size_t b) { return values[a] > values[b] || (values[a] == values[b] && a < b); });

  WorstCaseRefined best{values[order[0]], probe[order[0]]};
  if (!std::isfinite(best.value)) return best;
  for (std::size_t s = 0; s < starts; ++s) {
    Eigen::Vector3d x = probe[order[s]].vec();
    double fx = values[order[s]];
    for (double h = 0.05; h > 1e-8;) {
      bool improved = false;
      for (int axis = 0; axis < 3 && !improved; ++axis)
        for (double sign : {1.0, -1.0}) {
          Eigen::Vector3d y = x;
          y[axis] += sign * h;
          if (y.norm() > 1.0) y.normalize();
          double fy = at(y);
          if (fy > fx) {
            x = y;
            fx = fy;
            improved = true;
            break;
          }
        }
      if (!improved) h *= 0.5;
      if (!std::isfinite(fx)) break;
    }
    if (fx > best.value) best = {fx, BlochVector::from(x)};
  }
  return best;
}

MinimaxScanReport minimax_scan(const GeneratorFunction& g, std::span<const NamedPovm> candidates,
                               std::span<const BlochVector> probe, std::span<const NamedPrior> priors) {
  if (priors.empty()) throw Error(ErrorCode::InvalidArgument, "minimax scan needs candidate priors");
  MinimaxScanReport report;
  for (const auto& pr : priors) report.prior_names.push_back(pr.name);
  for (const auto& cand : candidates) {
    if (cand.povm.dim != 2) throw Error(ErrorCode::DimensionMismatch, "minimax scan handles qubit POVMs only");
    require_valid(cand.povm);
    ScanEntry entry;
    entry.name = cand.name;
    entry.is_design = spherical_2design_check(cand.povm).passed;
    entry.worst_case = kInf;
    for (const auto& pr : priors) {
      Estimator est = bayes_estimator(pr.prior, cand.povm);
      auto wc = refined_worst_case(est, cand.povm, g, probe);
      entry.per_prior.push_back(wc.value);
      if (wc.value < entry.worst_case) {
        entry.worst_case = wc.value;
        entry.argmax = wc.argmax;
        entry.best_prior = pr.name;
      }
    }
    report.entries.push_back(std::move(entry));
  }
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const ScanEntry& a, const ScanEntry& b) { return a.worst_case < b.worst_case; });
  report.minimum = report.entries.empty() ? kInf : report.entries.front().worst_case;
  report.designs_attain_minimum = std::all_of(report.entries.begin(), report.entries.end(), [&](const ScanEntry& e) {
    return !e.is_design || std::abs(e.worst_case - report.minimum) <= 1e-6;
  });
  return report;
}

ConstancyReport covariant_risk_constancy(const Povm& p, const GeneratorFunction& g,
                                         std::span<const DensityMatrix> orbit) {
  ConstancyReport r;
  if (p.dim != 2) {
    r.note = "constancy check needs a qubit POVM";
    return r;
  }
  if (orbit.empty()) {
    r.note = "orbit grid is empty";
    return r;
  }
  auto group = tetrahedral_unitaries();
  if (!unitary_2design_check(group).passed || !covariance_permutations(p, group)) {
    r.note = "POVM is not covariant under the tetrahedral unitary 2-design";
    return r;
  }
  for (const auto& s : orbit)
    if (std::abs(s.purity() - 1.0) > 1e-9) {
      r.note = "orbit contains a mixed state";
      return r;
    }
  r.applicable = true;
  Estimator est = bayes_estimator(octahedron_prior(), p);
  RiskEvaluator eval(est, p, g);
  r.max = -kInf;
  r.min = kInf;
  for (const auto& s : orbit) {
    double v = eval(s);
    r.max = std::max(r.max, v);
    r.min = std::min(r.min, v);
  }
  r.spread = r.max - r.min;
  return r;
}

}  // namespace qte
