#include "qte/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace qte {

namespace {

Povm qubit_povm_from_bloch(std::span<const Eigen::Vector3d> dirs, std::span<const std::string> labels) {
  Povm p;
  p.dim = 2;
  const double w = 1.0 / static_cast<double>(dirs.size());
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    const auto& u = dirs[k];
    Matrix m = Matrix::Identity(2, 2) + u[0] * pauli_x() + u[1] * pauli_y() + u[2] * pauli_z();
    p.effects.push_back({w, HermitianMatrix(m), labels[k], BlochVector::from(u)});
  }
  require_valid(p);
  return p;
}

Matrix swap_operator(int d) {
  Matrix s = Matrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s(i * d + j, j * d + i) = 1.0;
  return s;
}

Matrix inverse_sqrt_psd(const Matrix& s) {
  auto spec = spectral_decompose(HermitianMatrix(Matrix(0.5 * (s + s.adjoint())), 1e-9));
  Eigen::VectorXd inv(spec.eigenvalues.size());
  for (Eigen::Index k = 0; k < inv.size(); ++k) {
    if (spec.eigenvalues[k] <= 1e-14)
      throw Error(ErrorCode::Internal, "singular frame operator while building random POVM");
    inv[k] = 1.0 / std::sqrt(spec.eigenvalues[k]);
  }
  return spec.eigenvectors * inv.cast<Complex>().asDiagonal() * spec.eigenvectors.adjoint();
}

// True when a and b agree up to a global phase.
bool equal_mod_phase(const Matrix& a, const Matrix& b, double tolerance) {
  Complex overlap = (b.adjoint() * a).trace();
  if (std::abs(overlap) < 1e-12) return false;
  Complex phase = overlap / std::abs(overlap);
  return (a - phase * b).cwiseAbs().maxCoeff() <= tolerance;
}

}  // namespace

PovmValidation validate_povm(const Povm& p) {
  PovmValidation r;
  if (p.dim <= 0 || p.effects.empty()) {
    r.dimensions_ok = false;
    r.failures.push_back("POVM has no effects or non-positive dimension");
    return r;
  }
  Matrix sum = Matrix::Zero(p.dim, p.dim);
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p.effects.size(); ++k) {
    const auto& e = p.effects[k];
    if (e.normalized_effect.dim() != p.dim) {
      r.dimensions_ok = false;
      std::ostringstream os;
      os << "effect " << k << " has dimension " << e.normalized_effect.dim() << ", expected " << p.dim;
      r.failures.push_back(os.str());
      continue;
    }
    if (!(e.weight > 0.0)) {
      std::ostringstream os;
      os << "effect " << k << " has non-positive weight " << e.weight;
      r.failures.push_back(os.str());
    }
    sum += e.op();
    r.weight_sum += e.weight;
    r.trace_residual = std::max(r.trace_residual, std::abs(e.normalized_effect.trace() - p.dim));
    auto spec = spectral_decompose(HermitianMatrix(e.op(), 1e-9));
    r.min_eigenvalue = std::min(r.min_eigenvalue, spec.eigenvalues.minCoeff());
  }
  if (!r.dimensions_ok) return r;
  r.completeness_residual = (sum - Matrix::Identity(p.dim, p.dim)).cwiseAbs().maxCoeff();
  auto fail = [&](const char* what, double value) {
    std::ostringstream os;
    os << what << " " << value;
    r.failures.push_back(os.str());
  };
  if (r.completeness_residual > 1e-9) fail("completeness residual", r.completeness_residual);
  if (r.min_eigenvalue < -1e-10) fail("negative effect eigenvalue", r.min_eigenvalue);
  if (std::abs(r.weight_sum - 1.0) > 1e-10) fail("weight sum", r.weight_sum);
  if (r.trace_residual > 1e-9) fail("normalized effect trace residual", r.trace_residual);
  r.passed = r.failures.empty();
  return r;
}

void require_valid(const Povm& p) {
  auto report = validate_povm(p);
  if (report.passed) return;
  std::ostringstream os;
  os << "invalid POVM:";
  for (const auto& f : report.failures) os << " " << f << ";";
  throw Error(ErrorCode::InvalidArgument, os.str());
}

Povm povm_from_operators(std::span<const Matrix> ops, std::vector<std::string> labels) {
  if (ops.empty()) throw Error(ErrorCode::InvalidArgument, "POVM needs at least one effect");
  Povm p;
  p.dim = static_cast<int>(ops.front().rows());
  for (std::size_t k = 0; k < ops.size(); ++k) {
    HermitianMatrix e(ops[k], 1e-9);
    if (e.dim() != p.dim) throw Error(ErrorCode::DimensionMismatch, "POVM effects differ in dimension");
    double w = e.trace() / p.dim;
    if (!(w > 0.0)) throw Error(ErrorCode::InvalidArgument, "POVM effect with non-positive trace");
    Effect eff{w, HermitianMatrix(Matrix(e.matrix() / w), 1e-9),
               k < labels.size() ? labels[k] : std::to_string(k), std::nullopt};
    if (p.dim == 2) {
      Eigen::Vector3d x = 0.5 * bloch_components(eff.normalized_effect.matrix());
      eff.bloch = BlochVector::from(x);
    }
    p.effects.push_back(std::move(eff));
  }
  return p;
}

std::vector<double> born_probabilities(const Povm& p, const DensityMatrix& rho) {
  if (rho.dim() != p.dim) {
    std::ostringstream os;
    os << "state dimension " << rho.dim() << " does not match POVM dimension " << p.dim;
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
  std::vector<double> probs(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto& e = p.effects[k];
    double v = e.weight * (e.normalized_effect.matrix() * rho.matrix()).trace().real();
    probs[k] = (v < 0.0 && v >= -1e-12) ? 0.0 : v;
  }
  return probs;
}

std::vector<OutcomeSample> sample_outcomes(const Povm& p, const DensityMatrix& rho,
                                           std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) throw Error(ErrorCode::InvalidArgument, "shots must be positive");
  auto probs = born_probabilities(p, rho);
  for (auto& q : probs) q = std::max(q, 0.0);
  std::mt19937_64 gen(seed);
  std::vector<OutcomeSample> out(probs.size());
  std::uint64_t remaining = shots;
  double mass = 0.0;
  for (double q : probs) mass += q;
  // Conditional binomial decomposition of the multinomial.
  for (std::size_t k = 0; k < probs.size(); ++k) {
    out[k].index = k;
    if (remaining == 0) continue;
    if (k + 1 == probs.size()) {
      out[k].count = remaining;
      break;
    }
    double pk = mass > 0.0 ? std::clamp(probs[k] / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::uint64_t> binom(remaining, pk);
    out[k].count = pk >= 1.0 ? remaining : binom(gen);
    remaining -= out[k].count;
    mass -= probs[k];
  }
  return out;
}

Povm pauli_design_povm() {
  const std::vector<Eigen::Vector3d> dirs{{0, 0, 1}, {0, 0, -1}, {1, 0, 0},
                                          {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
  const std::vector<std::string> labels{"+z", "-z", "+x", "-x", "+y", "-y"};
  return qubit_povm_from_bloch(dirs, labels);
}

Povm sic_povm() {
  const double s = 1.0 / std::sqrt(3.0);
  const std::vector<Eigen::Vector3d> dirs{{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  const std::vector<std::string> labels{"t0", "t1", "t2", "t3"};
  return qubit_povm_from_bloch(dirs, labels);
}

Povm z_povm() {
  const std::vector<Eigen::Vector3d> dirs{{0, 0, 1}, {0, 0, -1}};
  const std::vector<std::string> labels{"+z", "-z"};
  return qubit_povm_from_bloch(dirs, labels);
}

Povm random_povm(int dim, int outcomes, std::uint64_t seed, bool rank_one) {
  if (dim < 1 || outcomes < 1) throw Error(ErrorCode::InvalidArgument, "random_povm needs dim, outcomes >= 1");
  if (rank_one && outcomes < dim)
    throw Error(ErrorCode::InvalidArgument, "a rank-one POVM needs at least dim outcomes");
  std::vector<Matrix> raw;
  Matrix frame = Matrix::Zero(dim, dim);
  for (int k = 0; k < outcomes; ++k) {
    std::uint64_t s = seed * 1000003ULL + static_cast<std::uint64_t>(k);
    Matrix a = rank_one ? random_density(dim, Purity::Pure, s).matrix()
                        : random_density(dim, Purity::Mixed, s).matrix();
    frame += a;
    raw.push_back(std::move(a));
  }
  Matrix t = inverse_sqrt_psd(frame);
  std::vector<Matrix> ops;
  for (const auto& a : raw) {
    Matrix e = t * a * t;
    ops.push_back(0.5 * (e + e.adjoint()));
  }
  Povm p = povm_from_operators(ops);
  require_valid(p);
  return p;
}

std::vector<Eigen::Vector3d> effect_bloch_vectors(const Povm& p) {
  if (p.dim != 2) throw Error(ErrorCode::DimensionMismatch, "Bloch vectors of effects need a qubit POVM");
  std::vector<Eigen::Vector3d> out;
  out.reserve(p.size());
  for (const auto& e : p.effects) out.push_back(0.5 * bloch_components(e.normalized_effect.matrix()));
  return out;
}

SphericalDesignReport spherical_2design_check(const Povm& p, double tolerance) {
  SphericalDesignReport r;
  if (p.dim != 2) {
    r.note = "spherical design check needs a qubit POVM";
    return r;
  }
  auto xs = effect_bloch_vectors(p);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (std::abs(xs[k].norm() - 1.0) > 1e-9) {
      std::ostringstream os;
      os << "effect " << k << " is not rank one (|x| = " << xs[k].norm() << ")";
      r.note = os.str();
      return r;
    }
  }
  r.applicable = true;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    r.mean += p.effects[k].weight * xs[k];
    r.second_moment += p.effects[k].weight * xs[k] * xs[k].transpose();
  }
  r.max_mean_residual = r.mean.cwiseAbs().maxCoeff();
  r.max_moment_residual = (r.second_moment - Eigen::Matrix3d::Identity() / 3.0).cwiseAbs().maxCoeff();
  r.passed = r.max_mean_residual <= tolerance && r.max_moment_residual <= tolerance;
  return r;
}

Matrix haar_twirl_2(const Matrix& x) {
  const auto n = x.rows();
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (x.rows() != x.cols() || d * d != n || d < 1) {
    std::ostringstream os;
    os << "2-fold twirl needs a d^2 x d^2 operator, got " << x.rows() << "x" << x.cols();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
  Matrix id = Matrix::Identity(n, n);
  Matrix swap = swap_operator(d);
  Matrix p_sym = 0.5 * (id + swap);
  Matrix p_anti = 0.5 * (id - swap);
  const double d_sym = d * (d + 1) / 2.0;
  const double d_anti = d * (d - 1) / 2.0;
  Matrix out = ((x * p_sym).trace() / d_sym) * p_sym;
  if (d_anti > 0) out += ((x * p_anti).trace() / d_anti) * p_anti;
  return out;
}

DensityMatrix haar_twirl_2(const DensityMatrix& rho) { return DensityMatrix(haar_twirl_2(rho.matrix())); }

Matrix finite_twirl_2(std::span<const UnitaryMatrix> us, const Matrix& x) {
  if (us.empty()) throw Error(ErrorCode::InvalidArgument, "unitary set is empty");
  const int d = us.front().dim();
  if (x.rows() != d * d || x.cols() != d * d)
    throw Error(ErrorCode::DimensionMismatch, "twirl input must be d^2 x d^2");
  Matrix acc = Matrix::Zero(d * d, d * d);
  for (const auto& u : us) {
    if (u.dim() != d) throw Error(ErrorCode::DimensionMismatch, "unitaries differ in dimension");
    Matrix uu = Eigen::kroneckerProduct(u.matrix(), u.matrix());
    acc += uu * x * uu.adjoint();
  }
  return acc / static_cast<double>(us.size());
}

double twirl_residual(std::span<const UnitaryMatrix> us, const Matrix& x) {
  return (finite_twirl_2(us, x) - haar_twirl_2(x)).cwiseAbs().maxCoeff();
}

UnitaryDesignReport unitary_2design_check(std::span<const UnitaryMatrix> us, double tolerance) {
  if (us.empty()) throw Error(ErrorCode::InvalidArgument, "unitary set is empty");
  const int n = us.front().dim() * us.front().dim();
  UnitaryDesignReport r;
  std::size_t probe = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      Matrix e = Matrix::Zero(n, n);
      e(a, b) = 1.0;
      Matrix sym = e + e.adjoint();
      double res = twirl_residual(us, sym);
      if (res > r.residual) { r.residual = res; r.worst_probe = probe; }
      ++probe;
      if (a == b) continue;
      Matrix anti = Complex(0, 1) * (e - e.adjoint());
      res = twirl_residual(us, anti);
      if (res > r.residual) { r.residual = res; r.worst_probe = probe; }
      ++probe;
    }
  r.passed = r.residual <= tolerance;
  return r;
}

UnitaryMatrix orbit_unitary(double theta, double phi) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  const Complex e = std::polar(1.0, phi);
  Matrix u(2, 2);
  u << c, -s * std::conj(e), s * e, c;
  return UnitaryMatrix(u);
}

std::vector<UnitaryMatrix> pauli_orbit_unitaries() {
  // Exact entries; the trigonometric form leaves ~1e-17 off-diagonal dust.
  const double h = 1.0 / std::sqrt(2.0);
  const Complex i(0, 1);
  std::vector<Matrix> ms{
      (Matrix(2, 2) << 1, 0, 0, 1).finished(),
      (Matrix(2, 2) << 0, 1, 1, 0).finished(),
      (Matrix(2, 2) << h, -h, h, h).finished(),
      (Matrix(2, 2) << h, h, -h, h).finished(),
      (Matrix(2, 2) << h, h * i, h * i, h).finished(),
      (Matrix(2, 2) << h, -h * i, -h * i, h).finished(),
  };
  std::vector<UnitaryMatrix> out;
  for (const auto& m : ms) out.emplace_back(m);
  return out;
}

std::vector<UnitaryMatrix> group_closure(std::span<const UnitaryMatrix> generators, std::size_t max_size) {
  if (generators.empty()) throw Error(ErrorCode::InvalidArgument, "no generators");
  const int d = generators.front().dim();
  std::vector<Matrix> elems{Matrix::Identity(d, d)};
  for (std::size_t frontier = 0; frontier < elems.size(); ++frontier) {
    for (const auto& g : generators) {
      Matrix cand = g.matrix() * elems[frontier];
      bool seen = std::any_of(elems.begin(), elems.end(),
                              [&](const Matrix& m) { return equal_mod_phase(cand, m, 1e-9); });
      if (!seen) {
        if (elems.size() >= max_size) throw Error(ErrorCode::InvalidArgument, "group closure exceeds size limit");
        elems.push_back(cand);
      }
    }
  }
  std::vector<UnitaryMatrix> out;
  for (const auto& m : elems) out.emplace_back(m, 1e-9);
  return out;
}

std::vector<UnitaryMatrix> tetrahedral_unitaries() {
  const Complex i(0, 1);
  // pi rotation about z and 2pi/3 rotation about (1,1,1).
  Matrix rz = -i * pauli_z();
  Matrix r3 = 0.5 * (Matrix::Identity(2, 2) - i * (pauli_x() + pauli_y() + pauli_z()));
  std::vector<UnitaryMatrix> gens{UnitaryMatrix(rz), UnitaryMatrix(r3, 1e-12)};
  return group_closure(gens);
}

std::vector<UnitaryMatrix> clifford_unitaries() {
  const double h = 1.0 / std::sqrt(2.0);
  Matrix had = (Matrix(2, 2) << h, h, h, -h).finished();
  Matrix phase = (Matrix(2, 2) << 1, 0, 0, Complex(0, 1)).finished();
  std::vector<UnitaryMatrix> gens{UnitaryMatrix(had), UnitaryMatrix(phase)};
  return group_closure(gens);
}

Povm covariant_povm_from_seed(const HermitianMatrix& seed, std::span<const UnitaryMatrix> us) {
  if (us.empty()) throw Error(ErrorCode::InvalidArgument, "unitary set is empty");
  const int d = seed.dim();
  auto spec = spectral_decompose(seed);
  if (spec.eigenvalues.minCoeff() < -tol::kEigenClip)
    throw Error(ErrorCode::SeedNormalization, "seed operator is not positive semidefinite");
  std::vector<Matrix> ops;
  Matrix avg = Matrix::Zero(d, d);
  const double n = static_cast<double>(us.size());
  for (const auto& u : us) {
    if (u.dim() != d) throw Error(ErrorCode::DimensionMismatch, "seed and unitaries differ in dimension");
    Matrix e = conjugate(u.matrix(), seed.matrix()) / n;
    avg += e;
    ops.push_back(0.5 * (e + e.adjoint()));
  }
  double residual = (avg - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (residual > 1e-9) {
    std::ostringstream os;
    os << "orbit average of the seed differs from identity by " << residual;
    throw Error(ErrorCode::SeedNormalization, os.str());
  }
  Povm p = povm_from_operators(ops);
  require_valid(p);
  return p;
}

std::optional<std::vector<std::vector<std::size_t>>> covariance_permutations(
    const Povm& p, std::span<const UnitaryMatrix> us, double tolerance) {
  std::vector<std::vector<std::size_t>> perms;
  for (const auto& u : us) {
    if (u.dim() != p.dim) return std::nullopt;
    std::vector<std::size_t> perm(p.size());
    std::vector<bool> used(p.size(), false);
    for (std::size_t k = 0; k < p.size(); ++k) {
      Matrix moved = u.matrix().adjoint() * p.effects[k].op() * u.matrix();
      bool found = false;
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (used[j]) continue;
        if ((moved - p.effects[j].op()).cwiseAbs().maxCoeff() <= tolerance) {
          perm[k] = j;
          used[j] = true;
          found = true;
          break;
        }
      }
      if (!found) return std::nullopt;
    }
    perms.push_back(std::move(perm));
  }
  return perms;
}

}  // namespace qte
