#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qte/core.hpp"

namespace qte {

/// One POVM outcome stored as weight * normalized_effect, with
/// Tr normalized_effect = dim. For qubits normalized_effect = I + x.sigma.
struct Effect {
  double weight = 0.0;
  HermitianMatrix normalized_effect;
  std::string label;
  std::optional<BlochVector> bloch;

  Matrix op() const { return weight * normalized_effect.matrix(); }
};

/// Finite-outcome POVM. Construction does not validate; use validate_povm(),
/// or one of the builders below, which all validate before returning.
struct Povm {
  int dim = 0;
  std::vector<Effect> effects;

  std::size_t size() const noexcept { return effects.size(); }
};

struct PovmValidation {
  double completeness_residual = 0.0;  // max |sum_i E_i - I| elementwise
  double min_eigenvalue = 0.0;         // over all weighted effects
  double weight_sum = 0.0;
  double trace_residual = 0.0;  // max |Tr normalized_effect - dim|
  bool dimensions_ok = true;
  bool passed = false;
  std::vector<std::string> failures;
};

PovmValidation validate_povm(const Povm& p);
/// Throws InvalidArgument with the validation failures when p is invalid.
void require_valid(const Povm& p);

/// Builds a Povm from raw effect operators E_i; weight_i = Tr E_i / dim.
Povm povm_from_operators(std::span<const Matrix> ops, std::vector<std::string> labels = {});

std::vector<double> born_probabilities(const Povm& p, const DensityMatrix& rho);

struct OutcomeSample {
  std::size_t index = 0;
  std::uint64_t count = 0;
};

/// Multinomial draw of `shots` outcomes, one entry per outcome in POVM order.
std::vector<OutcomeSample> sample_outcomes(const Povm& p, const DensityMatrix& rho,
                                           std::uint64_t shots, std::uint64_t seed);

/// Six effects (I + u.sigma)/6 for u in {+z, -z, +x, -x, +y, -y}.
Povm pauli_design_povm();
/// Tetrahedral SIC-POVM, effects (I + u.sigma)/4.
Povm sic_povm();
/// Projective sigma_z measurement, outcomes +z then -z.
Povm z_povm();
/// Rank-one (or full-rank when rank_one is false) POVM from
/// S^{-1/2} A_i S^{-1/2} with random Gaussian A_i.
Povm random_povm(int dim, int outcomes, std::uint64_t seed, bool rank_one = true);

/// x_k = Tr(M_k sigma)/2 for each normalized qubit effect M_k.
std::vector<Eigen::Vector3d> effect_bloch_vectors(const Povm& p);

struct SphericalDesignReport {
  bool applicable = false;
  bool passed = false;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d second_moment = Eigen::Matrix3d::Zero();
  double max_mean_residual = 0.0;
  double max_moment_residual = 0.0;
  std::string note;
};

SphericalDesignReport spherical_2design_check(const Povm& p, double tolerance = 1e-9);

/// Closed-form 2-fold Haar twirl on a d^2-dimensional operator:
/// Tr(X P_sym)/d_sym P_sym + Tr(X P_anti)/d_anti P_anti.
Matrix haar_twirl_2(const Matrix& x);
DensityMatrix haar_twirl_2(const DensityMatrix& rho);

/// (1/N) sum_i (U_i (x) U_i) x (U_i (x) U_i)^dagger.
Matrix finite_twirl_2(std::span<const UnitaryMatrix> us, const Matrix& x);

struct UnitaryDesignReport {
  bool passed = false;
  double residual = 0.0;
  std::size_t worst_probe = 0;
};

/// Compares the finite twirl against haar_twirl_2 on the Hermitian probe
/// basis {E_ab + E_ba, i(E_ab - E_ba)} spanning all d^4 directions.
UnitaryDesignReport unitary_2design_check(std::span<const UnitaryMatrix> us,
                                          double tolerance = 1e-9);

/// Twirl residual on a single input operator.
double twirl_residual(std::span<const UnitaryMatrix> us, const Matrix& x);

/// U_{theta,phi} = [[cos t/2, -sin t/2 e^{-i phi}], [sin t/2 e^{i phi}, cos t/2]].
UnitaryMatrix orbit_unitary(double theta, double phi);
/// The six orbit unitaries mapping |0> to the Pauli eigenstates
/// +z, -z, +x, -x, +y, -y.
std::vector<UnitaryMatrix> pauli_orbit_unitaries();
/// Closure of the given generators modulo global phase.
std::vector<UnitaryMatrix> group_closure(std::span<const UnitaryMatrix> generators,
                                         std::size_t max_size = 1024);
/// The 12-element tetrahedral subgroup of the single-qubit Clifford group
/// (mod phase); a unitary 2-design.
std::vector<UnitaryMatrix> tetrahedral_unitaries();
/// The 24-element single-qubit Clifford group mod phase.
std::vector<UnitaryMatrix> clifford_unitaries();

/// Effects (1/N) U_i seed U_i^dagger. Throws SeedNormalization unless the
/// orbit average of the seed is I within 1e-9.
Povm covariant_povm_from_seed(const HermitianMatrix& seed, std::span<const UnitaryMatrix> us);

/// For each U, the conjugated effect set {U^dagger E_k U} equals a permutation
/// of {E_k}. Returns the permutations (perm[k] = index of U^dagger E_k U) when
/// it does, std::nullopt otherwise.
std::optional<std::vector<std::vector<std::size_t>>> covariance_permutations(
    const Povm& p, std::span<const UnitaryMatrix> us, double tolerance = 1e-9);

}  // namespace qte
