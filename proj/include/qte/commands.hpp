#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qte/io.hpp"
#include "qte/minimax.hpp"

namespace qte {

/// Named tolerances used by the commands. Defaults equal the library-level
/// tolerances.
struct Tolerances {
  double design = 1e-9;       // spherical moments, unitary twirl residual
  double completeness = 1e-9; // POVM sums to identity
  double constancy = 1e-9;    // risk spread over an orbit
  double lfp_rel = 1e-8;      // relative improvement stopping rule
  double lfp_target = 1e-3;   // distance of the LFP value to the known optimum
  double scan = 1e-6;         // minimax scan ties and lower bound
  double optimality = 1e-10;  // Bayes optimality slack
  double identity = 1e-9;     // Bayes optimality gap identity

  /// Returns false for an unknown name.
  bool set(const std::string& name, double value);
  static const std::vector<std::string>& names();
};

/// Parsed command configuration. Unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 7;
  std::uint64_t shots = 1000000;
  int grid = 1000;
  Loss loss = Loss::HilbertSchmidt;
  std::string povm = "pauli";  // builtin name, or "file" when povm_document is set
  Json povm_document;          // inline POVM document
  BlochVector theta{0, 0, 1};
  std::vector<int> n_schedule{10, 100, 1000};
  int random_candidates = 100;
  bool builtin_candidates = true;
  int rivals = 100;
  Tolerances tolerances;

  static RunConfig from_json(const Json& j);
};

enum class CommandStatus { Pass = 0, CheckFailed = 1, Internal = 2 };

struct CommandResult {
  CommandStatus status = CommandStatus::Pass;
  Json report;
};

/// Known commands: verify-designs, qubit-risk, lfp-search, minimax-scan, demos.
/// Throws InvalidArgument for an unknown command.
CommandResult run_command(const std::string& command, const RunConfig& config);

const std::vector<std::string>& command_names();

/// The POVM named by the config ("pauli", "sic", "z", or the inline document).
Povm resolve_povm(const RunConfig& config);

}  // namespace qte
