#include "qte/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace qte {

namespace {

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); }

Json moment_check_json(const std::string& name, const Povm& p, const Tolerances& tols) {
  auto v = validate_povm(p);
  Json j{{"name", name},
         {"kind", "povm"},
         {"gating", true},
         {"completeness_residual", v.completeness_residual},
         {"min_eigenvalue", v.min_eigenvalue},
         {"weight_sum", v.weight_sum}};
  bool ok = v.passed && v.completeness_residual <= tols.completeness;
  if (!v.failures.empty()) j["failures"] = v.failures;
  if (v.passed) {
    auto s = spherical_2design_check(p, tols.design);
    j["design_applicable"] = s.applicable;
    if (s.applicable) {
      j["mean_residual"] = s.max_mean_residual;
      j["moment_residual"] = s.max_moment_residual;
    } else {
      j["note"] = s.note;
    }
    ok = ok && s.passed;
  }
  j["passed"] = ok;
  return j;
}

std::optional<Loss> design_target_loss(const Povm& p) {
  if (p.dim != 2) return std::nullopt;
  return spherical_2design_check(p).passed ? std::optional<Loss>(Loss::HilbertSchmidt) : std::nullopt;
}

double known_minimax_value(Loss loss) {
  return loss == Loss::HilbertSchmidt ? kHsMinimaxValue : entropy_minimax_value();
}

CommandResult verify_designs(const RunConfig& cfg) {
  const auto& tols = cfg.tolerances;
  Json checks = Json::array();
  checks.push_back(moment_check_json("pauli-povm", pauli_design_povm(), tols));
  checks.push_back(moment_check_json("sic-povm", sic_povm(), tols));

  auto tetra = tetrahedral_unitaries();
  auto tr = unitary_2design_check(tetra, tols.design);
  checks.push_back({{"name", "tetrahedral-unitaries"},
                    {"kind", "unitary-2-design"},
                    {"gating", true},
                    {"size", tetra.size()},
                    {"residual", tr.residual},
                    {"passed", tr.passed}});

  auto orbit = pauli_orbit_unitaries();
  Matrix zero = Matrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  Matrix seed2 = Eigen::kroneckerProduct(zero, zero);
  double seed_res = twirl_residual(orbit, seed2);
  checks.push_back({{"name", "pauli-orbit-unitaries/seed-twirl"},
                    {"kind", "state-2-design"},
                    {"gating", true},
                    {"residual", seed_res},
                    {"passed", seed_res <= tols.design}});
  auto full = unitary_2design_check(orbit, tols.design);
  checks.push_back({{"name", "pauli-orbit-unitaries/full-basis"},
                    {"kind", "unitary-2-design"},
                    {"gating", false},
                    {"residual", full.residual},
                    {"passed", full.passed},
                    {"note", "six unitaries cannot form a qubit unitary 2-design (at least 10 are needed); "
                             "they twirl only the orbit seed correctly"}});

  Matrix seed = 2.0 * zero;
  Povm cov = covariant_povm_from_seed(HermitianMatrix(seed), orbit);
  Povm pauli = pauli_design_povm();
  double cov_diff = 0.0;
  for (std::size_t k = 0; k < pauli.size(); ++k)
    cov_diff = std::max(cov_diff, (cov.effects[k].op() - pauli.effects[k].op()).cwiseAbs().maxCoeff());
  checks.push_back({{"name", "covariant-seed-orbit"},
                    {"kind", "covariant-povm"},
                    {"gating", true},
                    {"max_elementwise_difference", cov_diff},
                    {"passed", cov_diff <= 1e-12}});

  if (cfg.povm != "pauli" || !cfg.povm_document.is_null()) {
    Json j;
    try {
      Json doc = cfg.povm_document;
      std::string name = cfg.povm;
      if (doc.is_null()) {
        if (cfg.povm == "sic") doc = povm_to_json(sic_povm());
        else if (cfg.povm == "z") doc = povm_to_json(z_povm());
        else doc = Json::parse(read_text_file(cfg.povm));
      }
      j = moment_check_json("user:" + name, povm_from_json_unchecked(doc), tols);
    } catch (const std::exception& e) {
      j = {{"name", "user:" + cfg.povm}, {"kind", "povm"}, {"gating", true}, {"passed", false}, {"error", e.what()}};
    }
    checks.push_back(std::move(j));
  }

  bool passed = std::all_of(checks.begin(), checks.end(),
                            [](const Json& c) { return !c["gating"].get<bool>() || c["passed"].get<bool>(); });
  return {passed ? CommandStatus::Pass : CommandStatus::CheckFailed,
          {{"command", "verify-designs"}, {"checks", std::move(checks)}, {"passed", passed}}};
}

CommandResult qubit_risk_cmd(const RunConfig& cfg) {
  Povm p = resolve_povm(cfg);
  if (p.dim != 2) bad_config("qubit-risk needs a qubit POVM");
  if (cfg.theta.norm() > 1.0 + tol::kBlochNorm) bad_config("theta must lie in the Bloch ball");
  auto g = generator_for(cfg.loss);
  DensityMatrix rho = bloch_to_density(cfg.theta);
  Estimator est = bayes_estimator(octahedron_prior(), p);
  double exact = risk(rho, est, p, g);
  auto mc = monte_carlo_risk(rho, est, p, g, cfg.shots, cfg.seed);
  Json report{{"command", "qubit-risk"},
              {"loss", loss_name(cfg.loss)},
              {"povm", cfg.povm},
              {"theta", bloch_to_json(cfg.theta)},
              {"exact", exact},
              {"monte_carlo", {{"mean", mc.mean}, {"standard_error", mc.standard_error},
                               {"shots", mc.shots}, {"seed", cfg.seed}}},
              {"estimator", estimator_to_json(est, p)}};
  CommandStatus status = CommandStatus::Pass;
  auto moments = PovmMoments::of(p);
  if (cfg.loss == Loss::HilbertSchmidt || moments.rank_one) {
    double closed = qubit_risk_closed_form({cfg.theta, cfg.loss, moments});
    report["closed_form"] = closed;
    double agreement = std::abs(closed - exact);
    report["closed_form_vs_exact"] = agreement;
    double limit = cfg.loss == Loss::HilbertSchmidt ? 1e-9 : 1e-6;
    if (agreement > limit) status = CommandStatus::CheckFailed;
  } else {
    report["closed_form"] = nullptr;
  }
  return {status, std::move(report)};
}

CommandResult lfp_search_cmd(const RunConfig& cfg) {
  Povm p = resolve_povm(cfg);
  if (p.dim != 2) bad_config("lfp-search grids are defined on the Bloch ball");
  auto g = generator_for(cfg.loss);
  const std::vector<double> radii{0.0, 0.25, 0.5, 0.75, 1.0};
  auto grid = ball_grid(static_cast<std::size_t>(cfg.grid), radii);
  auto support = states_from_bloch(grid);
  auto anchor_pts = fibonacci_sphere(static_cast<std::size_t>(cfg.grid));
  DiscretePrior anchor = DiscretePrior::from_bloch(anchor_pts);
  LfpOptions opts;
  opts.rel_tol = cfg.tolerances.lfp_rel;
  auto state = lfp_search(p, g, cfg.n_schedule, support, anchor, opts);

  Json stages = Json::array();
  for (const auto& s : state.stages)
    stages.push_back({{"n", s.n}, {"value", s.value}, {"iterations", s.iterations},
                      {"converged", s.converged}, {"trace", s.trace}});
  std::vector<std::size_t> order(state.prior.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t top = std::min<std::size_t>(10, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const auto& pa = state.prior.points()[a];
                      const auto& pb = state.prior.points()[b];
                      return pa.weight > pb.weight || (pa.weight == pb.weight && a < b);
                    });
  Json heaviest = Json::array();
  for (std::size_t i = 0; i < top; ++i) {
    const auto& pt = state.prior.points()[order[i]];
    heaviest.push_back({{"weight", pt.weight}, {"bloch", bloch_to_json(density_to_bloch(pt.state))}});
  }
  auto fp = lfp_fixed_point(p, g, octahedron_prior());
  Json report{{"command", "lfp-search"},
              {"povm", cfg.povm},
              {"loss", loss_name(cfg.loss)},
              {"grid", cfg.grid},
              {"support_size", support.size()},
              {"n_schedule", cfg.n_schedule},
              {"stages", std::move(stages)},
              {"value", state.value},
              {"heaviest_support", std::move(heaviest)},
              {"uniform_sphere_fixed_point",
               {{"value", fp.value}, {"risk_spread", fp.risk_spread}, {"value_after_step", fp.value_after_step}}}};
  CommandStatus status = CommandStatus::Pass;
  if (design_target_loss(p)) {
    double target = known_minimax_value(cfg.loss);
    report["target"] = target;
    report["gap"] = target - state.value;
    if (std::abs(target - state.value) > cfg.tolerances.lfp_target) status = CommandStatus::CheckFailed;
  } else {
    report["target"] = nullptr;
  }
  return {status, std::move(report)};
}

CommandResult minimax_scan_cmd(const RunConfig& cfg) {
  auto g = generator_for(cfg.loss);
  std::vector<NamedPovm> candidates;
  if (cfg.builtin_candidates) {
    candidates.push_back({"pauli", pauli_design_povm()});
    candidates.push_back({"sic", sic_povm()});
    candidates.push_back({"z", z_povm()});
  }
  for (int i = 0; i < cfg.random_candidates; ++i) {
    std::uint64_t s = cfg.seed * 7919ULL + static_cast<std::uint64_t>(i);
    candidates.push_back({"random4-" + std::to_string(i), random_povm(2, 4, s, true)});
  }
  if (candidates.empty()) bad_config("minimax-scan needs at least one candidate");
  auto probe = default_probe_grid(static_cast<std::size_t>(cfg.grid));
  auto priors = default_candidate_priors();
  auto scan = minimax_scan(g, candidates, probe, priors);

  const double bound = known_minimax_value(cfg.loss);
  Json entries = Json::array();
  std::vector<std::string> violations;
  for (std::size_t r = 0; r < scan.entries.size(); ++r) {
    const auto& e = scan.entries[r];
    entries.push_back({{"rank", r + 1}, {"name", e.name}, {"is_design", e.is_design},
                       {"worst_case", e.worst_case}, {"argmax", bloch_to_json(e.argmax)},
                       {"best_prior", e.best_prior}, {"per_prior", e.per_prior}});
    if (e.worst_case < bound - cfg.tolerances.scan) violations.push_back(e.name);
  }
  bool designs_at_bound = true;
  for (const auto& e : scan.entries)
    if (e.is_design && std::abs(e.worst_case - bound) > cfg.tolerances.scan) designs_at_bound = false;
  bool passed = scan.designs_attain_minimum && violations.empty() && designs_at_bound;
  Json report{{"command", "minimax-scan"},
              {"loss", loss_name(cfg.loss)},
              {"seed", cfg.seed},
              {"grid", cfg.grid},
              {"probe_size", probe.size()},
              {"prior_names", scan.prior_names},
              {"entries", std::move(entries)},
              {"minimum", scan.minimum},
              {"lower_bound", bound},
              {"designs_attain_minimum", scan.designs_attain_minimum},
              {"designs_attain_lower_bound", designs_at_bound},
              {"violations", violations},
              {"passed", passed}};
  return {passed ? CommandStatus::Pass : CommandStatus::CheckFailed, std::move(report)};
}

CommandResult demos_cmd(const RunConfig& cfg) {
  auto disc = discontinuity_demo(cfg.n_schedule);
  Json rows = Json::array();
  for (const auto& r : disc.rows)
    rows.push_back({{"n", r.n},
                    {"pi", {{"outcome0", bloch_to_json(r.pi_outcome0)}, {"outcome1", bloch_to_json(r.pi_outcome1)}}},
                    {"mu", {{"outcome0", bloch_to_json(r.mu_outcome0)}, {"outcome1", bloch_to_json(r.mu_outcome1)}}}});

  // Bayes optimality spot check on a seeded random instance.
  std::vector<PriorPoint> pts;
  for (int i = 0; i < 6; ++i) {
    std::uint64_t s = cfg.seed * 104729ULL + static_cast<std::uint64_t>(i);
    pts.push_back({1.0 + static_cast<double>((s % 97)) / 97.0, random_density(2, Purity::Mixed, s), std::nullopt});
  }
  DiscretePrior prior = DiscretePrior::normalized(std::move(pts));
  Povm p = random_povm(2, 4, cfg.seed, true);
  Json instances = Json::array();
  double min_gap = std::numeric_limits<double>::infinity();
  double max_identity = 0.0;
  for (Loss loss : {Loss::HilbertSchmidt, Loss::RelativeEntropy}) {
    auto g = generator_for(loss);
    double inst_gap = std::numeric_limits<double>::infinity(), inst_id = 0.0;
    for (int r = 0; r < cfg.rivals; ++r) {
      std::vector<DensityMatrix> states;
      for (std::size_t x = 0; x < p.size(); ++x)
        states.push_back(random_density(2, Purity::Mixed, cfg.seed * 31337ULL + static_cast<std::uint64_t>(r) * 64 + x));
      auto gap = bayes_optimality_gap(prior, p, g, Estimator(std::move(states)));
      inst_gap = std::min(inst_gap, gap.risk_difference);
      inst_id = std::max(inst_id, std::abs(gap.risk_difference - gap.divergence_sum));
    }
    instances.push_back({{"loss", loss_name(loss)}, {"min_gap", inst_gap}, {"max_identity_residual", inst_id}});
    min_gap = std::min(min_gap, inst_gap);
    max_identity = std::max(max_identity, inst_id);
  }
  bool optimal = min_gap >= -cfg.tolerances.optimality && max_identity <= cfg.tolerances.identity;
  bool passed = optimal && disc.limits_differ;
  Json report{{"command", "demos"},
              {"discontinuity",
               {{"rows", std::move(rows)},
                {"pi_limit", bloch_to_json(disc.pi_limit)},
                {"mu_limit", bloch_to_json(disc.mu_limit)},
                {"limit_distance_sq", disc.limit_distance_sq},
                {"limits_differ", disc.limits_differ}}},
              {"bayes_optimality",
               {{"rivals", cfg.rivals},
                {"instances", std::move(instances)},
                {"min_gap", min_gap},
                {"max_identity_residual", max_identity},
                {"passed", optimal}}},
              {"passed", passed}};
  return {passed ? CommandStatus::Pass : CommandStatus::CheckFailed, std::move(report)};
}

}  // namespace

bool Tolerances::set(const std::string& name, double value) {
  if (name == "design") design = value;
  else if (name == "completeness") completeness = value;
  else if (name == "constancy") constancy = value;
  else if (name == "lfp_rel") lfp_rel = value;
  else if (name == "lfp_target") lfp_target = value;
  else if (name == "scan") scan = value;
  else if (name == "optimality") optimality = value;
  else if (name == "identity") identity = value;
  else return false;
  return true;
}

const std::vector<std::string>& Tolerances::names() {
  static const std::vector<std::string> n{"design", "completeness", "constancy", "lfp_rel",
                                          "lfp_target", "scan", "optimality", "identity"};
  return n;
}

RunConfig RunConfig::from_json(const Json& j) {
  RunConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) bad_config("run configuration must be an object");
  auto positive_int = [](const Json& v, const std::string& key) -> long long {
    if (!v.is_number_integer() || v.get<long long>() < 0) bad_config("'" + key + "' must be a non-negative integer");
    return v.get<long long>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(positive_int(v, key));
    } else if (key == "shots") {
      c.shots = static_cast<std::uint64_t>(positive_int(v, key));
      if (c.shots == 0) bad_config("'shots' must be positive");
    } else if (key == "grid") {
      c.grid = static_cast<int>(positive_int(v, key));
      if (c.grid < 1) bad_config("'grid' must be positive");
    } else if (key == "loss") {
      auto l = v.is_string() ? parse_loss(v.get<std::string>()) : std::nullopt;
      if (!l) bad_config("'loss' must be \"hs\" or \"rel\"");
      c.loss = *l;
    } else if (key == "povm") {
      if (v.is_string()) {
        c.povm = v.get<std::string>();
      } else if (v.is_object()) {
        c.povm = "inline";
        c.povm_document = v;
      } else {
        bad_config("'povm' must be a name, a path or a POVM document");
      }
    } else if (key == "theta") {
      if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
        bad_config("'theta' must be [x, y, z]");
      c.theta = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    } else if (key == "n") {
      if (!v.is_array() || v.empty()) bad_config("'n' must be a non-empty integer list");
      c.n_schedule.clear();
      for (const auto& e : v) {
        if (!e.is_number_integer() || e.get<int>() < 2) bad_config("'n' entries must be integers >= 2");
        c.n_schedule.push_back(e.get<int>());
      }
    } else if (key == "candidates") {
      if (!v.is_string()) bad_config("'candidates' must be a string like builtin+random:100");
      c.builtin_candidates = false;
      c.random_candidates = 0;
      std::stringstream ss(v.get<std::string>());
      std::string part;
      while (std::getline(ss, part, '+')) {
        if (part == "builtin") {
          c.builtin_candidates = true;
        } else if (part.rfind("random:", 0) == 0) {
          try {
            std::size_t used = 0;
            int count = std::stoi(part.substr(7), &used);
            if (used != part.size() - 7 || count < 0) throw std::invalid_argument(part);
            c.random_candidates = count;
          } catch (const std::exception&) {
            bad_config("bad candidate spec '" + part + "'");
          }
        } else {
          bad_config("bad candidate spec '" + part + "'");
        }
      }
    } else if (key == "rivals") {
      c.rivals = static_cast<int>(positive_int(v, key));
    } else if (key == "tolerances") {
      if (!v.is_object()) bad_config("'tolerances' must be an object");
      for (const auto& [name, t] : v.items()) {
        if (!t.is_number() || !(t.get<double>() > 0.0)) bad_config("tolerance '" + name + "' must be positive");
        if (!c.tolerances.set(name, t.get<double>())) bad_config("unknown tolerance '" + name + "'");
      }
    } else {
      bad_config("unknown configuration key '" + key + "'");
    }
  }
  return c;
}

Povm resolve_povm(const RunConfig& config) {
  if (!config.povm_document.is_null()) return povm_from_json(config.povm_document);
  if (config.povm == "pauli") return pauli_design_povm();
  if (config.povm == "sic") return sic_povm();
  if (config.povm == "z") return z_povm();
  Json doc;
  try {
    doc = Json::parse(read_text_file(config.povm));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, "cannot parse POVM file '" + config.povm + "': " + e.what());
  }
  return povm_from_json(doc);
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> n{"verify-designs", "qubit-risk", "lfp-search", "minimax-scan", "demos"};
  return n;
}

CommandResult run_command(const std::string& command, const RunConfig& config) {
  try {
    if (command == "verify-designs") return verify_designs(config);
    if (command == "qubit-risk") return qubit_risk_cmd(config);
    if (command == "lfp-search") return lfp_search_cmd(config);
    if (command == "minimax-scan") return minimax_scan_cmd(config);
    if (command == "demos") return demos_cmd(config);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Internal) throw;
    return {CommandStatus::Internal, {{"command", command}, {"error", e.what()}}};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown command '" + command + "'");
}

}  // namespace qte
