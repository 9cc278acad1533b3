// qte: command-line front end over the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qte/qte.h"

using nlohmann::json;

namespace {

constexpr int kExitUsage = 64;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(15);
  os << v;
  return os.str();
}

std::string scalar_text(const json& v) {
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

bool numeric_array(const json& v) {
  if (!v.is_array()) return false;
  for (const auto& e : v)
    if (!e.is_number()) return false;
  return true;
}

void flatten(const json& v, const std::string& path, std::vector<std::pair<std::string, std::string>>& rows) {
  if (v.is_object()) {
    for (const auto& [k, e] : v.items()) flatten(e, path.empty() ? k : path + "." + k, rows);
  } else if (numeric_array(v)) {
    if (v.size() > 8) {
      rows.emplace_back(path, std::to_string(v.size()) + " values, last " + scalar_text(v.back()));
    } else {
      std::string s = "[";
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + scalar_text(v[i]);
      rows.emplace_back(path, s + "]");
    }
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], path + "[" + std::to_string(i) + "]", rows);
  } else {
    rows.emplace_back(path, scalar_text(v));
  }
}

std::string render_table(const json& report) {
  json shown = report;
  if (shown.contains("estimator")) shown.erase("estimator");
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(shown, "", rows);
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.first.size());
  std::ostringstream os;
  for (const auto& [k, v] : rows) os << k << std::string(width - k.size() + 2, ' ') << v << '\n';
  return os.str();
}

int write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return 0;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
      std::cerr << "qte: cannot write " << tmp << '\n';
      return 2;
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::cerr << "qte: cannot move report into " << path << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian and minimax qubit state estimation under Bregman divergences"};
  app.require_subcommand(1, 1);

  std::string loss = "hs", povm = "pauli", theta = "0,0,1", format = "json", out, n_list, candidates;
  std::uint64_t seed = 7, shots = 1000000;
  int grid = 1000, rivals = 100;
  std::vector<std::string> tol_overrides;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--loss", loss, "Loss: hs (Hilbert-Schmidt) or rel (relative entropy)")
        ->check(CLI::IsMember({"hs", "rel"}))
        ->capture_default_str();
    sub->add_option("--povm", povm, "pauli, sic, z, or a path to a POVM JSON document")->capture_default_str();
    sub->add_option("--theta", theta, "Bloch vector x,y,z")->capture_default_str();
    sub->add_option("--seed", seed, "Random seed")->capture_default_str();
    sub->add_option("--shots", shots, "Monte Carlo shots")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--grid", grid, "Points per sphere grid")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--n", n_list, "Comma-separated n schedule (default 10,100,1000)");
    sub->add_option("--candidates", candidates, "Scan candidates, e.g. builtin+random:100");
    sub->add_option("--rivals", rivals, "Rival estimators per Bayes optimality instance")->capture_default_str();
    sub->add_option("--tol", tol_overrides,
                    "Tolerance override name=value; names: design completeness constancy lfp_rel lfp_target "
                    "scan optimality identity");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "table"}))->capture_default_str();
    sub->add_option("--out", out, "Write the report to PATH");
  };

  std::vector<std::pair<std::string, std::string>> commands{
      {"verify-designs", "Check the built-in spherical and unitary 2-designs (and --povm if given)"},
      {"qubit-risk", "Closed-form, exact and Monte Carlo risk of the uniform-sphere Bayes estimator"},
      {"lfp-search", "Least-favourable prior ascent"},
      {"minimax-scan", "Worst-case Bayes risk over candidate POVMs"},
      {"demos", "Bayes estimator discontinuity and Bayes optimality spot check"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    subs.push_back(app.add_subcommand(name, help));
    add_common(subs.back());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  std::string command;
  for (auto* s : subs)
    if (s->parsed()) command = s->get_name();

  json cfg{{"seed", seed}, {"shots", shots}, {"grid", grid}, {"loss", loss}, {"rivals", rivals}};
  CLI::App* sub = app.get_subcommand(command);
  if (sub->count("--povm") || command != "verify-designs") cfg["povm"] = povm;
  try {
    auto parts = split(theta, ',');
    if (parts.size() != 3) throw std::invalid_argument(theta);
    json t = json::array();
    for (const auto& p : parts) {
      std::size_t used = 0;
      double v = std::stod(p, &used);
      if (used != p.size()) throw std::invalid_argument(p);
      t.push_back(v);
    }
    cfg["theta"] = t;
    if (!n_list.empty()) {
      json n = json::array();
      for (const auto& p : split(n_list, ',')) {
        std::size_t used = 0;
        int v = std::stoi(p, &used);
        if (used != p.size()) throw std::invalid_argument(p);
        n.push_back(v);
      }
      cfg["n"] = n;
    }
    if (!candidates.empty()) cfg["candidates"] = candidates;
    if (!tol_overrides.empty()) {
      json tols = json::object();
      for (const auto& o : tol_overrides) {
        auto eq = o.find('=');
        if (eq == std::string::npos) throw std::invalid_argument(o);
        tols[o.substr(0, eq)] = std::stod(o.substr(eq + 1));
      }
      cfg["tolerances"] = tols;
    }
  } catch (const std::exception& e) {
    std::cerr << "qte: malformed argument: " << e.what() << '\n';
    return kExitUsage;
  }

  char* report = nullptr;
  qte_status st = qte_run_command(command.c_str(), cfg.dump().c_str(), &report);
  if (!report) {
    std::cerr << "qte: " << qte_status_name(st) << ": " << qte_last_error() << '\n';
    if (st == QTE_INVALID_ARGUMENT || st == QTE_INVALID_STATE) return kExitUsage;
    return 2;
  }
  json doc = json::parse(report);
  qte_string_free(report);

  std::string text = format == "json" ? doc.dump(2) + "\n" : render_table(doc);
  if (int rc = write_output(text, out)) return rc;
  if (!out.empty() && format == "table") std::cout << text;

  switch (st) {
    case QTE_OK: return 0;
    case QTE_CHECK_FAILED: return 1;
    default:
      std::cerr << "qte: " << qte_status_name(st) << ": " << qte_last_error() << '\n';
      return 2;
  }
}
