#include "qte/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace qte {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::Io, "malformed document: " + what); }

double number(const Json& j, const char* what) {
  if (!j.is_number()) malformed(std::string(what) + " must be a number");
  return j.get<double>();
}

BlochVector bloch_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) malformed("bloch vector must be [x, y, z]");
  return {number(j[0], "bloch"), number(j[1], "bloch"), number(j[2], "bloch")};
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index a = 0; a < m.rows(); ++a)
    for (Eigen::Index b = 0; b < m.cols(); ++b) out.push_back({m(a, b).real(), m(a, b).imag()});
  return out;
}

Matrix matrix_from_json(const Json& j, int dim) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(dim) * dim) {
    std::ostringstream os;
    os << "matrix must hold " << dim * dim << " [re, im] pairs";
    malformed(os.str());
  }
  Matrix m(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      const Json& e = j[static_cast<std::size_t>(a * dim + b)];
      if (!e.is_array() || e.size() != 2) malformed("matrix entries must be [re, im] pairs");
      m(a, b) = Complex(number(e[0], "matrix entry"), number(e[1], "matrix entry"));
    }
  return m;
}

Json bloch_to_json(const BlochVector& v) { return Json::array({v.x, v.y, v.z}); }

Json povm_to_json(const Povm& p) {
  Json effects = Json::array();
  for (const auto& e : p.effects) {
    Json je{{"weight", e.weight}, {"matrix", matrix_to_json(e.normalized_effect.matrix())}};
    if (!e.label.empty())
      je["label"] = e.label;
    else if (e.bloch)
      je["label"] = bloch_to_json(*e.bloch);
    effects.push_back(std::move(je));
  }
  return {{"dim", p.dim}, {"effects", std::move(effects)}};
}

Povm povm_from_json_unchecked(const Json& j) {
  if (!j.is_object()) malformed("POVM document must be an object");
  if (!j.contains("dim") || !j["dim"].is_number_integer()) malformed("POVM needs an integer 'dim'");
  if (!j.contains("effects") || !j["effects"].is_array()) malformed("POVM needs an 'effects' array");
  for (const auto& [key, _] : j.items())
    if (key != "dim" && key != "effects") malformed("unknown POVM key '" + key + "'");
  Povm p;
  p.dim = j["dim"].get<int>();
  if (p.dim < 1) malformed("POVM dimension must be positive");
  for (const auto& je : j["effects"]) {
    if (!je.is_object() || !je.contains("weight") || !je.contains("matrix"))
      malformed("each effect needs 'weight' and 'matrix'");
    Effect e;
    e.weight = number(je["weight"], "weight");
    try {
      e.normalized_effect = HermitianMatrix(matrix_from_json(je["matrix"], p.dim), 1e-9);
    } catch (const Error& err) {
      throw Error(ErrorCode::InvalidArgument, std::string("effect matrix rejected: ") + err.what());
    }
    if (je.contains("label")) {
      if (je["label"].is_string())
        e.label = je["label"].get<std::string>();
      else
        e.bloch = bloch_from_json(je["label"]);
    }
    if (!e.bloch && p.dim == 2) e.bloch = BlochVector::from(0.5 * bloch_components(e.normalized_effect.matrix()));
    p.effects.push_back(std::move(e));
  }
  return p;
}

Povm povm_from_json(const Json& j) {
  Povm p = povm_from_json_unchecked(j);
  require_valid(p);
  return p;
}

Json prior_to_json(const DiscretePrior& prior) {
  Json pts = Json::array();
  for (const auto& pt : prior.points()) {
    if (pt.bloch)
      pts.push_back({{"weight", pt.weight}, {"bloch", bloch_to_json(*pt.bloch)}});
    else
      pts.push_back({{"weight", pt.weight}, {"matrix", matrix_to_json(pt.state.matrix())}});
  }
  return {{"points", std::move(pts)}};
}

DiscretePrior prior_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("points") || !j["points"].is_array()) malformed("prior needs a 'points' array");
  std::vector<PriorPoint> pts;
  double total = 0.0;
  for (const auto& jp : j["points"]) {
    if (!jp.is_object() || !jp.contains("weight")) malformed("each prior point needs a 'weight'");
    PriorPoint pt;
    pt.weight = number(jp["weight"], "weight");
    if (jp.contains("bloch")) {
      pt.bloch = bloch_from_json(jp["bloch"]);
      pt.state = bloch_to_density(*pt.bloch);
    } else if (jp.contains("matrix")) {
      const auto n = jp["matrix"].size();
      int dim = 1;
      while (static_cast<std::size_t>(dim * dim) < n) ++dim;
      pt.state = DensityMatrix(matrix_from_json(jp["matrix"], dim));
    } else {
      malformed("prior point needs 'bloch' or 'matrix'");
    }
    total += pt.weight;
    pts.push_back(std::move(pt));
  }
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "prior weights sum to " << total;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  return DiscretePrior::normalized(std::move(pts));
}

Json estimator_to_json(const Estimator& est, const Povm& p) {
  Json outs = Json::array();
  for (std::size_t k = 0; k < est.size(); ++k) {
    Json jo{{"index", k}};
    if (k < p.size() && !p.effects[k].label.empty()) jo["label"] = p.effects[k].label;
    if (est.dim() == 2) jo["bloch"] = bloch_to_json(density_to_bloch(est[k]));
    jo["matrix"] = matrix_to_json(est[k].matrix());
    outs.push_back(std::move(jo));
  }
  return {{"dim", est.dim()}, {"outcomes", std::move(outs)}};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp + "'");
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error(ErrorCode::Io, "cannot move report into '" + path + "'");
}

}  // namespace qte
