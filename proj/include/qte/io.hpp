#pragma once

#include <string>

#include <json.hpp>

#include "qte/bayes.hpp"
#include "qte/measurement.hpp"

namespace qte {

using Json = nlohmann::json;

/// Matrices travel as a flat row-major list of [re, im] pairs.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, int dim);

/// {"dim": d, "effects": [{"weight": w, "matrix": [...], "label": ...}]}
/// `matrix` is the trace-d normalized effect; `label` is a string or a Bloch
/// vector [x, y, z].
Json povm_to_json(const Povm& p);
/// Parses and validates; throws Io on malformed documents and
/// InvalidArgument when the POVM axioms fail.
Povm povm_from_json(const Json& j);
/// Structural parse only; the result may violate the POVM axioms.
Povm povm_from_json_unchecked(const Json& j);

/// {"points": [{"weight": w, "bloch": [x, y, z]} | {"weight": w, "matrix": [...]}]}
Json prior_to_json(const DiscretePrior& prior);
DiscretePrior prior_from_json(const Json& j);

/// {"dim": d, "outcomes": [{"index": k, "label": ..., "bloch": [...], "matrix": [...]}]}
Json estimator_to_json(const Estimator& est, const Povm& p);

Json bloch_to_json(const BlochVector& v);

std::string read_text_file(const std::string& path);
/// Writes to a sibling temporary file and renames it into place.
void write_text_file_atomic(const std::string& path, const std::string& text);

}  // namespace qte
