#pragma once

#include <string>

#include "ajd/model.hpp"

// Vendored single-header nlohmann/json (vendor/json.hpp).
#include "json.hpp"

namespace ajd {

using Json = nlohmann::json;

// Document schema:
// {"d":int,"m":int,"a":[[...]],"alpha":[[[...]]],"b":[...],"beta":[[...]],
//  "lambda":num,"kappa":[...],"jumps":{...}}
// "jumps" is {"kind":"degenerate","z0":[...]} or
// {"kind":"product","components":[{"type":"exponential","rate":r}|
//  {"type":"gaussian","mean":m,"var":v}|{"type":"point","value":c}, ...]};
// omitted "jumps" means a point mass at the origin.
Json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const Json& j);

ModelSpec load_spec(const std::string& path);
void save_spec(const ModelSpec& spec, const std::string& path);

Json validation_to_json(const ValidationReport& report);

Json matrix_to_json(const Mat& m);
Json vector_to_json(const Vec& v);
Mat matrix_from_json(const Json& j);
Vec vector_from_json(const Json& j);

}  // namespace ajd
