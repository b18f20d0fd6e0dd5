#pragma once

// JSON form of ModelSpec: {"n", "a", "b", "m", "kappa", "theta", "rho",
// "y0", "x0"} with matrices as row-major nested arrays.

#include <string>

#include "json.hpp"

#include "adkit/model.hpp"

namespace adkit {

using Json = nlohmann::ordered_json;

Json to_json(const Mat& a);
Json to_json(const Vec& v);
Mat mat_from_json(const Json& j, const char* what);
Vec vec_from_json(const Json& j, const char* what);

Json spec_to_json(const ModelSpec& spec);
/// Parses without validating admissibility; shapes must be consistent.
ModelSpec spec_from_json(const Json& j);

ModelSpec load_spec(const std::string& path);
void save_spec(const ModelSpec& spec, const std::string& path);

/// 16 hex digits: FNV-1a over the canonical JSON text of the spec.
std::string spec_hash(const ModelSpec& spec);

/// Shortest round-trip decimal text of a double.
std::string format_double(double v);

/// Reads a whole file; throws ValidationError when it cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace adkit
