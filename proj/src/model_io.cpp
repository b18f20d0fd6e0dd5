#include "adkit/model_io.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace adkit {

Json to_json(const Mat& a) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Json to_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Mat mat_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ValidationError(std::string(what) + ": expected a nested array");
  }
  const std::size_t rows = j.size(), cols = j[0].size();
  Mat out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ValidationError(std::string(what) + ": ragged rows");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) {
        throw ValidationError(std::string(what) + ": non-numeric entry");
      }
      out(i, k) = j[i][k].get<double>();
    }
  }
  return out;
}

Vec vec_from_json(const Json& j, const char* what) {
  if (j.is_number()) return Vec::Constant(1, j.get<double>());
  if (!j.is_array()) throw ValidationError(std::string(what) + ": expected an array");
  Vec out(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ValidationError(std::string(what) + ": non-numeric entry");
    }
    out(i) = j[i].get<double>();
  }
  return out;
}

Json spec_to_json(const ModelSpec& spec) {
  Json j;
  j["n"] = spec.n;
  j["a"] = spec.a;
  j["b"] = spec.b;
  j["m"] = to_json(spec.m);
  j["kappa"] = to_json(spec.kappa);
  j["theta"] = to_json(spec.theta);
  j["rho"] = to_json(spec.rho);
  j["y0"] = spec.y0;
  j["x0"] = to_json(spec.x0);
  return j;
}

ModelSpec spec_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("model spec: expected a JSON object");
  for (const char* key : {"n", "a", "b", "m", "kappa", "theta", "rho", "y0"}) {
    if (!j.contains(key)) {
      throw ValidationError(std::string("model spec: missing key '") + key + "'");
    }
  }
  auto number = [&](const char* key) {
    if (!j[key].is_number()) {
      throw ValidationError(std::string("model spec: '") + key + "' must be a number");
    }
    return j[key].get<double>();
  };
  ModelSpec s;
  if (!j["n"].is_number_integer()) throw ValidationError("model spec: 'n' must be an integer");
  s.n = j["n"].get<int>();
  s.a = number("a");
  s.b = number("b");
  s.y0 = number("y0");
  s.m = vec_from_json(j["m"], "m");
  s.kappa = vec_from_json(j["kappa"], "kappa");
  s.theta = mat_from_json(j["theta"], "theta");
  s.rho = mat_from_json(j["rho"], "rho");
  s.x0 = j.contains("x0") ? vec_from_json(j["x0"], "x0") : Vec::Zero(std::max(s.n, 0));
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ValidationError("write to '" + path + "' failed");
}

ModelSpec load_spec(const std::string& path) {
  try {
    return spec_from_json(Json::parse(read_file(path)));
  } catch (const Json::exception& e) {
    throw ValidationError("model spec '" + path + "': " + e.what());
  }
}

void save_spec(const ModelSpec& spec, const std::string& path) {
  write_file(path, spec_to_json(spec).dump(2) + "\n");
}

std::string spec_hash(const ModelSpec& spec) {
  const std::string text = spec_to_json(spec).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 0xf];
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace adkit
