// pdmskit -- file formats and report serialization.
//
// Kernel files are JSON with three shapes:
//   {"type": "dense", "labels": [...], "entries": [[[re,im], ...], ...]}
//   {"type": "builtin", "name": "...", "params": {...}}
//   {"type": "composite", "op": "...", "operands": [...], "params": {...}}
// Complex scalars are [re, im] pairs (a bare number is accepted on input as
// a real).  Dense entries must be Hermitian; everything else is rejected.
//
// All numbers are written with 17 significant digits, so serialize(parse(x))
// is byte-stable and doubles survive round trips exactly.  Reports are a
// single '# pdmskit <command> generated <timestamp>' comment line followed
// by a JSON body; bodies are deterministic for fixed inputs.
#ifndef PDMSKIT_IO_HPP
#define PDMSKIT_IO_HPP

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdmskit/corpus.hpp"
#include "pdmskit/errors.hpp"
#include "pdmskit/kernel.hpp"
#include "pdmskit/linalg.hpp"
#include "pdmskit/matrix.hpp"
#include "pdmskit/opfactory.hpp"

namespace pdmskit {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Number formatting (17 significant digits everywhere)
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  if (!std::isfinite(v)) {
    throw Error("format_double: refusing to serialize a non-finite value");
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

// Serializer with the fixed float format; key order is preserved by
// ordered_json, so output bytes are a pure function of the document.
inline void write_json(std::ostream& os, const Json& j, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad_in << Json(it.key()).dump() << ": ";
        write_json(os, it.value(), indent + 1);
      }
      os << "\n" << pad << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line; nested structures get spread.
      bool scalar_only = true;
      for (const auto& v : j) {
        if (v.is_object() || v.is_array()) scalar_only = false;
      }
      if (scalar_only) {
        os << "[";
        bool first = true;
        for (const auto& v : j) {
          if (!first) os << ", ";
          first = false;
          write_json(os, v, indent);
        }
        os << "]";
        return;
      }
      os << "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ",\n";
        first = false;
        os << pad_in;
        write_json(os, v, indent + 1);
      }
      os << "\n" << pad << "]";
      return;
    }
    case Json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
      return;
  }
}

inline std::string json_to_string(const Json& j) {
  std::ostringstream os;
  write_json(os, j);
  os << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Complex scalars, vectors, matrices
// ---------------------------------------------------------------------------

inline Json complex_to_json(const Complex& c) {
  return Json::array({c.real(), c.imag()});
}

inline Complex json_to_complex(const Json& j, const char* who) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return Complex(j[0].get<double>(), j[1].get<double>());
  }
  throw InputError(std::string(who) +
                   ": expected a number or [re, im] pair, got " + j.dump());
}

inline Json complex_vector_to_json(const std::vector<Complex>& v) {
  Json arr = Json::array();
  for (const Complex& c : v) arr.push_back(complex_to_json(c));
  return arr;
}

inline std::vector<Complex> json_to_complex_vector(const Json& j,
                                                   const char* who) {
  if (!j.is_array()) {
    throw InputError(std::string(who) + ": expected an array");
  }
  std::vector<Complex> v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(json_to_complex(e, who));
  return v;
}

inline Json matrix_to_json(const ComplexMatrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      row.push_back(complex_to_json(M(i, j)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ComplexMatrix json_to_matrix(const Json& j, const char* who) {
  if (!j.is_array() || j.empty()) {
    throw InputError(std::string(who) + ": expected a nonempty array of rows");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  ComplexMatrix M;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) {
      throw InputError(std::string(who) + ": row " + std::to_string(i + 1) +
                       " is not an array");
    }
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      M.resize(rows, cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw InputError(std::string(who) + ": ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      M(i, c) = json_to_complex(row[static_cast<std::size_t>(c)], who);
    }
  }
  require_finite(M, who);
  return M;
}

// ---------------------------------------------------------------------------
// Scaling specs
// ---------------------------------------------------------------------------

inline Json scaling_to_json(const ScalingSpec& s) {
  Json j;
  switch (s.kind) {
    case ScalingSpec::Kind::Vector:
      j["kind"] = "vector";
      j["values"] = complex_vector_to_json(s.values);
      return j;
    case ScalingSpec::Kind::Power:
      j["kind"] = "power";
      j["alpha"] = s.alpha;
      return j;
    case ScalingSpec::Kind::Constant:
      j["kind"] = "constant";
      j["value"] = complex_to_json(s.constant);
      return j;
    case ScalingSpec::Kind::BdNormalize:
      j["kind"] = "normalize-bd";
      return j;
    case ScalingSpec::Kind::DiagFloor2:
      j["kind"] = "diag-floor2";
      return j;
  }
  throw Error("scaling_to_json: unreachable kind");
}

inline ScalingSpec json_to_scaling(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw InputError("scaling: expected an object with a 'kind' string");
  }
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "vector") {
    if (!j.contains("values")) throw InputError("scaling: vector needs 'values'");
    return ScalingSpec::vector(json_to_complex_vector(j["values"], "scaling"));
  }
  if (kind == "power") {
    if (!j.contains("alpha") || !j["alpha"].is_number()) {
      throw InputError("scaling: power needs a numeric 'alpha'");
    }
    return ScalingSpec::power(j["alpha"].get<double>());
  }
  if (kind == "constant") {
    if (!j.contains("value")) throw InputError("scaling: constant needs 'value'");
    return ScalingSpec::constant_value(json_to_complex(j["value"], "scaling"));
  }
  if (kind == "normalize-bd") return ScalingSpec::bd_normalize();
  if (kind == "diag-floor2") return ScalingSpec::diag_floor2();
  throw InputError("scaling: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Kernel serialization
// ---------------------------------------------------------------------------

inline Json kernel_to_json(const Kernel& K);

namespace detail {

inline Json builtin_to_json(const KernelNode& node) {
  Json j;
  j["type"] = "builtin";
  if (dynamic_cast<const DeltaKernel*>(&node)) {
    j["name"] = "delta";
    j["params"] = Json::object();
    return j;
  }
  if (dynamic_cast<const DiagN2Kernel*>(&node)) {
    j["name"] = "diag_n2";
    j["params"] = Json::object();
    return j;
  }
  if (const auto* p = dynamic_cast<const OuterPowerKernel*>(&node)) {
    j["name"] = "outer_power";
    j["params"] = Json::object({{"alpha", p->alpha()}});
    return j;
  }
  if (const auto* p = dynamic_cast<const UniformFamilyKernel*>(&node)) {
    j["name"] = "uniform_family";
    j["params"] = Json::object({{"n", p->n()}});
    return j;
  }
  if (const auto* p = dynamic_cast<const ShiftKernel*>(&node)) {
    j["name"] = "shift";
    j["params"] = Json::object({{"f", complex_vector_to_json(p->generator())}});
    return j;
  }
  if (const auto* p = dynamic_cast<const HarmonicKernel*>(&node)) {
    j["name"] = "harmonic";
    j["params"] = Json::object({{"truncation", p->truncation()}});
    return j;
  }
  if (const auto* p = dynamic_cast<const OuterVecKernel*>(&node)) {
    j["name"] = "outer";
    j["params"] = Json::object({{"u", complex_vector_to_json(p->values())}});
    return j;
  }
  throw Error("kernel_to_json: unknown builtin node");
}

inline Json composite_to_json(const KernelNode& node) {
  Json j;
  j["type"] = "composite";
  if (const auto* p = dynamic_cast<const RescaleKernel*>(&node)) {
    j["op"] = "rescale";
    j["operands"] = Json::array({kernel_to_json(p->operand())});
    j["params"] = Json::object({{"u", scaling_to_json(p->spec())}});
    return j;
  }
  if (const auto* p = dynamic_cast<const HadamardKernel*>(&node)) {
    j["op"] = "hadamard";
    j["operands"] =
        Json::array({kernel_to_json(p->lhs()), kernel_to_json(p->rhs())});
    return j;
  }
  if (const auto* p = dynamic_cast<const SumKernel*>(&node)) {
    j["op"] = "sum";
    j["operands"] =
        Json::array({kernel_to_json(p->lhs()), kernel_to_json(p->rhs())});
    return j;
  }
  if (const auto* p = dynamic_cast<const AdjointKernel*>(&node)) {
    j["op"] = "adjoint";
    j["operands"] = Json::array({kernel_to_json(p->operand())});
    return j;
  }
  throw Error("kernel_to_json: unknown composite node");
}

}  // namespace detail

inline Json kernel_to_json(const Kernel& K) {
  switch (K.kind()) {
    case KernelNode::Kind::Dense: {
      const auto& dense = dynamic_cast<const DenseKernel&>(K.node());
      if (!dense.hermitian()) {
        throw InputError(
            "kernel_to_json: dense kernel files must be Hermitian");
      }
      Json j;
      j["type"] = "dense";
      j["labels"] = dense.labels();
      j["entries"] = matrix_to_json(dense.entries());
      return j;
    }
    case KernelNode::Kind::Builtin:
      return detail::builtin_to_json(K.node());
    case KernelNode::Kind::Composite:
      return detail::composite_to_json(K.node());
  }
  throw Error("kernel_to_json: unreachable kind");
}

inline Kernel parse_kernel(const Json& j);

namespace detail {

inline const Json& require_field(const Json& j, const char* field,
                                 const char* who) {
  if (!j.is_object() || !j.contains(field)) {
    throw InputError(std::string(who) + ": missing field '" + field + "'");
  }
  return j[field];
}

inline Kernel parse_builtin(const Json& j) {
  const std::string name =
      require_field(j, "name", "builtin kernel").get<std::string>();
  const Json params = j.contains("params") ? j["params"] : Json::object();
  if (name == "delta") return delta_kernel();
  if (name == "diag_n2") return diag_n2_kernel();
  if (name == "outer_power") {
    const Json& a = require_field(params, "alpha", "outer_power");
    if (!a.is_number()) throw InputError("outer_power: alpha must be numeric");
    return outer_power_kernel(a.get<double>());
  }
  if (name == "uniform_family") {
    const Json& n = require_field(params, "n", "uniform_family");
    if (!n.is_number_unsigned()) {
      throw InputError("uniform_family: n must be a nonnegative integer");
    }
    return uniform_family_kernel(n.get<Index>());
  }
  if (name == "shift") {
    return shift_kernel(
        json_to_complex_vector(require_field(params, "f", "shift"), "shift"));
  }
  if (name == "harmonic") {
    Index truncation = kHarmonicDefaultTruncation;
    if (params.contains("truncation")) {
      if (!params["truncation"].is_number_unsigned()) {
        throw InputError("harmonic: truncation must be a nonnegative integer");
      }
      truncation = params["truncation"].get<Index>();
    }
    return harmonic_kernel(truncation);
  }
  if (name == "outer") {
    return outer(
        json_to_complex_vector(require_field(params, "u", "outer"), "outer"));
  }
  throw InputError("builtin kernel: unknown name '" + name + "'");
}

inline Kernel parse_composite(const Json& j) {
  const std::string op =
      require_field(j, "op", "composite kernel").get<std::string>();
  const Json& operands = require_field(j, "operands", "composite kernel");
  if (!operands.is_array() || operands.empty()) {
    throw InputError("composite kernel: 'operands' must be a nonempty array");
  }
  if (op == "rescale") {
    if (operands.size() != 1) {
      throw InputError("rescale: exactly one operand expected");
    }
    const Json params = j.contains("params") ? j["params"] : Json::object();
    return rescale(parse_kernel(operands[0]),
                   json_to_scaling(require_field(params, "u", "rescale")));
  }
  if (op == "hadamard" || op == "sum") {
    if (operands.size() != 2) {
      throw InputError(op + ": exactly two operands expected");
    }
    const Kernel lhs = parse_kernel(operands[0]);
    const Kernel rhs = parse_kernel(operands[1]);
    return op == "hadamard" ? hadamard(lhs, rhs) : kernel_sum(lhs, rhs);
  }
  if (op == "adjoint") {
    if (operands.size() != 1) {
      throw InputError("adjoint: exactly one operand expected");
    }
    return adjoint(parse_kernel(operands[0]));
  }
  throw InputError("composite kernel: unknown op '" + op + "'");
}

}  // namespace detail

inline Kernel parse_kernel(const Json& j) {
  const std::string type =
      detail::require_field(j, "type", "kernel").get<std::string>();
  if (type == "dense") {
    const Json& labels_json = detail::require_field(j, "labels", "dense kernel");
    if (!labels_json.is_array()) {
      throw InputError("dense kernel: 'labels' must be an array of strings");
    }
    std::vector<std::string> labels;
    for (const auto& l : labels_json) {
      if (!l.is_string()) {
        throw InputError("dense kernel: labels must be strings");
      }
      labels.push_back(l.get<std::string>());
    }
    const ComplexMatrix entries = json_to_matrix(
        detail::require_field(j, "entries", "dense kernel"), "dense kernel");
    if (entries.rows() != entries.cols()) {
      throw InputError("dense kernel: entries must be square");
    }
    const double asym = HermitianMatrix::asymmetry(entries);
    if (asym > 1e-12 * std::max(1.0, max_abs(entries))) {
      throw InputError(
          "dense kernel: entries are not Hermitian (asymmetry = " +
          format_double(asym) + ")");
    }
    return Kernel(std::make_shared<DenseKernel>(std::move(labels), entries,
                                                true));
  }
  if (type == "builtin") return detail::parse_builtin(j);
  if (type == "composite") return detail::parse_composite(j);
  throw InputError("kernel: unknown type '" + type + "'");
}

// ---------------------------------------------------------------------------
// Subspace, measure, and moment files
// ---------------------------------------------------------------------------

// {"ambient_dim": n, "vectors": [[...], ...]} -- vectors are listed as rows
// of complex entries and orthonormalized on load (a spanning set is enough).
inline Json subspace_to_json(const SubspaceBasis& basis) {
  Json j;
  j["ambient_dim"] = basis.ambient_dim;
  Json vecs = Json::array();
  for (Eigen::Index c = 0; c < basis.dim(); ++c) {
    Json v = Json::array();
    for (Eigen::Index r = 0; r < basis.ambient_dim; ++r) {
      v.push_back(complex_to_json(basis.vectors(r, c)));
    }
    vecs.push_back(std::move(v));
  }
  j["vectors"] = std::move(vecs);
  return j;
}

inline SubspaceBasis parse_subspace(const Json& j) {
  const Json& dim_json = detail::require_field(j, "ambient_dim", "subspace");
  if (!dim_json.is_number_integer() || dim_json.get<std::int64_t>() <= 0) {
    throw InputError("subspace: 'ambient_dim' must be a positive integer");
  }
  const Eigen::Index ambient =
      static_cast<Eigen::Index>(dim_json.get<std::int64_t>());
  const Json& vecs = detail::require_field(j, "vectors", "subspace");
  if (!vecs.is_array()) {
    throw InputError("subspace: 'vectors' must be an array");
  }
  if (vecs.empty()) return SubspaceBasis::zero(ambient);
  ComplexMatrix M(ambient, static_cast<Eigen::Index>(vecs.size()));
  for (std::size_t c = 0; c < vecs.size(); ++c) {
    const std::vector<Complex> v = json_to_complex_vector(vecs[c], "subspace");
    if (static_cast<Eigen::Index>(v.size()) != ambient) {
      throw InputError("subspace: vector " + std::to_string(c + 1) +
                       " has length " + std::to_string(v.size()) +
                       ", expected " + std::to_string(ambient));
    }
    for (Eigen::Index r = 0; r < ambient; ++r) {
      M(r, static_cast<Eigen::Index>(c)) = v[static_cast<std::size_t>(r)];
    }
  }
  const SubspaceBasis basis = orthonormal_range(M);
  if (basis.dim() < static_cast<Eigen::Index>(vecs.size())) {
    // Dependent spanning sets are accepted; the basis simply has lower dim.
  }
  return basis;
}

inline Json measure_to_json(const MeasureSpec& mu) {
  Json j;
  j["atoms"] = mu.atoms;
  j["weights"] = mu.weights;
  return j;
}

inline MeasureSpec parse_measure(const Json& j) {
  MeasureSpec mu;
  const Json& atoms = detail::require_field(j, "atoms", "measure");
  const Json& weights = detail::require_field(j, "weights", "measure");
  if (!atoms.is_array() || !weights.is_array()) {
    throw InputError("measure: 'atoms' and 'weights' must be arrays");
  }
  for (const auto& a : atoms) {
    if (!a.is_number()) throw InputError("measure: atoms must be numbers");
    mu.atoms.push_back(a.get<double>());
  }
  for (const auto& w : weights) {
    if (!w.is_number()) throw InputError("measure: weights must be numbers");
    mu.weights.push_back(w.get<double>());
  }
  validate_measure(mu);
  return mu;
}

// Bare array [c0, c1, ...] or {"moments": [...]}.
inline std::vector<double> parse_moments(const Json& j) {
  const Json& arr = j.is_array() ? j : detail::require_field(j, "moments",
                                                             "moments");
  if (!arr.is_array() || arr.empty()) {
    throw InputError("moments: expected a nonempty array");
  }
  std::vector<double> moments;
  for (const auto& c : arr) {
    if (!c.is_number()) throw InputError("moments: entries must be numbers");
    moments.push_back(c.get<double>());
  }
  return moments;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  try {
    return Json::parse(in, nullptr, true, true);  // allow comment lines
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cannot parse " + path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path);
  out << content;
  if (!out) throw InputError("failed while writing file: " + path);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return std::string(buf);
}

// A report is one comment header line (the only timestamp-dependent bytes)
// followed by the JSON body and a trailing newline.
inline std::string render_report(const std::string& command,
                                 const Json& body) {
  std::ostringstream os;
  os << "# pdmskit " << command << " generated " << iso8601_utc_now() << "\n";
  write_json(os, body);
  os << "\n";
  return os.str();
}

inline Json psd_report_to_json(const PsdReport& r) {
  Json j;
  j["psd"] = r.psd;
  j["lambda_min"] = r.lambda_min;
  j["lambda_max"] = r.lambda_max;
  j["scale"] = r.scale;
  return j;
}

// CSV with a fixed header; numbers rendered like every other output.
inline std::string render_csv(const std::vector<std::string>& header,
                              const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) os << ",";
    os << header[i];
  }
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ",";
      os << format_double(row[i]);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace pdmskit

#endif  // PDMSKIT_IO_HPP
