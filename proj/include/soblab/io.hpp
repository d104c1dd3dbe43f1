// File formats: manifold JSON, field CSV, the eigenpair cache, and a JSON
// writer that prints doubles with 17 significant digits so that
// emit -> parse -> emit is byte-identical.
#pragma once

#include "soblab/spectral.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace soblab {

using json = nlohmann::ordered_json;

namespace detail {

inline void write_json_value(std::ostream& os, const json& j, int indent, int level) {
  const std::string pad(static_cast<std::size_t>(indent) * level, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent) * (level + 1), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad_in << json(it.key()).dump() << ": ";
        write_json_value(os, it.value(), indent, level + 1);
      }
      os << "\n" << pad << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ",\n";
        first = false;
        os << pad_in;
        write_json_value(os, v, indent, level + 1);
      }
      os << "\n" << pad << "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v))
        os << format_double(v);
      else
        os << "null";  // JSON has no inf/nan; null round-trips stably
      return;
    }
    default:
      os << j.dump();
      return;
  }
}

}  // namespace detail

inline std::string dump_json(const json& j, int indent = 2) {
  std::ostringstream os;
  detail::write_json_value(os, j, indent, 0);
  os << "\n";
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  if (const auto parent = std::filesystem::path(path).parent_path(); !parent.empty())
    std::filesystem::create_directories(parent);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  os << content;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// ---- manifold file ----------------------------------------------------------

inline json manifold_to_json(const Manifold& m) {
  json j;
  json vertices = json::array();
  for (int i = 0; i < m.vertex_count(); ++i) {
    json v;
    v["id"] = i;
    v["mu"] = m.mu(i);
    if (!m.coords.empty()) v["coords"] = {m.coords[i][0], m.coords[i][1]};
    vertices.push_back(v);
  }
  j["vertices"] = vertices;
  json edges = json::array();
  for (const Edge& e : m.edges)
    edges.push_back({{"u", e.u}, {"v", e.v}, {"w", e.weight}, {"len", e.length}});
  j["edges"] = edges;
  j["generator"] = {{"spec", m.generator}, {"seed", m.seed}};
  return j;
}

inline Manifold manifold_from_json(const json& j) {
  Manifold m;
  const auto& vertices = j.at("vertices");
  m.mu.resize(static_cast<int>(vertices.size()));
  bool has_coords = false;
  for (const auto& v : vertices) {
    const int id = v.at("id").get<int>();
    if (id < 0 || id >= m.mu.size())
      throw std::invalid_argument("manifold file: vertex id out of range");
    m.mu(id) = v.at("mu").get<double>();
    if (v.contains("coords")) has_coords = true;
  }
  if (has_coords) {
    m.coords.resize(m.mu.size());
    for (const auto& v : vertices) {
      const auto& c = v.at("coords");
      m.coords[v.at("id").get<int>()] = {c.at(0).get<double>(), c.at(1).get<double>()};
    }
  }
  for (const auto& e : j.at("edges"))
    m.edges.push_back({e.at("u").get<int>(), e.at("v").get<int>(), e.at("w").get<double>(),
                       e.at("len").get<double>()});
  if (j.contains("generator")) {
    m.generator = j["generator"].value("spec", "");
    m.seed = j["generator"].value("seed", 0ull);
  }
  finalize_manifold(m);
  return m;
}

inline void save_manifold(const Manifold& m, const std::string& path) {
  write_text_file(path, dump_json(manifold_to_json(m)));
}

inline Manifold load_manifold(const std::string& path) {
  return manifold_from_json(json::parse(read_text_file(path)));
}

// ---- field CSV: vertex_id,value_re[,value_im] -------------------------------

struct LoadedField {
  ComplexField values;
  bool is_complex = false;

  RealField real_or_throw() const {
    if (is_complex && values.imag().cwiseAbs().maxCoeff() != 0.0)
      throw std::invalid_argument("field: expected real values");
    return values.real();
  }
};

inline void save_field(const RealField& f, const std::string& path) {
  std::ostringstream os;
  os << "vertex_id,value_re\n";
  for (int i = 0; i < f.size(); ++i) os << i << "," << format_double(f(i)) << "\n";
  write_text_file(path, os.str());
}

inline void save_field(const ComplexField& f, const std::string& path) {
  std::ostringstream os;
  os << "vertex_id,value_re,value_im\n";
  for (int i = 0; i < f.size(); ++i)
    os << i << "," << format_double(f(i).real()) << "," << format_double(f(i).imag()) << "\n";
  write_text_file(path, os.str());
}

inline LoadedField load_field(const std::string& path) {
  std::istringstream is(read_text_file(path));
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("field file: empty");
  std::vector<std::pair<int, std::complex<double>>> rows;
  bool complex_file = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::getline(ls, tok, ',');
    const int id = std::stoi(tok);
    std::getline(ls, tok, ',');
    const double re = std::stod(tok);
    double im = 0.0;
    if (std::getline(ls, tok, ',')) {
      im = std::stod(tok);
      complex_file = true;
    }
    rows.push_back({id, {re, im}});
  }
  LoadedField out;
  out.is_complex = complex_file;
  out.values.resize(static_cast<int>(rows.size()));
  for (const auto& [id, v] : rows) {
    if (id < 0 || id >= out.values.size())
      throw std::invalid_argument("field file: vertex id out of range");
    out.values(id) = v;
  }
  return out;
}

// ---- operator cache ----------------------------------------------------------
// Eigenpair dump keyed by a content hash of the manifold file; a mismatching
// hash invalidates the cache.

inline json operator_to_json(const SpectralOperator& op, std::uint64_t manifold_hash) {
  json j;
  j["manifold_hash"] = manifold_hash;
  j["form"] = to_string(op.form);
  j["order_m"] = op.order_m;
  j["kernel_dim"] = op.kernel_dim;
  j["eigenvalues"] = std::vector<double>(op.eigenvalues.begin(), op.eigenvalues.end());
  j["measure"] = std::vector<double>(op.measure.begin(), op.measure.end());
  json vecs = json::array();
  for (int i = 0; i < op.size(); ++i)
    vecs.push_back(std::vector<double>(op.eigenvectors.col(i).begin(), op.eigenvectors.col(i).end()));
  j["eigenvectors"] = vecs;
  return j;
}

inline void save_operator_cache(const SpectralOperator& op, std::uint64_t manifold_hash,
                                const std::string& path) {
  write_text_file(path, dump_json(operator_to_json(op, manifold_hash)));
}

inline SpectralOperator load_operator_cache(const std::string& path, std::uint64_t manifold_hash) {
  const json j = json::parse(read_text_file(path));
  if (j.at("manifold_hash").get<std::uint64_t>() != manifold_hash)
    throw std::runtime_error("operator cache: manifold hash mismatch, cache invalidated");
  SpectralOperator op;
  op.form = operator_form_from_string(j.at("form").get<std::string>());
  op.order_m = j.at("order_m").get<double>();
  op.kernel_dim = j.at("kernel_dim").get<int>();
  const auto evals = j.at("eigenvalues").get<std::vector<double>>();
  const auto meas = j.at("measure").get<std::vector<double>>();
  const int n = static_cast<int>(evals.size());
  op.eigenvalues = Eigen::Map<const Eigen::VectorXd>(evals.data(), n);
  op.measure = Eigen::Map<const Eigen::VectorXd>(meas.data(), n);
  op.eigenvectors.resize(n, n);
  const auto& vecs = j.at("eigenvectors");
  for (int i = 0; i < n; ++i) {
    const auto col = vecs.at(i).get<std::vector<double>>();
    op.eigenvectors.col(i) = Eigen::Map<const Eigen::VectorXd>(col.data(), n);
  }
  return op;
}

inline std::uint64_t hash_file(const std::string& path) { return fnv1a64(read_text_file(path)); }

}  // namespace soblab
