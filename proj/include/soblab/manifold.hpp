// Discrete metric-measure spaces: weighted graphs with a vertex measure and
// the shortest-path metric, plus the generators used by the experiments.
#pragma once

#include "soblab/common.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

namespace soblab {

struct Edge {
  int u = 0;
  int v = 0;
  double weight = 1.0;  // conductance w_uv > 0
  double length = 1.0;  // metric length l_uv > 0
};

struct Neighbor {
  int vertex;
  double weight;
  double length;
};

// Finite metric-measure space. Immutable after construction; distances and
// the breakpoint radii are precomputed so everything downstream is pure reads.
struct Manifold {
  Eigen::VectorXd mu;                            // vertex measure, mu(x) > 0
  std::vector<Edge> edges;
  std::vector<std::vector<Neighbor>> adjacency;  // built from edges
  Eigen::MatrixXd dist;                          // all-pairs shortest-path metric
  std::vector<double> sorted_radii;              // distinct positive distances, ascending
  std::vector<std::array<double, 2>> coords;     // empty unless the generator has geometry
  std::string generator;
  std::uint64_t seed = 0;

  int vertex_count() const { return static_cast<int>(mu.size()); }
  double total_measure() const { return mu.sum(); }
  double diameter() const { return sorted_radii.empty() ? 0.0 : sorted_radii.back(); }
};

struct Ball {
  int center = 0;
  double radius = 0.0;
  std::vector<int> members;  // open ball {y : d(center,y) < radius}, sorted
  double volume = 0.0;       // sum of mu over members
};

namespace detail {

inline void build_adjacency(Manifold& m) {
  m.adjacency.assign(m.vertex_count(), {});
  for (const Edge& e : m.edges) {
    m.adjacency[e.u].push_back({e.v, e.weight, e.length});
    m.adjacency[e.v].push_back({e.u, e.weight, e.length});
  }
}

inline void compute_distances(Manifold& m) {
  const int n = m.vertex_count();
  m.dist.setConstant(n, n, kInf);
  using Item = std::pair<double, int>;
  for (int src = 0; src < n; ++src) {
    auto row = m.dist.row(src);
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    row(src) = 0.0;
    heap.push({0.0, src});
    while (!heap.empty()) {
      const auto [d, x] = heap.top();
      heap.pop();
      if (d > row(x)) continue;
      for (const Neighbor& nb : m.adjacency[x]) {
        const double nd = d + nb.length;
        if (nd < row(nb.vertex)) {
          row(nb.vertex) = nd;
          heap.push({nd, nb.vertex});
        }
      }
    }
  }
  // enforce exact symmetry (Dijkstra is symmetric up to rounding on
  // symmetric inputs; make it bitwise so reports are order-independent)
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = std::min(m.dist(i, j), m.dist(j, i));
      m.dist(i, j) = d;
      m.dist(j, i) = d;
    }
}

inline void collect_radii(Manifold& m) {
  const int n = m.vertex_count();
  std::vector<double> r;
  r.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) r.push_back(m.dist(i, j));
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  m.sorted_radii = std::move(r);
}

}  // namespace detail

// Validates the metric-measure invariants and rejects disconnected or
// degenerate inputs. Called by every generator and by the file loader.
inline void finalize_manifold(Manifold& m) {
  const int n = m.vertex_count();
  if (n < 1) throw std::invalid_argument("manifold: empty vertex set");
  for (int i = 0; i < n; ++i)
    if (!(m.mu(i) > 0.0) || !std::isfinite(m.mu(i)))
      throw std::invalid_argument("manifold: vertex measure must be positive and finite");
  for (const Edge& e : m.edges) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n || e.u == e.v)
      throw std::invalid_argument("manifold: edge endpoints out of range");
    if (!(e.weight > 0.0) || !(e.length > 0.0))
      throw std::invalid_argument("manifold: edge weight and length must be positive");
  }
  detail::build_adjacency(m);
  detail::compute_distances(m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!std::isfinite(m.dist(i, j)))
        throw std::invalid_argument("manifold: graph is disconnected (no path " +
                                    std::to_string(i) + " -> " + std::to_string(j) + ")");
  detail::collect_radii(m);
}

inline Ball ball(const Manifold& m, int center, double radius) {
  if (center < 0 || center >= m.vertex_count())
    throw std::invalid_argument("ball: center out of range");
  if (!(radius > 0.0)) throw std::invalid_argument("ball: radius must be positive");
  Ball b;
  b.center = center;
  b.radius = radius;
  for (int y = 0; y < m.vertex_count(); ++y)
    if (m.dist(center, y) < radius) {
      b.members.push_back(y);
      b.volume += m.mu(y);
    }
  return b;
}

// Breakpoint radii: ball membership is piecewise constant in r, changing only
// at pairwise distances. Distances + midpoints + one beyond-diameter value
// realize every distinct open ball of every center.
inline std::vector<double> radius_grid(const Manifold& m) {
  if (m.sorted_radii.empty()) return {1.0};
  std::vector<double> grid;
  grid.reserve(2 * m.sorted_radii.size() + 1);
  for (std::size_t i = 0; i < m.sorted_radii.size(); ++i) {
    grid.push_back(m.sorted_radii[i]);
    if (i + 1 < m.sorted_radii.size())
      grid.push_back(0.5 * (m.sorted_radii[i] + m.sorted_radii[i + 1]));
  }
  grid.push_back(m.sorted_radii.back() * 1.5);
  return grid;
}

// Edge gradient magnitude |grad f|(x) = sqrt(sum_y w_xy (f(y)-f(x))^2 / l_xy^2).
// Length-normalized so the unit path graph gives plain differences.
template <typename Scalar>
RealField gradient_norm(const Manifold& m,
                        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f) {
  if (f.size() != m.vertex_count())
    throw std::invalid_argument("gradient_norm: field size mismatch");
  RealField out(m.vertex_count());
  for (int x = 0; x < m.vertex_count(); ++x) {
    double acc = 0.0;
    for (const Neighbor& nb : m.adjacency[x]) {
      const double diff = std::abs(f(nb.vertex) - f(x));
      acc += nb.weight * diff * diff / (nb.length * nb.length);
    }
    out(x) = std::sqrt(acc);
  }
  return out;
}

// ---- generators -----------------------------------------------------------

inline Manifold make_path(int n) {
  if (n < 1) throw std::invalid_argument("path: need at least one vertex");
  Manifold m;
  m.mu = Eigen::VectorXd::Ones(n);
  for (int i = 0; i + 1 < n; ++i) m.edges.push_back({i, i + 1, 1.0, 1.0});
  m.generator = "path(" + std::to_string(n) + ")";
  finalize_manifold(m);
  return m;
}

inline Manifold make_cycle(int n) {
  if (n < 3) throw std::invalid_argument("cycle: need at least three vertices");
  Manifold m;
  m.mu = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) m.edges.push_back({i, (i + 1) % n, 1.0, 1.0});
  m.generator = "cycle(" + std::to_string(n) + ")";
  finalize_manifold(m);
  return m;
}

inline Manifold make_torus_grid(int n1, int n2) {
  if (n1 < 3 || n2 < 3) throw std::invalid_argument("torus_grid: sides must be >= 3");
  Manifold m;
  const int n = n1 * n2;
  m.mu = Eigen::VectorXd::Ones(n);
  auto id = [n2](int i, int j) { return i * n2 + j; };
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      m.edges.push_back({id(i, j), id((i + 1) % n1, j), 1.0, 1.0});
      m.edges.push_back({id(i, j), id(i, (j + 1) % n2), 1.0, 1.0});
    }
  m.generator = "torus_grid(" + std::to_string(n1) + "," + std::to_string(n2) + ")";
  finalize_manifold(m);
  return m;
}

// Plain (non-periodic) grid; the per-edge coefficient field of a divergence
// form operator is supplied at operator assembly, not here.
inline Manifold make_divergence_grid(int n1, int n2) {
  if (n1 < 2 || n2 < 2) throw std::invalid_argument("divergence_grid: sides must be >= 2");
  Manifold m;
  m.mu = Eigen::VectorXd::Ones(n1 * n2);
  auto id = [n2](int i, int j) { return i * n2 + j; };
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      if (i + 1 < n1) m.edges.push_back({id(i, j), id(i + 1, j), 1.0, 1.0});
      if (j + 1 < n2) m.edges.push_back({id(i, j), id(i, j + 1), 1.0, 1.0});
    }
  m.generator = "divergence_grid(" + std::to_string(n1) + "," + std::to_string(n2) + ")";
  finalize_manifold(m);
  return m;
}

inline Manifold make_random_geometric(int n, double radius, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("random_geometric: need at least two vertices");
  if (!(radius > 0.0)) throw std::invalid_argument("random_geometric: radius must be positive");
  Manifold m;
  m.mu = Eigen::VectorXd::Ones(n);
  m.coords.resize(n);
  SplitMix64 rng(seed);
  for (int i = 0; i < n; ++i) m.coords[i] = {rng.next_double(), rng.next_double()};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dx = m.coords[i][0] - m.coords[j][0];
      const double dy = m.coords[i][1] - m.coords[j][1];
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d <= radius && d > 0.0) m.edges.push_back({i, j, 1.0, d});
    }
  std::ostringstream g;
  g << "random_geometric(" << n << "," << format_double(radius) << "," << seed << ")";
  m.generator = g.str();
  m.seed = seed;
  finalize_manifold(m);  // throws with a diagnostic if disconnected
  return m;
}

namespace detail {

inline std::vector<std::string> split_args(const std::string& inner) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : inner) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace detail

// Descriptor parser: path(n), cycle(n), torus_grid(n1,n2), divergence_grid(n1,n2),
// random_geometric(n,radius[,seed]). The seed argument is the default for
// generators that need one and the descriptor does not carry one.
inline Manifold build_manifold(const std::string& spec, std::uint64_t seed = 0) {
  const auto open = spec.find('(');
  const auto close = spec.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw std::invalid_argument("build_manifold: malformed spec '" + spec + "'");
  const std::string name = spec.substr(0, open);
  const auto args = detail::split_args(spec.substr(open + 1, close - open - 1));
  auto arg_int = [&](std::size_t i) { return std::stoi(args.at(i)); };
  auto arg_dbl = [&](std::size_t i) { return std::stod(args.at(i)); };
  if (name == "path") return make_path(arg_int(0));
  if (name == "cycle") return make_cycle(arg_int(0));
  if (name == "torus_grid") return make_torus_grid(arg_int(0), arg_int(1));
  if (name == "divergence_grid") return make_divergence_grid(arg_int(0), arg_int(1));
  if (name == "random_geometric") {
    const std::uint64_t s = args.size() >= 3 ? std::stoull(args[2]) : seed;
    return make_random_geometric(arg_int(0), arg_dbl(1), s);
  }
  throw std::invalid_argument("build_manifold: unknown generator '" + name + "'");
}

}  // namespace soblab
