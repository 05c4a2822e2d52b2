#include "vemdd/mesh_generators.hpp"

#include "vemdd/error.hpp"
#include "vemdd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace vemdd {

std::vector<Point> uniform_seeds_2d(std::size_t n_seeds, std::uint64_t rng_seed) {
  std::mt19937_64 gen(rng_seed);
  auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  std::vector<Point> seeds(n_seeds);
  for (auto& s : seeds) {
    const double x = uniform();
    const double y = uniform();
    s = {x, y, 0.0};
  }
  return seeds;
}

namespace {

// Box sides as negative clip labels.
constexpr long kBottom = -1; // y = 0
constexpr long kRight = -2;  // x = 1
constexpr long kTop = -3;    // y = 1
constexpr long kLeft = -4;   // x = 0

using VertexKey = std::array<long, 3>;

struct ClipPolygon {
  std::vector<Vec2> pts;
  std::vector<long> out_label; // label of the edge pts[i] -> pts[i+1]
};

ClipPolygon unit_box() {
  return {{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}, {kBottom, kRight, kTop, kLeft}};
}

// Keep {x : (x - m).(q - p) <= 0}.
ClipPolygon clip(const ClipPolygon& poly, const Vec2& p, const Vec2& q, long label) {
  const Vec2 d = q - p;
  const Vec2 m = 0.5 * (p + q);
  const double eps = 1e-14 * d.norm();
  const std::size_t n = poly.pts.size();
  std::vector<double> s(n);
  bool any_out = false;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = (poly.pts[i] - m).dot(d);
    any_out = any_out || s[i] > eps;
  }
  if (!any_out) {
    return poly;
  }
  ClipPolygon out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const bool cur_in = s[i] <= eps;
    const bool nxt_in = s[j] <= eps;
    const Vec2& a = poly.pts[i];
    const Vec2& b = poly.pts[j];
    if (cur_in) {
      if (nxt_in) {
        out.pts.push_back(a);
        out.out_label.push_back(poly.out_label[i]);
      } else if (s[i] < -eps) {
        out.pts.push_back(a);
        out.out_label.push_back(poly.out_label[i]);
        out.pts.push_back(a + (s[i] / (s[i] - s[j])) * (b - a));
        out.out_label.push_back(label);
      } else {
        out.pts.push_back(a);
        out.out_label.push_back(label);
      }
    } else if (nxt_in && s[j] < -eps) {
      out.pts.push_back(a + (s[i] / (s[i] - s[j])) * (b - a));
      out.out_label.push_back(poly.out_label[i]);
    }
  }
  return out;
}

VertexKey make_key(long cell, long a, long b) {
  VertexKey k{cell, a, b};
  std::sort(k.begin(), k.end());
  return k;
}

double side_value(long side) { return (side == kBottom || side == kLeft) ? 0.0 : 1.0; }
bool side_is_horizontal(long side) { return side == kBottom || side == kTop; }

// Coordinates are recomputed from the generating seeds and sides in a fixed
// (sorted) order so every cell sharing a vertex sees identical bits.
Vec2 key_coordinates(const VertexKey& key, const std::vector<Point>& seeds) {
  std::vector<long> sides;
  std::vector<long> ids;
  for (long l : key) {
    (l < 0 ? sides : ids).push_back(l);
  }
  auto seed = [&seeds](long i) { return Vec2(seeds[i][0], seeds[i][1]); };
  if (sides.size() >= 2) {
    Vec2 c;
    for (long s : sides) {
      if (side_is_horizontal(s)) {
        c.y() = side_value(s);
      } else {
        c.x() = side_value(s);
      }
    }
    return c;
  }
  if (sides.size() == 1) {
    const Vec2 a = seed(ids[0]);
    const Vec2 b = seed(ids[1]);
    const Vec2 d = b - a;
    const Vec2 m = 0.5 * (a + b);
    const double c = side_value(sides[0]);
    if (side_is_horizontal(sides[0])) {
      return {m.x() - (c - m.y()) * d.y() / d.x(), c};
    }
    return {c, m.y() - (c - m.x()) * d.x() / d.y()};
  }
  const Vec2 a = seed(ids[0]);
  const Vec2 b = seed(ids[1]) - a;
  const Vec2 c = seed(ids[2]) - a;
  const double den = 2.0 * (b.x() * c.y() - b.y() * c.x());
  const double ux = (c.y() * b.squaredNorm() - b.y() * c.squaredNorm()) / den;
  const double uy = (b.x() * c.squaredNorm() - c.x() * b.squaredNorm()) / den;
  return {a.x() + ux, a.y() + uy};
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) {
      parent[std::max(a, b)] = std::min(a, b);
    }
  }
};

} // namespace

PolyMesh voronoi_from_seeds(const std::vector<Point>& seeds) {
  const std::size_t n = seeds.size();
  if (n == 0) {
    throw std::invalid_argument("voronoi_from_seeds: need at least one seed");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (int d = 0; d < 2; ++d) {
      if (!(seeds[i][d] >= 0.0 && seeds[i][d] <= 1.0)) {
        throw std::invalid_argument("voronoi_from_seeds: seed " + std::to_string(i) + " outside the unit square");
      }
    }
  }

  // Bucket grid for neighbour search.
  const int g = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n))));
  const double hb = 1.0 / g;
  auto bucket_of = [g](double x) { return std::min(g - 1, static_cast<int>(x * g)); };
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(g) * g);
  for (std::size_t i = 0; i < n; ++i) {
    buckets[bucket_of(seeds[i][0]) + g * bucket_of(seeds[i][1])].push_back(static_cast<int>(i));
  }

  std::vector<std::vector<VertexKey>> cell_keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p(seeds[i][0], seeds[i][1]);
    const int bi = bucket_of(p.x());
    const int bj = bucket_of(p.y());
    ClipPolygon poly = unit_box();
    for (int r = 0;; ++r) {
      bool visited_any = false;
      for (int jj = bj - r; jj <= bj + r; ++jj) {
        for (int ii = bi - r; ii <= bi + r; ++ii) {
          if (std::max(std::abs(ii - bi), std::abs(jj - bj)) != r || ii < 0 || jj < 0 || ii >= g || jj >= g) {
            continue;
          }
          visited_any = true;
          for (int q : buckets[ii + g * jj]) {
            if (q == static_cast<int>(i)) {
              continue;
            }
            const Vec2 pq(seeds[q][0], seeds[q][1]);
            if ((pq - p).norm() <= 1e-12) {
              throw DuplicateSeedError(std::min<std::size_t>(i, q), std::max<std::size_t>(i, q));
            }
            poly = clip(poly, p, pq, q);
          }
        }
      }
      double radius = 0.0;
      for (const auto& v : poly.pts) {
        radius = std::max(radius, (v - p).norm());
      }
      // Distance from p to the unvisited region (sides beyond the box hold no seeds).
      double reach = std::numeric_limits<double>::infinity();
      if (bi - r > 0) reach = std::min(reach, p.x() - (bi - r) * hb);
      if (bi + r < g - 1) reach = std::min(reach, (bi + r + 1) * hb - p.x());
      if (bj - r > 0) reach = std::min(reach, p.y() - (bj - r) * hb);
      if (bj + r < g - 1) reach = std::min(reach, (bj + r + 1) * hb - p.y());
      if (!visited_any && r > 0 && std::isinf(reach)) {
        break;
      }
      if (reach >= 2.0 * radius) {
        break;
      }
    }
    const std::size_t m = poly.pts.size();
    cell_keys[i].reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
      cell_keys[i].push_back(make_key(static_cast<long>(i), poly.out_label[(j + m - 1) % m], poly.out_label[j]));
    }
  }

  // Global vertices by key, in order of first appearance.
  std::map<VertexKey, int> key_ids;
  std::vector<Vec2> coords;
  std::vector<std::vector<int>> loops(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& key : cell_keys[i]) {
      auto [it, inserted] = key_ids.try_emplace(key, static_cast<int>(coords.size()));
      if (inserted) {
        coords.push_back(key_coordinates(key, seeds));
      }
      loops[i].push_back(it->second);
    }
  }

  // Co-circular seeds produce distinct keys for one geometric vertex.
  const double merge_tol = 1e-12;
  std::vector<int> order(coords.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&coords](int a, int b) {
    return coords[a].x() < coords[b].x() || (coords[a].x() == coords[b].x() && a < b);
  });
  UnionFind uf(coords.size());
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size() && coords[order[b]].x() - coords[order[a]].x() <= merge_tol; ++b) {
      if ((coords[order[a]] - coords[order[b]]).norm() <= merge_tol) {
        uf.unite(order[a], order[b]);
      }
    }
  }
  std::vector<int> compact(coords.size(), -1);
  std::vector<Point> vertices;
  for (auto& loop : loops) {
    std::vector<int> cleaned;
    for (int v : loop) {
      const int root = uf.find(v);
      if (compact[root] < 0) {
        compact[root] = static_cast<int>(vertices.size());
        vertices.push_back({coords[root].x(), coords[root].y(), 0.0});
      }
      const int id = compact[root];
      if (cleaned.empty() || cleaned.back() != id) {
        cleaned.push_back(id);
      }
    }
    while (cleaned.size() > 1 && cleaned.front() == cleaned.back()) {
      cleaned.pop_back();
    }
    loop = std::move(cleaned);
  }
  return PolyMesh::from_polygons(std::move(vertices), std::move(loops));
}

PolyMesh generate_voronoi_2d(std::size_t n_seeds, std::uint64_t rng_seed) {
  if (n_seeds < 1) {
    throw std::invalid_argument("generate_voronoi_2d: n_seeds must be >= 1");
  }
  return voronoi_from_seeds(uniform_seeds_2d(n_seeds, rng_seed));
}

PolyMesh generate_structured_box(int dim, int n) {
  if (dim != 2 && dim != 3) {
    throw std::invalid_argument("generate_structured_box: dim must be 2 or 3");
  }
  if (n < 1) {
    throw std::invalid_argument("generate_structured_box: n_per_axis must be >= 1");
  }
  const int np = n + 1;
  auto coord = [n](int i) { return static_cast<double>(i) / static_cast<double>(n); };
  if (dim == 2) {
    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>(np) * np);
    for (int j = 0; j < np; ++j) {
      for (int i = 0; i < np; ++i) {
        vertices.push_back({coord(i), coord(j), 0.0});
      }
    }
    auto vid = [np](int i, int j) { return i + np * j; };
    std::vector<std::vector<int>> cells;
    cells.reserve(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
      }
    }
    return PolyMesh::from_polygons(std::move(vertices), std::move(cells));
  }

  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>(np) * np * np);
  for (int k = 0; k < np; ++k) {
    for (int j = 0; j < np; ++j) {
      for (int i = 0; i < np; ++i) {
        vertices.push_back({coord(i), coord(j), coord(k)});
      }
    }
  }
  auto vid = [np](int i, int j, int k) { return i + np * (j + np * k); };
  const int nx_faces = np * n * n;
  // x-normal faces at (i, j, k): i in [0,n], j,k in [0,n)
  auto fx = [n, np](int i, int j, int k) { return i + np * (j + n * k); };
  auto fy = [n, np, nx_faces](int i, int j, int k) { return nx_faces + i + n * (j + np * k); };
  auto fz = [n, nx_faces](int i, int j, int k) { return 2 * nx_faces + i + n * (j + n * k); };
  std::vector<std::vector<int>> faces(static_cast<std::size_t>(3) * nx_faces);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < np; ++i) {
        faces[fx(i, j, k)] = {vid(i, j, k), vid(i, j + 1, k), vid(i, j + 1, k + 1), vid(i, j, k + 1)};
      }
    }
  }
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < np; ++j) {
      for (int i = 0; i < n; ++i) {
        faces[fy(i, j, k)] = {vid(i, j, k), vid(i, j, k + 1), vid(i + 1, j, k + 1), vid(i + 1, j, k)};
      }
    }
  }
  for (int k = 0; k < np; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        faces[fz(i, j, k)] = {vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k), vid(i, j + 1, k)};
      }
    }
  }
  std::vector<std::vector<int>> cells;
  cells.reserve(static_cast<std::size_t>(n) * n * n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        cells.push_back({fx(i, j, k), fx(i + 1, j, k), fy(i, j, k), fy(i, j + 1, k), fz(i, j, k), fz(i, j, k + 1)});
      }
    }
  }
  return PolyMesh::from_polyhedra(std::move(vertices), std::move(faces), std::move(cells));
}

} // namespace vemdd
