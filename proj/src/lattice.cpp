#include "currentlab/lattice.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>

namespace currentlab {

std::string to_string(Coord c) { return std::to_string(c.x) + "," + std::to_string(c.y); }

namespace lattice {
namespace {

constexpr std::array<Coord, 4> kDirs{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};  // E N W S

int find_root(std::vector<int>& parent, int a) {
  while (parent[static_cast<std::size_t>(a)] != a) {
    auto& p = parent[static_cast<std::size_t>(a)];
    p = parent[static_cast<std::size_t>(p)];
    a = p;
  }
  return a;
}

}  // namespace

DomainGraph DomainGraph::from_parts(std::vector<Coord> vertices,
                                    const std::vector<std::pair<Coord, Coord>>& edges,
                                    std::string kind, std::vector<int> params) {
  DomainGraph g;
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  g.vertices_ = std::move(vertices);
  g.kind_ = std::move(kind);
  g.params_ = std::move(params);
  g.build_index();

  std::vector<Edge> es;
  es.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    const Coord d = b - a;
    if (std::abs(d.x) + std::abs(d.y) != 1) {
      throw Error("edge " + to_string(a) + " - " + to_string(b) + " is not a lattice edge");
    }
    const int ia = g.index_of(a);
    const int ib = g.index_of(b);
    if (ia < 0 || ib < 0) {
      throw Error("edge " + to_string(a) + " - " + to_string(b) + " has an endpoint outside the vertex set");
    }
    es.push_back({std::min(ia, ib), std::max(ia, ib)});
  }
  std::sort(es.begin(), es.end(), [](const Edge& l, const Edge& r) {
    return l.u != r.u ? l.u < r.u : l.v < r.v;
  });
  es.erase(std::unique(es.begin(), es.end(),
                       [](const Edge& l, const Edge& r) { return l.u == r.u && l.v == r.v; }),
           es.end());
  g.edges_ = std::move(es);

  g.right_.assign(g.vertices_.size(), -1);
  g.up_.assign(g.vertices_.size(), -1);
  for (int e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edges_[static_cast<std::size_t>(e)];
    const Coord a = g.vertex(ed.u);
    const Coord b = g.vertex(ed.v);
    // u < v in lexicographic order, so b is either right of or above a.
    if (b.x == a.x + 1) {
      g.right_[static_cast<std::size_t>(ed.u)] = e;
    } else {
      g.up_[static_cast<std::size_t>(ed.u)] = e;
    }
  }
  g.build_boundary();
  g.reset_classes();
  return g;
}

void DomainGraph::build_index() {
  grid_.clear();
  if (vertices_.empty()) {
    lo_ = {0, 0};
    hi_ = {-1, -1};
    return;
  }
  lo_ = hi_ = vertices_.front();
  for (const Coord& c : vertices_) {
    lo_.x = std::min(lo_.x, c.x);
    lo_.y = std::min(lo_.y, c.y);
    hi_.x = std::max(hi_.x, c.x);
    hi_.y = std::max(hi_.y, c.y);
  }
  const auto w = static_cast<std::size_t>(hi_.x - lo_.x + 1);
  const auto h = static_cast<std::size_t>(hi_.y - lo_.y + 1);
  grid_.assign(w * h, -1);
  for (int i = 0; i < num_vertices(); ++i) {
    const Coord c = vertex(i);
    grid_[static_cast<std::size_t>(c.x - lo_.x) * h + static_cast<std::size_t>(c.y - lo_.y)] = i;
  }
}

int DomainGraph::index_of(Coord c) const {
  if (c.x < lo_.x || c.x > hi_.x || c.y < lo_.y || c.y > hi_.y) return -1;
  const auto h = static_cast<std::size_t>(hi_.y - lo_.y + 1);
  return grid_[static_cast<std::size_t>(c.x - lo_.x) * h + static_cast<std::size_t>(c.y - lo_.y)];
}

int DomainGraph::edge_between(Coord a, Coord b) const {
  if (b < a) std::swap(a, b);
  const int ia = index_of(a);
  if (ia < 0) return -1;
  const Coord d = b - a;
  if (d.x == 1 && d.y == 0) return right_edge(ia);
  if (d.x == 0 && d.y == 1) return up_edge(ia);
  return -1;
}

int DomainGraph::left_edge(int v) const {
  const int w = index_of(vertex(v) - Coord{1, 0});
  return w < 0 ? -1 : right_edge(w);
}

int DomainGraph::down_edge(int v) const {
  const int w = index_of(vertex(v) - Coord{0, 1});
  return w < 0 ? -1 : up_edge(w);
}

void DomainGraph::build_boundary() {
  boundary_.clear();
  on_boundary_.assign(vertices_.size(), 0);
  for (int v = 0; v < num_vertices(); ++v) {
    if (right_edge(v) < 0 || up_edge(v) < 0 || left_edge(v) < 0 || down_edge(v) < 0) {
      boundary_.push_back(v);
      on_boundary_[static_cast<std::size_t>(v)] = 1;
    }
  }
}

void DomainGraph::reset_classes() {
  class_of_.resize(vertices_.size());
  std::iota(class_of_.begin(), class_of_.end(), 0);
  class_names_.clear();
  class_names_.reserve(vertices_.size());
  for (const Coord& c : vertices_) class_names_.push_back(to_string(c));
}

int DomainGraph::class_by_name(const std::string& name) const {
  for (int c = 0; c < num_classes(); ++c) {
    if (class_names_[static_cast<std::size_t>(c)] == name) return c;
  }
  return -1;
}

std::vector<int> DomainGraph::class_members(int c) const {
  std::vector<int> out;
  for (int v = 0; v < num_vertices(); ++v) {
    if (class_of(v) == c) out.push_back(v);
  }
  return out;
}

std::vector<int> DomainGraph::indices_of(std::span<const Coord> coords) const {
  std::vector<int> out;
  out.reserve(coords.size());
  for (const Coord& c : coords) {
    const int i = index_of(c);
    if (i < 0) throw Error("vertex " + to_string(c) + " is not in the domain");
    out.push_back(i);
  }
  return out;
}

DomainGraph build_box(int n) { return build_box({0, 0}, n); }

DomainGraph build_box(Coord center, int n) {
  if (n < 0) throw Error("box size must be nonnegative");
  DomainGraph g = build_rect(center - Coord{n, n}, 2 * n + 1, 2 * n + 1);
  return g;
}

DomainGraph build_rect(Coord origin, int width, int height) {
  if (width < 1 || height < 1) throw Error("rectangle needs at least one vertex per side");
  std::vector<Coord> vs;
  std::vector<std::pair<Coord, Coord>> es;
  vs.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int i = 0; i < width; ++i) {
    for (int j = 0; j < height; ++j) {
      const Coord c = origin + Coord{i, j};
      vs.push_back(c);
      if (i + 1 < width) es.emplace_back(c, c + Coord{1, 0});
      if (j + 1 < height) es.emplace_back(c, c + Coord{0, 1});
    }
  }
  std::vector<int> params{origin.x, origin.y, width, height};
  std::string kind = "rect";
  if (width == height && width % 2 == 1) {
    kind = "box";
    params = {origin.x + width / 2, origin.y + height / 2, width / 2};
  }
  return DomainGraph::from_parts(std::move(vs), es, kind, params);
}

DomainGraph build_annulus(Coord center, int inner, int outer) {
  if (inner < 1 || inner > outer) throw Error("annulus requires 1 <= r <= R");
  std::vector<Coord> vs;
  for (int i = -outer; i <= outer; ++i) {
    for (int j = -outer; j <= outer; ++j) {
      if (std::max(std::abs(i), std::abs(j)) >= inner) vs.push_back(center + Coord{i, j});
    }
  }
  const Annulus ann{center, inner, outer};
  std::vector<std::pair<Coord, Coord>> es;
  for (const Coord& c : vs) {
    for (const Coord d : {Coord{1, 0}, Coord{0, 1}}) {
      if (ann.contains(c + d)) es.emplace_back(c, c + d);
    }
  }
  return DomainGraph::from_parts(std::move(vs), es, "annulus", {center.x, center.y, inner, outer});
}

DomainGraph build_induced(std::vector<Coord> vertices, std::string kind) {
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  std::vector<std::pair<Coord, Coord>> es;
  for (const Coord& c : vertices) {
    for (const Coord d : {Coord{1, 0}, Coord{0, 1}}) {
      if (std::binary_search(vertices.begin(), vertices.end(), c + d)) es.emplace_back(c, c + d);
    }
  }
  return DomainGraph::from_parts(std::move(vertices), es, std::move(kind));
}

DomainGraph edge_subgraph(const DomainGraph& g, std::span<const int> edge_ids) {
  std::vector<Coord> vs;
  std::vector<std::pair<Coord, Coord>> es;
  for (int e : edge_ids) {
    if (e < 0 || e >= g.num_edges()) throw Error("edge id out of range");
    const Coord a = g.vertex(g.edge(e).u);
    const Coord b = g.vertex(g.edge(e).v);
    vs.push_back(a);
    vs.push_back(b);
    es.emplace_back(a, b);
  }
  return DomainGraph::from_parts(std::move(vs), es, "custom");
}

DomainGraph merge_vertices(const DomainGraph& g, const std::vector<std::vector<Coord>>& classes,
                           const std::vector<std::string>& names) {
  std::vector<int> owner(static_cast<std::size_t>(g.num_vertices()), -1);
  for (std::size_t k = 0; k < classes.size(); ++k) {
    for (const Coord& c : classes[k]) {
      const int v = g.index_of(c);
      if (v < 0) throw Error("merge class contains " + to_string(c) + ", which is not a vertex");
      auto& o = owner[static_cast<std::size_t>(v)];
      if (o >= 0 && o != static_cast<int>(k)) throw Error("merge classes overlap at " + to_string(c));
      o = static_cast<int>(k);
    }
  }

  // Union of the existing partition with the requested classes.
  std::vector<int> parent(static_cast<std::size_t>(g.num_vertices()));
  std::iota(parent.begin(), parent.end(), 0);
  auto unite = [&](int a, int b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  };
  std::vector<int> first_of_old(static_cast<std::size_t>(g.num_classes()), -1);
  for (int v = 0; v < g.num_vertices(); ++v) {
    auto& f = first_of_old[static_cast<std::size_t>(g.class_of(v))];
    if (f < 0) f = v; else unite(f, v);
  }
  std::vector<int> first_of_new(classes.size(), -1);
  for (int v = 0; v < g.num_vertices(); ++v) {
    const int k = owner[static_cast<std::size_t>(v)];
    if (k < 0) continue;
    auto& f = first_of_new[static_cast<std::size_t>(k)];
    if (f < 0) f = v; else unite(f, v);
  }

  DomainGraph out = g;
  std::vector<int> root_to_class(static_cast<std::size_t>(g.num_vertices()), -1);
  out.class_names_.clear();
  for (int v = 0; v < g.num_vertices(); ++v) {
    const int r = find_root(parent, v);
    auto& c = root_to_class[static_cast<std::size_t>(r)];
    if (c < 0) {
      c = static_cast<int>(out.class_names_.size());
      out.class_names_.emplace_back();
    }
    out.class_of_[static_cast<std::size_t>(v)] = c;
  }
  // Names: a requested name wins, then an inherited merged name, then coordinates.
  std::vector<int> size(out.class_names_.size(), 0);
  for (int v = 0; v < g.num_vertices(); ++v) ++size[static_cast<std::size_t>(out.class_of(v))];
  for (int v = 0; v < g.num_vertices(); ++v) {
    auto& name = out.class_names_[static_cast<std::size_t>(out.class_of(v))];
    const int k = owner[static_cast<std::size_t>(v)];
    if (k >= 0 && static_cast<std::size_t>(k) < names.size() && !names[static_cast<std::size_t>(k)].empty()) {
      name = names[static_cast<std::size_t>(k)];
    }
  }
  for (int v = 0; v < g.num_vertices(); ++v) {
    const int c = out.class_of(v);
    auto& name = out.class_names_[static_cast<std::size_t>(c)];
    if (!name.empty()) continue;
    const auto& old = g.class_name(g.class_of(v));
    if (size[static_cast<std::size_t>(c)] == 1) {
      name = to_string(g.vertex(v));
    } else if (old != to_string(g.vertex(v))) {
      name = old;
    }
  }
  int anon = 0;
  for (std::size_t c = 0; c < out.class_names_.size(); ++c) {
    if (out.class_names_[c].empty()) out.class_names_[c] = "M" + std::to_string(anon++);
  }
  return out;
}

std::vector<int> boundary_neighborhood(const DomainGraph& g, int r) {
  if (r < 0) throw Error("boundary neighbourhood radius must be nonnegative");
  if (g.num_vertices() == 0) return {};
  // Multi-source BFS with king moves over the bounding box gives L-infinity distances.
  const Coord lo = g.min_corner();
  const Coord hi = g.max_corner();
  const int w = hi.x - lo.x + 1;
  const int h = hi.y - lo.y + 1;
  std::vector<int> dist(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
  auto at = [&](Coord c) -> int& {
    return dist[static_cast<std::size_t>(c.x - lo.x) * static_cast<std::size_t>(h) +
                static_cast<std::size_t>(c.y - lo.y)];
  };
  std::deque<Coord> queue;
  for (int v : g.boundary()) {
    at(g.vertex(v)) = 0;
    queue.push_back(g.vertex(v));
  }
  while (!queue.empty()) {
    const Coord c = queue.front();
    queue.pop_front();
    const int d = at(c);
    if (d >= r) continue;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        const Coord n = c + Coord{dx, dy};
        if (n.x < lo.x || n.x > hi.x || n.y < lo.y || n.y > hi.y) continue;
        if (at(n) >= 0) continue;
        at(n) = d + 1;
        queue.push_back(n);
      }
    }
  }
  std::vector<int> out;
  for (int v = 0; v < g.num_vertices(); ++v) {
    const int d = at(g.vertex(v));
    if (d >= 0 && d <= r) out.push_back(v);
  }
  return out;
}

std::array<Coord, 2> faces_of_edge(Coord a, Coord b) {
  if (b < a) std::swap(a, b);
  if (b.x == a.x + 1) return {Coord{a.x, a.y - 1}, Coord{a.x, a.y}};  // below, above
  return {Coord{a.x - 1, a.y}, Coord{a.x, a.y}};                        // left, right
}

int DualGraph::index_of(Coord face) const {
  if (face.x < lo.x || face.x > hi.x || face.y < lo.y || face.y > hi.y) return -1;
  const auto h = static_cast<std::size_t>(hi.y - lo.y + 1);
  return grid[static_cast<std::size_t>(face.x - lo.x) * h + static_cast<std::size_t>(face.y - lo.y)];
}

int DualGraph::num_interior() const {
  return static_cast<int>(std::count(interior.begin(), interior.end(), std::uint8_t{1}));
}

DualGraph dual_of(const DomainGraph& g) {
  DualGraph d;
  std::vector<Coord> faces;
  faces.reserve(static_cast<std::size_t>(g.num_edges()) * 2);
  for (const Edge& e : g.edges()) {
    const auto fs = faces_of_edge(g.vertex(e.u), g.vertex(e.v));
    faces.push_back(fs[0]);
    faces.push_back(fs[1]);
  }
  std::sort(faces.begin(), faces.end());
  faces.erase(std::unique(faces.begin(), faces.end()), faces.end());
  d.faces = std::move(faces);
  if (!d.faces.empty()) {
    d.lo = d.hi = d.faces.front();
    for (const Coord& f : d.faces) {
      d.lo.x = std::min(d.lo.x, f.x);
      d.lo.y = std::min(d.lo.y, f.y);
      d.hi.x = std::max(d.hi.x, f.x);
      d.hi.y = std::max(d.hi.y, f.y);
    }
    const auto h = static_cast<std::size_t>(d.hi.y - d.lo.y + 1);
    d.grid.assign(static_cast<std::size_t>(d.hi.x - d.lo.x + 1) * h, -1);
    for (int i = 0; i < d.num_faces(); ++i) {
      const Coord f = d.faces[static_cast<std::size_t>(i)];
      d.grid[static_cast<std::size_t>(f.x - d.lo.x) * h + static_cast<std::size_t>(f.y - d.lo.y)] = i;
    }
  }
  d.dual_edges.reserve(static_cast<std::size_t>(g.num_edges()));
  for (const Edge& e : g.edges()) {
    const auto fs = faces_of_edge(g.vertex(e.u), g.vertex(e.v));
    d.dual_edges.push_back({d.index_of(fs[0]), d.index_of(fs[1])});
  }
  d.interior.assign(d.faces.size(), 0);
  for (int i = 0; i < d.num_faces(); ++i) {
    const Coord f = d.faces[static_cast<std::size_t>(i)];
    const int ll = g.index_of(f);
    const int lr = g.index_of(f + Coord{1, 0});
    const int ul = g.index_of(f + Coord{0, 1});
    if (ll >= 0 && lr >= 0 && ul >= 0 && g.right_edge(ll) >= 0 && g.up_edge(ll) >= 0 &&
        g.up_edge(lr) >= 0 && g.right_edge(ul) >= 0) {
      d.interior[static_cast<std::size_t>(i)] = 1;
    }
  }
  return d;
}

int euler_characteristic(const DomainGraph& g) {
  return g.num_vertices() - g.num_edges() + dual_of(g).num_interior();
}

bool is_connected(const DomainGraph& g) {
  if (g.num_vertices() == 0) return true;
  std::vector<int> parent(static_cast<std::size_t>(g.num_vertices()));
  std::iota(parent.begin(), parent.end(), 0);
  int comps = g.num_vertices();
  for (const Edge& e : g.edges()) {
    const int a = find_root(parent, e.u);
    const int b = find_root(parent, e.v);
    if (a != b) {
      parent[static_cast<std::size_t>(a)] = b;
      --comps;
    }
  }
  return comps == 1;
}

namespace {

Coord right_face_of(Coord a, int dir) {
  switch (dir) {
    case 0: return {a.x, a.y - 1};      // heading east, face below
    case 1: return {a.x, a.y};          // heading north, face to the east
    case 2: return {a.x - 1, a.y};      // heading west, face above
    default: return {a.x - 1, a.y - 1}; // heading south, face to the west
  }
}

}  // namespace

std::vector<BoundaryStep> boundary_walk(const DomainGraph& g) {
  std::vector<BoundaryStep> walk;
  if (g.num_edges() == 0) return walk;

  // Smallest midpoint, compared in doubled coordinates.
  int best = -1;
  Coord best_mid{0, 0};
  for (int e = 0; e < g.num_edges(); ++e) {
    const Coord a = g.vertex(g.edge(e).u);
    const Coord b = g.vertex(g.edge(e).v);
    const Coord mid{a.x + b.x, a.y + b.y};
    if (best < 0 || mid < best_mid) {
      best = e;
      best_mid = mid;
    }
  }
  const Coord a = g.vertex(g.edge(best).u);
  const Coord b = g.vertex(g.edge(best).v);
  Coord start;
  int start_dir;
  if (b.x == a.x) {  // vertical: walk south so the outer face is on the right (west)
    start = b;
    start_dir = 3;
  } else {           // horizontal: walk east with the outer face below
    start = a;
    start_dir = 0;
  }

  auto edge_towards = [&](Coord from, int dir) {
    return g.edge_between(from, from + kDirs[static_cast<std::size_t>(dir)]);
  };

  Coord cur = start;
  int dir = start_dir;
  const std::size_t guard = 4 * static_cast<std::size_t>(g.num_edges()) + 4;
  do {
    const int e = edge_towards(cur, dir);
    const Coord next = cur + kDirs[static_cast<std::size_t>(dir)];
    walk.push_back({e, g.index_of(cur), g.index_of(next), right_face_of(cur, dir)});
    cur = next;
    // Right-hand rule: prefer right turn, then straight, left, back.
    int chosen = -1;
    for (int turn : {3, 0, 1, 2}) {
      const int nd = (dir + turn) % 4;
      if (edge_towards(cur, nd) >= 0) {
        chosen = nd;
        break;
      }
    }
    dir = chosen;
    if (walk.size() > guard) throw Error("boundary walk did not close");
  } while (!(cur == start && dir == start_dir));
  return walk;
}

std::vector<int> Quad::arc_of_vertex() const {
  std::vector<int> out(static_cast<std::size_t>(domain.num_vertices()), -1);
  for (int k = 0; k < 4; ++k) {
    for (int v : arcs[static_cast<std::size_t>(k)]) out[static_cast<std::size_t>(v)] = k;
  }
  return out;
}

void validate_quad(const Quad& q) {
  std::vector<int> seen(static_cast<std::size_t>(q.domain.num_vertices()), 0);
  for (const auto& arc : q.arcs) {
    for (int v : arc) {
      if (v < 0 || v >= q.domain.num_vertices()) throw Error("quad arc vertex out of range");
      if (!q.domain.is_boundary(v)) throw Error("quad arc vertex " + to_string(q.domain.vertex(v)) + " is not on the boundary");
      if (seen[static_cast<std::size_t>(v)]++) throw Error("quad arcs overlap at " + to_string(q.domain.vertex(v)));
    }
  }
  for (int v : q.domain.boundary()) {
    if (!seen[static_cast<std::size_t>(v)]) throw Error("quad arcs do not cover boundary vertex " + to_string(q.domain.vertex(v)));
  }
}

Quad make_rect_quad(Coord origin, int width, int height) {
  Quad q;
  q.domain = build_rect(origin, width, height);
  const DomainGraph& g = q.domain;
  auto id = [&](int i, int j) { return g.index_of(origin + Coord{i, j}); };
  auto& ab = q.arcs[0];
  auto& bc = q.arcs[1];
  auto& cd = q.arcs[2];
  auto& da = q.arcs[3];
  for (int j = height - 1; j >= 0; --j) ab.push_back(id(0, j));
  if (width > 1) {
    for (int i = 1; i + 1 < width; ++i) bc.push_back(id(i, 0));
    for (int j = 0; j < height; ++j) cd.push_back(id(width - 1, j));
    if (height > 1) {
      for (int i = width - 2; i >= 1; --i) da.push_back(id(i, height - 1));
    }
  }
  validate_quad(q);
  return q;
}

Quad make_free_quad(DomainGraph g) {
  Quad q;
  q.domain = std::move(g);
  std::vector<std::uint8_t> used(static_cast<std::size_t>(q.domain.num_vertices()), 0);
  for (const auto& step : boundary_walk(q.domain)) {
    if (!used[static_cast<std::size_t>(step.from)]++) q.arcs[1].push_back(step.from);
  }
  for (int v : q.domain.boundary()) {
    if (!used[static_cast<std::size_t>(v)]++) q.arcs[1].push_back(v);
  }
  validate_quad(q);
  return q;
}

}  // namespace lattice
}  // namespace currentlab
