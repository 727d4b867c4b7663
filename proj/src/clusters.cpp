#include "currentlab/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace currentlab::clusters {

namespace {

std::size_t uz(int i) { return static_cast<std::size_t>(i); }

void check_bits(const DomainGraph& g, Bits bits) {
  if (bits.size() != uz(g.num_edges())) throw Error("trace does not match the domain");
}

// Twice the sup-distance from x to the centre of face f.
int face_dist2(Coord f, Coord x) {
  return std::max(std::abs(2 * f.x + 1 - 2 * x.x), std::abs(2 * f.y + 1 - 2 * x.y));
}

}  // namespace

Region::Region(const DomainGraph& g, const std::function<bool(Coord)>& keep) {
  local_.assign(uz(g.num_vertices()), -1);
  for (int v = 0; v < g.num_vertices(); ++v) {
    if (keep(g.vertex(v))) {
      local_[uz(v)] = static_cast<int>(vertices_.size());
      vertices_.push_back(v);
    }
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    const int a = local_[uz(g.edge(e).u)];
    const int b = local_[uz(g.edge(e).v)];
    if (a >= 0 && b >= 0) edges_.push_back({a, b, e});
  }
}

void Region::label(Bits positive, UnionFind& uf) const {
  uf.reset(size());
  for (const auto& [a, b, e] : edges_) {
    if (positive[uz(e)]) uf.unite(a, b);
  }
}

ClusterLabeling label_clusters(const DomainGraph& g, Bits positive, const DomainGraph& region) {
  check_bits(g, positive);
  UnionFind uf(region.num_vertices());
  for (int e = 0; e < region.num_edges(); ++e) {
    const Edge& re = region.edge(e);
    const int ge = g.edge_between(region.vertex(re.u), region.vertex(re.v));
    if (ge < 0) throw Error("region exceeds domain");
    if (positive[uz(ge)]) uf.unite(re.u, re.v);
  }
  for (int v = 0; v < region.num_vertices(); ++v) {
    if (!g.contains(region.vertex(v))) throw Error("region exceeds domain");
  }
  ClusterLabeling out;
  out.label.resize(uz(region.num_vertices()));
  for (int v = 0; v < region.num_vertices(); ++v) {
    out.label[uz(v)] = uf.find(v);
    if (out.label[uz(v)] == v) ++out.num_clusters;
  }
  return out;
}

void require_box(const DomainGraph& g, Coord x, int radius) {
  if (radius < 0) throw Error("negative radius");
  for (int dx = -radius; dx <= radius; ++dx) {
    for (int dy = -radius; dy <= radius; ++dy) {
      if (!g.contains(x + Coord{dx, dy})) {
        throw Error("box of radius " + std::to_string(radius) + " around " + to_string(x) + " leaves the domain");
      }
    }
  }
}

AnnulusClusters::AnnulusClusters(const DomainGraph& g, Coord x, int r, int R)
    : region_(g, [&](Coord c) {
        const int d = linf_norm(c - x);
        return d >= r && d <= R;
      }) {
  if (r < 0 || r > R) throw Error("annulus needs 0 <= r <= R");
  require_box(g, x, R);
  for (int v : region_.vertices()) {
    const int d = linf_norm(g.vertex(v) - x);
    inner_.push_back(d == r);
    outer_.push_back(d == R);
  }
}

int AnnulusClusters::count(Bits positive) {
  region_.label(positive, uf_);
  flags_.assign(uz(region_.size()), 0);
  for (int i = 0; i < region_.size(); ++i) {
    flags_[uz(uf_.find(i))] |= static_cast<std::uint8_t>(inner_[uz(i)] | (outer_[uz(i)] << 1));
  }
  return static_cast<int>(std::count(flags_.begin(), flags_.end(), std::uint8_t{3}));
}

BoxArms::BoxArms(const DomainGraph& g, Coord x, int R)
    : region_(g, [&](Coord c) { return linf_norm(c - x) <= R; }), R_(R) {
  for (int v : region_.vertices()) {
    dist_.push_back(linf_norm(g.vertex(v) - x));
    outer_.push_back(dist_.back() == R);
  }
}

std::vector<int> BoxArms::crossing_depths(Bits positive) {
  region_.label(positive, uf_);
  const int n = region_.size();
  best_.assign(uz(n), std::numeric_limits<int>::max());
  std::vector<std::uint8_t> touches(uz(n), 0);
  for (int i = 0; i < n; ++i) {
    const int root = uf_.find(i);
    best_[uz(root)] = std::min(best_[uz(root)], dist_[uz(i)]);
    touches[uz(root)] |= outer_[uz(i)];
  }
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if (touches[uz(i)]) out.push_back(best_[uz(i)]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool BoxArms::a4_square(Bits positive, int r) {
  const auto depths = crossing_depths(positive);
  return depths.size() >= 2 && depths[1] <= r;
}

HoleProbe::HoleProbe(const DomainGraph& g, Coord x, int r, int R) : g_(&g) {
  if (r < 1 || r > R) throw Error("annulus needs 1 <= r <= R");
  require_box(g, x, R);
  for (int fx = x.x - R - 1; fx <= x.x + R; ++fx) {
    for (int fy = x.y - R - 1; fy <= x.y + R; ++fy) {
      const Coord f{fx, fy};
      const int d2 = face_dist2(f, x);
      if (d2 < 2 * r - 1 || d2 > 2 * R + 1) continue;
      faces_.push_back(f);
      inner_.push_back(d2 == 2 * r - 1);
      outer_.push_back(d2 == 2 * R + 1);
    }
  }
  const int side = 2 * R + 2;
  const Coord lo{x.x - R - 1, x.y - R - 1};
  std::vector<int> grid(uz(side * side), -1);
  for (std::size_t i = 0; i < faces_.size(); ++i) {
    grid[uz((faces_[i].x - lo.x) * side + faces_[i].y - lo.y)] = static_cast<int>(i);
  }
  auto face_index = [&](Coord f) { return grid[uz((f.x - lo.x) * side + f.y - lo.y)]; };
  std::vector<std::vector<std::array<int, 2>>> adj(faces_.size());
  for (int e = 0; e < g.num_edges(); ++e) {
    const Coord a = g.vertex(g.edge(e).u);
    const Coord b = g.vertex(g.edge(e).v);
    const int da = linf_norm(a - x);
    const int db = linf_norm(b - x);
    if (da < r || da > R || db < r || db > R) continue;
    const auto fs = lattice::faces_of_edge(a, b);
    const int fa = face_index(fs[0]);
    const int fb = face_index(fs[1]);
    dual_.push_back({fa, fb, e});
    adj[uz(fa)].push_back({fb, e});
    adj[uz(fb)].push_back({fa, e});
  }
  adj_start_.push_back(0);
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    adj_.insert(adj_.end(), list.begin(), list.end());
    adj_start_.push_back(static_cast<int>(adj_.size()));
  }
}

HoleLabeling HoleProbe::label(Bits positive) {
  check_bits(*g_, positive);
  const int n = static_cast<int>(faces_.size());
  uf_.reset(n);
  for (const auto& [a, b, e] : dual_) {
    if (!positive[uz(e)]) uf_.unite(a, b);
  }
  HoleLabeling out;
  out.faces = faces_;
  out.label.resize(uz(n));
  std::vector<std::uint8_t> flags(uz(n), 0);
  for (int f = 0; f < n; ++f) {
    const int root = uf_.find(f);
    out.label[uz(f)] = root;
    if (root == f) ++out.num_holes;
    flags[uz(root)] |= static_cast<std::uint8_t>(inner_[uz(f)] | (outer_[uz(f)] << 1));
  }
  for (int f = 0; f < n; ++f) {
    if (flags[uz(f)] == 3) out.crossing.push_back(f);
  }
  return out;
}

std::vector<int> HoleProbe::bfs_path(const HoleLabeling& holes, int from_label, int to_label, bool reverse) const {
  const int n = static_cast<int>(faces_.size());
  std::vector<std::uint8_t> seen(uz(n), 0);
  std::vector<int> pred_face(uz(n), -1), pred_edge(uz(n), -1);
  std::vector<int> queue;
  for (int f = 0; f < n; ++f) {
    if (holes.label[uz(f)] == from_label) {
      seen[uz(f)] = 1;
      queue.push_back(f);
    }
  }
  if (reverse) std::reverse(queue.begin(), queue.end());
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int f = queue[head];
    if (holes.label[uz(f)] == to_label) {
      std::vector<int> path;
      for (int cur = f; pred_face[uz(cur)] >= 0; cur = pred_face[uz(cur)]) path.push_back(pred_edge[uz(cur)]);
      std::reverse(path.begin(), path.end());
      return path;
    }
    const int lo = adj_start_[uz(f)];
    const int hi = adj_start_[uz(f) + 1];
    for (int k = 0; k < hi - lo; ++k) {
      const auto& [to, e] = adj_[uz(reverse ? hi - 1 - k : lo + k)];
      if (seen[uz(to)]) continue;
      seen[uz(to)] = 1;
      pred_face[uz(to)] = f;
      pred_edge[uz(to)] = e;
      queue.push_back(to);
    }
  }
  throw Error("holes are not joined inside the annulus");
}

std::vector<int> HoleProbe::shortest_path(const HoleLabeling& holes, int from_label, int to_label) const {
  return bfs_path(holes, from_label, to_label, false);
}

std::vector<int> HoleProbe::alternate_path(const HoleLabeling& holes, int from_label, int to_label) const {
  return bfs_path(holes, from_label, to_label, true);
}

HoleReport HoleProbe::analyse(const sampler::DoubleTrace& dc) {
  const HoleLabeling holes = label(dc.positive);
  HoleReport rep;
  rep.crossing_holes = static_cast<int>(holes.crossing.size());
  const auto& c = holes.crossing;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const auto path = shortest_path(holes, c[i], c[j]);
      int agg = 0;
      int n1 = 0;
      for (int e : path) {
        agg ^= dc.parity[uz(e)];
        n1 ^= dc.parity1[uz(e)];
      }
      if (agg != 0) continue;
      rep.a4 = true;
      (n1 ? rep.any_odd : rep.any_even) = true;
      const int len = static_cast<int>(path.size());
      if (!rep.has_pair || len < rep.distance) {
        rep.has_pair = true;
        rep.distance = len;
        rep.aggregate_flux = agg;
        rep.n1_flux = n1;
        rep.face_a = holes.faces[uz(c[i])];
        rep.face_b = holes.faces[uz(c[j])];
      }
    }
  }
  return rep;
}

DualComponents::DualComponents(const DomainGraph& g) : g_(&g), dual_(lattice::dual_of(g)) {}

void DualComponents::label(Bits positive) {
  check_bits(*g_, positive);
  const int n = dual_.num_faces();
  uf_.reset(n + 1);
  for (int f = 0; f < n; ++f) {
    if (!dual_.interior[uz(f)]) uf_.unite(f, n);
  }
  for (int e = 0; e < g_->num_edges(); ++e) {
    if (!positive[uz(e)]) uf_.unite(dual_.dual_edges[uz(e)][0], dual_.dual_edges[uz(e)][1]);
  }
}

bool DualComponents::same(Coord a, Coord b) {
  const int fa = dual_.index_of(a);
  const int fb = dual_.index_of(b);
  if (fa < 0 || fb < 0) throw Error("face outside the dual of the domain");
  return uf_.same(fa, fb);
}

bool has_sources(const DomainGraph& g, Bits parity) {
  check_bits(g, parity);
  std::vector<std::uint8_t> deg(uz(g.num_vertices()), 0);
  for (int e = 0; e < g.num_edges(); ++e) {
    if (parity[uz(e)]) {
      deg[uz(g.edge(e).u)] ^= 1;
      deg[uz(g.edge(e).v)] ^= 1;
    }
  }
  return std::find(deg.begin(), deg.end(), std::uint8_t{1}) != deg.end();
}

CrossingReport count_annulus_crossings(const DomainGraph& g, const sampler::DoubleTrace& dc, const lattice::Annulus& ann) {
  check_bits(g, dc.positive);
  CrossingReport rep;
  rep.k_clusters = AnnulusClusters(g, ann.center, ann.inner, ann.outer).count(dc.positive);
  rep.k_holes = static_cast<int>(HoleProbe(g, ann.center, std::max(ann.inner, 1), ann.outer).label(dc.positive).crossing.size());
  return rep;
}

bool detect_a4_square(const DomainGraph& g, const sampler::DoubleTrace& dc, Coord x, int r, int R) {
  check_bits(g, dc.positive);
  require_box(g, x, R);
  return BoxArms(g, x, R).a4_square(dc.positive, r);
}

HoleLabeling label_holes(const DomainGraph& g, const sampler::DoubleTrace& dc, const lattice::Annulus& ann) {
  return HoleProbe(g, ann.center, ann.inner, ann.outer).label(dc.positive);
}

A4Hole detect_a4_blacksquare(const DomainGraph& g, const sampler::DoubleTrace& dc, Coord x, int r, int R) {
  const auto rep = HoleProbe(g, x, r, R).analyse(dc);
  if (!rep.has_pair) return A4Hole::None;
  return rep.n1_flux ? A4Hole::Odd : A4Hole::Even;
}

SepResult detect_sep(const DomainGraph& g, Bits positive, int r, double delta) {
  check_bits(g, positive);
  SepResult res;
  res.inner = std::max(1, static_cast<int>(std::floor(delta * r)));
  res.outer = r / 4;
  require_box(g, {0, 0}, r + res.outer);
  if (res.inner > res.outer) {
    res.vacuous = true;
    return res;
  }
  for (int v = 0; v < g.num_vertices(); ++v) {
    const Coord x = g.vertex(v);
    if (linf_norm(x) != r) continue;
    if (BoxArms(g, x, res.outer).a4_square(positive, res.inner)) {
      res.holds = false;
      return res;
    }
  }
  return res;
}

BoundaryProbe::BoundaryProbe(const DomainGraph& g, int R, int r) : g_(&g), near_boundary_(lattice::boundary_neighborhood(g, r)) {
  require_box(g, {0, 0}, R);
  for (int v = 0; v < g.num_vertices(); ++v) {
    if (linf_norm(g.vertex(v)) <= R) inner_.push_back(v);
  }
}

bool BoundaryProbe::connected(Bits positive) {
  check_bits(*g_, positive);
  uf_.reset(g_->num_vertices());
  for (int e = 0; e < g_->num_edges(); ++e) {
    if (positive[uz(e)]) uf_.unite(g_->edge(e).u, g_->edge(e).v);
  }
  mark_.assign(uz(g_->num_vertices()), 0);
  for (int v : inner_) mark_[uz(uf_.find(v))] = 1;
  for (int v : near_boundary_) {
    if (mark_[uz(uf_.find(v))]) return true;
  }
  return false;
}

bool boundary_connection(const DomainGraph& g, Bits positive, int R, int r) {
  return BoundaryProbe(g, R, r).connected(positive);
}

int count_b2k_odd(const DomainGraph& g, Bits eta, const lattice::Annulus& ann) {
  check_bits(g, eta);
  return AnnulusClusters(g, ann.center, ann.inner, ann.outer).count(eta);
}

RectangleCrossings::RectangleCrossings(const DomainGraph& g, Coord origin, int width, int height)
    : region_(g, [&](Coord c) {
        return c.x >= origin.x && c.x <= origin.x + width && c.y >= origin.y && c.y <= origin.y + height;
      }) {
  if (width < 1 || height < 0) throw Error("degenerate rectangle");
  if (region_.size() != (width + 1) * (height + 1)) throw Error("rectangle leaves the domain");
  for (int v : region_.vertices()) {
    left_.push_back(g.vertex(v).x == origin.x);
    right_.push_back(g.vertex(v).x == origin.x + width);
  }
}

int RectangleCrossings::count(Bits positive) {
  region_.label(positive, uf_);
  flags_.assign(uz(region_.size()), 0);
  for (int i = 0; i < region_.size(); ++i) {
    flags_[uz(uf_.find(i))] |= static_cast<std::uint8_t>(left_[uz(i)] | (right_[uz(i)] << 1));
  }
  return static_cast<int>(std::count(flags_.begin(), flags_.end(), std::uint8_t{3}));
}

int count_rectangle_crossings(const DomainGraph& g, Bits positive, Coord origin, int width, int height) {
  check_bits(g, positive);
  return RectangleCrossings(g, origin, width, height).count(positive);
}

BoundaryBoxes::BoundaryBoxes(const DomainGraph& g, int R, int r) : g_(&g) {
  if (r < 1) throw Error("box size must be positive");
  require_box(g, {0, 0}, R);
  auto inside = [&](Coord x, int rad) {
    for (int dx = -rad; dx <= rad; ++dx) {
      for (int dy = -rad; dy <= rad; ++dy) {
        if (!g.contains(x + Coord{dx, dy})) return false;
      }
    }
    return true;
  };
  const Coord lo = g.min_corner();
  const Coord hi = g.max_corner();
  auto grid_floor = [r](int a) { return static_cast<int>(std::floor(static_cast<double>(a) / r)); };
  const int i0 = grid_floor(lo.x), i1 = grid_floor(hi.x) + 1;
  const int j0 = grid_floor(lo.y), j1 = grid_floor(hi.y) + 1;
  const int ni = i1 - i0 + 1, nj = j1 - j0 + 1;
  // 0 = not a cover box, 1 = cover box, 2 = reached from Lambda_R
  std::vector<std::uint8_t> state(uz(ni * nj), 0);
  auto at = [&](int i, int j) -> std::uint8_t& { return state[uz((i - i0) * nj + (j - j0))]; };
  std::vector<std::array<int, 2>> queue;
  for (int i = i0; i <= i1; ++i) {
    for (int j = j0; j <= j1; ++j) {
      const Coord x{i * r, j * r};
      if (!inside(x, 2 * r)) continue;
      at(i, j) = 1;
      if (linf_norm(x) <= R + r) {
        at(i, j) = 2;
        queue.push_back({i, j});
      }
    }
  }
  for (std::size_t h = 0; h < queue.size(); ++h) {
    const auto [i, j] = queue[h];
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        const int a = i + di, b = j + dj;
        if (a < i0 || a > i1 || b < j0 || b > j1 || at(a, b) != 1) continue;
        at(a, b) = 2;
        queue.push_back({a, b});
      }
    }
  }
  std::sort(queue.begin(), queue.end());
  for (const auto& [i, j] : queue) {
    const Coord x{i * r, j * r};
    if (inside(x, 3 * r)) continue;
    centres_.push_back(x);
    std::vector<int> members;
    for (int dx = -r; dx <= r; ++dx) {
      for (int dy = -r; dy <= r; ++dy) members.push_back(g.index_of(x + Coord{dx, dy}));
    }
    box_.push_back(std::move(members));
  }
  for (int v = 0; v < g.num_vertices(); ++v) {
    if (linf_norm(g.vertex(v)) <= R) inner_.push_back(v);
  }
}

BoxCounts BoundaryBoxes::evaluate(Bits positive) {
  check_bits(*g_, positive);
  uf_.reset(g_->num_vertices());
  for (int e = 0; e < g_->num_edges(); ++e) {
    if (positive[uz(e)]) uf_.unite(g_->edge(e).u, g_->edge(e).v);
  }
  mark_.assign(uz(g_->num_vertices()), 0);
  for (int v : inner_) mark_[uz(uf_.find(v))] = 1;
  BoxCounts out;
  out.boxes = static_cast<int>(box_.size());
  for (const auto& members : box_) {
    for (int v : members) {
      if (mark_[uz(uf_.find(v))]) {
        ++out.n;
        break;
      }
    }
  }
  return out;
}

}  // namespace currentlab::clusters
