#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace currentlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point of the square lattice. Ordered lexicographically (x first).
struct Coord {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const Coord&, const Coord&) = default;
};

inline constexpr Coord operator+(Coord a, Coord b) { return {a.x + b.x, a.y + b.y}; }
inline constexpr Coord operator-(Coord a, Coord b) { return {a.x - b.x, a.y - b.y}; }

inline constexpr int linf_norm(Coord c) {
  const int ax = c.x < 0 ? -c.x : c.x;
  const int ay = c.y < 0 ? -c.y : c.y;
  return ax > ay ? ax : ay;
}

std::string to_string(Coord c);

/// Edge between two vertex indices with u < v.
struct Edge {
  int u = 0;
  int v = 0;
};

namespace lattice {

/// Finite subgraph of Z^2 together with a partition of its vertices into
/// merge classes. Classes of size > 1 behave as a single "master" vertex
/// for every measure built on top of the graph.
///
/// Vertices are stored sorted lexicographically; edges are sorted by
/// (u, v). Coordinates are looked up through a dense index over the
/// bounding box, so lookups are O(1).
class DomainGraph {
 public:
  DomainGraph() = default;

  /// Builds a graph from explicit vertex and edge lists. Throws if an edge
  /// is not a unit lattice step or has an endpoint outside the vertex set.
  static DomainGraph from_parts(std::vector<Coord> vertices,
                                const std::vector<std::pair<Coord, Coord>>& edges,
                                std::string kind = "custom",
                                std::vector<int> params = {});

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  std::span<const Coord> vertices() const { return vertices_; }
  std::span<const Edge> edges() const { return edges_; }
  Coord vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }

  /// Index of the vertex at c, or -1.
  int index_of(Coord c) const;
  bool contains(Coord c) const { return index_of(c) >= 0; }
  /// Index of the edge joining a and b, or -1.
  int edge_between(Coord a, Coord b) const;

  // Edge toward (x+1, y), (x, y+1), (x-1, y), (x, y-1); -1 when absent.
  int right_edge(int v) const { return right_[static_cast<std::size_t>(v)]; }
  int up_edge(int v) const { return up_[static_cast<std::size_t>(v)]; }
  int left_edge(int v) const;
  int down_edge(int v) const;

  /// Vertices incident to a Z^2 edge that is not in the edge set, sorted.
  std::span<const int> boundary() const { return boundary_; }
  bool is_boundary(int v) const { return on_boundary_[static_cast<std::size_t>(v)] != 0; }

  int num_classes() const { return static_cast<int>(class_names_.size()); }
  int class_of(int v) const { return class_of_[static_cast<std::size_t>(v)]; }
  const std::string& class_name(int c) const { return class_names_[static_cast<std::size_t>(c)]; }
  /// Class id with the given name, or -1.
  int class_by_name(const std::string& name) const;
  std::vector<int> class_members(int c) const;
  bool has_merges() const { return num_classes() != num_vertices(); }

  const std::string& kind() const { return kind_; }
  std::span<const int> params() const { return params_; }
  Coord min_corner() const { return lo_; }
  Coord max_corner() const { return hi_; }

  /// Vertex indices of the vertices in the given set (throws on unknown).
  std::vector<int> indices_of(std::span<const Coord> coords) const;

 private:
  friend DomainGraph merge_vertices(const DomainGraph&,
                                    const std::vector<std::vector<Coord>>&,
                                    const std::vector<std::string>&);

  void build_index();
  void build_boundary();
  void reset_classes();

  std::vector<Coord> vertices_;
  std::vector<Edge> edges_;
  std::vector<int> right_;
  std::vector<int> up_;
  std::vector<int> grid_;
  Coord lo_{0, 0};
  Coord hi_{-1, -1};
  std::vector<int> boundary_;
  std::vector<std::uint8_t> on_boundary_;
  std::vector<int> class_of_;
  std::vector<std::string> class_names_;
  std::string kind_ = "custom";
  std::vector<int> params_;
};

/// Annulus Ann(center, inner, outer) = Lambda_outer(center) minus Lambda_{inner-1}(center).
struct Annulus {
  Coord center;
  int inner = 1;
  int outer = 1;

  bool contains(Coord c) const {
    const int d = linf_norm(c - center);
    return d >= inner && d <= outer;
  }
};

/// Lambda_n = [-n, n]^2 with all internal edges.
DomainGraph build_box(int n);
DomainGraph build_box(Coord center, int n);
/// width x height vertices with lower-left corner at origin.
DomainGraph build_rect(Coord origin, int width, int height);
DomainGraph build_annulus(Coord center, int inner, int outer);
/// Induced subgraph of Z^2 on the given vertex set.
DomainGraph build_induced(std::vector<Coord> vertices, std::string kind = "custom");
/// Subgraph of g keeping the listed edges and their endpoints.
DomainGraph edge_subgraph(const DomainGraph& g, std::span<const int> edge_ids);

/// Joins each listed class into one merge class (and with any existing class
/// it touches). Classes in the list must be pairwise disjoint.
DomainGraph merge_vertices(const DomainGraph& g,
                           const std::vector<std::vector<Coord>>& classes,
                           const std::vector<std::string>& names = {});

/// Vertices at L-infinity distance at most r from the boundary.
std::vector<int> boundary_neighborhood(const DomainGraph& g, int r);

/// Dual structure: faces are identified by their lower-left corner, so the
/// face with centre (x + 1/2, y + 1/2) has key {x, y}. Every face touching a
/// domain edge is present; interior faces have all four sides in the graph.
struct DualGraph {
  std::vector<Coord> faces;
  std::vector<std::uint8_t> interior;
  /// dual_edges[e] = the two faces separated by primal edge e
  /// (below/above for horizontal edges, left/right for vertical ones).
  std::vector<std::array<int, 2>> dual_edges;
  Coord lo{0, 0};
  Coord hi{-1, -1};
  std::vector<int> grid;

  int num_faces() const { return static_cast<int>(faces.size()); }
  int index_of(Coord face) const;
  int num_interior() const;
  static std::pair<double, double> center(Coord face) { return {face.x + 0.5, face.y + 0.5}; }
};

DualGraph dual_of(const DomainGraph& g);

/// The two faces separated by the lattice edge {a, b}.
std::array<Coord, 2> faces_of_edge(Coord a, Coord b);

/// One step of the walk around the outer boundary: directed edge `from -> to`
/// with the outer face `right_face` on its right.
struct BoundaryStep {
  int edge = -1;
  int from = -1;
  int to = -1;
  Coord right_face;
};

/// Closed walk around the outer face, counterclockwise (domain on the left),
/// starting at the edge with lexicographically smallest midpoint. Dangling
/// edges are traversed twice. Empty for graphs without edges.
std::vector<BoundaryStep> boundary_walk(const DomainGraph& g);

/// |V| - |E| + #interior faces; equals 1 for connected simply connected domains.
int euler_characteristic(const DomainGraph& g);
bool is_connected(const DomainGraph& g);

enum class Arc : int { AB = 0, BC = 1, CD = 2, DA = 3 };

/// Domain with four marked boundary arcs (ab), (bc), (cd), (da), listed
/// counterclockwise. (ab) and (cd) are the arcs to be connected.
struct Quad {
  DomainGraph domain;
  std::array<std::vector<int>, 4> arcs;

  const std::vector<int>& arc(Arc a) const { return arcs[static_cast<std::size_t>(a)]; }
  /// Arc membership per vertex (-1 for interior vertices).
  std::vector<int> arc_of_vertex() const;
};

/// Throws if the arcs overlap or do not cover the boundary.
void validate_quad(const Quad& q);

/// width x height rectangle: (ab) = left column, (cd) = right column,
/// (bc) = bottom row and (da) = top row without the corners.
Quad make_rect_quad(Coord origin, int width, int height);
/// Whole boundary on the free arc (bc); (ab), (cd), (da) empty.
Quad make_free_quad(DomainGraph g);

// Line-oriented text format used by --domain-file.
void write_domain(std::ostream& out, const DomainGraph& g);
DomainGraph read_domain(std::istream& in);
DomainGraph load_domain(const std::string& path);
/// Accepts a path to a domain file or an inline spec:
/// "box:N", "rect:WxH", "rect:WxH@X,Y", "annulus:r,R".
DomainGraph parse_domain_spec(const std::string& spec);

}  // namespace lattice
}  // namespace currentlab
