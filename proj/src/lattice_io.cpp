#include "currentlab/lattice.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace currentlab::lattice {

// Format:
//   domain <kind> <param>...
//   vertices <n>      followed by n lines "x y"
//   edges <m>         followed by m lines "x1 y1 x2 y2"
//   merges <k>        followed by k lines "name size x y x y ..."
// Lines starting with '#' are ignored.
void write_domain(std::ostream& out, const DomainGraph& g) {
  out << "domain " << g.kind();
  for (int p : g.params()) out << ' ' << p;
  out << "\nvertices " << g.num_vertices() << '\n';
  for (const Coord& c : g.vertices()) out << c.x << ' ' << c.y << '\n';
  out << "edges " << g.num_edges() << '\n';
  for (const Edge& e : g.edges()) {
    const Coord a = g.vertex(e.u);
    const Coord b = g.vertex(e.v);
    out << a.x << ' ' << a.y << ' ' << b.x << ' ' << b.y << '\n';
  }
  std::vector<int> merged;
  for (int c = 0; c < g.num_classes(); ++c) {
    if (g.class_members(c).size() > 1) merged.push_back(c);
  }
  out << "merges " << merged.size() << '\n';
  for (int c : merged) {
    const auto members = g.class_members(c);
    out << g.class_name(c) << ' ' << members.size();
    for (int v : members) out << ' ' << g.vertex(v).x << ' ' << g.vertex(v).y;
    out << '\n';
  }
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::istringstream next(const char* what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return std::istringstream(line);
    }
    throw Error(std::string("domain file ended while reading ") + what);
  }

  std::size_t header(const char* keyword) {
    auto ss = next(keyword);
    std::string word;
    long long n = -1;
    ss >> word >> n;
    if (word != keyword || n < 0) fail(std::string("expected '") + keyword + " <count>'");
    return static_cast<std::size_t>(n);
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("domain file line " + std::to_string(lineno_) + ": " + msg);
  }

 private:
  std::istream& in_;
  int lineno_ = 0;
};

}  // namespace

DomainGraph read_domain(std::istream& in) {
  LineReader reader(in);
  auto head = reader.next("header");
  std::string word, kind;
  head >> word >> kind;
  if (word != "domain" || kind.empty()) reader.fail("expected 'domain <kind> <params>'");
  std::vector<int> params;
  for (int p; head >> p;) params.push_back(p);

  std::vector<Coord> vs(reader.header("vertices"));
  for (auto& c : vs) {
    auto ss = reader.next("vertices");
    if (!(ss >> c.x >> c.y)) reader.fail("bad vertex line");
  }
  std::vector<std::pair<Coord, Coord>> es(reader.header("edges"));
  for (auto& [a, b] : es) {
    auto ss = reader.next("edges");
    if (!(ss >> a.x >> a.y >> b.x >> b.y)) reader.fail("bad edge line");
  }
  DomainGraph g = DomainGraph::from_parts(std::move(vs), es, kind, params);

  const std::size_t k = reader.header("merges");
  std::vector<std::vector<Coord>> classes(k);
  std::vector<std::string> names(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto ss = reader.next("merges");
    std::size_t n = 0;
    if (!(ss >> names[i] >> n)) reader.fail("bad merge line");
    classes[i].resize(n);
    for (auto& c : classes[i]) {
      if (!(ss >> c.x >> c.y)) reader.fail("merge class shorter than declared");
    }
  }
  return k == 0 ? g : merge_vertices(g, classes, names);
}

DomainGraph load_domain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open domain file " + path);
  return read_domain(in);
}

DomainGraph parse_domain_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return load_domain(spec);
  const std::string kind = spec.substr(0, colon);
  std::string rest = spec.substr(colon + 1);
  for (char& ch : rest) {
    if (ch == 'x' || ch == ',' || ch == '@') ch = ' ';
  }
  std::istringstream ss(rest);
  std::vector<int> v;
  for (int n; ss >> n;) v.push_back(n);
  if (!ss.eof()) throw Error("cannot parse domain spec '" + spec + "'");
  if (kind == "box" && v.size() == 1) return build_box(v[0]);
  if (kind == "rect" && v.size() == 2) return build_rect({0, 0}, v[0], v[1]);
  if (kind == "rect" && v.size() == 4) return build_rect({v[2], v[3]}, v[0], v[1]);
  if (kind == "annulus" && v.size() == 2) return build_annulus({0, 0}, v[0], v[1]);
  throw Error("unknown domain spec '" + spec + "'");
}

}  // namespace currentlab::lattice
