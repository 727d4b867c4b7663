#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "currentlab/clusters.hpp"
#include "currentlab/config.hpp"
#include "currentlab/critical.hpp"
#include "currentlab/exact.hpp"
#include "currentlab/experiments.hpp"
#include "currentlab/harmonic.hpp"
#include "currentlab/lattice.hpp"
#include "currentlab/report.hpp"
#include "currentlab/rng.hpp"
#include "currentlab/sampler.hpp"

using namespace currentlab;
using lattice::DomainGraph;
using nlohmann::ordered_json;

namespace {

Coord parse_coord(const std::string& s) {
  std::istringstream in(s);
  Coord c;
  char comma = 0;
  if (!(in >> c.x >> comma >> c.y) || comma != ',' || !(in >> std::ws).eof()) throw Error("bad coordinate '" + s + "'");
  return c;
}

// "x,y;x,y;..." or repeated flags.
std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ';')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

std::vector<Coord> parse_coords(const std::vector<std::string>& items) {
  std::vector<Coord> out;
  for (const auto& s : split_list(items)) out.push_back(parse_coord(s));
  return out;
}

std::string fmt(double x) { return report::format_number(x); }

// Writes to a file, or stdout for "" and "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

// ---------------------------------------------------------------- exact

struct ExactArgs {
  std::string graph = "rect:3x2";
  std::string subgraph;
  std::vector<std::string> sources, sources_b, faces;
  std::string check = "switching";
  int cap = 14;
  int multiplicity = 2;
  double beta = critical::beta_c();
  double tolerance = 1e-10;
  std::string out;
};

int run_exact(const ExactArgs& a) {
  ordered_json doc;
  doc["check"] = a.check;
  doc["graph"] = a.graph;
  ordered_json cases = ordered_json::array();
  double worst = 0.0;
  auto add = [&](const std::string& id, double residual) {
    cases.push_back({{"case", id}, {"residual", residual}, {"pass", residual <= a.tolerance}});
    worst = std::max(worst, residual);
  };
  const DomainGraph g = lattice::parse_domain_spec(a.graph);
  if (a.check == "switching") {
    const DomainGraph h = a.subgraph.empty() ? g : lattice::parse_domain_spec(a.subgraph);
    const auto A = exact::parse_sources(g, split_list(a.sources));
    const auto B = exact::parse_sources(g, split_list(a.sources_b));
    exact::SwitchingOptions opt;
    opt.cap = a.cap;
    const std::vector<std::pair<std::string, exact::TraceFunctional>> fs{
        {"one", exact::functional_one()},
        {"edge0", exact::functional_edge_positive(0)},
        {"clusters", exact::functional_cluster_count(g)}};
    for (const auto& [name, f] : fs) {
      const auto r = exact::verify_switching_lemma(g, h, A, B, f, opt);
      double res = r.residual;
      if (r.formal_checked && !r.formal_equal) res = std::max(res, 1.0);
      add(name + " lhs=" + fmt(r.lhs) + " rhs=" + fmt(r.rhs), res);
    }
  } else if (a.check == "principle") {
    std::vector<std::array<int, 3>> edges;
    for (const auto& e : g.edges()) edges.push_back({e.u, e.v, a.multiplicity});
    const auto m = exact::Multigraph::from_multiplicities(g.num_vertices(), edges);
    if (m.edges.size() > 20) throw Error("principle: total multiplicity above 20");
    exact::SourceSet A;
    for (const auto& s : split_list(a.sources)) A.push_back(g.index_of(parse_coord(s)));
    std::sort(A.begin(), A.end());
    const std::vector<std::pair<std::string, exact::MultiFunctional>> fs{
        {"one", [](std::uint32_t) { return 1.0; }},
        {"size", [](std::uint32_t s) { return static_cast<double>(std::popcount(s)); }}};
    for (const auto& [name, f] : fs) {
      const auto r = exact::verify_switching_principle(m, A, f);
      add(name + " lhs=" + fmt(r.lhs) + " rhs=" + fmt(r.rhs), r.residual);
    }
  } else if (a.check == "flux-half") {
    auto faces = parse_coords(a.faces);
    if (faces.empty()) {
      for (int x = g.min_corner().x - 1; x <= g.max_corner().x; ++x) {
        for (int y = g.min_corner().y - 1; y <= g.max_corner().y; ++y) faces.push_back({x, y});
      }
    }
    int qualifying = 0;
    for (std::size_t i = 0; i < faces.size(); ++i) {
      for (std::size_t j = i + 1; j < faces.size(); ++j) {
        const auto r = exact::verify_flux_half(g, faces[i], faces[j], a.cap);
        qualifying += r.qualifying;
        add("faces (" + std::to_string(faces[i].x) + "," + std::to_string(faces[i].y) + ") (" +
                std::to_string(faces[j].x) + "," + std::to_string(faces[j].y) + ") qualifying=" +
                std::to_string(r.qualifying),
            r.residual);
      }
    }
    doc["qualifying"] = qualifying;
  } else if (a.check == "parity-reduction") {
    const auto r = exact::validate_parity_reduction(a.beta, a.cap);
    add("cosh", r.cosh_residual);
    add("sinh", r.sinh_residual);
    doc["q_even_series"] = r.q_even_series;
    doc["q_even_closed"] = r.q_even_closed;
  } else {
    throw Error("unknown check '" + a.check + "'");
  }
  doc["cases"] = cases;
  doc["max_residual"] = worst;
  doc["passed"] = worst <= a.tolerance;
  emit(a.out, doc.dump(2) + "\n");
  return worst <= a.tolerance ? 0 : 1;
}

// ---------------------------------------------------------------- sample

struct SampleArgs {
  std::string domain = "box:4";
  std::vector<std::string> sources;
  int sweeps = 2;
  int burnin = 64;
  int samples = 1;
  int chains = 1;
  std::uint64_t seed = 1;
  bool dbl = false;
  std::string out;
};

int run_sample(const SampleArgs& a) {
  const DomainGraph g = lattice::parse_domain_spec(a.domain);
  const auto sources = exact::parse_sources(g, split_list(a.sources));
  std::ostringstream out;
  out << "sample,edge,parity,positive" << (a.dbl ? ",parity1" : "") << '\n';
  int id = 0;
  for (int c = 0; c < a.chains; ++c) {
    const std::uint64_t s = derive_seed(a.seed, static_cast<std::uint64_t>(c));
    sampler::CurrentChain c1(g, sources, derive_seed(s, 1));
    sampler::CurrentChain c2(g, {}, derive_seed(s, 2));
    c1.advance(a.burnin);
    if (a.dbl) c2.advance(a.burnin);
    for (int i = 0; i < a.samples; ++i, ++id) {
      c1.advance(a.sweeps);
      const auto t1 = c1.sample();
      if (a.dbl) {
        c2.advance(a.sweeps);
        const auto dc = sampler::double_current(t1, c2.sample());
        for (int e = 0; e < g.num_edges(); ++e) {
          const auto k = static_cast<std::size_t>(e);
          out << id << ',' << e << ',' << int(dc.parity[k]) << ',' << int(dc.positive[k]) << ','
              << int(dc.parity1[k]) << '\n';
        }
      } else {
        for (int e = 0; e < g.num_edges(); ++e) {
          const auto k = static_cast<std::size_t>(e);
          out << id << ',' << e << ',' << int(t1.odd[k]) << ',' << int(t1.positive[k]) << '\n';
        }
      }
    }
  }
  emit(a.out, out.str());
  return 0;
}

// ---------------------------------------------------------------- events

struct EventArgs {
  std::string domain = "box:4";
  std::string trace;
  std::vector<std::string> events{"a4_square", "a4_hole"};
  std::string x = "0,0";
  int r = 1;
  int R = 2;
  double delta = 0.25;
  int width = 0;
  int height = 0;
  std::string out;
};

std::map<int, sampler::DoubleTrace> read_traces(const std::string& path, int num_edges) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::string line;
  std::getline(in, line);
  const bool has_p1 = line.find("parity1") != std::string::npos;
  if (line.rfind("sample,edge,parity,positive", 0) != 0) throw Error(path + ": unexpected header '" + line + "'");
  std::map<int, sampler::DoubleTrace> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string f;
    std::vector<int> v;
    while (std::getline(ss, f, ',')) v.push_back(std::stoi(f));
    if (v.size() != (has_p1 ? 5u : 4u) || v[1] < 0 || v[1] >= num_edges)
      throw Error(path + ":" + std::to_string(lineno) + ": bad row");
    auto& dc = out[v[0]];
    if (dc.positive.empty()) {
      dc.positive.assign(static_cast<std::size_t>(num_edges), 0);
      dc.parity.assign(static_cast<std::size_t>(num_edges), 0);
      dc.parity1.assign(static_cast<std::size_t>(num_edges), 0);
    }
    const auto e = static_cast<std::size_t>(v[1]);
    dc.parity[e] = static_cast<std::uint8_t>(v[2]);
    dc.positive[e] = static_cast<std::uint8_t>(v[3]);
    dc.parity1[e] = static_cast<std::uint8_t>(has_p1 ? v[4] : v[2]);
  }
  return out;
}

int run_events(const EventArgs& a) {
  const DomainGraph g = lattice::parse_domain_spec(a.domain);
  const auto traces = read_traces(a.trace, g.num_edges());
  const Coord x = parse_coord(a.x);
  std::ostringstream out;
  out << "sample,event,x,y,r,R,delta,value\n";
  for (const auto& [id, dc] : traces) {
    const bool sourced = clusters::has_sources(g, dc.parity);
    for (const auto& ev : a.events) {
      std::string value;
      if (ev == "a4_square") {
        value = std::to_string(int(clusters::detect_a4_square(g, dc, x, a.r, a.R)));
      } else if (ev == "a4_hole") {
        if (sourced) {
          value = "path-dependent";
        } else {
          const auto h = clusters::detect_a4_blacksquare(g, dc, x, a.r, a.R);
          value = h == clusters::A4Hole::None ? "none" : h == clusters::A4Hole::Even ? "even" : "odd";
        }
      } else if (ev == "clusters" || ev == "holes") {
        const auto c = clusters::count_annulus_crossings(g, dc, {x, a.r, a.R});
        value = std::to_string(ev == "clusters" ? c.k_clusters : c.k_holes);
      } else if (ev == "b2k_odd") {
        value = std::to_string(clusters::count_b2k_odd(g, dc.parity1, {x, a.r, a.R}));
      } else if (ev == "sep") {
        const auto s = clusters::detect_sep(g, dc.positive, a.r, a.delta);
        value = s.vacuous ? "vacuous" : std::to_string(int(s.holds));
      } else if (ev == "boundary") {
        value = std::to_string(int(clusters::boundary_connection(g, dc.positive, a.R, a.r)));
      } else if (ev == "rectangle") {
        const int w = a.width > 0 ? a.width : 2 * a.R;
        const int h = a.height > 0 ? a.height : a.R;
        value = std::to_string(clusters::count_rectangle_crossings(g, dc.positive, x, w, h));
      } else {
        throw Error("unknown event '" + ev + "'");
      }
      out << id << ',' << ev << ',' << x.x << ',' << x.y << ',' << a.r << ',' << a.R << ',' << fmt(a.delta) << ','
          << value << '\n';
    }
  }
  emit(a.out, out.str());
  return 0;
}

// ---------------------------------------------------------------- harmonic

struct HarmonicArgs {
  std::string quad = "rect:8x8";
  std::string from, to, set_from, set_to;
  bool dual = false;
  std::string out;
};

lattice::Quad parse_quad(const std::string& spec) {
  if (spec.rfind("rect:", 0) == 0) {
    const DomainGraph g = lattice::parse_domain_spec(spec);
    return lattice::make_rect_quad(g.min_corner(), g.max_corner().x - g.min_corner().x + 1,
                                   g.max_corner().y - g.min_corner().y + 1);
  }
  return lattice::make_free_quad(lattice::parse_domain_spec(spec));
}

std::vector<Coord> parse_set(const lattice::Quad& q, const std::string& s) {
  static const std::map<std::string, lattice::Arc> arcs{
      {"ab", lattice::Arc::AB}, {"bc", lattice::Arc::BC}, {"cd", lattice::Arc::CD}, {"da", lattice::Arc::DA}};
  if (const auto it = arcs.find(s); it != arcs.end()) {
    std::vector<Coord> out;
    for (int v : q.arc(it->second)) out.push_back(q.domain.vertex(v));
    return out;
  }
  return parse_coords({s});
}

int run_harmonic(const HarmonicArgs& a) {
  const auto q = parse_quad(a.quad);
  const auto net = a.dual ? harmonic::dual_network(q) : harmonic::build_network(q);
  std::ostringstream out;
  out << "x,y,Z\n";
  if (!a.set_from.empty() || !a.set_to.empty()) {
    if (a.set_from.empty() || a.set_to.empty()) throw Error("--set-from and --set-to go together");
    const auto xs = parse_set(q, a.set_from);
    const auto ys = parse_set(q, a.set_to);
    out << a.set_from << ',' << a.set_to << ',' << fmt(harmonic::z_sets(net, xs, ys)) << '\n';
  } else {
    if (a.from.empty()) throw Error("--from or --set-from is required");
    const Coord x = parse_coord(a.from);
    const int xi = net.index_of(x);
    if (xi < 0) throw Error("--from is not a node of the network");
    const int src[1] = {xi};
    const auto k = harmonic::solve_kernel(net, src);
    auto row = [&](Coord y) {
      const int yi = net.index_of(y);
      if (yi < 0) throw Error("--to is not a node of the network");
      out << "\"" << x.x << ',' << x.y << "\",\"" << y.x << ',' << y.y << "\","
          << fmt(k.z[static_cast<std::size_t>(yi)]) << '\n';
    };
    if (a.to.empty()) {
      for (Coord y : net.nodes) row(y);
    } else {
      for (Coord y : parse_coords({a.to})) row(y);
    }
  }
  emit(a.out, out.str());
  return 0;
}

// ---------------------------------------------------------------- experiments

struct ExperimentArgs {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  bool serial = false;
};

int run_config(const std::string& name, const ExperimentArgs& a) {
  Config cfg = a.config.empty() ? Config{} : Config::load(a.config);
  if (!name.empty()) {
    if (cfg.has("experiment") && cfg.str("experiment") != name)
      throw Error("config is for experiment '" + cfg.str("experiment") + "', not '" + name + "'");
    cfg.set("experiment", name);
  }
  if (a.seed_set) cfg.set("seed", std::to_string(a.seed));
  if (a.serial) cfg.set("parallel", "false");
  const auto rep = experiments::run_experiment(cfg);
  for (const auto& key : cfg.unused()) std::cerr << "warning: unused config key '" << key << "'\n";
  if (!a.out.empty()) report::write_report(a.out, rep);
  for (const auto& g : rep.gates) std::cout << (g.pass ? "PASS " : "FAIL ") << g.name << ": " << g.detail << '\n';
  int failed = 0;
  for (const auto& r : rep.residuals) failed += !r.pass();
  if (failed) std::cout << "FAIL " << failed << " residuals above tolerance\n";
  std::cout << (rep.passed() ? "passed" : "failed") << '\n';
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critical double random currents on subgraphs of Z^2"};
  app.require_subcommand(1);

  ExactArgs ea;
  auto* exact_cmd = app.add_subcommand("exact", "brute-force identity checks on a small graph");
  exact_cmd->add_option("--graph", ea.graph, "domain spec or file (box:N, rect:WxH, annulus:r,R)");
  exact_cmd->add_option("--subgraph", ea.subgraph, "subgraph H for the switching lemma (default: the graph)");
  exact_cmd->add_option("--sources", ea.sources, "source set A: 'x,y;x,y' or class names");
  exact_cmd->add_option("--sources-b", ea.sources_b, "source set B for the switching lemma");
  exact_cmd->add_option("--check", ea.check)->check(CLI::IsMember({"switching", "principle", "flux-half", "parity-reduction"}));
  exact_cmd->add_option("--cap", ea.cap, "edge cap for enumeration, series order for parity-reduction");
  exact_cmd->add_option("--multiplicity", ea.multiplicity, "edge multiplicity for the principle check");
  exact_cmd->add_option("--faces", ea.faces, "face pairs for flux-half (default: all)");
  exact_cmd->add_option("--beta", ea.beta);
  exact_cmd->add_option("--tolerance", ea.tolerance);
  exact_cmd->add_option("--out", ea.out, "JSON output (default stdout)");

  SampleArgs sa;
  auto* sample_cmd = app.add_subcommand("sample", "sample current traces");
  sample_cmd->add_option("--domain,--domain-file", sa.domain);
  sample_cmd->add_option("--sources", sa.sources, "boundary sources 'x,y;x,y'");
  sample_cmd->add_option("--sweeps", sa.sweeps, "sweeps between samples");
  sample_cmd->add_option("--burnin", sa.burnin);
  sample_cmd->add_option("--samples", sa.samples, "samples per chain");
  sample_cmd->add_option("--chains", sa.chains);
  sample_cmd->add_option("--seed", sa.seed);
  sample_cmd->add_flag("--double", sa.dbl, "write n1 + n2 with a sourceless n2 (adds parity1)");
  sample_cmd->add_option("--out", sa.out, "trace CSV (default stdout)");

  EventArgs va;
  auto* events_cmd = app.add_subcommand("events", "evaluate events on a trace CSV");
  events_cmd->add_option("--domain,--domain-file", va.domain);
  events_cmd->add_option("--trace", va.trace)->required();
  events_cmd->add_option("--event", va.events,
                         "a4_square, a4_hole, clusters, holes, b2k_odd, sep, boundary, rectangle");
  events_cmd->add_option("--x", va.x, "centre 'x,y' (rectangle: lower-left corner)");
  events_cmd->add_option("--r", va.r);
  events_cmd->add_option("--R", va.R);
  events_cmd->add_option("--delta", va.delta);
  events_cmd->add_option("--width", va.width);
  events_cmd->add_option("--height", va.height);
  events_cmd->add_option("--out", va.out);

  HarmonicArgs ha;
  auto* harmonic_cmd = app.add_subcommand("harmonic", "killed-walk partition functions Z_D");
  harmonic_cmd->add_option("--quad", ha.quad, "rect:WxH[@X,Y] or any domain spec (free quad)");
  harmonic_cmd->add_option("--from", ha.from, "x,y");
  harmonic_cmd->add_option("--to", ha.to, "x,y;... (default: every node)");
  harmonic_cmd->add_option("--set-from", ha.set_from, "arc name (ab, bc, cd, da) or 'x,y;...'");
  harmonic_cmd->add_option("--set-to", ha.set_to);
  harmonic_cmd->add_flag("--dual", ha.dual, "use the dual network (faces keyed by lower-left corner)");
  harmonic_cmd->add_option("--out", ha.out);

  ExperimentArgs xa;
  std::vector<std::pair<std::string, CLI::App*>> exp_cmds;
  auto add_experiment = [&](const std::string& name, const std::string& help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--config", xa.config, "key = value config file");
    cmd->add_option("--seed", xa.seed, "master seed (overrides the config)")->each([&](const std::string&) {
      xa.seed_set = true;
    });
    cmd->add_option("--out", xa.out, "output directory for estimates.csv, fits.json, residuals.json");
    cmd->add_flag("--serial", xa.serial, "run chains serially");
    exp_cmds.emplace_back(name, cmd);
  };
  add_experiment("run", "run the experiment named in the config");
  for (const auto& name : experiments::experiment_names()) add_experiment(name, "experiment " + name);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*exact_cmd) return run_exact(ea);
    if (*sample_cmd) return run_sample(sa);
    if (*events_cmd) return run_events(va);
    if (*harmonic_cmd) return run_harmonic(ha);
    for (const auto& [name, cmd] : exp_cmds) {
      if (*cmd) return run_config(name == "run" ? "" : name, xa);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
