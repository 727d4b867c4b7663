#include "currentlab/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "currentlab/clusters.hpp"
#include "currentlab/critical.hpp"
#include "currentlab/exact.hpp"
#include "currentlab/harmonic.hpp"
#include "currentlab/rng.hpp"
#include "currentlab/stats.hpp"
#include "currentlab/union_find.hpp"

namespace currentlab::experiments {

using lattice::DomainGraph;
using report::Estimate;
using report::Report;

namespace {

std::size_t uz(int i) { return static_cast<std::size_t>(i); }

std::string num(double x) { return report::format_number(x); }

std::string coord_str(Coord c) { return "(" + std::to_string(c.x) + " " + std::to_string(c.y) + ")"; }

Report start(const Config& cfg, const std::string& name) {
  Report rep;
  rep.experiment = name;
  rep.seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
  rep.confidence = cfg.real("confidence", 0.95);
  return rep;
}

Estimate estimate(const Report& rep, std::string name, int r, int R, int k, std::int64_t hits, std::int64_t trials) {
  return {std::move(name), r, R, k, hits, trials, rep.seed};
}

std::string interval_str(const stats::Interval& ci) { return "[" + num(ci.lo) + ", " + num(ci.hi) + "]"; }

std::string graph_id(const DomainGraph& g) {
  std::ostringstream out;
  for (int e = 0; e < g.num_edges(); ++e) {
    if (e) out << ' ';
    out << coord_str(g.vertex(g.edge(e).u)) << '-' << coord_str(g.vertex(g.edge(e).v));
  }
  return out.str();
}

// Even subsets of {0..n-1} with at most max_size elements, as sorted lists.
std::vector<exact::SourceSet> even_subsets(int n, int max_size) {
  std::vector<exact::SourceSet> out;
  for (std::uint32_t m = 0; m < (1u << n); ++m) {
    const int c = std::popcount(m);
    if (c % 2 != 0 || c > max_size) continue;
    exact::SourceSet s;
    for (int i = 0; i < n; ++i) {
      if ((m >> i) & 1u) s.push_back(i);
    }
    out.push_back(std::move(s));
  }
  return out;
}

// Root marks for "connected to a set" queries over a union-find.
bool joined(UnionFind& uf, std::span<const int> a, std::span<const int> b, std::vector<std::uint8_t>& mark) {
  mark.assign(uz(uf.size()), 0);
  for (int v : a) mark[uz(uf.find(v))] = 1;
  for (int v : b) {
    if (mark[uz(uf.find(v))]) return true;
  }
  return false;
}

std::vector<int> column(const DomainGraph& g, int x) {
  std::vector<int> out;
  for (int v = 0; v < g.num_vertices(); ++v) {
    if (g.vertex(v).x == x) out.push_back(v);
  }
  return out;
}

void fill_double(const sampler::CurrentTrace& t1, const sampler::CurrentTrace& t2, std::span<const int> edges,
                 sampler::DoubleTrace& dc) {
  const std::size_t m = t1.odd.size();
  dc.positive.resize(m);
  dc.parity.resize(m);
  dc.parity1.resize(m);
  auto one = [&](std::size_t e) {
    dc.positive[e] = t1.positive[e] | t2.positive[e];
    dc.parity[e] = t1.odd[e] ^ t2.odd[e];
    dc.parity1[e] = t1.odd[e];
  };
  if (edges.empty()) {
    for (std::size_t e = 0; e < m; ++e) one(e);
  } else {
    for (int e : edges) one(uz(e));
  }
}

void need(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

}  // namespace

ChainPlan ChainPlan::from(const Config& cfg, int chains, int samples, int burn_in, int sweeps) {
  ChainPlan p;
  p.chains = static_cast<int>(cfg.integer("chains", chains));
  p.samples = static_cast<int>(cfg.integer("samples_per_chain", samples));
  p.burn_in = static_cast<int>(cfg.integer("burn_in", burn_in));
  p.sweeps = static_cast<int>(cfg.integer("sweeps", sweeps));
  p.seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
  p.exec = cfg.flag("parallel", true) ? Exec::Parallel : Exec::Serial;
  need(p.chains >= 1 && p.samples >= 1, "chains and samples_per_chain must be positive");
  need(p.burn_in >= 0 && p.sweeps >= 1, "burn_in must be >= 0 and sweeps >= 1");
  return p;
}

std::uint64_t ChainPlan::chain_seed(int chain) const { return derive_seed(seed, static_cast<std::uint64_t>(chain)); }

std::vector<std::int64_t> sample_double(const DomainGraph& g, std::span<const int> edges, const ChainPlan& plan,
                                        std::size_t counters, const std::function<Evaluator()>& make_eval) {
  const auto per_chain = map_tasks(
      plan.chains,
      [&](int c) {
        const std::uint64_t s = plan.chain_seed(c);
        sampler::CurrentChain c1(g, {}, derive_seed(s, 1));
        sampler::CurrentChain c2(g, {}, derive_seed(s, 2));
        Evaluator eval = make_eval();
        std::vector<std::int64_t> hits(counters, 0);
        c1.advance(plan.burn_in);
        c2.advance(plan.burn_in);
        sampler::CurrentTrace t1, t2;
        sampler::DoubleTrace dc;
        for (int i = 0; i < plan.samples; ++i) {
          c1.advance(plan.sweeps);
          c2.advance(plan.sweeps);
          if (edges.empty()) {
            c1.sample_into(t1);
            c2.sample_into(t2);
          } else {
            c1.sample_edges(edges, t1);
            c2.sample_edges(edges, t2);
          }
          fill_double(t1, t2, edges, dc);
          eval(dc, hits);
        }
        return hits;
      },
      plan.exec);
  std::vector<std::int64_t> total(counters, 0);
  for (const auto& h : per_chain) {
    for (std::size_t i = 0; i < counters; ++i) total[i] += h[i];
  }
  return total;
}

std::vector<int> box_edges(const DomainGraph& g, Coord x, int R) {
  std::vector<int> out;
  for (int e = 0; e < g.num_edges(); ++e) {
    if (linf_norm(g.vertex(g.edge(e).u) - x) <= R && linf_norm(g.vertex(g.edge(e).v) - x) <= R) out.push_back(e);
  }
  return out;
}

std::vector<DomainGraph> connected_subgraphs(const DomainGraph& g) {
  need(g.num_edges() <= 20, "connected_subgraphs: too many edges");
  std::vector<DomainGraph> out;
  for (std::uint32_t m = 1; m < (1u << g.num_edges()); ++m) {
    UnionFind uf(g.num_vertices());
    std::vector<int> ids;
    std::vector<std::uint8_t> used(uz(g.num_vertices()), 0);
    for (int e = 0; e < g.num_edges(); ++e) {
      if ((m >> e) & 1u) {
        ids.push_back(e);
        uf.unite(g.edge(e).u, g.edge(e).v);
        used[uz(g.edge(e).u)] = used[uz(g.edge(e).v)] = 1;
      }
    }
    int roots = 0;
    for (int v = 0; v < g.num_vertices(); ++v) {
      if (used[uz(v)] && uf.find(v) == v) ++roots;
    }
    if (roots == 1) out.push_back(lattice::edge_subgraph(g, ids));
  }
  return out;
}

// ---------------------------------------------------------------- identities

namespace {

void lemma_corpus(const Config& cfg, Report& rep) {
  const int max_graphs = static_cast<int>(cfg.integer("lemma_graphs", -1));
  const int max_sources = static_cast<int>(cfg.integer("max_sources", 4));
  const int corrupt = static_cast<int>(cfg.integer("corrupt_case", -1));
  const double tol = cfg.real("tolerance", 1e-10);
  const DomainGraph base = lattice::build_rect({0, 0}, 3, 2);
  auto subs = connected_subgraphs(base);
  if (max_graphs >= 0 && static_cast<int>(subs.size()) > max_graphs) subs.resize(uz(max_graphs));

  // (G, H) pairs: each subgraph against itself and inside the full grid.
  std::vector<std::pair<const DomainGraph*, const DomainGraph*>> pairs;
  for (const auto& s : subs) pairs.emplace_back(&s, &s);
  for (const auto& s : subs) {
    if (s.num_edges() != base.num_edges()) pairs.emplace_back(&base, &s);
  }
  need(!pairs.empty(), "no cases");

  const auto results = map_tasks(
      static_cast<int>(pairs.size()),
      [&](int i) {
        const DomainGraph& g = *pairs[uz(i)].first;
        const DomainGraph& h = *pairs[uz(i)].second;
        exact::SwitchingOptions opt;
        opt.corrupt = i == corrupt;
        const std::vector<std::pair<std::string, exact::TraceFunctional>> fs{
            {"one", exact::functional_one()},
            {"edge0", exact::functional_edge_positive(g.edge_between(h.vertex(h.edge(0).u), h.vertex(h.edge(0).v)))},
            {"clusters", exact::functional_cluster_count(g)}};
        // Sources as class ids of g.
        std::vector<int> h_in_g;
        for (Coord c : h.vertices()) h_in_g.push_back(g.class_of(g.index_of(c)));
        double worst = 0.0;
        std::string where;
        int cases = 0;
        for (const auto& as : even_subsets(h.num_vertices(), max_sources)) {
          exact::SourceSet a;
          for (int k : as) a.push_back(h_in_g[uz(k)]);
          std::sort(a.begin(), a.end());
          for (const auto& b : even_subsets(g.num_vertices(), max_sources)) {
            for (const auto& [fname, f] : fs) {
              const auto r = exact::verify_switching_lemma(g, h, a, b, f, opt);
              double res = r.residual;
              if (r.formal_checked && !r.formal_equal) res = std::max(res, 1.0);
              ++cases;
              if (where.empty() || res > worst) {
                worst = res;
                std::ostringstream id;
                id << "A={";
                for (int v : a) id << ' ' << g.class_name(v);
                id << " } B={";
                for (int v : b) id << ' ' << g.class_name(v);
                id << " } f=" << fname;
                where = id.str();
              }
            }
          }
        }
        return std::make_tuple(worst, where, cases);
      },
      Exec::Parallel);
  int total = 0;
  double worst = 0.0;
  std::string worst_id;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [res, where, cases] = results[i];
    total += cases;
    const std::string id = "graph " + std::to_string(i) + " G=[" + graph_id(*pairs[i].first) + "] H=[" +
                           graph_id(*pairs[i].second) + "] " + where;
    rep.residuals.push_back({"switching_lemma", id, res, tol});
    if (worst_id.empty() || res > worst) {
      worst = res;
      worst_id = id;
    }
  }
  rep.add_gate("switching_lemma", worst <= tol,
               std::to_string(total) + " identities over " + std::to_string(pairs.size()) +
                   " graph pairs; max residual " + num(worst) + (worst > tol ? " at " + worst_id : ""));
}

void principle_corpus(const Config& cfg, Report& rep) {
  const double tol = cfg.real("tolerance", 1e-10);
  struct Case {
    std::string name;
    exact::Multigraph m;
  };
  using exact::Multigraph;
  std::vector<Case> corpus{
      {"doubled edge", Multigraph::from_multiplicities(2, {{0, 1, 2}})},
      {"triangle 1,1,2", Multigraph::from_multiplicities(3, {{0, 1, 1}, {1, 2, 1}, {2, 0, 2}})},
      {"square 2,1,2,1", Multigraph::from_multiplicities(4, {{0, 1, 2}, {1, 2, 1}, {2, 3, 2}, {3, 0, 1}})},
      {"path 3,2,3", Multigraph::from_multiplicities(4, {{0, 1, 3}, {1, 2, 2}, {2, 3, 3}})},
      {"K4 weighted", Multigraph::from_multiplicities(4, {{0, 1, 2}, {1, 2, 2}, {2, 3, 2}, {3, 0, 2}, {0, 2, 1}, {1, 3, 1}})},
      {"theta 3,3,3", Multigraph::from_multiplicities(2, {{0, 1, 9}})},
      {"pentagon 4x5", Multigraph::from_multiplicities(5, {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 4, 4}, {4, 0, 4}})},
      {"grid 2x2 doubled", Multigraph::from_multiplicities(4, {{0, 1, 2}, {1, 3, 2}, {3, 2, 2}, {2, 0, 2}})},
  };
  const std::vector<std::pair<std::string, exact::MultiFunctional>> fs{
      {"one", [](std::uint32_t) { return 1.0; }},
      {"parity", [](std::uint32_t s) { return static_cast<double>(std::popcount(s) % 2); }},
      {"size squared", [](std::uint32_t s) { return std::pow(static_cast<double>(std::popcount(s)), 2); }},
      {"first edges", [](std::uint32_t s) { return static_cast<double>(std::popcount(s & 0x3u)); }},
  };
  double worst = 0.0;
  int total = 0;
  for (const auto& c : corpus) {
    double w = 0.0;
    for (const auto& a : even_subsets(c.m.num_vertices, c.m.num_vertices)) {
      for (const auto& [fname, f] : fs) {
        try {
          const auto r = exact::verify_switching_principle(c.m, a, f);
          w = std::max(w, r.residual);
          ++total;
        } catch (const Error& e) {
          if (std::string(e.what()) != "unswitchable") throw;
        }
      }
    }
    rep.residuals.push_back({"switching_principle", c.name, w, tol});
    worst = std::max(worst, w);
  }
  rep.add_gate("switching_principle", worst <= tol && total > 0,
               std::to_string(total) + " identities; max residual " + num(worst));
}

void flux_corpus(const Config& cfg, Report& rep) {
  const double tol = cfg.real("tolerance", 1e-10);
  const std::vector<std::pair<std::string, DomainGraph>> graphs{{"2x2 box", lattice::build_rect({0, 0}, 2, 2)},
                                                                {"3x3 box", lattice::build_box(1)}};
  double worst = 0.0;
  int qualifying = 0;
  for (const auto& [name, g] : graphs) {
    const Coord lo = g.min_corner() - Coord{1, 1};
    const Coord hi = g.max_corner();
    std::vector<Coord> faces;
    for (int x = lo.x; x <= hi.x; ++x) {
      for (int y = lo.y; y <= hi.y; ++y) faces.push_back({x, y});
    }
    double w = 0.0;
    int q = 0;
    for (std::size_t i = 0; i < faces.size(); ++i) {
      for (std::size_t j = i + 1; j < faces.size(); ++j) {
        const auto r = exact::verify_flux_half(g, faces[i], faces[j]);
        w = std::max(w, r.residual);
        q += r.qualifying;
      }
    }
    rep.residuals.push_back({"flux_half", name + " (" + std::to_string(q) + " qualifying aggregates)", w, tol});
    worst = std::max(worst, w);
    qualifying += q;
  }
  rep.add_gate("flux_half", worst <= tol && qualifying > 0,
               std::to_string(qualifying) + " qualifying aggregates; max residual " + num(worst));
}

void parity_corpus(const Config& cfg, Report& rep) {
  const double tol = cfg.real("tolerance", 1e-10);
  const int order = static_cast<int>(cfg.integer("series_order", 30));
  double worst = 0.0;
  for (double beta : {0.0, critical::beta_c(), 1.0}) {
    const auto r = exact::validate_parity_reduction(beta, order);
    rep.residuals.push_back({"parity_reduction", "beta=" + num(beta), r.residual(), tol});
    worst = std::max(worst, r.residual());
  }
  const auto rc = exact::validate_parity_reduction(critical::beta_c(), order);
  const double dq = std::abs(rc.q_even_series - rc.q_even_closed);
  rep.residuals.push_back({"parity_reduction", "q_even(beta_c)=" + num(rc.q_even_series), dq, 1e-6});
  rep.add_gate("parity_reduction", worst <= tol && dq <= 1e-6 && std::abs(rc.q_even_closed - 0.0898) < 5e-5,
               "max series residual " + num(worst) + "; q_even(beta_c) = " + num(rc.q_even_series));
}

}  // namespace

Report run_identity_suite(const Config& cfg) {
  Report rep = start(cfg, "identity");
  const bool lemma = cfg.flag("lemma", true);
  const bool principle = cfg.flag("principle", true);
  const bool flux = cfg.flag("flux", true);
  const bool parity = cfg.flag("parity", true);
  need(lemma || principle || flux || parity, "no cases");
  if (lemma) lemma_corpus(cfg, rep);
  if (principle) principle_corpus(cfg, rep);
  if (flux) flux_corpus(cfg, rep);
  if (parity) parity_corpus(cfg, rep);
  return rep;
}

// ------------------------------------------------------------ sampler checks

Report run_sampler_oracle(const Config& cfg) {
  Report rep = start(cfg, "sampler_oracle");
  const ChainPlan plan = ChainPlan::from(cfg, 10, 10000, 64, 1);
  const double sigmas = cfg.real("sigmas", 4.0);
  const DomainGraph g = lattice::build_rect({0, 0}, 3, 2);
  const int n = g.num_vertices();
  const int m = g.num_edges();
  const std::vector<Coord> src_coords{{0, 0}, {2, 1}};
  const exact::SourceSet src = g.indices_of(src_coords);

  // Counters: agreement per pair, then positive/odd per edge for the free
  // and the sourced current.
  std::vector<std::array<int, 2>> pairs;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) pairs.push_back({u, v});
  }
  const std::size_t np = pairs.size();
  const auto counts = map_tasks(
      plan.chains,
      [&](int c) {
        const std::uint64_t s = plan.chain_seed(c);
        std::vector<std::int64_t> h(np + 4 * uz(m), 0);
        sampler::FkChain fk(g, derive_seed(s, 1));
        sampler::CurrentChain free_chain(g, {}, derive_seed(s, 2));
        sampler::CurrentChain src_chain(g, src, derive_seed(s, 3));
        fk.advance(plan.burn_in);
        free_chain.advance(plan.burn_in);
        src_chain.advance(plan.burn_in);
        sampler::CurrentTrace t;
        for (int i = 0; i < plan.samples; ++i) {
          fk.advance(plan.sweeps);
          const auto& sp = fk.spins().spin;
          for (std::size_t p = 0; p < np; ++p) h[p] += sp[uz(pairs[p][0])] == sp[uz(pairs[p][1])];
          free_chain.advance(plan.sweeps);
          free_chain.sample_into(t);
          for (int e = 0; e < m; ++e) {
            h[np + uz(e)] += t.positive[uz(e)];
            h[np + uz(m + e)] += t.odd[uz(e)];
          }
          src_chain.advance(plan.sweeps);
          src_chain.sample_into(t);
          for (int e = 0; e < m; ++e) {
            h[np + uz(2 * m + e)] += t.positive[uz(e)];
            h[np + uz(3 * m + e)] += t.odd[uz(e)];
          }
        }
        return h;
      },
      plan.exec);
  std::vector<std::int64_t> h(np + 4 * uz(m), 0);
  for (const auto& c : counts) {
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += c[i];
  }
  const std::int64_t trials = plan.trials();

  double worst = 0.0;
  std::string worst_id;
  auto check = [&](const std::string& suite, const std::string& id, std::int64_t hits, double exact_p) {
    const double d = stats::wilson_distance(hits, trials, exact_p);
    rep.residuals.push_back({suite, id + " exact=" + num(exact_p) + " p_hat=" + num(double(hits) / double(trials)), d, sigmas});
    if (worst_id.empty() || d > worst) {
      worst = d;
      worst_id = suite + " " + id;
    }
  };
  for (std::size_t p = 0; p < np; ++p) {
    const int u = pairs[p][0], v = pairs[p][1];
    const double corr = exact::correlation_exact(g, {u, v});
    rep.estimates.push_back(estimate(rep, "spin_agree", u, v, 0, h[p], trials));
    check("spin_correlation", coord_str(g.vertex(u)) + coord_str(g.vertex(v)), h[p], 0.5 * (1.0 + corr));
  }
  const auto free_table = exact::trace_distribution_exact(g, {});
  const auto src_table = exact::trace_distribution_exact(g, src);
  for (int e = 0; e < m; ++e) {
    const std::string id = "edge " + coord_str(g.vertex(g.edge(e).u)) + "-" + coord_str(g.vertex(g.edge(e).v));
    rep.estimates.push_back(estimate(rep, "positive_free", 0, 0, e, h[np + uz(e)], trials));
    rep.estimates.push_back(estimate(rep, "odd_free", 0, 0, e, h[np + uz(m + e)], trials));
    rep.estimates.push_back(estimate(rep, "positive_sourced", 0, 0, e, h[np + uz(2 * m + e)], trials));
    rep.estimates.push_back(estimate(rep, "odd_sourced", 0, 0, e, h[np + uz(3 * m + e)], trials));
    check("positive_free", id, h[np + uz(e)], free_table.positive_marginal(e));
    check("odd_free", id, h[np + uz(m + e)], free_table.odd_marginal(e));
    check("positive_sourced", id, h[np + uz(2 * m + e)], src_table.positive_marginal(e));
    check("odd_sourced", id, h[np + uz(3 * m + e)], src_table.odd_marginal(e));
  }
  rep.add_gate("sampler_vs_oracle", worst <= sigmas,
               std::to_string(rep.residuals.size()) + " marginals at " + std::to_string(trials) +
                   " samples; worst Wilson distance " + num(worst) + " (" + worst_id + ")");
  return rep;
}

Report run_coupling_suite(const Config& cfg) {
  Report rep = start(cfg, "coupling");
  const ChainPlan plan = ChainPlan::from(cfg, 10, 10000, 64, 1);
  const double gate_conf = cfg.real("gate_confidence", 0.99);
  const int n = static_cast<int>(cfg.integer("box", 4));
  need(n >= 1, "box must be positive");
  const DomainGraph g = lattice::build_box(n);
  const auto left = column(g, -n);
  const auto right = column(g, n);
  const std::vector<std::array<Coord, 2>> pair_coords{
      {{{0, 0}, {0, 0}}}, {{{0, 0}, {1, 0}}}, {{{0, 0}, {2, 2}}}, {{{-n, 0}, {n, 0}}}, {{{-n, -n}, {n, n}}}};
  std::vector<std::array<int, 2>> pairs;
  for (const auto& [a, b] : pair_coords) pairs.push_back({g.index_of(a), g.index_of(b)});
  const std::size_t np = pairs.size();

  // Counters: crossing via current, crossing via FK, then per pair the spin
  // agreement and the FK connection.
  const auto counts = map_tasks(
      plan.chains,
      [&](int c) {
        const std::uint64_t s = plan.chain_seed(c);
        std::vector<std::int64_t> h(2 + 2 * np, 0);
        sampler::CurrentChain cur(g, {}, derive_seed(s, 1));
        sampler::FkChain fk(g, derive_seed(s, 2));
        cur.advance(plan.burn_in);
        fk.advance(plan.burn_in);
        UnionFind uf;
        std::vector<std::uint8_t> mark;
        auto label = [&](const std::vector<std::uint8_t>& open) {
          uf.reset(g.num_vertices());
          for (int e = 0; e < g.num_edges(); ++e) {
            if (open[uz(e)]) uf.unite(g.edge(e).u, g.edge(e).v);
          }
        };
        sampler::CurrentTrace t;
        for (int i = 0; i < plan.samples; ++i) {
          cur.advance(plan.sweeps);
          cur.sample_into(t);
          const auto w1 = sampler::fk_from_current(t, derive_seed(s, 1000 + static_cast<std::uint64_t>(i) * 2));
          label(w1.open);
          h[0] += joined(uf, left, right, mark);
          fk.advance(plan.sweeps);
          const auto& w2 = fk.sample();
          label(w2.open);
          h[1] += joined(uf, left, right, mark);
          const auto spins = sampler::es_spins(g, w2, derive_seed(s, 1001 + static_cast<std::uint64_t>(i) * 2));
          for (std::size_t p = 0; p < np; ++p) {
            const int u = pairs[p][0], v = pairs[p][1];
            h[2 + p] += spins.spin[uz(u)] == spins.spin[uz(v)];
            h[2 + np + p] += uf.same(u, v);
          }
        }
        return h;
      },
      plan.exec);
  std::vector<std::int64_t> h(2 + 2 * np, 0);
  for (const auto& c : counts) {
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += c[i];
  }
  const std::int64_t trials = plan.trials();
  rep.estimates.push_back(estimate(rep, "crossing_current_route", 0, n, 0, h[0], trials));
  rep.estimates.push_back(estimate(rep, "crossing_fk", 0, n, 0, h[1], trials));
  const auto ca = stats::wilson_ci(h[0], trials, gate_conf);
  const auto cb = stats::wilson_ci(h[1], trials, gate_conf);
  rep.add_gate("fk_current_coupling", ca.overlaps(cb),
               "horizontal crossing of Lambda_" + std::to_string(n) + ": current route " + interval_str(ca) +
                   ", FK " + interval_str(cb));
  bool all = true;
  std::string detail;
  for (std::size_t p = 0; p < np; ++p) {
    const auto [u, v] = pairs[p];
    rep.estimates.push_back(estimate(rep, "spin_agree", u, v, 0, h[2 + p], trials));
    rep.estimates.push_back(estimate(rep, "fk_connected", u, v, 0, h[2 + np + p], trials));
    const auto agree = stats::wilson_ci(h[2 + p], trials, gate_conf);
    const stats::Interval corr{2.0 * agree.lo - 1.0, 2.0 * agree.hi - 1.0};
    const auto conn = stats::wilson_ci(h[2 + np + p], trials, gate_conf);
    const bool ok = corr.overlaps(conn);
    all = all && ok;
    detail += coord_str(g.vertex(u)) + coord_str(g.vertex(v)) + ": spins " + interval_str(corr) + " vs FK " +
              interval_str(conn) + (ok ? "" : " MISMATCH") + "; ";
  }
  rep.add_gate("edwards_sokal_correlation", all, detail);

  if (cfg.flag("include_oracle", false)) {
    const Report o = run_sampler_oracle(cfg);
    rep.estimates.insert(rep.estimates.end(), o.estimates.begin(), o.estimates.end());
    rep.residuals.insert(rep.residuals.end(), o.residuals.begin(), o.residuals.end());
    rep.gates.insert(rep.gates.end(), o.gates.begin(), o.gates.end());
  }
  return rep;
}

// ------------------------------------------------------------ Monte Carlo

Report run_boundary_connection(const Config& cfg) {
  Report rep = start(cfg, "boundary_connection");
  const ChainPlan plan = ChainPlan::from(cfg, 4, 2500, 64, 2);
  const auto Rs = cfg.ints("R", {8, 16, 32, 64});
  const int r = static_cast<int>(cfg.integer("r", 1));
  const int factor = static_cast<int>(cfg.integer("domain_factor", 2));
  need(r >= 1 && factor >= 2, "boundary_connection needs r >= 1 and domain_factor >= 2");
  std::vector<Estimate> est;
  for (int R : Rs) {
    need(R > r, "R must exceed r");
    const DomainGraph g = lattice::build_box(factor * R);
    const auto h = sample_double(g, {}, plan, 1, [&] {
      auto probe = std::make_shared<clusters::BoundaryProbe>(g, R, r);
      return Evaluator([probe](const sampler::DoubleTrace& dc, std::vector<std::int64_t>& hits) {
        hits[0] += probe->connected(dc.positive);
      });
    });
    est.push_back(estimate(rep, "boundary_connection", r, R, 0, h[0], plan.trials()));
  }
  rep.estimates = est;

  std::vector<double> xs, ys, cs;
  bool decreasing = true;
  for (std::size_t i = 0; i < est.size(); ++i) {
    xs.push_back(est[i].R);
    ys.push_back(est[i].p_hat());
    cs.push_back(est[i].p_hat() * std::log(static_cast<double>(est[i].R) / r));
    if (i > 0 && !(est[i].p_hat() < est[i - 1].p_hat())) decreasing = false;
  }
  report::Fit fit{"boundary_connection_vs_R", stats::loglog_fit(xs, ys), {}};
  for (std::size_t i = 0; i < cs.size(); ++i) fit.extra["c_R" + std::to_string(est[i].R)] = cs[i];
  const double cmin = *std::min_element(cs.begin(), cs.end());
  const double cmax = *std::max_element(cs.begin(), cs.end());
  fit.extra["c_min"] = cmin;
  fit.extra["c_max"] = cmax;
  rep.fits.push_back(fit);

  const auto first = rep.interval(est.front());
  const auto last = rep.interval(est.back());
  rep.add_gate("strictly_decreasing", decreasing && est.size() >= 2 && first.lo > last.hi,
               "p_hat " + [&] {
                 std::string s;
                 for (const auto& e : est) s += "R=" + std::to_string(e.R) + ":" + num(e.p_hat()) + " ";
                 return s;
               }() + "; endpoint CIs " + interval_str(first) + " vs " + interval_str(last));
  rep.add_gate("log_lower_bound", cmin > 0.0 && cmax <= 3.0 * cmin,
               "p_hat*log(R/r) ranges over [" + num(cmin) + ", " + num(cmax) + "]");
  return rep;
}

Report run_pivotal(const Config& cfg, bool square, bool hole) {
  const std::string name = square && hole ? "pivotal" : square ? "pivotal_square" : "pivotal_hole";
  Report rep = start(cfg, name);
  const ChainPlan plan = ChainPlan::from(cfg, 4, 1000, 64, 2);
  const int R = static_cast<int>(cfg.integer("R", 128));
  const auto rs = cfg.ints("r", {32, 16, 8, 4});
  const int factor = static_cast<int>(cfg.integer("domain_factor", 4));
  const double slope_min = cfg.real("slope_min", 1.5);
  const double gate_conf = cfg.real("gate_confidence", 0.99);
  const bool slope_gate = cfg.flag("slope_gate", true);
  const bool parity_gate = cfg.flag("parity_gate", hole);
  // Classifies closest pairs by whether the two holes also meet outside the
  // annulus; needs the whole domain sampled.
  const bool diagnostic = hole && cfg.flag("separation_diagnostic", false);
  for (int r : rs) need(r >= 1 && r < R, "pivotal: need 1 <= r < R");
  need(factor >= 1, "domain_factor must be positive");
  const DomainGraph g = lattice::build_box(factor * R);
  const auto edges = diagnostic ? std::vector<int>{} : box_edges(g, {0, 0}, R);
  const std::size_t nr = rs.size();
  // Per r: square, hole, closest odd, closest even, any odd, any even, and
  // closest odd / even among pairs not joined outside the annulus.
  constexpr std::size_t kPer = 8;
  const auto h = sample_double(g, edges, plan, kPer * nr, [&] {
    auto arms = std::make_shared<clusters::BoxArms>(g, Coord{0, 0}, R);
    auto holes = std::make_shared<std::vector<clusters::HoleProbe>>();
    auto global = diagnostic ? std::make_shared<clusters::DualComponents>(g) : nullptr;
    if (hole) {
      for (int r : rs) holes->emplace_back(g, Coord{0, 0}, r, R);
    }
    return Evaluator([=, &rs](const sampler::DoubleTrace& dc, std::vector<std::int64_t>& hits) {
      if (square) {
        const auto depths = arms->crossing_depths(dc.positive);
        for (std::size_t i = 0; i < nr; ++i) hits[kPer * i] += depths.size() >= 2 && depths[1] <= rs[i];
      }
      if (hole) {
        if (global) global->label(dc.positive);
        for (std::size_t i = 0; i < nr; ++i) {
          const auto hr = (*holes)[i].analyse(dc);
          hits[kPer * i + 1] += hr.a4;
          hits[kPer * i + 2] += hr.has_pair && hr.n1_flux == 1;
          hits[kPer * i + 3] += hr.has_pair && hr.n1_flux == 0;
          hits[kPer * i + 4] += hr.any_odd;
          hits[kPer * i + 5] += hr.any_even;
          if (global && hr.has_pair && !global->same(hr.face_a, hr.face_b)) {
            hits[kPer * i + 6] += hr.n1_flux == 1;
            hits[kPer * i + 7] += hr.n1_flux == 0;
          }
        }
      }
    });
  });
  const std::int64_t n = plan.trials();
  static const char* names[kPer] = {"A4_square",       "A4_hole",          "A4_hole_odd",          "A4_hole_even",
                                    "A4_hole_any_odd", "A4_hole_any_even", "A4_hole_separated_odd", "A4_hole_separated_even"};
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t k = 0; k < kPer; ++k) {
      if ((k == 0 && !square) || (k > 0 && !hole) || (k >= 6 && !diagnostic)) continue;
      rep.estimates.push_back(estimate(rep, names[k], rs[i], R, 0, h[kPer * i + k], n));
    }
  }
  auto fit_event = [&](std::size_t k) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < nr; ++i) {
      xs.push_back(static_cast<double>(rs[i]) / R);
      ys.push_back(static_cast<double>(h[kPer * i + k]) / static_cast<double>(n));
    }
    report::Fit f{std::string(names[k]) + "_vs_ratio", stats::loglog_fit(xs, ys), {}};
    f.extra["points_used"] = static_cast<double>(f.fit.points.size());
    f.extra["points_requested"] = static_cast<double>(nr);
    rep.fits.push_back(f);
    if (slope_gate) {
      const bool ok = f.fit.points.size() >= 2 && f.fit.slope >= slope_min;
      rep.add_gate(std::string(names[k]) + "_slope", ok,
                   "slope " + num(f.fit.slope) + " (min " + num(slope_min) + "), fit residual " + num(f.fit.residual) +
                       ", " + std::to_string(f.fit.points.size()) + "/" + std::to_string(nr) + " points");
    }
  };
  if (square) fit_event(0);
  if (hole) fit_event(1);
  auto pair_gate = [&](const std::string& name, std::size_t i, std::size_t ko, std::size_t ke, const std::string& what) {
    const auto odd = stats::wilson_ci(h[kPer * i + ko], n, gate_conf);
    const auto even = stats::wilson_ci(h[kPer * i + ke], n, gate_conf);
    rep.add_gate(name + "_r" + std::to_string(rs[i]), odd.overlaps(even),
                 what + ": odd " + std::to_string(h[kPer * i + ko]) + " " + interval_str(odd) + ", even " +
                     std::to_string(h[kPer * i + ke]) + " " + interval_str(even) + " of " + std::to_string(n) +
                     "; any pair: odd " + std::to_string(h[kPer * i + 4]) + ", even " + std::to_string(h[kPer * i + 5]));
  };
  if (hole && parity_gate) {
    for (std::size_t i = 0; i < nr; ++i) pair_gate("A4_hole_odd_even", i, 2, 3, "closest pair");
  }
  if (diagnostic) {
    for (std::size_t i = 0; i < nr; ++i)
      pair_gate("A4_hole_separated_odd_even", i, 6, 7, "closest pair, holes not joined outside the annulus");
  }
  return rep;
}

Report run_pivotal_square(const Config& cfg) { return run_pivotal(cfg, true, false); }
Report run_pivotal_hole(const Config& cfg) { return run_pivotal(cfg, false, true); }

Report run_ab_criterion(const Config& cfg) {
  Report rep = start(cfg, "ab_criterion");
  const ChainPlan plan = ChainPlan::from(cfg, 4, 1000, 64, 2);
  const int R = static_cast<int>(cfg.integer("R", 32));
  const auto rs = cfg.ints("r", {16, 8, 4, 2});
  const int kmax = static_cast<int>(cfg.integer("k_max", 4));
  const int factor = static_cast<int>(cfg.integer("domain_factor", 4));
  const int ratio_r = static_cast<int>(cfg.integer("ratio_r", R / 8));
  const double ratio_max = cfg.real("ratio_max", 0.7);
  const bool rect = cfg.flag("rectangle", true);
  need(kmax >= 3, "ab_criterion needs k_max >= 3");
  for (int r : rs) need(r >= 1 && r < R, "ab_criterion: need 1 <= r < R");
  need(R % 2 == 0, "ab_criterion: R must be even");
  const DomainGraph g = lattice::build_box(factor * R);
  const auto edges = box_edges(g, {0, 0}, R);
  const std::size_t nr = rs.size();
  const std::size_t K = uz(kmax);
  const auto h = sample_double(g, edges, plan, (nr + 1) * K, [&] {
    auto probes = std::make_shared<std::vector<clusters::AnnulusClusters>>();
    for (int r : rs) probes->emplace_back(g, Coord{0, 0}, r, R);
    auto box = std::make_shared<clusters::RectangleCrossings>(g, Coord{-R, -R / 2}, 2 * R, R);
    return Evaluator([=](const sampler::DoubleTrace& dc, std::vector<std::int64_t>& hits) {
      for (std::size_t i = 0; i < nr; ++i) {
        const int c = (*probes)[i].count(dc.positive);
        for (std::size_t k = 0; k < K; ++k) hits[i * K + k] += c >= static_cast<int>(k + 1);
      }
      if (rect) {
        const int c = box->count(dc.positive);
        for (std::size_t k = 0; k < K; ++k) hits[nr * K + k] += c >= static_cast<int>(k + 1);
      }
    });
  });
  const std::int64_t n = plan.trials();
  auto p = [&](std::size_t i, std::size_t k) { return static_cast<double>(h[i * K + k]) / static_cast<double>(n); };
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t k = 0; k < K; ++k) rep.estimates.push_back(estimate(rep, "A2k", rs[i], R, int(k + 1), h[i * K + k], n));
  }

  // Ratio gate at r = ratio_r.
  const auto it = std::find(rs.begin(), rs.end(), ratio_r);
  if (it == rs.end()) {
    rep.add_gate("A2k_ratio", false, "ratio_r=" + std::to_string(ratio_r) + " is not among the sampled r");
  } else {
    const std::size_t i = uz(static_cast<int>(it - rs.begin()));
    for (std::size_t k = 0; k < 2; ++k) {
      const auto lo = stats::wilson_ci(h[i * K + k], n, rep.confidence);
      const auto hi = stats::wilson_ci(h[i * K + k + 1], n, rep.confidence);
      const double ratio = lo.lo > 0.0 ? hi.hi / lo.lo : std::numeric_limits<double>::infinity();
      rep.add_gate("A2k_ratio_k" + std::to_string(k + 1), ratio <= ratio_max,
                   "P[A_" + std::to_string(2 * (k + 2)) + "]/P[A_" + std::to_string(2 * (k + 1)) + "] at r/R=" +
                       std::to_string(ratio_r) + "/" + std::to_string(R) + ": point " +
                       num(p(i, k) > 0 ? p(i, k + 1) / p(i, k) : 0.0) + ", CI-adjusted " + num(ratio) + " (max " +
                       num(ratio_max) + ")");
    }
    bool dec = true;
    for (std::size_t k = 0; k + 1 < K; ++k) {
      if (h[i * K + k] > 0 && !(p(i, k + 1) < p(i, k))) dec = false;
    }
    rep.add_gate("A2k_decreasing_in_k", dec, "at r=" + std::to_string(ratio_r));
  }

  // Exponent fits per k over the ratios.
  std::vector<double> lambdas;
  bool enough = true;
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < nr; ++i) {
      xs.push_back(static_cast<double>(rs[i]) / R);
      ys.push_back(p(i, k));
    }
    report::Fit f{"A2k_k" + std::to_string(k + 1) + "_vs_ratio", stats::loglog_fit(xs, ys), {}};
    f.extra["points_used"] = static_cast<double>(f.fit.points.size());
    enough = enough && f.fit.points.size() >= 2;
    lambdas.push_back(f.fit.slope);
    rep.fits.push_back(f);
  }
  const bool nondecreasing = enough && lambdas[0] <= lambdas[1] && lambdas[1] <= lambdas[2];
  rep.add_gate("lambda_nondecreasing", nondecreasing,
               "lambda_1..3 = " + num(lambdas[0]) + ", " + num(lambdas[1]) + ", " + num(lambdas[2]));

  if (rect) {
    double c_hat = 1.0;
    report::Fit f{"rectangle_tail", {}, {}};
    std::vector<double> ks, ps;
    for (std::size_t k = 0; k < K; ++k) {
      rep.estimates.push_back(estimate(rep, "rect_tail", 0, R, int(k + 1), h[nr * K + k], n));
      const double pk = p(nr, k);
      ks.push_back(double(k + 1));
      ps.push_back(pk);
      if (pk > 0.0) c_hat = std::min(c_hat, 1.0 - std::pow(pk, 1.0 / double(k + 1)));
      f.extra["P_ge_" + std::to_string(k + 1)] = pk;
    }
    f.fit = stats::loglog_fit(ks, ps);
    f.extra["c_hat"] = c_hat;
    rep.fits.push_back(f);
    rep.add_gate("rectangle_tail", c_hat > 0.0, "P[>=k] <= (1-c)^k with c_hat = " + num(c_hat));
  }
  return rep;
}

// ------------------------------------------------------------ harmonic

Report run_harmonic_sandwich(const Config& cfg) {
  Report rep = start(cfg, "harmonic_sandwich");
  const ChainPlan plan = ChainPlan::from(cfg, 4, 2500, 64, 2);
  const auto Rs = cfg.ints("R", {16, 24, 32});
  const int factor = static_cast<int>(cfg.integer("domain_factor", 3));
  const int divisor = static_cast<int>(cfg.integer("inner_divisor", 8));
  const double slack = cfg.real("slack", 2.0);
  const double choice_max = cfg.real("dual_choice_spread", 0.10);
  report::Fit fit{"sandwich", {}, {}};
  double c_lo = 0.0, c_hi = 0.0;
  for (std::size_t idx = 0; idx < Rs.size(); ++idx) {
    const int R = Rs[idx];
    const int r = std::max(1, R / divisor);
    const Coord x{2 * R, 0};
    need(2 * R + r < factor * R, "harmonic_sandwich: Lambda_r(x) must lie inside the domain");
    const DomainGraph omega = lattice::build_box(factor * R);
    std::vector<Coord> small, big;
    for (Coord c : omega.vertices()) {
      if (linf_norm(c - x) <= r) small.push_back(c);
      if (linf_norm(c) <= R) big.push_back(c);
    }
    const DomainGraph merged = lattice::merge_vertices(omega, {small, big}, {"inner", "outer"});
    const int ca = merged.class_by_name("inner");
    const int cb = merged.class_by_name("outer");
    const auto counts = map_tasks(
        plan.chains,
        [&](int c) {
          sampler::FkChain fk(merged, derive_seed(plan.chain_seed(c), static_cast<std::uint64_t>(R)));
          fk.advance(plan.burn_in);
          std::int64_t hits = 0;
          UnionFind uf;
          for (int i = 0; i < plan.samples; ++i) {
            fk.advance(plan.sweeps);
            const auto& w = fk.sample().open;
            uf.reset(merged.num_classes());
            for (int e = 0; e < merged.num_edges(); ++e) {
              if (w[uz(e)]) uf.unite(merged.class_of(merged.edge(e).u), merged.class_of(merged.edge(e).v));
            }
            hits += uf.same(ca, cb);
          }
          return hits;
        },
        plan.exec);
    std::int64_t hits = 0;
    for (auto v : counts) hits += v;
    const Estimate e = estimate(rep, "fk_connect_merged", r, R, 0, hits, plan.trials());
    rep.estimates.push_back(e);
    const auto ci = rep.interval(e);
    const double p2 = e.p_hat() * e.p_hat();

    const auto quad = lattice::make_free_quad(omega);
    const auto net = harmonic::build_network(quad);
    const auto dual = harmonic::dual_network(quad);
    const double z = harmonic::z_kernel(net, x, {0, 0});
    double zs[4];
    const Coord offs[4] = {{0, 0}, {-1, 0}, {0, -1}, {-1, -1}};
    for (int k = 0; k < 4; ++k) zs[k] = harmonic::z_kernel(dual, x + offs[k], offs[k]);
    const double zd = zs[0];
    const double spread = (*std::max_element(zs, zs + 4) - *std::min_element(zs, zs + 4)) / *std::min_element(zs, zs + 4);
    rep.add_gate("dual_vertex_choice_R" + std::to_string(R), spread < choice_max,
                 "relative spread of Z* over the 4 faces at x and 0: " + num(spread));

    const std::string tag = "_R" + std::to_string(R);
    fit.extra["P2" + tag] = p2;
    fit.extra["Z" + tag] = z;
    fit.extra["Zdual" + tag] = zd;
    if (idx == 0) {
      c_lo = p2 / zd;
      c_hi = p2 / z;
      fit.extra["c"] = c_lo;
      fit.extra["C"] = c_hi;
      rep.add_gate("sandwich_fit_R" + std::to_string(R), p2 > 0.0 && z > 0.0 && zd > 0.0,
                   "c = " + num(c_lo) + ", C = " + num(c_hi));
    } else {
      const double lo2 = ci.lo * ci.lo, hi2 = ci.hi * ci.hi;
      const bool lower = hi2 >= c_lo * zd / slack;
      const bool upper = lo2 <= slack * c_hi * z;
      rep.add_gate("sandwich_R" + std::to_string(R), lower && upper,
                   "P^2 = " + num(p2) + " CI " + interval_str({lo2, hi2}) + "; c Z* = " + num(c_lo * zd) +
                       ", C Z = " + num(c_hi * z) + " (factor " + num(slack) + ")");
    }
  }
  rep.fits.push_back(fit);
  return rep;
}

Report run_crossing_bound(const Config& cfg) {
  Report rep = start(cfg, "crossing_bound");
  const ChainPlan plan = ChainPlan::from(cfg, 4, 2500, 64, 2);
  const auto widths = cfg.ints("widths", {8, 12, 16, 16});
  const auto heights = cfg.ints("heights", {8, 12, 16, 8});
  need(widths.size() == heights.size(), "widths and heights must have the same length");
  report::Fit fit{"crossing_bound", {}, {}};
  double c_max = 0.0;
  bool finite = true;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const int w = widths[i], h = heights[i];
    const auto q = lattice::make_rect_quad({0, 0}, w, h);
    const auto& g = q.domain;
    const auto& ab = q.arc(lattice::Arc::AB);
    const auto& cd = q.arc(lattice::Arc::CD);
    const auto hits = sample_double(g, {}, plan, 1, [&] {
      auto uf = std::make_shared<UnionFind>();
      auto mark = std::make_shared<std::vector<std::uint8_t>>();
      return Evaluator([&, uf, mark](const sampler::DoubleTrace& dc, std::vector<std::int64_t>& out) {
        uf->reset(g.num_vertices());
        for (int e = 0; e < g.num_edges(); ++e) {
          if (dc.positive[uz(e)]) uf->unite(g.edge(e).u, g.edge(e).v);
        }
        out[0] += joined(*uf, ab, cd, *mark);
      });
    });
    rep.estimates.push_back(estimate(rep, "arc_crossing", w, h, 0, hits[0], plan.trials()));
    std::vector<Coord> xs, ys;
    for (int v : ab) xs.push_back(g.vertex(v));
    for (int v : cd) ys.push_back(g.vertex(v));
    const double z = harmonic::z_sets(harmonic::build_network(q), xs, ys);
    const double p = rep.estimates.back().p_hat();
    const std::string tag = "_" + std::to_string(w) + "x" + std::to_string(h);
    fit.extra["P" + tag] = p;
    fit.extra["Z" + tag] = z;
    if (!(z > 0.0) || !std::isfinite(z)) finite = false;
    else c_max = std::max(c_max, p / z);
  }
  fit.extra["C"] = c_max;
  rep.fits.push_back(fit);
  rep.add_gate("crossing_upper_bound", finite && c_max > 0.0 && std::isfinite(c_max),
               "P[(ab)<->(cd)] <= C Z_D[(ab),(cd)] over the family with C = " + num(c_max));
  return rep;
}

std::vector<std::string> experiment_names() {
  return {"identity",    "sampler_oracle", "coupling",     "boundary_connection", "pivotal_square",
          "pivotal_hole", "pivotal",       "ab_criterion", "harmonic_sandwich",   "crossing_bound"};
}

Report run_experiment(const Config& cfg) {
  const std::string name = cfg.str("experiment");
  if (name == "identity") return run_identity_suite(cfg);
  if (name == "sampler_oracle") return run_sampler_oracle(cfg);
  if (name == "coupling") return run_coupling_suite(cfg);
  if (name == "boundary_connection") return run_boundary_connection(cfg);
  if (name == "pivotal_square") return run_pivotal_square(cfg);
  if (name == "pivotal_hole") return run_pivotal_hole(cfg);
  if (name == "pivotal") return run_pivotal(cfg, true, true);
  if (name == "ab_criterion") return run_ab_criterion(cfg);
  if (name == "harmonic_sandwich") return run_harmonic_sandwich(cfg);
  if (name == "crossing_bound") return run_crossing_bound(cfg);
  throw Error("unknown experiment '" + name + "'");
}

}  // namespace currentlab::experiments
