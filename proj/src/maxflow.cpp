#include "gflow/maxflow.hpp"

#include <deque>

namespace gflow {

namespace {

// Internal edge in the residual structure. cap may be infinite; flow in [0, cap].
struct Edge {
  int to;
  ExtRat cap;
  Rat flow;
  int companion;  // index of the reverse edge
  bool frozen = false;
};

struct Graph {
  int n;
  std::vector<std::vector<int>> adj;
  std::vector<Edge> edges;

  explicit Graph(int n_) : n(n_), adj(n_) {}

  int add(int u, int v, ExtRat cap) {
    int id = int(edges.size());
    edges.push_back({v, std::move(cap), Rat(0), id + 1});
    edges.push_back({u, ExtRat(Rat(0)), Rat(0), id});
    adj[u].push_back(id);
    adj[v].push_back(id + 1);
    return id;
  }

  ExtRat residual(int e) const {
    const Edge& ed = edges[e];
    if (ed.cap.inf) return ExtRat::infinity();
    return ExtRat(ed.cap.v - ed.flow);
  }

  bool usable(int e) const {
    if (edges[e].frozen || edges[edges[e].companion].frozen) return false;
    ExtRat r = residual(e);
    return r.inf || sgn(r.v) > 0;
  }

  // Shortest augmenting path s->t; returns augmented amount (0 if none).
  Rat augment(int s, int t) {
    std::vector<int> pre(n, -1);
    std::deque<int> q{s};
    std::vector<char> seen(n, 0);
    seen[s] = 1;
    while (!q.empty() && !seen[t]) {
      int u = q.front();
      q.pop_front();
      for (int e : adj[u]) {
        int v = edges[e].to;
        if (seen[v] || !usable(e)) continue;
        seen[v] = 1;
        pre[v] = e;
        q.push_back(v);
      }
    }
    if (!seen[t]) return Rat(0);
    ExtRat bott = ExtRat::infinity();
    for (int v = t; v != s;) {
      int e = pre[v];
      bott = ext_min(bott, residual(e));
      v = edges[edges[e].companion].to;
    }
    if (bott.inf) throw solver_error("max flow value is unbounded");
    for (int v = t; v != s;) {
      int e = pre[v];
      edges[e].flow += bott.v;
      edges[edges[e].companion].flow -= bott.v;
      v = edges[edges[e].companion].to;
    }
    return bott.v;
  }

  void run(int s, int t) {
    while (sgn(augment(s, t)) > 0) {
    }
  }

  std::vector<char> reachable(int s) const {
    std::vector<char> seen(n, 0);
    seen[s] = 1;
    std::deque<int> q{s};
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int e : adj[u]) {
        if (!usable(e) || seen[edges[e].to]) continue;
        seen[edges[e].to] = 1;
        q.push_back(edges[e].to);
      }
    }
    return seen;
  }
};

// An original arc normalized into internal arcs with lower >= 0: the signed
// flow on arc `orig` gets a contribution sign * (lo + internal flow).
struct Piece {
  int orig;
  int sign;  // +1 along the arc, -1 against it
  int u, v;
  Rat lo;
  ExtRat cap;  // capacity net of the lower bound
  int edge = -1;
};

}  // namespace

MaxFlowResult max_flow_bounded(const FlowNet& net) {
  std::vector<Piece> pieces;
  for (int a = 0; a < int(net.arcs.size()); a++) {
    const BoundArc& ba = net.arcs[a];
    if (ba.lo_ninf) {
      if (!ba.up.inf && sgn(ba.up.v) < 0) {
        // flow <= u < 0: mandatory reverse flow of at least -u
        pieces.push_back({a, -1, ba.head, ba.tail, -ba.up.v, ExtRat::infinity()});
      } else {
        pieces.push_back({a, +1, ba.tail, ba.head, Rat(0), ba.up});
        pieces.push_back({a, -1, ba.head, ba.tail, Rat(0), ExtRat::infinity()});
      }
    } else {
      if (!ba.up.inf && ba.up.v < ba.lo) throw solver_error("arc bounds crossed");
      if (sgn(ba.lo) >= 0) {
        ExtRat cap = ba.up.inf ? ba.up : ExtRat(ba.up.v - ba.lo);
        pieces.push_back({a, +1, ba.tail, ba.head, ba.lo, cap});
      } else if (!ba.up.inf && sgn(ba.up.v) <= 0) {
        pieces.push_back({a, -1, ba.head, ba.tail, -ba.up.v, ExtRat(-ba.lo + ba.up.v)});
      } else {
        pieces.push_back({a, +1, ba.tail, ba.head, Rat(0), ba.up});
        pieces.push_back({a, -1, ba.head, ba.tail, Rat(0), ExtRat(-ba.lo)});
      }
    }
  }

  int S = net.n, T = net.n + 1;
  Graph g(net.n + 2);
  std::vector<Rat> imbalance(net.n, Rat(0));
  for (Piece& p : pieces) {
    p.edge = g.add(p.u, p.v, p.cap);
    imbalance[p.v] += p.lo;
    imbalance[p.u] -= p.lo;
  }
  // Connectors in both directions: the circulation may need net flow t->s or
  // s->t (the max flow value can be negative with negative upper bounds).
  int ts = g.add(net.t, net.s, ExtRat::infinity());
  int st = g.add(net.s, net.t, ExtRat::infinity());
  std::vector<int> helper_edges{ts, st};
  Rat need = 0;
  for (int v = 0; v < net.n; v++) {
    if (sgn(imbalance[v]) > 0) {
      helper_edges.push_back(g.add(S, v, ExtRat(imbalance[v])));
      need += imbalance[v];
    } else if (sgn(imbalance[v]) < 0) {
      helper_edges.push_back(g.add(v, T, ExtRat(-imbalance[v])));
    }
  }
  g.run(S, T);
  Rat pushed = 0;
  for (int e : helper_edges)
    if (e != ts && g.edges[g.edges[e].companion].to == S) pushed += g.edges[e].flow;

  MaxFlowResult res;
  if (pushed != need) {
    res.feasible = false;
    return res;
  }
  for (int e : helper_edges) {
    g.edges[e].frozen = true;
    g.edges[g.edges[e].companion].frozen = true;
  }
  g.run(net.s, net.t);

  res.feasible = true;
  res.x.assign(net.arcs.size(), Rat(0));
  for (const Piece& p : pieces) res.x[p.orig] += Rat(p.sign) * (p.lo + g.edges[p.edge].flow);
  res.value = 0;
  for (int a = 0; a < int(net.arcs.size()); a++) {
    if (net.arcs[a].head == net.t) res.value += res.x[a];
    if (net.arcs[a].tail == net.t) res.value -= res.x[a];
  }
  res.cut = g.reachable(net.s);
  res.cut.resize(net.n);
  return res;
}

TightFlowResult tight_flow(const UncapInstance& inst, const std::vector<char>& in_s,
                           const Labels& mu) {
  if (!in_s[inst.sink]) throw solver_error("tight_flow: sink not in S");
  FlowNet net;
  net.n = inst.n + 1;
  net.s = inst.n;
  net.t = inst.sink;
  std::vector<int> tight;  // instance arc per network arc, -1 for source arcs
  for (int a = 0; a < inst.m(); a++) {
    const Arc& ar = inst.arcs[a];
    if (!in_s[ar.tail] || !in_s[ar.head]) continue;
    if (relabeled_gain(inst, mu, a) != 1) continue;
    net.arcs.push_back({ar.tail, ar.head, false, Rat(0), ExtRat::infinity()});
    tight.push_back(a);
  }
  for (int i = 0; i < inst.n; i++) {
    if (i == inst.sink || !in_s[i]) continue;
    net.arcs.push_back({net.s, i, true, Rat(0), ExtRat(-inst.b[i] / mu[i])});
    tight.push_back(-1);
  }
  MaxFlowResult mf = max_flow_bounded(net);
  TightFlowResult res;
  res.feasible = mf.feasible;
  res.f.assign(inst.m(), Rat(0));
  if (!mf.feasible) return res;
  for (int k = 0; k < int(net.arcs.size()); k++) {
    if (tight[k] < 0) continue;
    if (sgn(mf.x[k]) < 0) throw solver_error("tight_flow: negative flow on tight arc");
    res.f[tight[k]] = mf.x[k] * mu[inst.arcs[tight[k]].tail];
  }
  return res;
}

bool optimality_residual_check(const FlowNet& net, const MaxFlowResult& r) {
  if (!r.feasible) return false;
  // Rebuild residual usability from the returned flow and check the cut.
  if (r.cut[net.t] || !r.cut[net.s]) return false;
  for (int a = 0; a < int(net.arcs.size()); a++) {
    const BoundArc& ba = net.arcs[a];
    bool fwd_res = ba.up.inf || r.x[a] < ba.up.v;   // can increase
    bool bwd_res = ba.lo_ninf || r.x[a] > ba.lo;    // can decrease
    if (r.cut[ba.tail] && !r.cut[ba.head] && fwd_res) return false;
    if (!r.cut[ba.tail] && r.cut[ba.head] && bwd_res) return false;
  }
  return true;
}

}  // namespace gflow
