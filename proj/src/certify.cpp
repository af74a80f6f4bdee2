#include "gflow/certify.hpp"

#include <algorithm>
#include <deque>

#include "gflow/init.hpp"

namespace gflow {

std::vector<std::string> check_optimality_uncap(const UncapInstance& inst, const Flow& f,
                                                const Labels& mu) {
  std::vector<std::string> bad;
  auto say = [&](const std::string& s) { bad.push_back(s); };
  if (mu[inst.sink] != 1) say("mu at sink is not 1");
  for (int i = 0; i < inst.n; i++)
    if (sgn(mu[i]) <= 0) say("mu not positive at node " + std::to_string(i));
  for (int a = 0; a < inst.m(); a++)
    if (sgn(f[a]) < 0) say("negative flow on arc " + std::to_string(a));
  if (!bad.empty()) return bad;
  for (int a = 0; a < inst.m(); a++) {
    Rat g = relabeled_gain(inst, mu, a);
    if (g > 1) say("arc " + std::to_string(a) + " violates dual feasibility");
    if (sgn(f[a]) > 0 && g != 1)
      say("arc " + std::to_string(a) + " carries flow but is not tight");
  }
  std::vector<Rat> e = excesses(inst, f);
  for (int i = 0; i < inst.n; i++) {
    if (i == inst.sink) continue;
    if (sgn(e[i]) != 0)
      say("excess at node " + std::to_string(i) + " is " + rat_str(e[i]) + ", want 0");
  }
  return bad;
}

std::vector<std::string> StdInstance::validate() const {
  std::vector<std::string> bad;
  auto say = [&](const std::string& s) { bad.push_back(s); };
  if (n <= 0) say("no nodes");
  if (sink < 0 || sink >= n) say("sink out of range");
  if (int(b.size()) != n) say("demand vector size mismatch");
  for (int e = 0; e < m(); e++) {
    const StdArc& a = arcs[e];
    if (a.tail < 0 || a.tail >= n || a.head < 0 || a.head >= n)
      say("arc " + std::to_string(e) + " endpoint out of range");
    else if (a.tail == a.head)
      say("arc " + std::to_string(e) + " is a loop");
    if (sgn(a.gain) <= 0) say("arc " + std::to_string(e) + " gain not positive");
    if (!a.cap.inf && sgn(a.cap.v) < 0) say("arc " + std::to_string(e) + " capacity negative");
  }
  return bad;
}

std::vector<Rat> std_excesses(const StdInstance& inst, const Flow& f) {
  std::vector<Rat> e(inst.n);
  for (int i = 0; i < inst.n; i++) e[i] = -inst.b[i];
  for (int a = 0; a < inst.m(); a++) {
    e[inst.arcs[a].head] += inst.arcs[a].gain * f[a];
    e[inst.arcs[a].tail] -= f[a];
  }
  return e;
}

std::vector<std::string> check_optimality_std(const StdInstance& inst, const Flow& f,
                                              const ExtLabels& mu) {
  std::vector<std::string> bad;
  auto say = [&](const std::string& s) { bad.push_back(s); };
  if (!(mu[inst.sink] == ExtRat(Rat(1)))) say("mu at sink is not 1");
  for (int i = 0; i < inst.n; i++)
    if (mu[i].finite() && sgn(mu[i].v) <= 0) say("mu not positive at node " + std::to_string(i));
  for (int a = 0; a < inst.m(); a++) {
    if (sgn(f[a]) < 0) say("negative flow on arc " + std::to_string(a));
    if (!inst.arcs[a].cap.inf && f[a] > inst.arcs[a].cap.v)
      say("flow above capacity on arc " + std::to_string(a));
  }
  if (!bad.empty()) return bad;
  std::vector<Rat> e = std_excesses(inst, f);
  for (int i = 0; i < inst.n; i++) {
    if (i == inst.sink) continue;
    if (sgn(e[i]) < 0) say("negative excess at node " + std::to_string(i));
    if (mu[i].finite() && sgn(e[i]) != 0)
      say("nonzero excess at finite-label node " + std::to_string(i));
  }
  for (int a = 0; a < inst.m(); a++) {
    const StdArc& ar = inst.arcs[a];
    int side;  // -1: gain^mu < 1, 0: tight, +1: gain^mu > 1
    if (mu[ar.tail].inf && mu[ar.head].inf)
      side = 0;
    else if (mu[ar.tail].inf)
      side = +1;
    else if (mu[ar.head].inf)
      side = -1;
    else
      side = cmp(ar.gain * mu[ar.tail].v / mu[ar.head].v, Rat(1));
    if (side < 0 && sgn(f[a]) != 0)
      say("arc " + std::to_string(a) + " has gain^mu < 1 but carries flow");
    if (side > 0) {
      if (ar.cap.inf)
        say("arc " + std::to_string(a) + " has gain^mu > 1 and infinite capacity");
      else if (f[a] != ar.cap.v)
        say("arc " + std::to_string(a) + " has gain^mu > 1 but is not saturated");
    }
  }
  return bad;
}

OnagaResult onaga_solve(const UncapInstance& inst, const Flow& f_start, long step_limit) {
  CancelResult cr = cancel_flow_generating_cycles(inst, f_start);
  OnagaResult res;
  res.f = cr.f;
  for (;;) {
    res.mu = highest_gain_labels(inst, res.f);
    std::vector<Rat> e = excesses(inst, res.f);
    int src = -1;
    for (int i = 0; i < inst.n && src < 0; i++)
      if (i != inst.sink && sgn(e[i]) > 0) src = i;
    if (src < 0) {
      res.converged = true;
      return res;
    }
    if (res.steps >= step_limit) return res;
    res.steps++;
    // BFS over label-tight residual arcs from src to the sink. A tight path
    // exists: the labels are realized by highest-gain residual walks.
    std::vector<ResArc> ra = residual_arcs(inst, res.f);
    std::vector<int> pre(inst.n, -1);
    std::vector<char> seen(inst.n, 0);
    seen[src] = 1;
    std::deque<int> q{src};
    while (!q.empty() && !seen[inst.sink]) {
      int u = q.front();
      q.pop_front();
      for (int k = 0; k < int(ra.size()); k++) {
        if (res_tail(inst, ra[k]) != u) continue;
        int v = res_head(inst, ra[k]);
        if (seen[v]) continue;
        if (res_gain(inst, ra[k]) * res.mu[u] / res.mu[v] != 1) continue;
        seen[v] = 1;
        pre[v] = k;
        q.push_back(v);
      }
    }
    if (!seen[inst.sink]) throw solver_error("onaga: no tight path from an excess node");
    std::vector<ResArc> path;
    for (int v = inst.sink; v != src;) {
      path.push_back(ra[pre[v]]);
      v = res_tail(inst, ra[pre[v]]);
    }
    std::reverse(path.begin(), path.end());
    // Largest push: bounded by the source excess and reverse-arc capacities.
    ExtRat x = ExtRat(e[src]);
    Rat prefix = 1;
    for (const ResArc& a : path) {
      if (!a.fwd) x = ext_min(x, ExtRat(inst.arcs[a.arc].gain * res.f[a.arc] / prefix));
      prefix *= res_gain(inst, a);
    }
    prefix = 1;
    for (const ResArc& a : path) {
      Rat amt = x.v * prefix;
      if (a.fwd)
        res.f[a.arc] += amt;
      else
        res.f[a.arc] -= amt / inst.arcs[a.arc].gain;
      prefix *= res_gain(inst, a);
    }
  }
}

}  // namespace gflow
