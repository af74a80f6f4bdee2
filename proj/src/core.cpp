#include "gflow/core.hpp"

#include <sstream>

namespace gflow {

std::vector<int> UncapInstance::degrees() const {
  std::vector<int> d(n, 0);
  for (const Arc& a : arcs) {
    d[a.tail]++;
    d[a.head]++;
  }
  return d;
}

std::vector<std::string> UncapInstance::validate() const {
  std::vector<std::string> bad;
  auto say = [&](const std::string& s) { bad.push_back(s); };
  if (n <= 0) say("no nodes");
  if (sink < 0 || sink >= n) say("sink out of range");
  if (int(b.size()) != n) say("demand vector size mismatch");
  for (int e = 0; e < m(); e++) {
    const Arc& a = arcs[e];
    if (a.tail < 0 || a.tail >= n || a.head < 0 || a.head >= n)
      say("arc " + std::to_string(e) + " endpoint out of range");
    else if (a.tail == a.head)
      say("arc " + std::to_string(e) + " is a loop");
    if (sgn(a.gain) <= 0) say("arc " + std::to_string(e) + " gain not positive");
  }
  if (sgn(bbar) <= 0) say("bbar not positive");
  if (!bad.empty()) return bad;
  Int prod = 1;
  for (const Arc& a : arcs)
    if (a.kind == ArcKind::Regular) prod *= a.gain.get_num() * a.gain.get_den();
  if (!mpz_divisible_p(bbar.get_mpz_t(), prod.get_mpz_t()))
    say("bbar not a multiple of the gain product");
  for (const Arc& a : arcs)
    if (a.kind == ArcKind::Auxiliary && (a.head != sink || a.gain != Rat(1) / Rat(bbar)))
      say("auxiliary arc must point to the sink with gain 1/bbar");
  std::vector<char> to_sink(n, 0);
  for (const Arc& a : arcs)
    if (a.head == sink) to_sink[a.tail] = 1;
  for (int i = 0; i < n; i++)
    if (i != sink && !to_sink[i]) say("node " + std::to_string(i) + " has no arc to the sink");
  for (int i = 0; i < n; i++) {
    Rat scaled = b[i] * Rat(bbar);
    if (scaled.get_den() != 1) say("demand at " + std::to_string(i) + " not a multiple of 1/bbar");
    if (abs(b[i]) > Rat(bbar)) say("demand at " + std::to_string(i) + " exceeds bbar");
  }
  return bad;
}

std::vector<Rat> excesses(const UncapInstance& inst, const Flow& f) {
  std::vector<Rat> e(inst.n);
  for (int i = 0; i < inst.n; i++) e[i] = -inst.b[i];
  for (int a = 0; a < inst.m(); a++) {
    e[inst.arcs[a].head] += inst.arcs[a].gain * f[a];
    e[inst.arcs[a].tail] -= f[a];
  }
  return e;
}

Rat excess(const UncapInstance& inst, const Flow& f, int i) { return excesses(inst, f)[i]; }

Rat surplus(const UncapInstance& inst, const Flow& f) {
  std::vector<Rat> e = excesses(inst, f);
  Rat s = 0;
  for (int i = 0; i < inst.n; i++)
    if (i != inst.sink) s += e[i];
  return s;
}

Rat relabeled_gain(const UncapInstance& inst, const Labels& mu, int arc) {
  const Arc& a = inst.arcs[arc];
  return a.gain * mu[a.tail] / mu[a.head];
}

Rat relabeled_flow(const UncapInstance& inst, const Labels& mu, const Flow& f, int arc) {
  return f[arc] / mu[inst.arcs[arc].tail];
}

std::vector<Rat> relabeled_excesses(const UncapInstance& inst, const Flow& f, const Labels& mu) {
  std::vector<Rat> e = excesses(inst, f);
  for (int i = 0; i < inst.n; i++) e[i] /= mu[i];
  return e;
}

int res_tail(const UncapInstance& inst, const ResArc& a) {
  return a.fwd ? inst.arcs[a.arc].tail : inst.arcs[a.arc].head;
}
int res_head(const UncapInstance& inst, const ResArc& a) {
  return a.fwd ? inst.arcs[a.arc].head : inst.arcs[a.arc].tail;
}
Rat res_gain(const UncapInstance& inst, const ResArc& a) {
  return a.fwd ? inst.arcs[a.arc].gain : Rat(1) / inst.arcs[a.arc].gain;
}

std::vector<ResArc> residual_arcs(const UncapInstance& inst, const Flow& f) {
  std::vector<ResArc> r;
  for (int a = 0; a < inst.m(); a++) {
    r.push_back({a, true});
    if (sgn(f[a]) > 0) r.push_back({a, false});
  }
  return r;
}

std::vector<ResArc> delta_fat_arcs(const UncapInstance& inst, const Flow& f,
                                   const Labels& mu, const Rat& delta) {
  std::vector<ResArc> r;
  for (int a = 0; a < inst.m(); a++) {
    r.push_back({a, true});
    if (relabeled_flow(inst, mu, f, a) > delta) r.push_back({a, false});
  }
  return r;
}

std::vector<int> nontight_arcs(const UncapInstance& inst, const Labels& mu) {
  std::vector<int> r;
  for (int a = 0; a < inst.m(); a++)
    if (relabeled_gain(inst, mu, a) < 1) r.push_back(a);
  return r;
}

std::vector<Rat> reserves(const UncapInstance& inst, const Flow& f, const Labels& mu) {
  std::vector<Rat> r(inst.n, Rat(0));
  for (int a : nontight_arcs(inst, mu)) r[inst.arcs[a].head] += inst.arcs[a].gain * f[a];
  return r;
}

std::vector<std::string> check_delta_feasible(const UncapInstance& inst, const Flow& f,
                                              const Labels& mu, const Rat& delta) {
  std::vector<std::string> bad;
  auto say = [&](const std::string& s) { bad.push_back(s); };
  if (mu[inst.sink] != 1) say("mu at sink is not 1");
  for (int i = 0; i < inst.n; i++)
    if (sgn(mu[i]) <= 0) say("mu not positive at " + std::to_string(i));
  for (int a = 0; a < inst.m(); a++)
    if (sgn(f[a]) < 0) say("negative flow on arc " + std::to_string(a));
  if (!bad.empty()) return bad;
  for (const ResArc& ra : delta_fat_arcs(inst, f, mu, delta)) {
    Rat g = res_gain(inst, ra) * mu[res_tail(inst, ra)] / mu[res_head(inst, ra)];
    if (g > 1) {
      std::ostringstream os;
      os << "fat arc " << ra.arc << (ra.fwd ? "" : " (reverse)") << " not dual-feasible: gain^mu "
         << rat_str(g);
      say(os.str());
    }
  }
  std::vector<Rat> e = excesses(inst, f);
  std::vector<Rat> r = reserves(inst, f, mu);
  for (int i = 0; i < inst.n; i++) {
    if (i == inst.sink) continue;
    if (e[i] < r[i])
      say("excess below reserve at node " + std::to_string(i) + ": e=" + rat_str(e[i]) +
          " R=" + rat_str(r[i]));
  }
  return bad;
}

Flow make_conservative(const UncapInstance& inst, const Flow& f, const Labels& mu) {
  Flow g = f;
  for (int a : nontight_arcs(inst, mu)) g[a] = 0;
  return g;
}

Constants Constants::of(const UncapInstance& inst) {
  Constants c;
  c.n = inst.n;
  c.m = inst.m();
  c.d = inst.degrees();
  c.bbar = inst.bbar;
  return c;
}

}  // namespace gflow
