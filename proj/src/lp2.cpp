#include "gflow/lp2.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <sstream>

namespace gflow {

std::vector<std::string> LP2Instance::validate() const {
  std::vector<std::string> bad;
  auto say = [&](const std::string& s) { bad.push_back(s); };
  if (rows < 0) say("negative row count");
  if (int(rhs.size()) != rows) say("rhs size mismatch");
  if (ub.size() != cols.size()) say("bound vector size mismatch");
  for (int j = 0; j < m(); j++) {
    const std::vector<LP2Entry>& es = cols[j];
    if (es.empty() || es.size() > 2) {
      say("column " + std::to_string(j) + " must have 1 or 2 entries");
      continue;
    }
    for (const LP2Entry& e : es) {
      if (e.row < 0 || e.row >= rows) say("column " + std::to_string(j) + " row out of range");
      if (sgn(e.coef) == 0) say("column " + std::to_string(j) + " has a zero entry");
    }
    if (es.size() == 2 && es[0].row == es[1].row)
      say("column " + std::to_string(j) + " has two entries in one row");
    if (j < int(ub.size()) && !ub[j].inf && sgn(ub[j].v) < 0)
      say("column " + std::to_string(j) + " has a negative upper bound");
  }
  return bad;
}

std::vector<Rat> MonotoneInstance::imbalance(const std::vector<Rat>& f) const {
  std::vector<Rat> im(n, Rat(0));
  for (int a = 0; a < int(arcs.size()); a++) {
    im[arcs[a].head] += arcs[a].gain * f[a];
    im[arcs[a].tail] -= f[a];
  }
  return im;
}

namespace {

// One monotone copy of a column plus everything needed to evaluate the flow
// induced by an assignment x (the head arc exists when the column is capped).
struct CopyInfo {
  int tail_arc = -1;
  int head_arc = -1;
  Rat gain;
  Rat cap;  // meaningful iff head_arc >= 0
  Rat scale;
};

}  // namespace

MonotoneInstance to_monotone(const LP2Instance& lp2) {
  {
    std::vector<std::string> bad = lp2.validate();
    if (!bad.empty()) throw input_error("invalid lp2 instance: " + bad.front());
  }
  MonotoneInstance mo;
  mo.rows = lp2.rows;
  mo.n = 2 * lp2.rows;
  mo.b.assign(mo.n, Rat(0));
  for (int i = 0; i < lp2.rows; i++) {
    mo.b[i] = lp2.rhs[i];
    mo.b[lp2.rows + i] = -lp2.rhs[i];
  }

  // A copy with entries (+P at node up, -N at node dn), P,N > 0, becomes the
  // arc dn -> up with gain P/N carrying N*x; a finite bound u caps it at N*u,
  // removed on the spot with a secondary node (tail keeps the column flow).
  auto add_copy = [&](const Rat& P, int up, const Rat& N, int dn, const ExtRat& u) {
    CopyInfo ci;
    ci.gain = P / N;
    ci.scale = N;
    if (u.inf) {
      ci.tail_arc = int(mo.arcs.size());
      mo.arcs.push_back({dn, up, ci.gain});
    } else {
      ci.cap = N * u.v;
      int k = mo.n++;
      ci.tail_arc = int(mo.arcs.size());
      mo.arcs.push_back({dn, k, ci.gain});
      ci.head_arc = int(mo.arcs.size());
      mo.arcs.push_back({up, k, Rat(1)});
      mo.b.push_back(ci.gain * ci.cap);
      mo.b[up] -= ci.gain * ci.cap;
    }
    return ci;
  };

  std::vector<CopyInfo> pc(lp2.m()), mc(lp2.m());
  for (int j = 0; j < lp2.m(); j++) {
    const std::vector<LP2Entry>& es = lp2.cols[j];
    const ExtRat& u = lp2.ub[j];
    int R = lp2.rows;
    if (es.size() == 1) {
      int i = es[0].row;
      Rat a = es[0].coef;
      // one mirrored pair between i- and i+ (a single arc covering both rows)
      pc[j] = sgn(a) > 0 ? add_copy(a, i, a, R + i, u) : add_copy(-a, R + i, -a, i, u);
      mc[j] = pc[j];
    } else {
      int i = es[0].row, jj = es[1].row;
      Rat a = es[0].coef, c = es[1].coef;
      if (sgn(a) < 0 && sgn(c) > 0) {
        std::swap(i, jj);
        std::swap(a, c);
      }
      if (sgn(c) < 0) {
        Rat q = -c;
        if (sgn(a) > 0) {  // mixed: j+ -> i+ and i- -> j-
          pc[j] = add_copy(a, i, q, jj, u);
          mc[j] = add_copy(q, R + jj, a, R + i, u);
        } else {  // two negative: i+ -> j- and j+ -> i-
          Rat p = -a;
          pc[j] = add_copy(q, R + jj, p, i, u);
          mc[j] = add_copy(p, R + i, q, jj, u);
        }
      } else {  // two positive: j- -> i+ and i- -> j+
        pc[j] = add_copy(a, i, c, R + jj, u);
        mc[j] = add_copy(c, jj, a, R + i, u);
      }
    }
    mo.plus_col.push_back({pc[j].tail_arc, pc[j].scale});
    mo.minus_col.push_back({mc[j].tail_arc, mc[j].scale});
  }

  // Construction self-check: for arbitrary in-bound assignments the induced
  // network flow must shift node balances by exactly +/-(Ax - rhs) on the two
  // row copies, meet the secondary equalities, and round-trip the recovery.
  std::mt19937 rng(917);
  for (int trial = 0; trial < 3; trial++) {
    std::vector<Rat> x(lp2.m());
    for (int j = 0; j < lp2.m(); j++)
      x[j] = lp2.ub[j].inf ? Rat(Rat(long(rng() % 5)) / Rat(1 + long(rng() % 3)))
                           : Rat(lp2.ub[j].v * Rat(long(rng() % 5)) / Rat(4));
    Flow f(mo.arcs.size(), Rat(0));
    auto push = [&](const CopyInfo& ci, const Rat& xv) {
      f[ci.tail_arc] = ci.scale * xv;
      if (ci.head_arc >= 0) f[ci.head_arc] = ci.gain * (ci.cap - ci.scale * xv);
    };
    for (int j = 0; j < lp2.m(); j++) {
      push(pc[j], x[j]);
      push(mc[j], x[j]);
    }
    std::vector<Rat> im = mo.imbalance(f);
    std::vector<Rat> r(lp2.rows, Rat(0));
    for (int j = 0; j < lp2.m(); j++)
      for (const LP2Entry& e : lp2.cols[j]) r[e.row] += e.coef * x[j];
    for (int i = 0; i < lp2.rows; i++) r[i] -= lp2.rhs[i];
    for (int i = 0; i < lp2.rows; i++)
      if (im[i] - mo.b[i] != r[i] || im[lp2.rows + i] - mo.b[lp2.rows + i] != -r[i])
        throw solver_error("to_monotone: row copy self-check failed");
    for (int k = 2 * lp2.rows; k < mo.n; k++)
      if (im[k] != mo.b[k]) throw solver_error("to_monotone: secondary equality self-check failed");
    for (int j = 0; j < lp2.m(); j++) {
      Rat rec = (f[mo.plus_col[j].arc] / mo.plus_col[j].scale +
                 f[mo.minus_col[j].arc] / mo.minus_col[j].scale) /
                Rat(2);
      if (rec != x[j]) throw solver_error("to_monotone: recovery self-check failed");
    }
  }
  return mo;
}

std::vector<char> reachable_from_gain_cycles(const MonotoneInstance& mono) {
  return gain_cycle_closure(mono.n, mono.arcs);
}

namespace {

// Exact verification of an LP2M certificate: sign constraint, arc
// inequalities y_tail >= gain * y_head, and sum(b y) > 0.
void verify_mono_cert(const MonotoneInstance& mono, const std::vector<Rat>& y, int sign) {
  for (const Rat& v : y)
    if (sgn(v) * sign < 0) throw solver_error("lp2m: certificate sign violated");
  for (const GainArc& a : mono.arcs)
    if (y[a.tail] - a.gain * y[a.head] < 0)
      throw solver_error("lp2m: certificate arc inequality violated");
  Rat tot(0);
  for (int i = 0; i < mono.n; i++) tot += mono.b[i] * y[i];
  if (!(tot > 0)) throw solver_error("lp2m: certificate has no positive value");
}

}  // namespace

LP2MResult solve_lp2m_ge(const MonotoneInstance& mono, const SolveOptions& opt) {
  LP2MResult out;
  out.f.assign(mono.arcs.size(), Rat(0));
  std::vector<char> z = reachable_from_gain_cycles(mono);

  // Demands inside Z are always coverable by cycle-generated flow routed
  // along arcs of E[Z] (Z is closed under out-arcs).
  bool any_z = false;
  for (int i = 0; i < mono.n; i++) any_z = any_z || z[i];
  if (any_z) {
    std::vector<GainArc> zarcs;
    std::vector<int> zid;
    for (int a = 0; a < int(mono.arcs.size()); a++)
      if (z[mono.arcs[a].tail] && z[mono.arcs[a].head]) {
        zarcs.push_back(mono.arcs[a]);
        zid.push_back(a);
      }
    std::vector<Rat> need(mono.n, Rat(0));
    for (int i = 0; i < mono.n; i++)
      if (z[i] && sgn(mono.b[i]) > 0) need[i] = mono.b[i];
    std::vector<Rat> zf = supply_flow(mono.n, zarcs, need);
    for (int k = 0; k < int(zarcs.size()); k++) out.f[zid[k]] = zf[k];
  }

  int kept = 0;
  std::vector<int> nid(mono.n, -1);
  for (int i = 0; i < mono.n; i++)
    if (!z[i]) nid[i] = kept++;
  if (kept == 0) {
    out.feasible = true;
  } else {
    // Artificial sink on V \ Z: lend b_i at gain 1, repay only at 1/bbar.
    UncapInstance sub;
    sub.n = kept + 1;
    sub.sink = kept;
    sub.b.assign(sub.n, Rat(0));
    for (int i = 0; i < mono.n; i++)
      if (nid[i] >= 0) sub.b[nid[i]] = mono.b[i];
    std::vector<int> arc_of(mono.arcs.size(), -1);
    Int prod = 2;
    for (int a = 0; a < int(mono.arcs.size()); a++) {
      const GainArc& ga = mono.arcs[a];
      if (nid[ga.tail] < 0 || nid[ga.head] < 0) continue;
      arc_of[a] = sub.m();
      sub.arcs.push_back({nid[ga.tail], nid[ga.head], ga.gain});
      prod *= ga.gain.get_num() * ga.gain.get_den();
    }
    for (int i = 0; i < kept; i++)
      if (sgn(sub.b[i]) != 0) prod *= sub.b[i].get_den();
    Rat maxb(0);
    for (int i = 0; i < kept; i++) maxb = std::max(maxb, Rat(abs(sub.b[i])));
    Int factor = 1;
    if (maxb > Rat(prod)) factor = rat_floor(maxb / Rat(prod)) + 1;
    sub.bbar = prod * factor;

    Flow fstart(sub.m(), Rat(0));
    std::vector<int> lend(kept, -1);
    for (int i = 0; i < kept; i++)
      if (sgn(sub.b[i]) > 0) {
        lend[i] = sub.m();
        sub.arcs.push_back({sub.sink, i, Rat(1)});
        fstart.push_back(sub.b[i]);
      }
    for (int i = 0; i < kept; i++) {
      sub.arcs.push_back({i, sub.sink, Rat(1) / Rat(sub.bbar), ArcKind::Auxiliary});
      fstart.push_back(Rat(0));
    }
    {
      std::vector<std::string> bad = sub.validate();
      if (!bad.empty()) throw solver_error("lp2m: bad artificial instance: " + bad.front());
    }

    EnhancedSolution es = enhanced_continuous_scaling(sub, fstart, opt);
    bool lent = false;
    for (int i = 0; i < kept; i++)
      if (lend[i] >= 0 && sgn(es.f[lend[i]]) != 0) lent = true;

    if (!lent) {
      for (int a = 0; a < int(mono.arcs.size()); a++)
        if (arc_of[a] >= 0) out.f[a] = es.f[arc_of[a]];
      out.feasible = true;
    } else {
      // Farkas witness: X = V \ (Z u S) with S the residual closure of the
      // saturated set {mu_i = bbar} over real arcs; y = 1/mu on X, 0 outside.
      std::vector<char> in_s(sub.n, 0);
      for (int i = 0; i < kept; i++)
        if (es.mu[i] == Rat(sub.bbar)) in_s[i] = 1;
      std::vector<ResArc> res = residual_arcs(sub, es.f);
      bool grew = true;
      while (grew) {
        grew = false;
        for (const ResArc& ra : res) {
          if (sub.arcs[ra.arc].kind == ArcKind::Auxiliary) continue;
          int rt = res_tail(sub, ra), rh = res_head(sub, ra);
          if (rt == sub.sink || rh == sub.sink) continue;
          if (in_s[rt] && !in_s[rh]) {
            in_s[rh] = 1;
            grew = true;
          }
        }
      }
      out.cert.y.assign(mono.n, Rat(0));
      for (int i = 0; i < mono.n; i++)
        if (nid[i] >= 0 && !in_s[nid[i]]) out.cert.y[i] = Rat(1) / es.mu[nid[i]];
      verify_mono_cert(mono, out.cert.y, +1);
      return out;
    }
  }

  std::vector<Rat> im = mono.imbalance(out.f);
  for (int i = 0; i < mono.n; i++)
    if (im[i] < mono.b[i]) throw solver_error("lp2m: ge solution violates a node bound");
  return out;
}

LP2MResult solve_lp2m_le(const MonotoneInstance& mono, const SolveOptions& opt) {
  MonotoneInstance rev;
  rev.rows = mono.rows;
  rev.n = mono.n;
  rev.b.resize(mono.n);
  for (int i = 0; i < mono.n; i++) rev.b[i] = -mono.b[i];
  for (const GainArc& a : mono.arcs) rev.arcs.push_back({a.head, a.tail, Rat(1) / a.gain});

  LP2MResult r = solve_lp2m_ge(rev, opt);
  LP2MResult out;
  out.feasible = r.feasible;
  if (r.feasible) {
    out.f.resize(mono.arcs.size());
    for (int a = 0; a < int(mono.arcs.size()); a++) out.f[a] = r.f[a] / mono.arcs[a].gain;
    std::vector<Rat> im = mono.imbalance(out.f);
    for (int i = 0; i < mono.n; i++)
      if (im[i] > mono.b[i]) throw solver_error("lp2m: le solution violates a node bound");
  } else {
    out.cert.y.resize(mono.n);
    for (int i = 0; i < mono.n; i++) out.cert.y[i] = -r.cert.y[i];
    verify_mono_cert(mono, out.cert.y, -1);
  }
  return out;
}

namespace {

std::vector<Rat> harc_imbalance(int n, const std::vector<HArc>& hs) {
  std::vector<Rat> im(n, Rat(0));
  for (const HArc& h : hs) {
    im[h.head] += h.gain * h.value;
    im[h.tail] -= h.value;
  }
  return im;
}

// BFS over positive harcs from the seed set; via[v] = harc used to enter v.
void harc_bfs(int n, const std::vector<HArc>& hs, const std::vector<int>& seeds, bool forward,
              std::vector<char>& seen, std::vector<int>& via) {
  seen.assign(n, 0);
  via.assign(n, -1);
  std::deque<int> q;
  for (int s : seeds) {
    if (seen[s]) continue;
    seen[s] = 1;
    q.push_back(s);
  }
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (int a = 0; a < int(hs.size()); a++) {
      if (sgn(hs[a].value) <= 0) continue;
      int from = forward ? hs[a].tail : hs[a].head;
      int to = forward ? hs[a].head : hs[a].tail;
      if (from != u || seen[to]) continue;
      seen[to] = 1;
      via[to] = a;
      q.push_back(to);
    }
  }
}

std::vector<int> harc_path(const std::vector<HArc>& hs, const std::vector<int>& via, int target,
                           bool forward) {
  std::vector<int> path;
  for (int v = target; via[v] >= 0;) {
    path.push_back(via[v]);
    v = forward ? hs[via[v]].tail : hs[via[v]].head;
  }
  if (forward) std::reverse(path.begin(), path.end());
  return path;
}

// Gain > 1 cycle (dir = +1) or gain < 1 cycle (dir = -1) inside the support,
// restricted to the avail mask, as an ordered forward harc sequence.
std::vector<int> support_cycle(int n, const std::vector<HArc>& hs, const std::vector<char>& avail,
                               int dir) {
  std::vector<GainArc> gl;
  std::vector<int> id;
  for (int a = 0; a < int(hs.size()); a++) {
    if (sgn(hs[a].value) <= 0) continue;
    if (dir > 0)
      gl.push_back({hs[a].tail, hs[a].head, hs[a].gain});
    else
      gl.push_back({hs[a].head, hs[a].tail, Rat(1) / hs[a].gain});
    id.push_back(a);
  }
  std::vector<int> cyc = find_gain_cycle(n, gl, avail);
  std::vector<int> out;
  for (int k : cyc) out.push_back(id[k]);
  if (dir < 0) std::reverse(out.begin(), out.end());
  return out;
}

// Rotate a closed arc sequence so that it starts (and closes) at node w.
void rotate_cycle(const std::vector<HArc>& hs, std::vector<int>& cyc, int w) {
  for (int k = 0; k < int(cyc.size()); k++)
    if (hs[cyc[k]].tail == w) {
      std::rotate(cyc.begin(), cyc.begin() + k, cyc.end());
      return;
    }
  throw solver_error("decompose: rotation node not on cycle");
}

Rat cycle_gain(const std::vector<HArc>& hs, const std::vector<int>& cyc) {
  Rat g(1);
  for (int a : cyc) g *= hs[a].gain;
  return g;
}

// A term is a set of per-harc coefficients (amount = coef * scale); building
// them per shape keeps the extraction arithmetic in one place.
struct TermShape {
  std::map<int, Rat> coef;
  Rat delivered_coef;  // excess delivered at the target per unit scale
  Rat consumed_coef;   // deficit consumed at the source per unit scale

  void add(int harc, const Rat& c) {
    auto it = coef.find(harc);
    if (it == coef.end())
      coef.emplace(harc, c);
    else
      it->second += c;
  }
};

// Generating cycle closing at its first tail, then a path carrying the excess.
TermShape shape_type2(const std::vector<HArc>& hs, const std::vector<int>& cyc,
                      const std::vector<int>& path) {
  TermShape t;
  Rat pref(1);
  for (int a : cyc) {
    t.add(a, pref);
    pref *= hs[a].gain;
  }
  Rat pc = pref - 1;  // gain(C) - 1
  if (sgn(pc) <= 0) throw solver_error("decompose: generating cycle gain not above one");
  for (int a : path) {
    t.add(a, pc);
    pc *= hs[a].gain;
  }
  t.delivered_coef = pc;
  return t;
}

// Plain path (Type I): unit flow leaves the first tail, gains accumulate.
TermShape shape_path(const std::vector<HArc>& hs, const std::vector<int>& path) {
  TermShape t;
  t.consumed_coef = 1;
  Rat pc(1);
  for (int a : path) {
    t.add(a, pc);
    pc *= hs[a].gain;
  }
  t.delivered_coef = pc;
  return t;
}

// Absorbing cycle swallowing `inflow_coef` units arriving at its first tail.
void shape_absorb(const std::vector<HArc>& hs, const std::vector<int>& cyc,
                  const Rat& inflow_coef, TermShape& t) {
  Rat g = cycle_gain(hs, cyc);
  if (!(g < 1)) throw solver_error("decompose: absorbing cycle gain not below one");
  Rat y = inflow_coef / (Rat(1) - g);
  for (int a : cyc) {
    t.add(a, y);
    y *= hs[a].gain;
  }
}

// Largest scale the support allows for the shape.
Rat shape_limit(const std::vector<HArc>& hs, const TermShape& t) {
  Rat lim(-1);
  for (const auto& [a, c] : t.coef) {
    Rat x = hs[a].value / c;
    if (sgn(lim) < 0 || x < lim) lim = x;
  }
  if (sgn(lim) <= 0) throw solver_error("decompose: empty term shape");
  return lim;
}

void apply_shape(std::vector<HArc>& hs, const TermShape& t, const Rat& scale, ElemTerm& term) {
  for (const auto& [a, c] : t.coef) {
    Rat amt = c * scale;
    hs[a].value -= amt;
    if (sgn(hs[a].value) < 0) throw solver_error("decompose: support overdrawn");
    term.values.push_back({a, amt});
  }
}

}  // namespace

Decomposition decompose_flow_difference(const MonotoneInstance& mono, const std::vector<Rat>& h,
                                        bool allow_deficit) {
  if (h.size() != mono.arcs.size()) throw input_error("decompose: flow size mismatch");
  Decomposition dec;
  for (int a = 0; a < int(mono.arcs.size()); a++) {
    const GainArc& ga = mono.arcs[a];
    if (sgn(h[a]) > 0)
      dec.harcs.push_back({ga.tail, ga.head, ga.gain, h[a], a, true});
    else if (sgn(h[a]) < 0)
      dec.harcs.push_back({ga.head, ga.tail, Rat(1) / ga.gain, ga.gain * (-h[a]), a, false});
  }
  std::vector<HArc>& hs = dec.harcs;
  int n = mono.n;
  std::vector<Rat> im = harc_imbalance(n, hs);
  if (!allow_deficit)
    for (int i = 0; i < n; i++)
      if (sgn(im[i]) < 0) throw input_error("decompose: deficit node " + std::to_string(i));

  std::vector<char> seen;
  std::vector<int> via;

  // Type I / III: drain deficits into excess nodes or absorbing cycles.
  for (int u = 0; u < n; u++) {
    while (sgn(im[u]) < 0) {
      harc_bfs(n, hs, {u}, true, seen, via);
      int zt = -1;
      for (int v = 0; v < n && zt < 0; v++)
        if (seen[v] && sgn(im[v]) > 0) zt = v;
      ElemTerm term;
      TermShape shape;
      if (zt >= 0) {
        shape = shape_path(hs, harc_path(hs, via, zt, true));
        term.kind = TermKind::Path;
        term.target = zt;
      } else {
        std::vector<int> cyc = support_cycle(n, hs, seen, -1);
        if (cyc.empty()) throw solver_error("decompose: stranded deficit");
        std::vector<int> ctails;
        for (int a : cyc) ctails.push_back(hs[a].tail);
        std::vector<char> cseen;
        std::vector<int> cvia;
        harc_bfs(n, hs, {u}, true, cseen, cvia);
        int w2 = -1;
        for (int v : ctails)
          if (cseen[v] && (w2 < 0)) w2 = v;
        if (w2 < 0) throw solver_error("decompose: absorbing cycle unreachable");
        std::vector<int> path = harc_path(hs, cvia, w2, true);
        shape = shape_path(hs, path);
        rotate_cycle(hs, cyc, w2);
        shape_absorb(hs, cyc, shape.delivered_coef, shape);
        shape.delivered_coef = 0;
        term.kind = TermKind::DeficitCycle;
      }
      Rat x = std::min(shape_limit(hs, shape), Rat(-im[u]));
      if (zt >= 0 && sgn(shape.delivered_coef) > 0) x = std::min(x, Rat(im[zt] / shape.delivered_coef));
      apply_shape(hs, shape, x, term);
      term.delivered = shape.delivered_coef * x;
      im[u] += x;
      if (zt >= 0) im[zt] -= term.delivered;
      dec.terms.push_back(std::move(term));
    }
  }

  // Type II: every remaining excess is fed by a flow-generating cycle.
  for (int zt = 0; zt < n; zt++) {
    while (sgn(im[zt]) > 0) {
      harc_bfs(n, hs, {zt}, false, seen, via);
      std::vector<int> cyc = support_cycle(n, hs, seen, +1);
      if (cyc.empty()) throw solver_error("decompose: excess without a generating cycle");
      std::vector<int> ctails;
      for (int a : cyc) ctails.push_back(hs[a].tail);
      std::vector<char> pseen;
      std::vector<int> pvia;
      harc_bfs(n, hs, ctails, true, pseen, pvia);
      if (!pseen[zt]) throw solver_error("decompose: generating cycle lost the target");
      std::vector<int> path = harc_path(hs, pvia, zt, true);
      int w = path.empty() ? zt : hs[path.front()].tail;
      rotate_cycle(hs, cyc, w);
      TermShape shape = shape_type2(hs, cyc, path);
      Rat x = std::min(shape_limit(hs, shape), Rat(im[zt] / shape.delivered_coef));
      ElemTerm term;
      term.kind = TermKind::TypeII;
      term.target = zt;
      apply_shape(hs, shape, x, term);
      term.delivered = shape.delivered_coef * x;
      im[zt] -= term.delivered;
      dec.terms.push_back(std::move(term));
    }
  }

  // Conserved remainder: unit-gain cycles and bicycles.
  while (true) {
    int first = -1;
    for (int a = 0; a < int(hs.size()) && first < 0; a++)
      if (sgn(hs[a].value) > 0) first = a;
    if (first < 0) break;

    // walk forward until a node repeats; the stack segment is a simple cycle
    std::vector<int> stackpos(n, -1), stkarcs;
    std::vector<int> stknodes;
    int u = hs[first].tail;
    std::vector<int> cyc;
    while (cyc.empty()) {
      if (stackpos[u] >= 0) {
        cyc.assign(stkarcs.begin() + stackpos[u], stkarcs.end());
        break;
      }
      stackpos[u] = int(stknodes.size());
      stknodes.push_back(u);
      int nxt = -1;
      for (int a = 0; a < int(hs.size()) && nxt < 0; a++)
        if (sgn(hs[a].value) > 0 && hs[a].tail == u) nxt = a;
      if (nxt < 0) throw solver_error("decompose: conserved walk stuck");
      stkarcs.push_back(nxt);
      u = hs[nxt].head;
    }

    Rat g = cycle_gain(hs, cyc);
    ElemTerm term;
    TermShape shape;
    if (g == 1) {
      Rat pref(1);
      for (int a : cyc) {
        shape.add(a, pref);
        pref *= hs[a].gain;
      }
      term.kind = TermKind::UnitCycle;
    } else {
      std::vector<int> gen = cyc, abs_cyc;
      if (g > 1) {
        std::vector<int> gtails;
        for (int a : gen) gtails.push_back(hs[a].tail);
        harc_bfs(n, hs, gtails, true, seen, via);
        abs_cyc = support_cycle(n, hs, seen, -1);
      } else {
        abs_cyc = cyc;
        std::vector<int> atails;
        for (int a : abs_cyc) atails.push_back(hs[a].tail);
        harc_bfs(n, hs, atails, false, seen, via);
        gen = support_cycle(n, hs, seen, +1);
      }
      if (gen.empty() || abs_cyc.empty())
        throw solver_error("decompose: unmatched cycle in conserved remainder");
      std::vector<int> gtails, atails;
      for (int a : gen) gtails.push_back(hs[a].tail);
      for (int a : abs_cyc) atails.push_back(hs[a].tail);
      std::vector<char> aset(n, 0);
      for (int v : atails) aset[v] = 1;
      harc_bfs(n, hs, gtails, true, seen, via);
      int w2 = -1;
      for (int v = 0; v < n && w2 < 0; v++)
        if (aset[v] && seen[v]) w2 = v;
      if (w2 < 0) throw solver_error("decompose: generator cannot reach absorber");
      std::vector<int> path = harc_path(hs, via, w2, true);
      int w1 = path.empty() ? w2 : hs[path.front()].tail;
      rotate_cycle(hs, gen, w1);
      shape = shape_type2(hs, gen, path);
      rotate_cycle(hs, abs_cyc, w2);
      shape_absorb(hs, abs_cyc, shape.delivered_coef, shape);
      shape.delivered_coef = 0;
      term.kind = TermKind::Bicycle;
    }
    Rat x = shape_limit(hs, shape);
    apply_shape(hs, shape, x, term);
    dec.terms.push_back(std::move(term));
  }

  for (const HArc& ha : hs)
    if (sgn(ha.value) != 0) throw solver_error("decompose: leftover support");
  // restore the original values so harcs describe the decomposed flow
  for (ElemTerm& t : dec.terms)
    for (const auto& [a, v] : t.values) hs[a].value += v;
  return dec;
}

std::vector<Rat> recompose(const MonotoneInstance& mono, const Decomposition& dec) {
  std::vector<Rat> h(mono.arcs.size(), Rat(0));
  for (const ElemTerm& t : dec.terms)
    for (const auto& [a, v] : t.values) {
      const HArc& ha = dec.harcs[a];
      if (ha.fwd)
        h[ha.arc] += v;
      else
        h[ha.arc] -= v / mono.arcs[ha.arc].gain;
    }
  return h;
}

Flow combine_ge_le(const MonotoneInstance& mono, const Flow& f, const Flow& g) {
  std::vector<Rat> h(mono.arcs.size());
  for (int a = 0; a < int(mono.arcs.size()); a++) h[a] = f[a] - g[a];
  Decomposition dec = decompose_flow_difference(mono, h, false);

  std::vector<Rat> im = mono.imbalance(g);
  std::vector<Rat> rem(mono.n, Rat(0));
  for (int i = 0; i < mono.n; i++) {
    Rat e = im[i] - mono.b[i];
    if (sgn(e) > 0) throw solver_error("combine: g is not a <= solution");
    rem[i] = -e;
  }

  Flow out = g;
  auto apply = [&](const ElemTerm& t, const Rat& frac) {
    for (const auto& [a, v] : t.values) {
      const HArc& ha = dec.harcs[a];
      if (ha.fwd)
        out[ha.arc] += frac * v;
      else
        out[ha.arc] -= frac * v / mono.arcs[ha.arc].gain;
    }
  };
  for (const ElemTerm& t : dec.terms) {
    if (t.kind != TermKind::TypeII || sgn(rem[t.target]) == 0) continue;
    Rat frac = std::min(Rat(1), Rat(rem[t.target] / t.delivered));
    apply(t, frac);
    rem[t.target] -= frac * t.delivered;
  }
  for (int i = 0; i < mono.n; i++)
    if (sgn(rem[i]) != 0) throw solver_error("combine: excess supply exhausted early");

  std::vector<Rat> fim = mono.imbalance(out);
  for (int i = 0; i < mono.n; i++)
    if (fim[i] != mono.b[i]) throw solver_error("combine: equality violated");
  for (const Rat& v : out)
    if (sgn(v) < 0) throw solver_error("combine: negative flow");
  return out;
}

std::vector<std::string> check_lp2_cert(const LP2Instance& lp2, const FarkasCertificate& cert) {
  std::vector<std::string> bad;
  if (int(cert.y.size()) != lp2.rows) {
    bad.push_back("certificate size mismatch");
    return bad;
  }
  Rat total(0);
  for (int i = 0; i < lp2.rows; i++) total += lp2.rhs[i] * cert.y[i];
  for (int j = 0; j < lp2.m(); j++) {
    Rat d(0);
    for (const LP2Entry& e : lp2.cols[j]) d += e.coef * cert.y[e.row];
    if (sgn(d) <= 0) continue;
    if (lp2.ub[j].inf)
      bad.push_back("positive combination on unbounded column " + std::to_string(j));
    else
      total -= lp2.ub[j].v * d;
  }
  if (!(total > 0)) bad.push_back("certificate value not positive");
  return bad;
}

LP2Result solve_lp2(const LP2Instance& lp2, const SolveOptions& opt) {
  MonotoneInstance mono = to_monotone(lp2);
  LP2Result out;

  auto pull_back = [&](const std::vector<Rat>& y) {
    out.cert.y.assign(lp2.rows, Rat(0));
    for (int i = 0; i < lp2.rows; i++) out.cert.y[i] = y[i] - y[lp2.rows + i];
    std::vector<std::string> bad = check_lp2_cert(lp2, out.cert);
    if (!bad.empty()) throw solver_error("lp2: row certificate invalid: " + bad.front());
  };

  LP2MResult ge = solve_lp2m_ge(mono, opt);
  if (!ge.feasible) {
    pull_back(ge.cert.y);
    return out;
  }
  LP2MResult le = solve_lp2m_le(mono, opt);
  if (!le.feasible) {
    pull_back(le.cert.y);
    return out;
  }

  Flow eq = combine_ge_le(mono, ge.f, le.f);
  out.feasible = true;
  out.x.resize(lp2.m());
  for (int j = 0; j < lp2.m(); j++)
    out.x[j] = (eq[mono.plus_col[j].arc] / mono.plus_col[j].scale +
                eq[mono.minus_col[j].arc] / mono.minus_col[j].scale) /
               Rat(2);
  for (int j = 0; j < lp2.m(); j++) {
    if (sgn(out.x[j]) < 0) throw solver_error("lp2: negative solution entry");
    if (!lp2.ub[j].inf && out.x[j] > lp2.ub[j].v) throw solver_error("lp2: bound violated");
  }
  std::vector<Rat> r(lp2.rows, Rat(0));
  for (int j = 0; j < lp2.m(); j++)
    for (const LP2Entry& e : lp2.cols[j]) r[e.row] += e.coef * out.x[j];
  for (int i = 0; i < lp2.rows; i++)
    if (r[i] != lp2.rhs[i]) throw solver_error("lp2: recovered solution misses a row");
  return out;
}

}  // namespace gflow
