#include "gflow/enhanced.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "gflow/certify.hpp"
#include "gflow/maxflow.hpp"

namespace gflow {

std::vector<int> abundant_arcs(const EnhancedState& es) {
  const UncapInstance& inst = es.cur;
  Rat thr = Rat(17) * es.st.consts.m * es.st.delta;
  std::vector<int> out;
  for (int a = 0; a < inst.m(); a++)
    if (relabeled_flow(inst, es.st.mu, es.st.f, a) >= thr) out.push_back(a);
  return out;
}

ContractionRecord contract(EnhancedState& es, int a, std::vector<std::string>* violations) {
  ScalingState& st = es.st;
  const UncapInstance inst = es.cur;  // copy: es.cur is replaced below
  int p = inst.arcs[a].tail, q = inst.arcs[a].head, t = inst.sink;
  if (relabeled_gain(inst, st.mu, a) != 1) throw solver_error("contract: arc not tight");

  ContractionRecord rec;
  rec.p = p;
  rec.q = q;
  rec.gain = inst.arcs[a].gain;
  rec.p_is_sink = (p == t);
  rec.s = rec.p_is_sink ? p : q;
  rec.removed = rec.p_is_sink ? q : p;
  rec.pre = inst;
  rec.node_map.assign(inst.n, -1);
  for (int v = 0, k = 0; v < inst.n; v++)
    if (v != rec.removed) rec.node_map[v] = k++;

  // Rewrite arcs in old ids; loops at the merged node are dropped.
  struct Cand {
    int i, j;
    Rat g, fl;
    ArcKind kind;
  };
  std::vector<Cand> cands;
  for (int k = 0; k < inst.m(); k++) {
    const Arc& ar = inst.arcs[k];
    int i = ar.tail, j = ar.head;
    Rat g = ar.gain, fl = st.f[k];
    if ((i == p && j == q) || (i == q && j == p)) continue;
    if (!rec.p_is_sink) {
      if (j == p) {
        j = q;
        g = ar.gain * rec.gain;
      } else if (i == p) {
        i = q;
        g = ar.gain / rec.gain;
        fl = rec.gain * st.f[k];
      }
    } else {
      if (j == q) {
        j = p;
        g = ar.gain / rec.gain;
      } else if (i == q) {
        i = p;
        g = ar.gain * rec.gain;
        fl = st.f[k] / rec.gain;
      }
    }
    cands.push_back({i, j, g, fl, ar.kind});
  }

  UncapInstance out;
  out.n = inst.n - 1;
  out.sink = rec.node_map[t];
  out.bbar = inst.bbar;
  Flow f2;
  // Parallel arcs at the merged node: keep the max gain, sum the flows.
  std::map<std::pair<int, int>, int> at_s;
  for (const Cand& c : cands) {
    if (c.i == rec.s || c.j == rec.s) {
      auto key = std::make_pair(c.i, c.j);
      auto it = at_s.find(key);
      if (it != at_s.end()) {
        Arc& m = out.arcs[it->second];
        if (c.g > m.gain) {
          m.gain = c.g;
          m.kind = c.kind;
        }
        f2[it->second] += c.fl;
        continue;
      }
      at_s[key] = int(out.arcs.size());
    }
    out.arcs.push_back({rec.node_map[c.i], rec.node_map[c.j], c.g, c.kind});
    f2.push_back(c.fl);
  }

  out.b.assign(out.n, Rat(0));
  for (int v = 0; v < inst.n; v++)
    if (v != rec.removed) out.b[rec.node_map[v]] = inst.b[v];
  if (!rec.p_is_sink) out.b[rec.node_map[q]] = inst.b[q] + rec.gain * inst.b[p];
  out.b[out.sink] = 0;  // the sink's demand is irrelevant

  Labels mu2(out.n);
  for (int v = 0; v < inst.n; v++)
    if (v != rec.removed) mu2[rec.node_map[v]] = st.mu[v];

  es.cur = std::move(out);
  st.inst = &es.cur;
  st.f = std::move(f2);
  st.mu = std::move(mu2);
  st.delta *= 16;
  st.consts.d = es.cur.degrees();  // n, m, bbar stay those of the original
  st.inT0.assign(es.cur.n, 0);
  st.inT.assign(es.cur.n, 0);
  st.pred.assign(es.cur.n, ResArc{});
  st.hasPred.assign(es.cur.n, 0);
  es.kappa++;

  if (violations) {
    const UncapInstance& ni = es.cur;
    for (int k = 0; k < ni.m(); k++) {
      Rat g = relabeled_gain(ni, st.mu, k);
      if (g > 1) violations->push_back("contract: non-conservative arc " + std::to_string(k));
      if (sgn(st.f[k]) < 0) violations->push_back("contract: negative flow on arc " + std::to_string(k));
      if (sgn(st.f[k]) > 0 && g != 1)
        violations->push_back("contract: flow left on non-tight arc " + std::to_string(k));
    }
    std::vector<Rat> em = relabeled_excesses(ni, st.f, st.mu);
    for (int i = 0; i < ni.n; i++) {
      if (i == ni.sink) continue;
      if (sgn(em[i]) < 0)
        violations->push_back("contract: negative excess at node " + std::to_string(i));
      if (em[i] >= Rat(st.consts.mid(i)) * st.delta)
        violations->push_back("contract: excess bound failed at node " + std::to_string(i));
    }
  }
  es.records.push_back(rec);
  return rec;
}

Labels reverse_expand(const ContractionRecord& rec, const Labels& mu_prime) {
  const UncapInstance& pre = rec.pre;
  Labels mu(pre.n);
  for (int v = 0; v < pre.n; v++)
    if (v != rec.removed) mu[v] = mu_prime[rec.node_map[v]];
  if (!rec.p_is_sink)
    mu[rec.p] = mu[rec.q] / rec.gain;
  else
    mu[rec.q] = rec.gain;
  for (int v = 0; v < pre.n; v++)
    if (sgn(mu[v]) <= 0) throw solver_error("reverse: nonpositive label");
  if (mu[pre.sink] != 1) throw solver_error("reverse: sink label moved");
  for (int k = 0; k < pre.m(); k++)
    if (relabeled_gain(pre, mu, k) > 1)
      throw solver_error("reverse: lifted labels not conservative");
  if (rec.gain * mu[rec.p] / mu[rec.q] != 1)
    throw solver_error("reverse: contracted arc not tight");
  return mu;
}

void filtration(ScalingState& st, std::vector<std::string>* violations) {
  const UncapInstance& inst = *st.inst;
  std::vector<char> in_s(inst.n);
  for (int i = 0; i < inst.n; i++) in_s[i] = !st.inT[i];
  TightFlowResult tf = tight_flow(inst, in_s, st.mu);
  // The old flow restricted to tight arcs witnesses feasibility.
  if (!tf.feasible) throw solver_error("filtration: tight flow infeasible");
  for (int a = 0; a < inst.m(); a++) {
    const Arc& ar = inst.arcs[a];
    if (!st.inT[ar.tail] && !st.inT[ar.head])
      st.f[a] = tf.f[a];
    else if (!st.inT[ar.tail] && st.inT[ar.head])
      st.f[a] = 0;
  }
  if (violations) {
    // e^mu_i <= R^mu_i + n max_j |b^mu_j| over V \ T afterwards
    Rat mx(0);
    for (int j = 0; j < inst.n; j++)
      if (!st.inT[j] && j != inst.sink) mx = std::max(mx, Rat(abs(inst.b[j]) / st.mu[j]));
    std::vector<Rat> em = relabeled_excesses(inst, st.f, st.mu);
    std::vector<Rat> R = reserves(inst, st.f, st.mu);
    for (int i = 0; i < inst.n; i++) {
      if (st.inT[i] || i == inst.sink) continue;
      if (em[i] > R[i] / st.mu[i] + Rat(st.consts.n) * mx)
        violations->push_back("filtration: excess bound failed at node " + std::to_string(i));
    }
  }
}

GammaQuantity gamma_quantity(const EnhancedState& es, int i) {
  GammaQuantity g;
  g.bound = Rat(32) * es.st.consts.m * es.st.consts.n * es.st.delta;
  g.absb = abs(es.cur.b[i]) / es.st.mu[i];
  if (sgn(g.absb) == 0) {
    g.ratio_inf = true;
    return g;
  }
  g.ratio = g.bound / g.absb;
  return g;
}

ExpandResult expand_to_original(const UncapInstance& orig,
                                const std::vector<ContractionRecord>& records,
                                const Labels& mu_final) {
  Labels mu = mu_final;
  for (auto it = records.rbegin(); it != records.rend(); ++it) mu = reverse_expand(*it, mu);
  if (int(mu.size()) != orig.n) throw solver_error("expand: node count mismatch");
  TightFlowResult tf = tight_flow(orig, std::vector<char>(orig.n, 1), mu);
  if (!tf.feasible) throw solver_error("expand: tight flow infeasible");
  std::vector<std::string> bad = check_optimality_uncap(orig, tf.f, mu);
  if (!bad.empty()) throw solver_error("expand: output not optimal: " + bad.front());
  return {tf.f, mu};
}

namespace {

std::string classify(const std::vector<char>& before, const std::vector<char>& after) {
  bool lost = false, gained = false;
  for (size_t i = 0; i < before.size(); i++) {
    if (before[i] && !after[i]) lost = true;
    if (!before[i] && after[i]) gained = true;
  }
  if (lost) return "shrinking";
  if (gained) return "expanding";
  return "neutral";
}

}  // namespace

EnhancedSolution enhanced_continuous_scaling(const UncapInstance& inst, const Flow& f_start,
                                             const SolveOptions& opt) {
  {
    std::vector<std::string> bad = inst.validate();
    if (!bad.empty()) throw input_error("invalid instance: " + bad.front());
  }
  InitResult init = initialize(inst, f_start);
  EnhancedState es;
  es.cur = inst;
  es.st = make_state(es.cur, init);
  ScalingState& st = es.st;

  EnhancedSolution sol;
  ScalingStats& stats = sol.stats;
  stats.delta_bar = init.delta_bar;
  Rat thr = st.consts.termination_threshold();
  long n0 = st.consts.n, m0 = st.consts.m;
  long cap = 2 * n0 * (195 * n0 * n0 * m0 + 1) * 4 + 1000;
  bool terminal = false;

  // Lemma 6.3 instrumentation: |b^mu|/Delta per node and the set D.
  std::vector<Rat> ratio(es.cur.n);
  std::vector<char> inD(es.cur.n, 0);
  auto refresh_D = [&](std::vector<std::string>* viol) {
    Rat cut = st.delta / (rat_pow(Rat(16), es.kappa) * Rat(st.consts.n));
    for (int i = 0; i < es.cur.n; i++) {
      if (i == es.cur.sink) continue;
      bool in = abs(es.cur.b[i]) / st.mu[i] >= cut;
      if (inD[i] && !in && viol) viol->push_back("D lost node " + std::to_string(i));
      inD[i] = in;
    }
  };

  if (sgn(st.delta) > 0 && st.delta >= thr && es.cur.n > 1) {
    for (int i = 0; i < es.cur.n; i++) ratio[i] = abs(es.cur.b[i]) / (st.mu[i] * st.delta);
    refresh_D(nullptr);
    while (es.cur.n > 1 && st.delta >= thr) {
      stats.iterations++;
      if (stats.iterations > cap) throw solver_error("enhanced: iteration cap exceeded");
      std::vector<char> T_before = st.inT;
      std::vector<std::string> viol;

      std::vector<char> N = compute_N(st);
      int qn = -1;
      for (int i = 0; i < es.cur.n && qn < 0; i++)
        if (N[i] && st.inT[i]) qn = i;
      if (qn >= 0) {
        augment_on_path(st, qn);
      } else if (!extend_T(st)) {
        Rat fcut = st.delta / (rat_pow(Rat(16), es.kappa) * Rat(st.consts.n));
        bool guard = true;
        for (int i = 0; i < es.cur.n && guard; i++)
          if (!st.inT[i] && i != es.cur.sink && abs(es.cur.b[i]) / st.mu[i] >= fcut)
            guard = false;
        if (guard) {
          filtration(st, opt.check_invariants ? &viol : nullptr);
          sol.filtrations++;
        }
        // Skip the elementary step when Filtration pushed a T0 member below
        // its removal threshold or a T member into N.
        std::vector<Rat> em = relabeled_excesses(es.cur, st.f, st.mu);
        bool ok0 = true, okT = true;
        for (int i = 0; i < es.cur.n; i++) {
          if (st.inT0[i] && em[i] < Rat(st.consts.mid(i)) * st.delta) ok0 = false;
          if (st.inT[i] && i != es.cur.sink && em[i] < Rat(st.consts.lo(i)) * st.delta)
            okT = false;
        }
        if (ok0 && okT) {
          EStepOutcome out = elementary_step(st);
          for (std::string& v : out.violations) viol.push_back(std::move(v));
          if (out.terminal) terminal = true;
        } else if (!ok0) {
          for (int i = 0; i < es.cur.n; i++)
            if (st.inT0[i] && em[i] < Rat(st.consts.mid(i)) * st.delta) st.inT0[i] = 0;
          st.inT = st.inT0;
          st.hasPred.assign(es.cur.n, 0);
        }
      }

      std::string kind = terminal ? "terminal" : classify(T_before, st.inT);
      if (kind == "shrinking") stats.shrinking++;
      if (kind == "expanding") stats.expanding++;
      if (kind == "neutral") stats.neutral++;

      if (!terminal) {
        if (opt.check_invariants)
          for (std::string& s : check_delta_feasible(es.cur, st.f, st.mu, st.delta))
            viol.push_back("after iteration: " + s);
        for (int i = 0; i < es.cur.n; i++) {
          Rat now = abs(es.cur.b[i]) / (st.mu[i] * st.delta);
          if (opt.check_invariants && now < ratio[i])
            viol.push_back("|b^mu|/delta decreased at node " + std::to_string(i));
          ratio[i] = now;
        }
        refresh_D(opt.check_invariants ? &viol : nullptr);

        // Contract every abundant arc, re-scanning after each contraction.
        while (es.cur.n > 1) {
          std::vector<int> ab = abundant_arcs(es);
          if (ab.empty()) break;
          for (int k = 0; k < es.cur.m(); k++)
            if (relabeled_gain(es.cur, st.mu, k) < 1) st.f[k] = 0;
          std::vector<Rat> old_ratio = ratio;
          std::vector<char> old_D = inD;
          ContractionRecord rec =
              contract(es, ab.front(), opt.check_invariants ? &viol : nullptr);
          ratio.assign(es.cur.n, Rat(0));
          inD.assign(es.cur.n, 0);
          for (int v = 0; v < rec.pre.n; v++) {
            if (v == rec.removed) continue;
            int w = rec.node_map[v];
            ratio[w] = abs(es.cur.b[w]) / (st.mu[w] * st.delta);
            if (v != rec.s) {
              inD[w] = old_D[v];
              // the sink is exempt: contraction resets its (irrelevant) demand
              if (opt.check_invariants && w != es.cur.sink && ratio[w] * 16 != old_ratio[v])
                viol.push_back("contract: |b^mu|/delta not divided by 16 at node " +
                               std::to_string(w));
            }
          }
          refresh_D(nullptr);  // the merged node's membership is recomputed
        }
        if (opt.check_invariants) {
          // Gamma_i >= 0 once all abundant arcs are contracted
          for (int i = 0; i < es.cur.n; i++) {
            if (i == es.cur.sink) continue;
            GammaQuantity g = gamma_quantity(es, i);
            if (!g.ratio_inf && g.ratio < 1)
              viol.push_back("Gamma < 0 at node " + std::to_string(i));
          }
        }
      }

      for (std::string& v : viol) stats.violations.push_back(v);
      if (opt.trace) {
        TraceRecord tr;
        tr.iter = stats.iterations;
        tr.kind = kind;
        tr.delta = st.delta;
        tr.psi = potential_psi(st);
        tr.kappa = es.kappa;
        tr.d_size = int(std::count(inD.begin(), inD.end(), char(1)));
        tr.violations = viol;
        opt.trace(tr);
      }
      if (terminal) break;
    }
  }
  stats.delta_final = st.delta;
  stats.terminal_step = terminal;
  if (opt.check_invariants) {
    if (stats.shrinking > 195 * n0 * n0 * m0)
      stats.violations.push_back("shrinking iterations exceed 195 n^2 m");
    if (stats.iterations > 2 * n0 * (stats.shrinking + 1))
      stats.violations.push_back("total iterations exceed 2n(shrinking+1)");
  }

  // The labels on the surviving instance are dual optimal: by alpha = infinity,
  // |V| = 1, or Delta below the weak termination threshold.
  ExpandResult ex = expand_to_original(inst, es.records, st.mu);
  sol.f = ex.f;
  sol.mu = ex.mu;
  sol.value = excesses(inst, ex.f)[inst.sink];
  sol.kappa = es.kappa;
  sol.records = std::move(es.records);
  return sol;
}

}  // namespace gflow
