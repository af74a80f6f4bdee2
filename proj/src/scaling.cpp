#include "gflow/scaling.hpp"

#include <algorithm>

#include "gflow/certify.hpp"
#include "gflow/maxflow.hpp"

namespace gflow {

ScalingState make_state(const UncapInstance& inst, const InitResult& init) {
  ScalingState st;
  st.inst = &inst;
  st.consts = Constants::of(inst);
  st.f = init.f;
  st.mu = init.mu;
  st.delta = init.delta_bar;
  st.inT0.assign(inst.n, 0);
  st.inT.assign(inst.n, 0);
  st.pred.assign(inst.n, ResArc{});
  st.hasPred.assign(inst.n, 0);
  return st;
}

std::vector<char> compute_N(const ScalingState& st) {
  const UncapInstance& inst = *st.inst;
  std::vector<Rat> em = relabeled_excesses(inst, st.f, st.mu);
  std::vector<char> N(inst.n, 0);
  N[inst.sink] = 1;
  for (int i = 0; i < inst.n; i++) {
    if (i == inst.sink) continue;
    if (em[i] < Rat(st.consts.lo(i)) * st.delta) N[i] = 1;
  }
  return N;
}

Int potential_psi(const ScalingState& st) {
  if (sgn(st.delta) == 0) return 0;
  const UncapInstance& inst = *st.inst;
  std::vector<Rat> e = excesses(inst, st.f);
  Int psi = 0;
  for (int i = 0; i < inst.n; i++) {
    if (!st.inT0[i]) continue;
    Rat beta = e[i] / (st.delta * st.mu[i]);
    psi += rat_floor(beta - st.consts.lo(i));
  }
  return psi;
}

namespace {

// Shared per-node flow sums for the elementary step ratios.
struct EStepSums {
  Rat r1, r2, r3, r4;
};

EStepSums estep_sums(const ScalingState& st, int i) {
  const UncapInstance& inst = *st.inst;
  EStepSums s{Rat(0), Rat(0), Rat(0), Rat(0)};
  for (int a = 0; a < inst.m(); a++) {
    const Arc& ar = inst.arcs[a];
    bool tight = relabeled_gain(inst, st.mu, a) == 1;
    if (ar.head == i) {
      // F1: non-tight arcs inside V - T; the rest of delta^in is F2
      if (!tight && !st.inT[ar.tail] && !st.inT[ar.head])
        s.r1 += ar.gain * st.f[a];
      else
        s.r2 += ar.gain * st.f[a];
    }
    if (ar.tail == i) {
      // F3: non-tight inside V - T, or any arc entering T; the rest is F4
      if ((!tight && !st.inT[ar.head]) || st.inT[ar.head])
        s.r3 += st.f[a];
      else
        s.r4 += st.f[a];
    }
  }
  return s;
}

}  // namespace

ExtRat delta_i(const ScalingState& st, int i) {
  EStepSums s = estep_sums(st, i);
  Rat den = s.r2 - s.r4 - st.inst->b[i];
  if (sgn(den) == 0) return ExtRat::infinity();
  Rat num = Rat(st.consts.hi(i)) * st.delta * st.mu[i] + s.r3 - s.r1;
  return ExtRat(num / den);
}

std::vector<ResArc> find_tight_path(const ScalingState& st, int q, int* root) {
  std::vector<ResArc> path;
  int v = q;
  while (st.hasPred[v]) {
    path.push_back(st.pred[v]);
    v = res_tail(*st.inst, st.pred[v]);
  }
  if (!st.inT0[v]) throw solver_error("pred chain does not end in T0");
  if (root) *root = v;
  std::reverse(path.begin(), path.end());
  return path;
}

void augment_on_path(ScalingState& st, int q) {
  const UncapInstance& inst = *st.inst;
  int p = -1;
  std::vector<ResArc> path = find_tight_path(st, q, &p);
  for (const ResArc& a : path) {
    Rat g = res_gain(inst, a) * st.mu[res_tail(inst, a)] / st.mu[res_head(inst, a)];
    if (g != 1) throw solver_error("augmenting path arc not tight");
    if (!a.fwd && relabeled_flow(inst, st.mu, st.f, a.arc) <= st.delta)
      throw solver_error("augmenting path reverse arc not fat");
  }
  for (const ResArc& a : path) {
    if (a.fwd)
      st.f[a.arc] += st.delta * st.mu[inst.arcs[a.arc].tail];
    else
      st.f[a.arc] -= st.delta * st.mu[inst.arcs[a.arc].tail];
  }
  // Root removal rule, then T is rebuilt from T0.
  Rat ep = excesses(inst, st.f)[p] / st.mu[p];
  if (ep < Rat(st.consts.mid(p)) * st.delta) st.inT0[p] = 0;
  st.inT = st.inT0;
  st.hasPred.assign(inst.n, 0);
}

bool extend_T(ScalingState& st) {
  const UncapInstance& inst = *st.inst;
  for (const ResArc& a : delta_fat_arcs(inst, st.f, st.mu, st.delta)) {
    int u = res_tail(inst, a), v = res_head(inst, a);
    if (!st.inT[u] || st.inT[v]) continue;
    if (res_gain(inst, a) * st.mu[u] / st.mu[v] != 1) continue;
    st.inT[v] = 1;
    st.pred[v] = a;
    st.hasPred[v] = 1;
    return true;
  }
  return false;
}

EStepOutcome elementary_step(ScalingState& st) {
  const UncapInstance& inst = *st.inst;
  EStepOutcome out;
  auto say = [&](const std::string& s) { out.violations.push_back(s); };

  ExtRat alpha1 = ExtRat::infinity();
  for (int i = 0; i < inst.n; i++) {
    if (i == inst.sink || st.inT[i]) continue;
    EStepSums s = estep_sums(st, i);
    Rat den = s.r2 - s.r4 - inst.b[i];
    if (sgn(den) < 0) say("estep: negative denominator at node " + std::to_string(i));
    Rat num = Rat(st.consts.hi(i)) * st.delta * st.mu[i] + s.r3 - s.r1;
    if (sgn(num) <= 0) say("estep: nonpositive numerator at node " + std::to_string(i));
    if (sgn(den) > 0) {
      Rat d = num / den;
      if (d <= 1) say("estep: step ratio <= 1 at node " + std::to_string(i));
      alpha1 = ext_min(alpha1, ExtRat(d));
    }
  }
  ExtRat alpha2 = ExtRat::infinity();
  for (int a = 0; a < inst.m(); a++) {
    const Arc& ar = inst.arcs[a];
    if (!st.inT[ar.tail] || st.inT[ar.head]) continue;
    alpha2 = ext_min(alpha2, ExtRat(Rat(1) / relabeled_gain(inst, st.mu, a)));
  }
  ExtRat alpha = ext_min(alpha1, alpha2);
  if (alpha.inf) {
    for (int a = 0; a < inst.m(); a++)
      if (inst.arcs[a].tail == inst.sink && relabeled_gain(inst, st.mu, a) < 1) st.f[a] = 0;
    out.terminal = true;
    out.alpha = alpha;
    return out;
  }
  if (alpha.v <= 1) say("estep: alpha <= 1");
  out.alpha = alpha;

  // f is shrunk on non-tight arcs inside V - T and on all arcs entering T,
  // with tightness taken before mu moves.
  std::vector<int> shrink;
  for (int a = 0; a < inst.m(); a++) {
    const Arc& ar = inst.arcs[a];
    bool tight = relabeled_gain(inst, st.mu, a) == 1;
    if (!st.inT[ar.tail] && st.inT[ar.head])
      shrink.push_back(a);
    else if (!tight && !st.inT[ar.tail] && !st.inT[ar.head])
      shrink.push_back(a);
  }
  st.delta /= alpha.v;
  for (int i = 0; i < inst.n; i++)
    if (st.inT[i]) st.mu[i] *= alpha.v;
  for (int a : shrink) st.f[a] /= alpha.v;

  std::vector<Rat> em = relabeled_excesses(inst, st.f, st.mu);
  for (int i = 0; i < inst.n; i++) {
    if (i == inst.sink || st.inT[i]) continue;
    if (em[i] == Rat(st.consts.hi(i)) * st.delta) {
      st.inT0[i] = 1;
      st.inT[i] = 1;
      st.hasPred[i] = 0;
      out.entered.push_back(i);
    } else if (em[i] > Rat(st.consts.hi(i)) * st.delta) {
      say("estep: excess above entry threshold at node " + std::to_string(i));
    }
  }
  if (out.entered.empty() && !(alpha2 < alpha1))
    say("estep: alpha attained by a node ratio but nothing entered T0");

  std::vector<int> drop;
  for (int i = 0; i < inst.n; i++)
    if (st.inT0[i] && em[i] < Rat(st.consts.mid(i)) * st.delta) drop.push_back(i);
  if (!drop.empty()) {
    for (int i : drop) st.inT0[i] = 0;
    st.inT = st.inT0;
    st.hasPred.assign(inst.n, 0);
    out.removed = drop;
  }
  return out;
}

namespace {

struct IterSnap {
  std::vector<char> T, T0;
  Int psi;
  Rat delta;
  Labels mu;
  std::vector<Rat> beta;           // e_i / (delta mu_i)
  std::vector<Rat> bmu_over_delta; // |b_i| / (mu_i delta)
};

IterSnap snapshot(const ScalingState& st) {
  const UncapInstance& inst = *st.inst;
  IterSnap s;
  s.T = st.inT;
  s.T0 = st.inT0;
  s.psi = potential_psi(st);
  s.delta = st.delta;
  s.mu = st.mu;
  std::vector<Rat> e = excesses(inst, st.f);
  s.beta.resize(inst.n);
  s.bmu_over_delta.resize(inst.n);
  for (int i = 0; i < inst.n; i++) {
    s.beta[i] = e[i] / (st.delta * st.mu[i]);
    s.bmu_over_delta[i] = abs(inst.b[i]) / (st.mu[i] * st.delta);
  }
  return s;
}

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

UncapSolution continuous_scaling(const UncapInstance& inst, const Flow& f_start,
                                 const SolveOptions& opt) {
  {
    std::vector<std::string> bad = inst.validate();
    if (!bad.empty()) throw input_error("invalid instance: " + bad.front());
  }
  InitResult init = initialize(inst, f_start);
  ScalingState st = make_state(inst, init);
  ScalingStats stats;
  stats.delta_bar = init.delta_bar;
  Rat thr = st.consts.termination_threshold();
  bool terminal = false;
  std::string prev_kind;

  if (sgn(st.delta) > 0 && st.delta >= thr) {
    long cap = long((26.0 * st.consts.m * st.consts.n + 64) *
                    (log2_approx(st.delta / thr) + 4)) *
                   4 +
               1000;
    while (st.delta >= thr) {
      stats.iterations++;
      if (stats.iterations > cap) throw solver_error("scaling: iteration cap exceeded");
      bool watch = opt.check_invariants || opt.trace;
      IterSnap snap;
      if (watch)
        snap = snapshot(st);
      else
        snap.T = st.inT;
      std::vector<std::string> viol;
      bool was_estep = false;

      std::vector<char> N = compute_N(st);
      int q = -1;
      for (int i = 0; i < inst.n && q < 0; i++)
        if (N[i] && st.inT[i]) q = i;
      if (q >= 0) {
        augment_on_path(st, q);
      } else if (!extend_T(st)) {
        was_estep = true;
        EStepOutcome out = elementary_step(st);
        viol = out.violations;
        if (out.terminal) terminal = true;
        if (opt.check_invariants && !out.terminal && watch) {
          // Claim 4.6: beta can grow by at most alpha^2 over max(beta, d).
          std::vector<Rat> e = excesses(inst, st.f);
          Rat a2 = out.alpha.v * out.alpha.v;
          for (int i = 0; i < inst.n; i++) {
            if (i == inst.sink) continue;
            Rat nb = e[i] / (st.delta * st.mu[i]);
            Rat limit = a2 * std::max(snap.beta[i], Rat(st.consts.d[i]));
            if (nb > limit)
              viol.push_back("estep: beta grew past alpha^2 bound at node " + std::to_string(i));
          }
          // Psi over the surviving old T0 terms may not increase; entrants add
          // exactly 3 d_i + 7 each.
          Int psi_old_terms = 0;
          for (int i = 0; i < inst.n; i++)
            if (snap.T0[i] && st.inT0[i])
              psi_old_terms += rat_floor(e[i] / (st.delta * st.mu[i]) - st.consts.lo(i));
          if (psi_old_terms > snap.psi) viol.push_back("estep: Psi increased on old T0 terms");
          for (int i : out.entered) {
            Rat nb = e[i] / (st.delta * st.mu[i]);
            if (rat_floor(nb - st.consts.lo(i)) != 3 * st.consts.d[i] + 7)
              viol.push_back("estep: T0 entrant does not add 3d+7 to Psi");
          }
        }
      }

      std::string kind = terminal ? "terminal" : classify(snap.T, st.inT);
      if (watch && !terminal) {
        if (opt.check_invariants) {
          for (std::string& s : check_delta_feasible(inst, st.f, st.mu, st.delta))
            viol.push_back("after iteration: " + s);
          if (st.delta > snap.delta) viol.push_back("delta increased");
          for (int i = 0; i < inst.n; i++) {
            if (st.mu[i] < snap.mu[i]) viol.push_back("mu decreased at node " + std::to_string(i));
            Rat now = abs(inst.b[i]) / (st.mu[i] * st.delta);
            if (now < snap.bmu_over_delta[i])
              viol.push_back("|b^mu|/delta decreased at node " + std::to_string(i));
          }
          if (kind == "shrinking" && potential_psi(st) > snap.psi - 1)
            viol.push_back("shrinking iteration did not decrease Psi");
          if (kind == "neutral" && prev_kind == "neutral")
            viol.push_back("two consecutive neutral iterations");
        }
        (void)was_estep;
      }
      if (kind == "shrinking") stats.shrinking++;
      if (kind == "expanding") stats.expanding++;
      if (kind == "neutral") stats.neutral++;
      for (const std::string& v : viol) stats.violations.push_back(v);
      if (opt.trace) {
        TraceRecord tr;
        tr.iter = stats.iterations;
        tr.kind = kind;
        tr.delta = st.delta;
        tr.psi = potential_psi(st);
        tr.kappa = 0;
        tr.d_size = 0;
        tr.violations = viol;
        opt.trace(tr);
      }
      prev_kind = kind;
      if (terminal) break;
    }
  }
  stats.delta_final = st.delta;
  stats.terminal_step = terminal;

  Flow f_out;
  if (terminal) {
    f_out = st.f;
  } else {
    TightFlowResult tf = tight_flow(inst, std::vector<char>(inst.n, 1), st.mu);
    if (!tf.feasible) throw solver_error("final tight flow infeasible");
    f_out = tf.f;
    std::vector<Rat> em = relabeled_excesses(inst, f_out, st.mu);
    Rat exm = 0;
    for (int i = 0; i < inst.n; i++)
      if (i != inst.sink) exm += em[i];
    if (exm >= Rat(1) / Rat(inst.bbar * inst.bbar * inst.bbar))
      throw solver_error("final relabeled surplus not below exactness bound");
  }
  std::vector<std::string> bad = check_optimality_uncap(inst, f_out, st.mu);
  if (!bad.empty()) throw solver_error("output not optimal: " + bad.front());
  UncapSolution sol;
  sol.f = f_out;
  sol.mu = st.mu;
  sol.value = excesses(inst, f_out)[inst.sink];
  sol.stats = stats;
  return sol;
}

}  // namespace gflow
