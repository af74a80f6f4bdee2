#pragma once

#include <random>
#include <set>
#include <string>

#include "gflow/certify.hpp"
#include "gflow/core.hpp"
#include "gflow/lp2.hpp"

namespace gflow::fx {

// mpq_class(a, b) does not reduce; random test data must canonicalize.
inline Rat rq(long num, long den) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

// Three nodes 0,1 and sink 2; optimum routes both demanded units of node 0
// through node 1 at gain 1/2: value 1, labels (2,2,1).
inline UncapInstance f1() {
  UncapInstance in;
  in.n = 3;
  in.sink = 2;
  in.arcs = {{0, 1, Rat(1)}, {1, 2, Rat(1, 2)}, {0, 2, Rat(1, 4)}};
  in.b = {Rat(-2), Rat(0), Rat(0)};
  in.bbar = 8;
  return in;
}

// Four nodes, sink 3; starting flow on arc 2->1. First elementary step scales
// by 16; optimum value 5/4.
inline UncapInstance f5() {
  UncapInstance in;
  in.n = 4;
  in.sink = 3;
  in.arcs = {{0, 1, Rat(1)},
             {2, 1, Rat(1)},
             {2, 3, Rat(1)},
             {0, 3, Rat(1, 4)},
             {1, 3, Rat(1, 4)}};
  in.b = {Rat(-1), Rat(0), Rat(-1), Rat(0)};
  in.bbar = 16;
  return in;
}

inline Flow f5_start() { return {Rat(0), Rat(1), Rat(0), Rat(0), Rat(0)}; }

// Capacitated fixture: sink sends up to 3 units to node 0, which returns them
// at gain 2; optimum value 3.
inline StdInstance f2() {
  StdInstance in;
  in.n = 2;
  in.sink = 1;
  in.arcs = {{1, 0, Rat(1), ExtRat(Rat(3))}, {0, 1, Rat(2), ExtRat::infinity()}};
  in.b = {Rat(0), Rat(0)};
  return in;
}

// Random valid uncapacitated instance with a feasible starting flow: demands
// are derived from a random flow plus slack, rounded down to the 1/bbar grid.
// May still be unbounded; callers resample on unbounded_error.
inline UncapInstance random_uncap(std::mt19937& rng, Flow* fstart, int nmax = 6,
                                  int mmax = 12, long partmax = 4) {
  while (true) {
    UncapInstance in;
    in.n = 3 + int(rng() % (nmax - 2));
    in.sink = in.n - 1;
    int m = int(rng() % (mmax + 1));
    for (int k = 0; k < m; k++) {
      int u = int(rng() % in.n), v = int(rng() % in.n);
      if (u == v) continue;
      in.arcs.push_back({u, v, rq(1 + long(rng() % partmax), 1 + long(rng() % partmax))});
    }
    // assumption: every node has an arc to the sink
    std::vector<char> to_sink(in.n, 0);
    for (const Arc& a : in.arcs)
      if (a.head == in.sink) to_sink[a.tail] = 1;
    for (int i = 0; i < in.n; i++)
      if (i != in.sink && !to_sink[i])
        in.arcs.push_back({i, in.sink, rq(1, 1 + long(rng() % partmax))});
    in.bbar = 1;
    for (const Arc& a : in.arcs) in.bbar *= a.gain.get_num() * a.gain.get_den();
    Flow f(in.arcs.size());
    for (Rat& x : f) x = rq(long(rng() % 5), 1 + long(rng() % 3));
    in.b.assign(in.n, Rat(0));
    for (int i = 0; i < in.n; i++) {
      if (i == in.sink) continue;
      Rat net(0);
      for (size_t k = 0; k < in.arcs.size(); k++) {
        if (in.arcs[k].head == i) net += in.arcs[k].gain * f[k];
        if (in.arcs[k].tail == i) net -= f[k];
      }
      Rat b = net - rq(long(rng() % 3), 2);
      in.b[i] = Rat(rat_floor(b * Rat(in.bbar))) / Rat(in.bbar);
    }
    if (!in.validate().empty()) continue;
    *fstart = f;
    return in;
  }
}

// Random capacitated instance. Demands are non-positive so that f = 0 stays
// feasible. May transform to an unbounded instance; callers resample.
inline StdInstance random_std(std::mt19937& rng, int nmax = 5, int mmax = 10, long partmax = 4) {
  StdInstance in;
  in.n = 2 + int(rng() % (nmax - 1));
  in.sink = in.n - 1;
  int m = int(rng() % (mmax + 1));
  for (int k = 0; k < m; k++) {
    int u = int(rng() % in.n), v = int(rng() % in.n);
    if (u == v) continue;
    StdArc a;
    a.tail = u;
    a.head = v;
    a.gain = rq(1 + long(rng() % partmax), 1 + long(rng() % partmax));
    a.cap = (rng() % 2) ? ExtRat::infinity()
                        : ExtRat(rq(1 + long(rng() % partmax), 1 + long(rng() % partmax)));
    in.arcs.push_back(a);
  }
  in.b.assign(in.n, Rat(0));
  for (int i = 0; i < in.n; i++)
    if (i != in.sink && rng() % 2) in.b[i] = -rq(long(rng() % 3), 2);
  return in;
}

// Random LP2 system: each column touches one or two distinct rows, mixed
// signs, finite upper bound on roughly half the columns. Produces a blend of
// feasible and infeasible instances.
inline LP2Instance random_lp2(std::mt19937& rng, int rowmax = 4, int colmax = 6,
                              long partmax = 3) {
  LP2Instance in;
  in.rows = 1 + int(rng() % rowmax);
  int m = int(rng() % (colmax + 1));
  for (int j = 0; j < m; j++) {
    std::vector<LP2Entry> col;
    int r1 = int(rng() % in.rows);
    Rat c1 = rq(1 + long(rng() % partmax), 1 + long(rng() % partmax));
    if (rng() % 2) c1 = -c1;
    col.push_back({r1, c1});
    if (in.rows > 1 && rng() % 2) {
      int r2 = int(rng() % in.rows);
      if (r2 == r1) r2 = (r1 + 1) % in.rows;
      Rat c2 = rq(1 + long(rng() % partmax), 1 + long(rng() % partmax));
      if (rng() % 2) c2 = -c2;
      col.push_back({r2, c2});
    }
    in.cols.push_back(std::move(col));
    in.ub.push_back((rng() % 2) ? ExtRat::infinity()
                                : ExtRat(rq(long(rng() % 4), 1 + long(rng() % 2))));
  }
  for (int i = 0; i < in.rows; i++)
    in.rhs.push_back(rq(long(rng() % 5) - 2, 1 + long(rng() % 2)));
  return in;
}

// Exact Fourier-Motzkin feasibility oracle for LP2 instances. Exponential;
// only usable for a handful of columns.
inline bool fm_feasible(const LP2Instance& in) {
  int m = in.m();
  // Inequality list: sum_j c[j] x_j <= d.
  struct Ineq {
    std::vector<Rat> c;
    Rat d;
  };
  std::vector<Ineq> rows;
  auto add = [&](std::vector<Rat> c, Rat d) { rows.push_back({std::move(c), std::move(d)}); };
  for (int i = 0; i < in.rows; i++) {
    std::vector<Rat> c(m, Rat(0)), nc(m, Rat(0));
    for (int j = 0; j < m; j++)
      for (const auto& e : in.cols[j])
        if (e.row == i) {
          c[j] += e.coef;
          nc[j] -= e.coef;
        }
    add(c, in.rhs[i]);
    add(nc, Rat(-in.rhs[i]));
  }
  for (int j = 0; j < m; j++) {
    std::vector<Rat> c(m, Rat(0));
    c[j] = -1;
    add(c, Rat(0));
    if (in.ub[j].finite()) {
      std::vector<Rat> cu(m, Rat(0));
      cu[j] = 1;
      add(cu, in.ub[j].v);
    }
  }
  for (int v = 0; v < m; v++) {
    std::vector<Ineq> pos, neg, next;
    for (auto& r : rows) {
      if (r.c[v] > 0)
        pos.push_back(std::move(r));
      else if (r.c[v] < 0)
        neg.push_back(std::move(r));
      else
        next.push_back(std::move(r));
    }
    for (const auto& p : pos)
      for (const auto& q : neg) {
        Ineq r;
        r.c.assign(m, Rat(0));
        for (int k = 0; k < m; k++) r.c[k] = p.c[k] / p.c[v] - q.c[k] / q.c[v];
        r.c[v] = 0;
        r.d = p.d / p.c[v] - q.d / q.c[v];
        next.push_back(std::move(r));
      }
    // Dedupe after normalizing; FM blows up fast without it.
    std::set<std::string> seen;
    rows.clear();
    for (auto& r : next) {
      Rat scale(0);
      for (const auto& ck : r.c)
        if (ck != 0) {
          scale = abs(ck);
          break;
        }
      if (scale == 0) {
        if (r.d < 0) return false;
        continue;
      }
      std::string key;
      for (auto& ck : r.c) {
        ck /= scale;
        key += ck.get_str() + ";";
      }
      r.d /= scale;
      key += r.d.get_str();
      if (seen.insert(key).second) rows.push_back(std::move(r));
    }
  }
  for (const auto& r : rows)
    if (r.d < 0) return false;
  return true;
}

}  // namespace gflow::fx
