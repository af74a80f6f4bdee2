#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "gflow/enhanced.hpp"
#include "gflow/maxflow.hpp"

using namespace gflow;

namespace {

EnhancedState state_of(const UncapInstance& in, const Flow& f, const Labels& mu,
                       const Rat& delta) {
  EnhancedState es;
  es.cur = in;
  InitResult ir;
  ir.f = f;
  ir.mu = mu;
  ir.delta_bar = delta;
  es.st = make_state(es.cur, ir);
  return es;
}

// Case I playground: 0=i, 1=p, 2=q, 3=t; arc 1 (p->q) is the tight one.
UncapInstance case1_inst() {
  UncapInstance in;
  in.n = 4;
  in.sink = 3;
  in.arcs = {{0, 1, Rat(3)},
             {1, 2, fx::rq(1, 2)},
             {2, 3, Rat(1)},
             {1, 0, fx::rq(1, 4)},
             {0, 2, Rat(1)}};
  in.b = {Rat(0), Rat(4), Rat(1), Rat(0)};
  in.bbar = 1;
  return in;
}

}  // namespace

TEST_CASE("abundant arcs: empty flow and exact boundary") {
  UncapInstance in = fx::f5();
  EnhancedState es = state_of(in, Flow(5, Rat(0)), Labels(4, Rat(1)), Rat(1));
  CHECK(abundant_arcs(es).empty());
  es.st.f[2] = Rat(17 * 5);  // threshold 17 m Delta with m = 5
  std::vector<int> ab = abundant_arcs(es);
  REQUIRE(ab.size() == 1);
  CHECK(ab[0] == 2);
  es.st.f[2] -= fx::rq(1, 3);
  CHECK(abundant_arcs(es).empty());
}

TEST_CASE("contract case I rewrites gains, demands and flow") {
  UncapInstance in = case1_inst();
  Labels mu = {fx::rq(1, 2), Rat(2), Rat(1), Rat(1)};
  Flow f = {Rat(4), Rat(9), Rat(6), Rat(12), Rat(2)};
  EnhancedState es = state_of(in, f, mu, Rat(1));
  ContractionRecord rec = contract(es, 1, nullptr);

  CHECK(!rec.p_is_sink);
  CHECK(rec.s == 2);
  CHECK(rec.removed == 1);
  CHECK(rec.node_map == std::vector<int>{0, -1, 1, 2});
  REQUIRE(es.cur.n == 3);
  CHECK(es.cur.sink == 2);

  // i->p and i->q merge into one i->q arc: gain max(3 * 1/2, 1), flows summed
  REQUIRE(es.cur.m() == 3);
  CHECK(es.cur.arcs[0].tail == 0);
  CHECK(es.cur.arcs[0].head == 1);
  CHECK(es.cur.arcs[0].gain == fx::rq(3, 2));
  CHECK(es.st.f[0] == 6);
  // q->t unchanged
  CHECK(es.cur.arcs[1].gain == 1);
  CHECK(es.st.f[1] == 6);
  // p->i becomes q->i with gain (1/4)/(1/2) and flow gamma_pq * f
  CHECK(es.cur.arcs[2].tail == 1);
  CHECK(es.cur.arcs[2].head == 0);
  CHECK(es.cur.arcs[2].gain == fx::rq(1, 2));
  CHECK(es.st.f[2] == 6);

  CHECK(es.cur.b == std::vector<Rat>{Rat(0), Rat(3), Rat(0)});  // b_q + gamma b_p
  CHECK(es.st.mu == Labels{fx::rq(1, 2), Rat(1), Rat(1)});
  CHECK(es.st.delta == 16);
  CHECK(es.kappa == 1);
  CHECK(es.records.size() == 1);
}

TEST_CASE("contract case II merges q into the sink") {
  UncapInstance in;
  in.n = 3;
  in.sink = 0;
  in.arcs = {{0, 1, fx::rq(1, 2)}, {2, 1, Rat(1)}, {1, 2, fx::rq(1, 3)}};
  in.b = {Rat(0), Rat(2), fx::rq(1, 4)};
  in.bbar = 1;
  Labels mu = {Rat(1), fx::rq(1, 2), fx::rq(1, 2)};
  Flow f = {Rat(1), Rat(3), Rat(0)};
  EnhancedState es = state_of(in, f, mu, Rat(1));
  ContractionRecord rec = contract(es, 0, nullptr);

  CHECK(rec.p_is_sink);
  CHECK(rec.s == 0);
  CHECK(rec.removed == 1);
  REQUIRE(es.cur.n == 2);
  CHECK(es.cur.sink == 0);
  REQUIRE(es.cur.m() == 2);
  // i->q becomes i->t with gain 1 / gamma_pq
  CHECK(es.cur.arcs[0].tail == 1);
  CHECK(es.cur.arcs[0].head == 0);
  CHECK(es.cur.arcs[0].gain == 2);
  CHECK(es.st.f[0] == 3);
  // q->i becomes t->i with gain gamma_qi * gamma_pq and flow f / gamma_pq
  CHECK(es.cur.arcs[1].gain == fx::rq(1, 6));
  CHECK(es.st.f[1] == 0);
  CHECK(es.cur.b == std::vector<Rat>{Rat(0), fx::rq(1, 4)});
  CHECK(es.st.mu == Labels{Rat(1), fx::rq(1, 2)});
}

TEST_CASE("reverse expand lifts labels") {
  SUBCASE("case I formula") {
    UncapInstance in;
    in.n = 4;
    in.sink = 3;
    in.arcs = {{0, 1, Rat(3)}, {1, 2, fx::rq(1, 2)}};
    in.b = {Rat(0), Rat(0), Rat(0), Rat(0)};
    in.bbar = 1;
    Labels mu = {fx::rq(1, 2), Rat(2), Rat(1), Rat(1)};
    EnhancedState es = state_of(in, Flow(2, Rat(0)), mu, Rat(1));
    ContractionRecord rec = contract(es, 1, nullptr);
    Labels lifted = reverse_expand(rec, {fx::rq(1, 8), Rat(3), Rat(1)});
    CHECK(lifted == Labels{fx::rq(1, 8), Rat(6), Rat(3), Rat(1)});
  }
  SUBCASE("case II sets mu_q = gamma_pq") {
    UncapInstance in;
    in.n = 3;
    in.sink = 0;
    in.arcs = {{0, 1, fx::rq(1, 2)}, {2, 1, Rat(1)}, {1, 2, fx::rq(1, 3)}};
    in.b = {Rat(0), Rat(2), fx::rq(1, 4)};
    in.bbar = 1;
    Labels mu = {Rat(1), fx::rq(1, 2), fx::rq(1, 2)};
    EnhancedState es = state_of(in, Flow(3, Rat(0)), mu, Rat(1));
    ContractionRecord rec = contract(es, 0, nullptr);
    Labels lifted = reverse_expand(rec, {Rat(1), fx::rq(1, 2)});
    CHECK(lifted == Labels{Rat(1), fx::rq(1, 2), fx::rq(1, 2)});
  }
  SUBCASE("round trip restores the pre-contraction labels") {
    UncapInstance in = case1_inst();
    Labels mu = {fx::rq(1, 2), Rat(2), Rat(1), Rat(1)};
    EnhancedState es = state_of(in, Flow(5, Rat(0)), mu, Rat(1));
    ContractionRecord rec = contract(es, 1, nullptr);
    CHECK(reverse_expand(rec, es.st.mu) == mu);
  }
  SUBCASE("non-conservative lift is rejected") {
    UncapInstance in = case1_inst();
    Labels mu = {fx::rq(1, 2), Rat(2), Rat(1), Rat(1)};
    EnhancedState es = state_of(in, Flow(5, Rat(0)), mu, Rat(1));
    ContractionRecord rec = contract(es, 1, nullptr);
    CHECK_THROWS_AS(reverse_expand(rec, {fx::rq(1, 2), Rat(3), Rat(1)}), solver_error);
  }
}

TEST_CASE("contract requires a tight arc") {
  UncapInstance in = case1_inst();
  Labels mu(4, Rat(1));  // arc 1 has gain^mu = 1/2
  EnhancedState es = state_of(in, Flow(5, Rat(0)), mu, Rat(1));
  CHECK_THROWS_AS(contract(es, 1, nullptr), solver_error);
}

TEST_CASE("filtration") {
  SUBCASE("empty T reduces to a full tight-flow re-solve") {
    UncapInstance in = fx::f5();
    Labels mu(4, Rat(1));
    EnhancedState es = state_of(in, fx::f5_start(), mu, Rat(1));
    std::vector<std::string> viol;
    filtration(es.st, &viol);
    TightFlowResult tf = tight_flow(in, std::vector<char>(4, 1), mu);
    REQUIRE(tf.feasible);
    CHECK(es.st.f == tf.f);
    CHECK(viol.empty());
  }
  SUBCASE("arcs entering T are zeroed, arcs inside T kept") {
    UncapInstance in = fx::f1();
    Labels mu = {Rat(2), Rat(2), Rat(1)};
    EnhancedState es = state_of(in, {Rat(2), Rat(2), Rat(0)}, mu, fx::rq(1, 4));
    es.st.inT0[1] = es.st.inT[1] = 1;
    std::vector<std::string> viol;
    filtration(es.st, &viol);
    CHECK(es.st.f[0] == 0);  // 0->1 enters T
    CHECK(es.st.f[1] == 2);  // 1->2 leaves T: kept
    CHECK(es.st.f[2] == 0);  // non-tight arc in E[V - T]
    CHECK(viol.empty());
  }
}

TEST_CASE("gamma quantity") {
  UncapInstance in = fx::f5();
  EnhancedState es = state_of(in, Flow(5, Rat(0)), Labels(4, Rat(1)), Rat(1));
  GammaQuantity g = gamma_quantity(es, 0);  // b_0 = -1
  CHECK(g.bound == 32 * 5 * 4);
  CHECK(g.absb == 1);
  CHECK(!g.ratio_inf);
  CHECK(g.ratio == 640);
  CHECK(gamma_quantity(es, 1).ratio_inf);  // b_1 = 0
}

TEST_CASE("enhanced solves the fixtures") {
  SUBCASE("f1") {
    UncapInstance in = fx::f1();
    EnhancedSolution s = enhanced_continuous_scaling(in, Flow(3, Rat(0)));
    CHECK(s.value == 1);
    CHECK(s.kappa == 0);
    CHECK(s.stats.iterations == 0);  // delta_bar = 0
    CHECK(s.stats.violations.empty());
    CHECK(check_optimality_uncap(in, s.f, s.mu).empty());
  }
  SUBCASE("f5") {
    UncapInstance in = fx::f5();
    EnhancedSolution s = enhanced_continuous_scaling(in, fx::f5_start());
    CHECK(s.value == fx::rq(5, 4));
    CHECK(s.stats.violations.empty());
    CHECK(check_optimality_uncap(in, s.f, s.mu).empty());
  }
  SUBCASE("single node instance") {
    UncapInstance in;
    in.n = 1;
    in.sink = 0;
    in.b = {Rat(0)};
    in.bbar = 1;
    EnhancedSolution s = enhanced_continuous_scaling(in, {});
    CHECK(s.value == 0);
    CHECK(s.mu == Labels{Rat(1)});
    CHECK(s.f.empty());
  }
}

TEST_CASE("enhanced agrees with the weak algorithm on random instances") {
  std::mt19937 rng(20260826);
  int solved = 0, contracted = 0;
  while (solved < 40) {
    Flow f0;
    UncapInstance in = fx::random_uncap(rng, &f0);
    try {
      UncapSolution weak = continuous_scaling(in, f0);
      EnhancedSolution enh = enhanced_continuous_scaling(in, f0);
      CHECK(weak.value == enh.value);
      CHECK(weak.stats.violations.empty());
      CHECK(enh.stats.violations.empty());
      CHECK(check_optimality_uncap(in, enh.f, enh.mu).empty());
      // abundant arcs must be tight under the final expanded duals: implied by
      // reverse_expand succeeding, but re-check the records explicitly
      Labels mu = enh.mu;
      for (const ContractionRecord& rec : enh.records) {
        CHECK(rec.gain * mu[rec.p] / mu[rec.q] == 1);
        Labels nxt(rec.pre.n - 1);
        for (int v = 0; v < rec.pre.n; v++)
          if (v != rec.removed) nxt[rec.node_map[v]] = mu[v];
        mu = nxt;
      }
      if (enh.kappa > 0) contracted++;
      solved++;
    } catch (const unbounded_error&) {
      // resample
    }
  }
  CHECK(contracted >= 1);
}
