#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gflow/lp2.hpp"
#include "gflow/transform.hpp"

namespace gflow {

struct parse_error : input_error {
  int line;  // 1-based; 0 for whole-file (semantic) errors
  parse_error(int at, const std::string& reason)
      : input_error("line " + std::to_string(at) + ": " + reason), line(at) {}
};

enum class ProblemKind { Uncap, Std, Lp2 };

struct ParsedInstance {
  ProblemKind kind = ProblemKind::Uncap;
  UncapInstance uncap;
  Flow finit;  // starting flow from `init` lines (uncap only), one entry per arc
  StdInstance std_inst;
  LP2Instance lp2;
};

// Line-oriented instance text; `#` starts a comment, rationals are "p" or
// "p/q". Unknown directives, bad rationals and instances failing validate()
// are parse errors. An omitted `bbar` directive is computed deterministically
// (see compute_bbar); serialize always writes it, so parse(serialize(x)) = x.
ParsedInstance parse_instance(const std::string& text);

std::string serialize(const UncapInstance& inst, const Flow& finit = {});
std::string serialize(const StdInstance& inst);
std::string serialize(const LP2Instance& inst);

// Smallest B of the form 2 * prod(num*den of gains) * lcm(dens of values) * k
// with B >= max |value|: a valid encoding bound for demands and starting flow.
Int compute_bbar(const std::vector<Rat>& gains, const std::vector<Rat>& values);

// Solution text: `value`, one `flow` line per arc and one `label` line per
// node, in index order; labels may be `inf` for the capacitated problem.
std::string format_solution(const UncapInstance& inst, const Flow& f, const Labels& mu,
                            const Rat& value);
std::string format_solution(const StdInstance& inst, const Flow& f, const ExtLabels& mu,
                            const Rat& value);
std::string format_unbounded(const UncapInstance& inst, const UnboundedCert& cert);

struct ParsedSolution {
  Rat value;
  Flow f;
  std::vector<ExtRat> mu;
};

// Reads solution text back against the instance shape; parallel arcs are
// matched to `flow` lines in index order.
ParsedSolution parse_solution(const std::string& text, int n,
                              const std::vector<std::pair<int, int>>& arc_ends);

struct GenOptions {
  int nodes = 4;
  int arcs = 8;
  std::uint64_t seed = 0;
  int bits = 4;  // numerators/denominators use at most this many bits
};

// Deterministic random instances. Uncap output always has an arc from every
// node to the sink, nonpositive demands (so the zero flow is feasible) and a
// bounded objective; unbounded draws are discarded and redrawn.
UncapInstance gen_uncap(const GenOptions& opt, Flow* finit);
StdInstance gen_std(const GenOptions& opt);
LP2Instance gen_lp2(const GenOptions& opt);

}  // namespace gflow
