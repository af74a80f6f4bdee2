#include "gflow/io.hpp"

#include <map>
#include <random>
#include <sstream>

namespace gflow {

namespace {

struct Line {
  int no = 0;
  std::vector<std::string> tok;
};

std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  int no = 0;
  while (std::getline(in, raw)) {
    no++;
    if (size_t hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream ls(raw);
    Line l{no, {}};
    std::string t;
    while (ls >> t) l.tok.push_back(t);
    if (!l.tok.empty()) out.push_back(std::move(l));
  }
  return out;
}

[[noreturn]] void fail(const Line& l, const std::string& why) { throw parse_error(l.no, why); }

void want(const Line& l, size_t args) {
  if (l.tok.size() != args + 1)
    fail(l, "'" + l.tok[0] + "' takes " + std::to_string(args) + " arguments");
}

int num(const Line& l, size_t at) {
  try {
    size_t used = 0;
    int v = std::stoi(l.tok[at], &used);
    if (used != l.tok[at].size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    fail(l, "bad integer '" + l.tok[at] + "'");
  }
}

Rat rat(const Line& l, size_t at) {
  try {
    return rat_parse(l.tok[at]);
  } catch (const input_error& e) {
    fail(l, e.what());
  }
}

ExtRat ext(const Line& l, size_t at) {
  if (l.tok[at] == "inf") return ExtRat::infinity();
  return ExtRat(rat(l, at));
}

// Matches directed (tail, head) references against arc indices in file order,
// so parallel arcs stay distinguishable.
struct ArcCursor {
  std::map<std::pair<int, int>, std::vector<int>> ids;
  std::map<std::pair<int, int>, size_t> next;

  void add(int tail, int head, int arc) { ids[{tail, head}].push_back(arc); }
  int take(const Line& l, int tail, int head) {
    std::pair<int, int> key{tail, head};
    auto it = ids.find(key);
    size_t k = next[key];
    if (it == ids.end() || k >= it->second.size())
      fail(l, "no arc " + std::to_string(tail) + " -> " + std::to_string(head) + " left to bind");
    next[key] = k + 1;
    return it->second[k];
  }
};

void check_valid(const std::vector<std::string>& bad) {
  if (!bad.empty()) throw parse_error(0, bad.front());
}

ParsedInstance parse_uncap(const std::vector<Line>& lines) {
  ParsedInstance out;
  out.kind = ProblemKind::Uncap;
  UncapInstance& in = out.uncap;
  ArcCursor cur;
  bool have_bbar = false;
  std::vector<std::tuple<Line, int, int, Rat>> inits;
  for (size_t k = 1; k < lines.size(); k++) {
    const Line& l = lines[k];
    const std::string& d = l.tok[0];
    if (d == "nodes") {
      want(l, 1);
      in.n = num(l, 1);
      in.b.assign(std::max(in.n, 0), Rat(0));
    } else if (d == "sink") {
      want(l, 1);
      in.sink = num(l, 1);
    } else if (d == "node") {
      want(l, 3);
      if (l.tok[2] != "demand") fail(l, "expected 'demand'");
      int i = num(l, 1);
      if (i < 0 || i >= in.n) fail(l, "node id out of range");
      in.b[i] = rat(l, 3);
    } else if (d == "arc") {
      if (l.tok.size() != 5 && !(l.tok.size() == 6 && l.tok[5] == "aux"))
        fail(l, "expected 'arc <tail> <head> gain <rat> [aux]'");
      if (l.tok[3] != "gain") fail(l, "expected 'gain'");
      Arc a;
      a.tail = num(l, 1);
      a.head = num(l, 2);
      a.gain = rat(l, 4);
      if (l.tok.size() == 6) a.kind = ArcKind::Auxiliary;
      if (sgn(a.gain) <= 0) fail(l, "gains must be > 0");
      cur.add(a.tail, a.head, in.m());
      in.arcs.push_back(a);
    } else if (d == "init") {
      want(l, 3);
      inits.emplace_back(l, num(l, 1), num(l, 2), rat(l, 3));
    } else if (d == "bbar") {
      want(l, 1);
      in.bbar = Int(l.tok[1]);
      have_bbar = true;
    } else {
      fail(l, "unknown directive '" + d + "'");
    }
  }
  out.finit.assign(in.m(), Rat(0));
  for (const auto& [l, tail, head, v] : inits) {
    if (sgn(v) < 0) fail(l, "starting flow must be >= 0");
    out.finit[cur.take(l, tail, head)] = v;
  }
  if (!have_bbar) {
    std::vector<Rat> gains, vals;
    for (const Arc& a : in.arcs)
      if (a.kind == ArcKind::Regular) gains.push_back(a.gain);
    for (const Rat& v : in.b) vals.push_back(v);
    for (const Rat& v : out.finit) vals.push_back(v);
    in.bbar = compute_bbar(gains, vals);
  }
  check_valid(in.validate());
  return out;
}

ParsedInstance parse_std(const std::vector<Line>& lines) {
  ParsedInstance out;
  out.kind = ProblemKind::Std;
  StdInstance& in = out.std_inst;
  for (size_t k = 1; k < lines.size(); k++) {
    const Line& l = lines[k];
    const std::string& d = l.tok[0];
    if (d == "nodes") {
      want(l, 1);
      in.n = num(l, 1);
      in.b.assign(std::max(in.n, 0), Rat(0));
    } else if (d == "sink") {
      want(l, 1);
      in.sink = num(l, 1);
    } else if (d == "node") {
      want(l, 3);
      if (l.tok[2] != "demand") fail(l, "expected 'demand'");
      int i = num(l, 1);
      if (i < 0 || i >= in.n) fail(l, "node id out of range");
      in.b[i] = rat(l, 3);
    } else if (d == "arc") {
      want(l, 6);
      if (l.tok[3] != "gain" || l.tok[5] != "cap") fail(l, "expected 'gain ... cap ...'");
      StdArc a;
      a.tail = num(l, 1);
      a.head = num(l, 2);
      a.gain = rat(l, 4);
      if (sgn(a.gain) <= 0) fail(l, "gains must be > 0");
      a.cap = ext(l, 6);
      in.arcs.push_back(a);
    } else {
      fail(l, "unknown directive '" + d + "'");
    }
  }
  check_valid(in.validate());
  return out;
}

ParsedInstance parse_lp2(const std::vector<Line>& lines) {
  ParsedInstance out;
  out.kind = ProblemKind::Lp2;
  LP2Instance& in = out.lp2;
  for (size_t k = 1; k < lines.size(); k++) {
    const Line& l = lines[k];
    const std::string& d = l.tok[0];
    if (d == "rows") {
      want(l, 3);
      if (l.tok[2] != "cols") fail(l, "expected 'rows <n> cols <m>'");
      in.rows = num(l, 1);
      int m = num(l, 3);
      if (m < 0) fail(l, "negative column count");
      in.cols.assign(m, {});
      in.ub.assign(m, ExtRat::infinity());
      in.rhs.assign(std::max(in.rows, 0), Rat(0));
    } else if (d == "entry") {
      want(l, 3);
      int col = num(l, 1);
      if (col < 0 || col >= in.m()) fail(l, "column out of range");
      if (in.cols[col].size() >= 2) fail(l, "column " + l.tok[1] + " already has two entries");
      in.cols[col].push_back({num(l, 2), rat(l, 3)});
    } else if (d == "rhs") {
      want(l, 2);
      int row = num(l, 1);
      if (row < 0 || row >= in.rows) fail(l, "row out of range");
      in.rhs[row] = rat(l, 2);
    } else if (d == "ub") {
      want(l, 2);
      int col = num(l, 1);
      if (col < 0 || col >= in.m()) fail(l, "column out of range");
      in.ub[col] = ext(l, 2);
    } else {
      fail(l, "unknown directive '" + d + "'");
    }
  }
  for (const auto& col : in.cols)
    if (col.empty()) throw parse_error(0, "every column needs at least one entry");
  check_valid(in.validate());
  return out;
}

std::string ext_str(const ExtRat& v) { return v.inf ? "inf" : rat_str(v.v); }

}  // namespace

ParsedInstance parse_instance(const std::string& text) {
  std::vector<Line> lines = tokenize(text);
  if (lines.empty()) throw parse_error(0, "empty instance");
  const Line& head = lines.front();
  if (head.tok[0] != "problem") fail(head, "file must start with 'problem uncap|std|lp2'");
  want(head, 1);
  if (head.tok[1] == "uncap") return parse_uncap(lines);
  if (head.tok[1] == "std") return parse_std(lines);
  if (head.tok[1] == "lp2") return parse_lp2(lines);
  fail(head, "unknown problem kind '" + head.tok[1] + "'");
}

std::string serialize(const UncapInstance& inst, const Flow& finit) {
  std::ostringstream out;
  out << "problem uncap\n";
  out << "nodes " << inst.n << "\n";
  out << "sink " << inst.sink << "\n";
  out << "bbar " << inst.bbar.get_str() << "\n";
  for (int i = 0; i < inst.n; i++)
    if (inst.b[i] != 0) out << "node " << i << " demand " << rat_str(inst.b[i]) << "\n";
  for (const Arc& a : inst.arcs)
    out << "arc " << a.tail << " " << a.head << " gain " << rat_str(a.gain)
        << (a.kind == ArcKind::Auxiliary ? " aux" : "") << "\n";
  // init lines bind to parallel arcs in order, so a zero entry must still be
  // written when a later arc of the same pair carries flow
  std::vector<char> emit(finit.size(), 0);
  std::map<std::pair<int, int>, size_t> last;
  for (size_t e = 0; e < finit.size(); e++)
    if (finit[e] != 0) last[{inst.arcs[e].tail, inst.arcs[e].head}] = e;
  for (size_t e = 0; e < finit.size(); e++) {
    auto it = last.find({inst.arcs[e].tail, inst.arcs[e].head});
    if (it != last.end() && e <= it->second) emit[e] = 1;
  }
  for (size_t e = 0; e < finit.size(); e++)
    if (emit[e])
      out << "init " << inst.arcs[e].tail << " " << inst.arcs[e].head << " " << rat_str(finit[e])
          << "\n";
  return out.str();
}

std::string serialize(const StdInstance& inst) {
  std::ostringstream out;
  out << "problem std\n";
  out << "nodes " << inst.n << "\n";
  out << "sink " << inst.sink << "\n";
  for (int i = 0; i < inst.n; i++)
    if (inst.b[i] != 0) out << "node " << i << " demand " << rat_str(inst.b[i]) << "\n";
  for (const StdArc& a : inst.arcs)
    out << "arc " << a.tail << " " << a.head << " gain " << rat_str(a.gain) << " cap "
        << ext_str(a.cap) << "\n";
  return out.str();
}

std::string serialize(const LP2Instance& inst) {
  std::ostringstream out;
  out << "problem lp2\n";
  out << "rows " << inst.rows << " cols " << inst.m() << "\n";
  for (int j = 0; j < inst.m(); j++)
    for (const LP2Entry& e : inst.cols[j])
      out << "entry " << j << " " << e.row << " " << rat_str(e.coef) << "\n";
  for (int i = 0; i < inst.rows; i++)
    if (inst.rhs[i] != 0) out << "rhs " << i << " " << rat_str(inst.rhs[i]) << "\n";
  for (int j = 0; j < inst.m(); j++)
    if (inst.ub[j].finite()) out << "ub " << j << " " << rat_str(inst.ub[j].v) << "\n";
  return out.str();
}

Int compute_bbar(const std::vector<Rat>& gains, const std::vector<Rat>& values) {
  Int prod = 1;
  for (const Rat& g : gains) prod *= g.get_num() * g.get_den();
  Int l = 1;
  Rat top(0);
  for (const Rat& v : values) {
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.get_den_mpz_t());
    if (abs(v) > top) top = abs(v);
  }
  Int base = 2 * prod * l;
  Int k = rat_floor(top / Rat(base)) + 1;
  return base * k;
}

namespace {

std::string solution_lines(int n, const std::vector<std::pair<int, int>>& ends, const Flow& f,
                           const std::vector<ExtRat>& mu, const Rat& value) {
  std::ostringstream out;
  out << "value " << rat_str(value) << "\n";
  for (size_t e = 0; e < ends.size(); e++)
    out << "flow " << ends[e].first << " " << ends[e].second << " " << rat_str(f[e]) << "\n";
  for (int i = 0; i < n; i++) out << "label " << i << " " << ext_str(mu[i]) << "\n";
  return out.str();
}

}  // namespace

std::string format_solution(const UncapInstance& inst, const Flow& f, const Labels& mu,
                            const Rat& value) {
  std::vector<std::pair<int, int>> ends;
  for (const Arc& a : inst.arcs) ends.emplace_back(a.tail, a.head);
  std::vector<ExtRat> emu;
  for (const Rat& m : mu) emu.emplace_back(m);
  return solution_lines(inst.n, ends, f, emu, value);
}

std::string format_solution(const StdInstance& inst, const Flow& f, const ExtLabels& mu,
                            const Rat& value) {
  std::vector<std::pair<int, int>> ends;
  for (const StdArc& a : inst.arcs) ends.emplace_back(a.tail, a.head);
  return solution_lines(inst.n, ends, f, mu, value);
}

std::string format_unbounded(const UncapInstance& inst, const UnboundedCert& cert) {
  std::ostringstream out;
  out << "unbounded\n";
  for (const ResArc& a : cert.cycle)
    out << "cycle " << res_tail(inst, a) << " " << res_head(inst, a) << " "
        << rat_str(res_gain(inst, a)) << "\n";
  for (const ResArc& a : cert.path)
    out << "path " << res_tail(inst, a) << " " << res_head(inst, a) << " "
        << rat_str(res_gain(inst, a)) << "\n";
  return out.str();
}

ParsedSolution parse_solution(const std::string& text, int n,
                              const std::vector<std::pair<int, int>>& arc_ends) {
  ParsedSolution out;
  out.f.assign(arc_ends.size(), Rat(0));
  out.mu.assign(n, ExtRat(Rat(1)));
  ArcCursor cur;
  for (size_t e = 0; e < arc_ends.size(); e++) cur.add(arc_ends[e].first, arc_ends[e].second, int(e));
  for (const Line& l : tokenize(text)) {
    const std::string& d = l.tok[0];
    if (d == "value") {
      want(l, 1);
      out.value = rat(l, 1);
    } else if (d == "flow") {
      want(l, 3);
      out.f[cur.take(l, num(l, 1), num(l, 2))] = rat(l, 3);
    } else if (d == "label") {
      want(l, 2);
      int i = num(l, 1);
      if (i < 0 || i >= n) fail(l, "node id out of range");
      out.mu[i] = ext(l, 2);
    } else {
      fail(l, "unknown directive '" + d + "'");
    }
  }
  return out;
}

namespace {

Rat rand_rat(std::mt19937_64& rng, int bits) {
  std::uint64_t top = (std::uint64_t(1) << bits) - 1;
  Rat r(long(rng() % top) + 1, long(rng() % top) + 1);
  r.canonicalize();
  return r;
}

}  // namespace

UncapInstance gen_uncap(const GenOptions& opt, Flow* finit) {
  if (opt.nodes < 2 || opt.bits < 1 || opt.bits > 30) throw input_error("gen: bad parameters");
  std::mt19937_64 rng(opt.seed);
  for (int attempt = 0; attempt < 1000; attempt++) {
    UncapInstance in;
    in.n = opt.nodes;
    in.sink = in.n - 1;
    for (int i = 0; i < in.n; i++)
      if (i != in.sink) in.arcs.push_back({i, in.sink, rand_rat(rng, opt.bits)});
    while (in.m() < opt.arcs) {
      // No arcs out of the sink, and gain <= 1 off the sink: with an arc from
      // every node to the sink, any gain > 1 cycle would make the objective
      // unbounded, so bounded instances cannot contain one at all.
      int u = int(rng() % (in.n - 1)), v = int(rng() % in.n);
      if (u == v) continue;
      Rat g = rand_rat(rng, opt.bits);
      if (v != in.sink && g > 1) g = 1 / g;
      in.arcs.push_back({u, v, g});
    }
    in.b.assign(in.n, Rat(0));
    for (int i = 0; i < in.n; i++)
      if (i != in.sink && rng() % 2) in.b[i] = -rand_rat(rng, opt.bits);
    std::vector<Rat> gains;
    for (const Arc& a : in.arcs) gains.push_back(a.gain);
    in.bbar = compute_bbar(gains, in.b);
    if (!in.validate().empty()) throw solver_error("gen_uncap: invalid draw");
    if (check_boundedness(in)) continue;  // gainy cycle reaches the sink; redraw
    if (finit) {
      // Route a random fraction of each supply to the sink along a random
      // walk: excesses stay nonnegative, so the starting flow is valid, and
      // its residual arcs make the instance nontrivial for the solvers.
      finit->assign(in.m(), Rat(0));
      std::vector<std::vector<int>> outs(in.n);
      std::vector<int> direct(in.n, -1);
      for (int a = 0; a < in.m(); a++) {
        outs[in.arcs[a].tail].push_back(a);
        if (in.arcs[a].head == in.sink && direct[in.arcs[a].tail] < 0)
          direct[in.arcs[a].tail] = a;
      }
      for (int i = 0; i < in.n; i++) {
        if (i == in.sink || sgn(in.b[i]) == 0) continue;
        Rat amt = -in.b[i] * Rat(long(rng() % 5), 4);
        amt.canonicalize();
        if (sgn(amt) == 0) continue;
        int cur = i, steps = 0;
        while (cur != in.sink) {
          int a = (++steps > 2 * in.n) ? direct[cur] : outs[cur][rng() % outs[cur].size()];
          (*finit)[a] += amt;
          amt *= in.arcs[a].gain;
          cur = in.arcs[a].head;
        }
      }
      std::vector<Rat> vals = in.b;
      for (const Rat& v : *finit) vals.push_back(v);
      std::vector<Rat> gains;
      for (const Arc& a : in.arcs) gains.push_back(a.gain);
      in.bbar = compute_bbar(gains, vals);
    }
    return in;
  }
  throw solver_error("gen_uncap: no bounded draw found");
}

StdInstance gen_std(const GenOptions& opt) {
  if (opt.nodes < 2 || opt.bits < 1 || opt.bits > 30) throw input_error("gen: bad parameters");
  std::mt19937_64 rng(opt.seed);
  for (int attempt = 0; attempt < 1000; attempt++) {
    StdInstance in;
    in.n = opt.nodes;
    in.sink = in.n - 1;
    while (in.m() < opt.arcs) {
      int u = int(rng() % in.n), v = int(rng() % in.n);
      if (u == v) continue;
      StdArc a;
      a.tail = u;
      a.head = v;
      a.gain = rand_rat(rng, opt.bits);
      if (rng() % 2) a.cap = ExtRat(rand_rat(rng, opt.bits));
      in.arcs.push_back(a);
    }
    in.b.assign(in.n, Rat(0));
    for (int i = 0; i < in.n; i++)
      if (i != in.sink && rng() % 2) in.b[i] = -rand_rat(rng, opt.bits);
    if (!in.validate().empty()) throw solver_error("gen_std: invalid draw");
    try {
      uncapacitate(in);
    } catch (const unbounded_error&) {
      continue;  // redraw rather than ship an unbounded instance
    }
    return in;
  }
  throw solver_error("gen_std: no bounded draw found");
}

LP2Instance gen_lp2(const GenOptions& opt) {
  if (opt.nodes < 1 || opt.arcs < 0 || opt.bits < 1 || opt.bits > 30)
    throw input_error("gen: bad parameters");
  std::mt19937_64 rng(opt.seed);
  LP2Instance in;
  in.rows = opt.nodes;
  for (int j = 0; j < opt.arcs; j++) {
    std::vector<LP2Entry> col;
    int r1 = int(rng() % in.rows);
    Rat c1 = rand_rat(rng, opt.bits);
    if (rng() % 2) c1 = -c1;
    col.push_back({r1, c1});
    if (in.rows > 1 && rng() % 2) {
      int r2 = int(rng() % in.rows);
      if (r2 == r1) r2 = (r1 + 1) % in.rows;
      Rat c2 = rand_rat(rng, opt.bits);
      if (rng() % 2) c2 = -c2;
      col.push_back({r2, c2});
    }
    in.cols.push_back(std::move(col));
    in.ub.push_back((rng() % 2) ? ExtRat::infinity() : ExtRat(rand_rat(rng, opt.bits)));
  }
  for (int i = 0; i < in.rows; i++) {
    in.rhs.push_back(rand_rat(rng, opt.bits));
    if (rng() % 2) in.rhs.back() = -in.rhs.back();
    if (rng() % 4 == 0) in.rhs.back() = 0;
  }
  if (!in.validate().empty()) throw solver_error("gen_lp2: invalid draw");
  return in;
}

}  // namespace gflow
