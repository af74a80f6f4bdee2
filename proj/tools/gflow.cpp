#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gflow/io.hpp"

using namespace gflow;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write '" + path + "'");
  out << text;
}

TraceFn jsonl_trace(std::ofstream& out) {
  return [&out](const TraceRecord& rec) {
    nlohmann::json j;
    j["iter"] = rec.iter;
    j["kind"] = rec.kind;
    j["delta"] = rat_str(rec.delta);
    j["psi"] = rec.psi.get_str();
    j["kappa"] = rec.kappa;
    j["D_size"] = rec.d_size;
    j["violations"] = rec.violations;
    out << j.dump() << "\n";
  };
}

int run_solve(const std::string& file, const std::string& algorithm, const std::string& trace_path,
              bool check) {
  ParsedInstance pin = parse_instance(slurp(file));
  if (pin.kind == ProblemKind::Lp2) throw input_error("feasibility systems go through 'gflow lp2'");

  std::ofstream trace_out;
  SolveOptions opt;
  if (!trace_path.empty()) {
    trace_out.open(trace_path);
    if (!trace_out) throw input_error("cannot write '" + trace_path + "'");
    opt.trace = jsonl_trace(trace_out);
  }
  bool weak = algorithm == "weak";

  if (pin.kind == ProblemKind::Uncap) {
    const UncapInstance& inst = pin.uncap;
    if (std::optional<UnboundedCert> cert = check_boundedness(inst)) {
      std::cout << format_unbounded(inst, *cert);
      return 2;
    }
    Flow f;
    Labels mu;
    Rat value;
    if (weak) {
      UncapSolution s = continuous_scaling(inst, pin.finit, opt);
      f = s.f, mu = s.mu, value = s.value;
    } else {
      EnhancedSolution s = enhanced_continuous_scaling(inst, pin.finit, opt);
      f = s.f, mu = s.mu, value = s.value;
    }
    if (check) {
      std::vector<std::string> bad = check_optimality_uncap(inst, f, mu);
      if (!bad.empty()) throw solver_error("post-check failed: " + bad.front());
    }
    std::cout << format_solution(inst, f, mu, value);
    return 0;
  }

  const StdInstance& inst = pin.std_inst;
  StdSolution s;
  if (weak) {
    UncapFromStd u = uncapacitate(inst);
    UncapSolution us = continuous_scaling(u.inst, u.fbar, opt);
    s = recover_standard_solution(inst, u.map, u.inst, us.f, us.mu);
  } else {
    s = solve_standard(inst, opt);
  }
  if (check) {
    std::vector<std::string> bad = check_optimality_std(inst, s.f, s.mu);
    if (!bad.empty()) throw solver_error("post-check failed: " + bad.front());
  }
  std::cout << format_solution(inst, s.f, s.mu, s.value);
  return 0;
}

int run_lp2(const std::string& file, bool certificate) {
  ParsedInstance pin = parse_instance(slurp(file));
  if (pin.kind != ProblemKind::Lp2) throw input_error("'gflow lp2' expects a 'problem lp2' file");
  LP2Result res = solve_lp2(pin.lp2);
  if (res.feasible) {
    std::cout << "feasible\n";
    for (size_t j = 0; j < res.x.size(); j++)
      std::cout << "x " << j << " " << rat_str(res.x[j]) << "\n";
    return 0;
  }
  std::cout << "infeasible\n";
  if (certificate)
    for (size_t i = 0; i < res.cert.y.size(); i++)
      std::cout << "y " << i << " " << rat_str(res.cert.y[i]) << "\n";
  return 1;
}

int run_transform(const std::string& file, const std::string& out) {
  ParsedInstance pin = parse_instance(slurp(file));
  if (pin.kind != ProblemKind::Std)
    throw input_error("'gflow transform' expects a 'problem std' file");
  UncapFromStd u = uncapacitate(pin.std_inst);
  spill(out, serialize(u.inst, u.fbar));
  return 0;
}

int run_gen(const std::string& kind, const GenOptions& opt, const std::string& out) {
  std::string text;
  if (kind == "uncap") {
    Flow finit;
    UncapInstance in = gen_uncap(opt, &finit);
    text = serialize(in, finit);
  } else if (kind == "std") {
    text = serialize(gen_std(opt));
  } else if (kind == "lp2") {
    text = serialize(gen_lp2(opt));
  } else {
    throw input_error("unknown kind '" + kind + "'");
  }
  spill(out, text);
  return 0;
}

int run_check(const std::string& inst_file, const std::string& sol_file) {
  ParsedInstance pin = parse_instance(slurp(inst_file));
  if (pin.kind == ProblemKind::Lp2)
    throw input_error("'gflow check' verifies flow solutions, not lp2 answers");
  std::vector<std::string> bad;
  if (pin.kind == ProblemKind::Uncap) {
    const UncapInstance& inst = pin.uncap;
    std::vector<std::pair<int, int>> ends;
    for (const Arc& a : inst.arcs) ends.emplace_back(a.tail, a.head);
    ParsedSolution sol = parse_solution(slurp(sol_file), inst.n, ends);
    Labels mu(inst.n);
    for (int i = 0; i < inst.n; i++) {
      if (sol.mu[i].inf) bad.push_back("label " + std::to_string(i) + " is infinite");
      else mu[i] = sol.mu[i].v;
    }
    if (bad.empty()) {
      bad = check_optimality_uncap(inst, sol.f, mu);
      if (excess(inst, sol.f, inst.sink) != sol.value) bad.push_back("value line mismatch");
    }
  } else {
    const StdInstance& inst = pin.std_inst;
    std::vector<std::pair<int, int>> ends;
    for (const StdArc& a : inst.arcs) ends.emplace_back(a.tail, a.head);
    ParsedSolution sol = parse_solution(slurp(sol_file), inst.n, ends);
    bad = check_optimality_std(inst, sol.f, sol.mu);
    if (std_excesses(inst, sol.f)[inst.sink] != sol.value) bad.push_back("value line mismatch");
  }
  for (const std::string& s : bad) std::cerr << s << "\n";
  return bad.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact generalized flow maximization"};
  app.require_subcommand(1);

  std::string file, algorithm = "strong", trace_path, out, kind, sol_file;
  bool check = false, certificate = false;
  GenOptions gopt;

  CLI::App* solve = app.add_subcommand("solve", "solve an uncap or std instance");
  solve->add_option("file", file)->required();
  solve->add_option("--algorithm", algorithm)->check(CLI::IsMember({"weak", "strong"}));
  solve->add_option("--trace", trace_path);
  solve->add_flag("--check", check);

  CLI::App* lp2 = app.add_subcommand("lp2", "decide a two-nonzero feasibility system");
  lp2->add_option("file", file)->required();
  lp2->add_flag("--certificate", certificate);

  CLI::App* transform = app.add_subcommand("transform", "remove capacities from a std instance");
  transform->add_option("file", file)->required();
  transform->add_option("-o", out)->required();

  CLI::App* gen = app.add_subcommand("gen", "generate a random instance");
  gen->add_option("--kind", kind)->required()->check(CLI::IsMember({"uncap", "std", "lp2"}));
  gen->add_option("--nodes", gopt.nodes)->required();
  gen->add_option("--arcs", gopt.arcs)->required();
  gen->add_option("--seed", gopt.seed)->required();
  gen->add_option("--bits", gopt.bits);
  gen->add_option("-o", out)->required();

  CLI::App* chk = app.add_subcommand("check", "verify a solution file");
  chk->add_option("instance", file)->required();
  chk->add_option("solution", sol_file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    if (solve->parsed()) return run_solve(file, algorithm, trace_path, check);
    if (lp2->parsed()) return run_lp2(file, certificate);
    if (transform->parsed()) return run_transform(file, out);
    if (gen->parsed()) return run_gen(kind, gopt, out);
    if (chk->parsed()) return run_check(file, sol_file);
  } catch (const unbounded_error&) {
    std::cout << "unbounded\n";
    return 2;
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
  return 3;
}
