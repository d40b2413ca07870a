#include "cli.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "atdecor/corpus.hpp"
#include "atdecor/errors.hpp"
#include "atdecor/json_io.hpp"
#include "atdecor/relax.hpp"
#include "atdecor/solver.hpp"
#include "service.hpp"

namespace atdecor::cli {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.3.0";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot read \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int exit_code(SolveStatus status) {
  switch (status) {
    case SolveStatus::kFeasible: return kExitOk;
    case SolveStatus::kInfeasibleProved: return kExitInfeasibleProved;
    case SolveStatus::kInfeasiblePresumed: return kExitInfeasiblePresumed;
    case SolveStatus::kUnknown: return kExitUnknown;
  }
  return kExitError;
}

// Flags shared by the commands that build a decoration problem.
struct ProblemFlags {
  std::string tree;
  std::string domain;
  std::string corpus;
  std::vector<std::string> constraints;
  unsigned long long seed = 1;
  int restarts = 64;
  int iterations = 500;
  int jobs = 1;
  std::string format = "json";

  void add_to(CLI::App& cmd, bool with_solver) {
    cmd.add_option("--tree", tree, "attack tree file (bracket DSL or JSON)");
    cmd.add_option("--domain", domain, "attribute domain")
        ->check(CLI::IsMember(builtin_domain_names()));
    cmd.add_option("--corpus", corpus, "bundled example instead of --tree/--domain")
        ->check(CLI::IsMember(corpus_names()));
    cmd.add_option("--constraints", constraints, "predicate files, in processing order; with no hard predicate among them the tree structure is used");
    if (with_solver) {
      cmd.add_option("--seed", seed, "seed for restart points");
      cmd.add_option("--restarts", restarts, "restart budget per solve")->check(CLI::NonNegativeNumber);
      cmd.add_option("--iterations", iterations, "iterations per restart")
          ->check(CLI::NonNegativeNumber);
      cmd.add_option("--jobs", jobs, "parallel restarts")->check(CLI::Range(1, 64));
    }
  }

  SolveOptions options() const {
    SolveOptions o;
    o.seed = seed;
    o.restarts = restarts;
    o.iterations = iterations;
    o.jobs = jobs;
    return o;
  }
};

struct Problem {
  AttackTree tree = AttackTree::leaf("root");
  AttributeDomain domain;
  ConstraintSet constraints;
};

// Predicate files without explicit ids get "<file stem>.<n>".
Problem load_problem(const ProblemFlags& f, bool need_domain) {
  Problem p;
  if (!f.corpus.empty()) {
    if (!f.tree.empty()) throw PreconditionError("--corpus and --tree are exclusive");
    const CorpusEntry entry = load_corpus(f.corpus);
    p.tree = entry.tree;
    p.domain = entry.domain;
    p.constraints = entry.constraints();
  } else {
    if (f.tree.empty()) throw PreconditionError("--tree or --corpus is required");
    p.tree = parse_tree(read_file(f.tree));
  }
  if (!f.domain.empty()) p.domain = builtin_domain(f.domain);
  if (need_domain && p.domain.name.empty()) throw PreconditionError("--domain is required");
  for (const std::string& path : f.constraints) {
    p.constraints.append(
        parse_predicate_file(read_file(path), std::filesystem::path(path).stem().string()));
  }
  // Without explicit hard predicates the tree structure supplies them.
  if (p.constraints.hard.empty() && !p.domain.name.empty()) {
    p.constraints.hard = bottom_up_constraints(p.tree, p.domain);
  }
  return p;
}

std::string fixed(double v, int digits = 6) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

void print_valuation(std::ostream& out, const Valuation& v) {
  std::size_t width = 5;
  for (const auto& [label, value] : v) width = std::max(width, label.size());
  for (const auto& [label, value] : v) {
    out << "  " << std::left << std::setw(static_cast<int>(width)) << label << "  " << fixed(value)
        << '\n';
  }
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------

int cmd_parse(const ProblemFlags& f, std::ostream& out) {
  const Problem p = load_problem(f, false);
  const UniquenessReport unique = check_unique_labels(p.tree);
  json preds = json::array();
  for (const auto* group : {&p.constraints.hard, &p.constraints.soft}) {
    for (const Predicate& pred : *group) preds.push_back(predicate_to_json(pred));
  }
  if (f.format == "table") {
    out << serialize_tree(p.tree) << '\n';
    out << labels_of(p.tree).size() << " labels, " << leaf_labels_of(p.tree).size() << " leaves";
    if (!unique.unique) out << ", duplicates present";
    out << '\n';
    for (const auto* group : {&p.constraints.hard, &p.constraints.soft}) {
      for (const Predicate& pred : *group) out << to_line(pred) << '\n';
    }
    return kExitOk;
  }
  emit(out, {{"tree", tree_to_json(p.tree)},
             {"dsl", serialize_tree(p.tree, -1)},
             {"labels", labels_of(p.tree).size()},
             {"leaves", leaf_labels_of(p.tree).size()},
             {"unique", unique.unique},
             {"duplicates", unique.duplicates},
             {"predicates", std::move(preds)}});
  return kExitOk;
}

int cmd_eval(const ProblemFlags& f, const std::string& leaves_arg, std::ostream& out) {
  const Problem p = load_problem(f, true);
  const std::string source = !leaves_arg.empty() && leaves_arg[0] == '@'
                                 ? read_file(leaves_arg.substr(1))
                                 : leaves_arg;
  const Valuation v = evaluate_bottom_up(p.tree, p.domain, parse_valuation_json(source));
  if (f.format == "csv") {
    out << valuation_to_csv(v);
  } else if (f.format == "table") {
    out << "root " << root_label(p.tree) << " = " << fixed(v.at(root_label(p.tree))) << '\n';
    print_valuation(out, v);
  } else {
    emit(out, {{"root", v.at(root_label(p.tree))}, {"valuation", valuation_to_json(v)}});
  }
  return kExitOk;
}

int cmd_solve(const ProblemFlags& f, std::ostream& out) {
  const Problem p = load_problem(f, true);
  const SolveOutcome r = solve(p.tree, p.domain, p.constraints, f.options());
  if (f.format == "table") {
    out << to_string(r.status) << "  residual " << fixed(r.residual) << "  restarts "
        << r.restarts_used << '\n';
    if (r.valuation) print_valuation(out, *r.valuation);
    if (r.certificate) {
      out << "certificate:";
      for (const std::string& id : r.certificate->constraint_ids) out << ' ' << id;
      out << "  (emptied by " << r.certificate->emptied_by << ")\n";
    }
  } else {
    emit(out, to_json(r));
  }
  return exit_code(r.status);
}

int cmd_classify(const ProblemFlags& f, std::ostream& out) {
  const Problem p = load_problem(f, true);
  const Classification c = classify(p.tree, p.domain, p.constraints, f.options());
  if (f.format == "table") {
    out << to_string(c.verdict) << (c.caveat ? " (caveat)" : "") << '\n';
    if (!c.note.empty()) out << c.note << '\n';
    if (c.witness_pair) {
      out << "witness 1:\n";
      print_valuation(out, c.witness_pair->first);
      out << "witness 2:\n";
      print_valuation(out, c.witness_pair->second);
    }
  } else {
    emit(out, to_json(c));
  }
  return exit_code(c.status);
}

int cmd_core(const ProblemFlags& f, std::ostream& out) {
  const Problem p = load_problem(f, true);
  const UnsatCore c = unsat_core(p.tree, p.domain, p.constraints, f.options());
  if (f.format == "table") {
    out << (c.minimal ? "minimal" : "not proved minimal") << " core, " << to_string(c.status) << '\n';
    for (const std::string& id : c.core) {
      const Predicate* pred = p.constraints.find(id);
      out << "  " << (pred ? to_line(*pred) : id) << '\n';
    }
  } else {
    emit(out, to_json(c));
  }
  return exit_code(c.status);
}

int cmd_relax(const ProblemFlags& f, const std::string& method, const std::vector<std::string>& order,
              std::ostream& out) {
  const Problem p = load_problem(f, true);
  if (method == "maxweak") {
    const MaxWeakResult r = relax_maxweak(p.tree, p.domain, p.constraints, f.options());
    const WeakeningReport check = verify_weakening(p.constraints, r);
    if (f.format == "table") {
      out << "distance " << fixed(r.distance) << (r.converged ? "" : "  (not converged)")
          << (check.ok ? "" : "  (verification failed)") << '\n';
      for (const Shift& s : r.per_predicate) {
        if (s.shift == 0.0) continue;
        out << "  " << std::left << std::setw(40) << to_string(s.original) << "  ->  "
            << to_string(s.weakened) << "  (" << fixed(s.shift, 4) << ")\n";
      }
    } else {
      json j = to_json(r);
      j["verification"] = to_json(check);
      emit(out, j);
    }
    return kExitOk;
  }
  const InclusionResult r =
      method == "inclusion"
          ? relax_inclusion_greedy(p.tree, p.domain, p.constraints, order, f.options())
          : relax_inclusion_exact(p.tree, p.domain, p.constraints, f.options());
  if (f.format == "table") {
    out << "kept " << r.kept.size() << ", dropped " << r.dropped.size()
        << (r.exact ? " (maximum)" : "") << '\n';
    for (const std::string& id : r.dropped) out << "  dropped " << id << '\n';
  } else {
    emit(out, to_json(r));
  }
  return kExitOk;
}

service::Server* g_server = nullptr;

extern "C" void stop_server(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const std::string& host, int port, const std::string& snapshots, std::ostream& out,
              std::ostream& err) {
  std::optional<std::filesystem::path> dir;
  if (!snapshots.empty()) dir = snapshots;
  service::SessionStore store(dir);
  service::Server server(store);
  const int bound = server.bind(host, port);
  if (bound < 0) {
    err << "error: cannot bind " << host << ':' << port << '\n';
    return kExitError;
  }
  out << "listening on http://" << host << ':' << bound << std::endl;
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  const bool ok = server.listen();
  g_server = nullptr;
  store.shutdown();
  return ok ? kExitOk : kExitError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attack-tree decoration: solve, classify, explain and relax attribute constraints",
               "atdecor"};
  app.set_help_all_flag("--help-all", "expand every subcommand's help");
  bool version = false;
  app.add_flag("--version", version, "print the version and the corpus checksum");

  ProblemFlags f;
  std::string leaves;
  std::string method = "inclusion";
  std::vector<std::string> order;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string snapshots;
  const std::vector<std::string> formats = {"json", "table"};

  CLI::App* parse = app.add_subcommand("parse", "parse a tree and predicate files");
  f.add_to(*parse, false);
  parse->add_option("--format", f.format)->check(CLI::IsMember(formats));

  CLI::App* eval = app.add_subcommand("eval", "bottom-up evaluation from leaf values");
  f.add_to(*eval, false);
  eval->add_option("--leaves", leaves, "JSON object of leaf values, or @file")->required();
  eval->add_option("--format", f.format)->check(CLI::IsMember({"json", "table", "csv"}));

  std::vector<CLI::App*> solver_cmds;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"solve", "find a valuation satisfying every predicate"},
           {"classify", "determined, undetermined or inconsistent"},
           {"core", "minimal unsatisfiable subset of the soft predicates"},
           {"relax", "drop or weaken soft predicates until satisfiable"}}) {
    CLI::App* cmd = app.add_subcommand(name, help);
    f.add_to(*cmd, true);
    cmd->add_option("--format", f.format)->check(CLI::IsMember(formats));
    solver_cmds.push_back(cmd);
  }
  CLI::App* relax = solver_cmds.back();
  relax->add_option("--method", method)
      ->check(CLI::IsMember({"inclusion", "inclusion-exact", "maxweak"}));
  relax->add_option("--order", order, "greedy processing order: comma-separated soft ids")
      ->delimiter(',');

  CLI::App* serve = app.add_subcommand("serve", "HTTP/JSON session service");
  serve->add_option("--host", host);
  serve->add_option("--port", port, "0 picks a free port")->check(CLI::Range(0, 65535));
  serve->add_option("--snapshots", snapshots, "directory for session snapshots");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  if (version) {
    out << "atdecor " << kVersion << " corpus " << corpus_checksum() << '\n';
    return kExitOk;
  }
  if (app.get_subcommands().empty()) {
    err << app.help();
    return kExitUsage;
  }
  if (!order.empty() && method != "inclusion") {
    err << "error: --order only applies to --method inclusion\n";
    return kExitUsage;
  }

  try {
    if (*parse) return cmd_parse(f, out);
    if (*eval) return cmd_eval(f, leaves, out);
    if (*solver_cmds[0]) return cmd_solve(f, out);
    if (*solver_cmds[1]) return cmd_classify(f, out);
    if (*solver_cmds[2]) return cmd_core(f, out);
    if (*relax) return cmd_relax(f, method, order, out);
    return cmd_serve(host, port, snapshots, out, err);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const UnboundLabelError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
  } catch (const nlohmann::json::exception& e) {
    err << "JSON error: " << e.what() << '\n';
  }
  return kExitError;
}

}  // namespace atdecor::cli
