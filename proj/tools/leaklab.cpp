// leaklab command-line front end.
//
// Exit codes:
//   0  success (parsed, no leak, proof established, non-interfering)
//   1  leak found / VC refuted / IFC violation
//   2  invalid input: parse, semantic, annotation, configuration or usage errors
//   3  inconclusive: a bound cut exploration short or a VC was undischarged

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "leaklab/assertions.hpp"
#include "leaklab/dl.hpp"
#include "leaklab/error.hpp"
#include "leaklab/explorer.hpp"
#include "leaklab/ifc.hpp"
#include "leaklab/parser.hpp"
#include "leaklab/proofs.hpp"
#include "leaklab/report.hpp"
#include "leaklab/semantics.hpp"

namespace fs = std::filesystem;
using namespace leaklab;

namespace {

constexpr int kOk = 0;
constexpr int kFound = 1;
constexpr int kInvalid = 2;
constexpr int kInconclusive = 3;

struct Options {
  std::string file;
  std::size_t bound_steps = 200;
  std::size_t bound_configs = 2000000;
  bool timing_blind = false;
  bool observe_threads = false;
  std::vector<std::string> secrets;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string cost_file;
  std::vector<std::string> cost_overrides;
  bool json = false;
  Value tolerance = 0;

  // run
  std::string schedule;
  // ogcheck / emit-smt
  bool auto_outline = false;
  bool non_strict = false;
  Clock clock_bound = 64;
  std::uint64_t node_budget = 50000000;
  std::string out_dir = ".";
  // dl / ifc
  std::string lattice_file;
  std::vector<std::string> labels;
  bool synthesize = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExploreBounds bounds(const Options& o) {
  ExploreBounds b;
  b.max_steps = o.bound_steps;
  b.max_configs = o.bound_configs;
  b.timing_blind = o.timing_blind;
  b.observe_threads = o.observe_threads;
  b.validate();
  return b;
}

CostModel costs(const Options& o) {
  std::string path = o.cost_file;
  if (path.empty()) {
    if (const char* env = std::getenv("LEAKLAB_CONFIG"); env && *env) path = env;
  }
  std::string text = path.empty() ? std::string() : read_file(path);
  for (const auto& line : o.cost_overrides) text += "\n" + line;
  return CostModel::parse(text);
}

SecretDomain domain(const Program& p, const Options& o) {
  std::map<std::string, std::pair<Value, Value>> ranges;
  for (const auto& s : o.secrets) ranges.insert(parse_secret_range(s));
  return secret_domain(p, ranges);
}

SecurityLattice lattice(const Options& o) {
  return o.lattice_file.empty() ? SecurityLattice::two_point() : SecurityLattice::load(o.lattice_file);
}

ProofOptions proof_options(const Options& o) {
  ProofOptions po;
  po.strict_stability = !o.non_strict;
  po.clock_bound = o.clock_bound;
  po.node_budget = o.node_budget;
  po.tolerance = o.tolerance;
  po.costs = costs(o);
  po.jobs = o.jobs;
  return po;
}

AnnotatedProgram load_outline(const Options& o) {
  AnnotatedProgram ap = parse_annotated(read_file(o.file));
  if (o.auto_outline) {
    bool complete = true;
    ap = reachable_outline(ap.program, domain(ap.program, o), bounds(o), costs(o), ap.leaky, &complete);
    if (!complete) throw ConfigError("exploration for the automatic outline was cut short; raise the bounds");
    return ap;
  }
  if (ap.pre.empty() && ap.post.empty() && ap.leaky.empty()) {
    throw AnnotationError("no annotations in '" + o.file + "' (annotate the program or pass --auto-outline)");
  }
  return ap;
}

// ---------------------------------------------------------------------------

int cmd_parse(const Options& o) {
  const ParsedSource src = parse_source(read_file(o.file));
  UnparseOptions uo;
  uo.labels = true;
  uo.annotations = &src.annotations;
  const std::string listing = unparse(src.program, uo);
  std::cout << (o.json ? parse_report_json(src.program, listing) : listing);
  return kOk;
}

Store pinned_store(const Program& p, const Options& o) {
  Store s = initial_store(p);
  for (const auto& spec : o.secrets) {
    const auto [name, range] = parse_secret_range(spec);
    const int slot = p.find_var(name);
    if (slot < 0) throw ConfigError("unknown variable '" + name + "'");
    if (range.first != range.second) throw ConfigError("run needs a single value for '" + name + "'");
    if (!p.vars[static_cast<std::size_t>(slot)].in_domain(range.first)) {
      throw ConfigError("value of '" + name + "' is outside its domain");
    }
    s[static_cast<std::size_t>(slot)] = range.first;
  }
  return s;
}

int cmd_run(const Options& o) {
  const Program p = parse_program(read_file(o.file));
  const Store init = pinned_store(p, o);
  const CostModel c = costs(o);
  if (!o.schedule.empty() || p.threads.size() == 1) {
    Configuration cfg;
    std::string outcome = "terminated";
    if (!o.schedule.empty()) {
      std::vector<ThreadId> sched;
      std::stringstream ss(o.schedule);
      for (std::string tok; std::getline(ss, tok, ',');) {
        auto t = p.find_thread(tok);
        if (!t) {
          try {
            t = static_cast<ThreadId>(std::stoul(tok));
          } catch (const std::exception&) {
            throw ConfigError("bad schedule entry '" + tok + "'");
          }
        }
        sched.push_back(*t);
      }
      const Interpreter in(p, c);
      cfg = run_schedule(in, init, sched);
      if (!cfg.all_done()) outcome = in.enabled(cfg).empty() ? "deadlocked" : "partial";
    } else {
      const RunResult r = run_deterministic(p, init, c, o.bound_steps);
      cfg.trace = r.trace;
      cfg.store = r.store;
      cfg.clock = r.clock;
    }
    if (o.json) {
      std::cout << trace_report_json(p, init, cfg.trace, cfg.store, cfg.clock, outcome);
    } else {
      std::cout << dump_trace(p, cfg.trace);
      std::cout << "# " << outcome << " at t=" << cfg.clock << "\n";
    }
    return kOk;
  }
  Options oo = o;
  oo.observe_threads = true;
  const ExploreResult r = explore(p, init, bounds(oo), c);
  if (o.json) {
    std::cout << run_report_json(p, init, r);
  } else {
    for (const auto& [obs, outcomes] : r.executions) {
      std::cout << (obs.events.empty() ? "(no output)" : obs.render());
      for (Outcome x : outcomes) std::cout << "  [" << to_string(x) << "]";
      std::cout << "\n";
    }
    for (const auto& f : r.faults) std::cout << "fault: " << f << "\n";
    std::cout << "# " << r.executions.size() << " observations, " << r.configurations << " configurations"
              << (r.fully_explored() ? "" : ", incomplete") << "\n";
  }
  return r.fully_explored() ? kOk : kInconclusive;
}

int cmd_leakscan(const Options& o) {
  const Program p = parse_program(read_file(o.file));
  const ExploreBounds b = bounds(o);
  const KnowledgeReport r = knowledge_partition(p, initial_store(p), domain(p, o), b, costs(o), o.jobs);
  if (o.json) {
    std::cout << leakscan_report_json(p, r, b);
  } else {
    auto knowledge = [&](const KnowledgeEntry& e) {
      std::string s = "{";
      for (std::size_t i = 0; i < e.knowledge.size(); ++i) s += (i ? ", " : "") + r.domain.render(p, e.knowledge[i]);
      return s + "}";
    };
    for (const auto& e : r.entries) {
      std::cout << (e.observation.events.empty() ? "(no output)" : e.observation.render()) << "\tK=" << knowledge(e)
                << (e.confirmed ? "\tleak" : (e.leaky ? "\tleak?" : "")) << "\n";
    }
    if (!b.timing_blind) {
      std::cout << "# payloads only\n";
      for (const auto& e : r.payload_entries) {
        std::cout << (e.observation.events.empty() ? "(no output)" : e.observation.letters()) << "\tK=" << knowledge(e)
                  << (e.confirmed ? "\tleak" : (e.leaky ? "\tleak?" : "")) << "\n";
      }
    }
    std::cout << "verdict: " << to_string(r.verdict) << (r.timing_leak ? " (timing)" : "")
              << (r.complete ? "" : " [exploration incomplete]") << "\n";
  }
  switch (r.verdict) {
    case Verdict::NoLeak: return kOk;
    case Verdict::Leak: return kFound;
    case Verdict::Inconclusive: return kInconclusive;
  }
  return kInconclusive;
}

int cmd_ogcheck(const Options& o) {
  const AnnotatedProgram ap = load_outline(o);
  const ProofResult r = check_proof(ap, proof_options(o));
  if (o.json) {
    std::cout << proof_report_json(ap.program, r);
  } else {
    for (std::size_t i = 0; i < r.vcs.size(); ++i) {
      const VC& vc = r.vcs[i];
      const VcResult& res = r.results[i];
      if (res.status == VcStatus::Valid) continue;
      std::cout << to_string(vc.kind) << " #" << vc.index << " " << describe_action(ap.program, vc.action) << ": "
                << to_string(res.status) << "\n  " << vc.provenance << "\n";
      if (res.counterexample) {
        std::cout << "  before:";
        for (const auto& [k, v] : res.counterexample->before) std::cout << " " << k << "=" << v;
        std::cout << "\n  after:";
        for (const auto& [k, v] : res.counterexample->after) std::cout << " " << k << "=" << v;
        std::cout << "\n  " << res.counterexample->reason << "\n";
      }
      if (!res.reason.empty()) std::cout << "  " << res.reason << "\n";
    }
    for (VcKind k : {VcKind::Sequential, VcKind::Interference, VcKind::LeakyStability}) {
      std::cout << to_string(k) << ": " << r.count(k, VcStatus::Valid) << " valid, "
                << r.count(k, VcStatus::Counterexample) << " refuted, " << r.count(k, VcStatus::Undischarged)
                << " undischarged\n";
    }
    for (const auto& n : r.notices) std::cout << "note: " << n << "\n";
    std::cout << r.message << "\n";
  }
  switch (r.verdict) {
    case ProofVerdict::Proven: return kOk;
    case ProofVerdict::Refuted: return kFound;
    case ProofVerdict::Incomplete: return kInconclusive;
  }
  return kInconclusive;
}

int cmd_dl(const Options& o) {
  const Program p = parse_program(read_file(o.file));
  std::map<std::string, std::string> labels;
  for (const auto& l : o.labels) {
    const auto eq = l.find('=');
    if (eq == std::string::npos) throw ConfigError("expected --label var=label, got '" + l + "'");
    labels[l.substr(0, eq)] = l.substr(eq + 1);
  }
  const LabelReport r = dl_certify(p, lattice(o), labels);
  std::optional<SynthesisResult> syn;
  if (o.synthesize) syn = synthesize_leaky_assertions(p, r.pairs, domain(p, o), bounds(o), costs(o));
  if (o.json) {
    std::cout << dl_report_json(p, r, syn ? &*syn : nullptr);
    return kOk;
  }
  for (const auto& f : r.flags) {
    std::cout << p.location_name(f.loc) << "\t" << to_string(f.reason) << "\t" << f.expression;
    if (!f.culprits.empty()) {
      std::cout << "\t(";
      for (std::size_t i = 0; i < f.culprits.size(); ++i) std::cout << (i ? ", " : "") << f.culprits[i];
      std::cout << ")";
    }
    std::cout << "\n";
  }
  if (r.flags.empty()) std::cout << "no flags\n";
  for (const auto& [a, b] : r.pairs) std::cout << "snapshot pair: " << p.location_name(a) << " -> " << p.location_name(b) << "\n";
  for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
  if (syn) {
    for (const auto& ps : syn->pairs) {
      std::cout << ps.notice << "\n";
      if (ps.assertion) {
        std::cout << "  // before " << p.location_name(ps.to) << "\n  @leaky {| "
                  << unparse_expr(*ps.assertion, p, ps.to.thread) << " |}\n";
      }
    }
  }
  return kOk;
}

int cmd_ifc(const Options& o) {
  IfcScenario sc = IfcScenario::from_json(read_file(o.file));
  if (!o.lattice_file.empty()) {
    // Relabel by name into the replacement lattice.
    const SecurityLattice lat = lattice(o);
    for (auto& [u, l] : sc.initial.users) l = lat.id(sc.lattice.name(l));
    for (auto& [v, l] : sc.initial.var_labels) l = lat.id(sc.lattice.name(l));
    sc.lattice = lat;
  }
  std::vector<IfcCheck> checks;
  for (std::size_t i = 0; i < sc.sequences.size(); ++i) {
    checks.push_back({"sequential", {i}, check_seq_ni(sc.lattice, sc.sequences[i], sc.observer, sc.initial)});
  }
  if (sc.sequences.size() == 2) {
    checks.push_back(
        {"concurrent", {0, 1}, check_conc_ni(sc.lattice, sc.sequences[0], sc.sequences[1], sc.observer, sc.initial)});
  }
  bool ok = true;
  for (const auto& c : checks) ok &= c.result.ok();
  if (o.json) {
    std::cout << ifc_report_json(sc, checks);
  } else {
    for (const auto& c : checks) {
      std::cout << c.check;
      for (auto s : c.sequences) std::cout << " #" << s;
      std::cout << ": " << to_string(c.result.status);
      if (!c.result.ok()) {
        std::cout << " (" << c.result.detail << ")\n  witness:";
        for (const auto& op : c.result.witness) std::cout << " " << to_string(op);
      }
      std::cout << "\n";
    }
  }
  return ok ? kOk : kFound;
}

int cmd_emit_smt(const Options& o) {
  const AnnotatedProgram ap = load_outline(o);
  const ProofOptions po = proof_options(o);
  const std::vector<VC> vcs = gen_all_vcs(ap, po);
  fs::create_directories(o.out_dir);
  std::vector<std::string> files;
  for (const VC& vc : vcs) {
    const fs::path path = fs::path(o.out_dir) / smt_file_name(vc);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << emit_smtlib(vc, ap.program, po);
    files.push_back(path.string());
  }
  if (o.json) {
    std::cout << emit_report_json(ap.program, vcs, files);
  } else {
    for (const auto& f : files) std::cout << f << "\n";
    std::cout << "# " << files.size() << " verification conditions\n";
  }
  return kOk;
}

void add_common(CLI::App* sub, Options& o, bool exploring) {
  sub->add_option("FILE", o.file, "Input file")->required()->check(CLI::ExistingFile);
  sub->add_flag("--json", o.json, "Emit a JSON report");
  sub->add_option("--cost", o.cost_file, "Cost model file (default: $LEAKLAB_CONFIG)");
  sub->add_option("--set-cost", o.cost_overrides, "Extra cost line, e.g. cost.T2.l2=10");
  if (!exploring) return;
  sub->add_option("--bound-steps", o.bound_steps, "Maximum steps per execution")->check(CLI::PositiveNumber);
  sub->add_option("--bound-configs", o.bound_configs, "Maximum configurations per valuation")
      ->check(CLI::PositiveNumber);
  sub->add_flag("--timing-blind", o.timing_blind, "Observer does not see timestamps");
  sub->add_flag("--observe-threads", o.observe_threads, "Observer sees which thread printed");
  sub->add_option("--secret", o.secrets, "Secret range, e.g. h=0..1");
  sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"leaklab: information-leak analysis for concurrent programs"};
  app.require_subcommand(1);
  Options o;

  auto* parse = app.add_subcommand("parse", "Parse, pretty-print with labels");
  add_common(parse, o, false);

  auto* run = app.add_subcommand("run", "Execute a program (all schedules, or one)");
  add_common(run, o, true);
  run->add_option("--schedule", o.schedule, "Comma-separated thread names or indices");

  auto* leakscan = app.add_subcommand("leakscan", "Enumerate observations and knowledge sets");
  add_common(leakscan, o, true);

  auto* ogcheck = app.add_subcommand("ogcheck", "Check an annotated proof outline");
  add_common(ogcheck, o, true);
  auto add_proof = [&](CLI::App* sub) {
    sub->add_flag("--auto-outline", o.auto_outline, "Derive the outline from reachable states");
    sub->add_flag("--non-strict", o.non_strict, "Interference checks for assignments and awaits only");
    sub->add_option("--clock-bound", o.clock_bound, "Upper bound of t and snapshots")->check(CLI::PositiveNumber);
    sub->add_option("--node-budget", o.node_budget, "Enumeration nodes per VC")->check(CLI::PositiveNumber);
    sub->add_option("--tolerance", o.tolerance, "Default theta of approx()")->check(CLI::NonNegativeNumber);
  };
  add_proof(ogcheck);

  auto* dl = app.add_subcommand("dl", "Dynamic labelling and leaky assertion synthesis");
  add_common(dl, o, true);
  dl->add_option("--lattice", o.lattice_file, "Lattice JSON file (default low <= high)");
  dl->add_option("--label", o.labels, "Label override, e.g. x=high");
  dl->add_flag("--synthesize", o.synthesize, "Synthesize duration-based leaky assertions");

  auto* ifc = app.add_subcommand("ifc", "Check an information-flow scenario");
  ifc->add_option("FILE", o.file, "Scenario JSON")->required()->check(CLI::ExistingFile);
  ifc->add_flag("--json", o.json, "Emit a JSON report");
  ifc->add_option("--lattice", o.lattice_file, "Replace the scenario lattice");

  auto* emit = app.add_subcommand("emit-smt", "Write one SMT-LIB file per VC");
  add_common(emit, o, true);
  add_proof(emit);
  emit->add_option("--out-dir", o.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (parse->parsed()) return cmd_parse(o);
    if (run->parsed()) return cmd_run(o);
    if (leakscan->parsed()) return cmd_leakscan(o);
    if (ogcheck->parsed()) return cmd_ogcheck(o);
    if (dl->parsed()) return cmd_dl(o);
    if (ifc->parsed()) return cmd_ifc(o);
    if (emit->parsed()) return cmd_emit_smt(o);
  } catch (const ParseError& e) {
    std::cerr << o.file << ":" << e.line() << ":" << e.column() << ": error: " << e.message() << "\n";
    return kInvalid;
  } catch (const Error& e) {
    std::cerr << "leaklab: error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "leaklab: internal error: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}
