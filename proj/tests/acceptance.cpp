// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit on
// any failure.

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

#include "leaklab/assertions.hpp"
#include "leaklab/dl.hpp"
#include "leaklab/explorer.hpp"
#include "leaklab/ifc.hpp"
#include "leaklab/parser.hpp"
#include "leaklab/proofs.hpp"
#include "leaklab/report.hpp"
#include "random_programs.hpp"
#include "test_util.hpp"

using namespace leaklab;
using leaklab::testing::corpus_costs;
using leaklab::testing::read_corpus;
using leaklab::testing::SymbolState;

namespace {

using Clk = std::chrono::steady_clock;

double seconds_since(Clk::time_point start) { return std::chrono::duration<double>(Clk::now() - start).count(); }

/// Collects failed checks for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  bool ok() const { return failures_.empty(); }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::vector<std::string> failures_;
};

Store with(const Program& p, std::initializer_list<std::pair<const char*, Value>> vals) {
  Store s = initial_store(p);
  for (const auto& [n, v] : vals) s[static_cast<std::size_t>(p.find_var(n))] = v;
  return s;
}

std::string invert_consequents(std::string text) {
  const std::string from = "(t@l7 - t@l0 < 12 -> h = 0) and (t@l7 - t@l0 >= 12 -> h = 1)";
  const std::string to = "(t@l7 - t@l0 < 12 -> h = 1) and (t@l7 - t@l0 >= 12 -> h = 0)";
  const auto pos = text.find(from);
  if (pos == std::string::npos) return text;
  return text.replace(pos, from.size(), to);
}

bool revalidates(const VC& vc, const VcResult& r, const Program& p) {
  if (!r.counterexample) return false;
  const SymbolState before(p, r.counterexample->before);
  if (!eval_assertion(*vc.pre, before.env())) return false;
  if (r.counterexample->after.empty()) return true;  // left the variable domain
  auto merged = r.counterexample->before;
  for (const auto& [k, v] : r.counterexample->after) merged[k] = v;
  const SymbolState after(p, merged);
  return !eval_assertion(*vc.post, after.env());
}

// ---------------------------------------------------------------------------

void ac1(Check& c) {
  const Program p = parse_program(read_corpus("fig1.cwl"));
  ExploreBounds b;
  b.max_steps = 40;
  const auto start = Clk::now();
  const SecretDomain d = secret_domain(p, {{"h", {0, 1}}});
  const KnowledgeReport r = knowledge_partition(p, with(p, {{"sem", 1}, {"v", 0}}), d, b);
  const double secs = seconds_since(start);
  const KnowledgeEntry* e = r.find_letters("a c d b");
  c.expect(e != nullptr, "observation a c d b present");
  if (e) {
    c.expect(e->knowledge == std::vector<SecretValuation>{{0}}, "K(a c d b) = {h=0}");
    c.expect(e->confirmed, "a c d b is not a truncation artefact");
  }
  c.expect(r.complete, "exploration complete");
  c.expect(r.verdict == Verdict::Leak, "verdict leak");

  // h=1 alone never produces a c d b
  const KnowledgeReport only1 = knowledge_partition(p, with(p, {{"sem", 1}, {"v", 0}}),
                                                    secret_domain(p, {{"h", {1, 1}}}), b);
  c.expect(only1.find_letters("a c d b") == nullptr, "a c d b absent for h=1");
  c.expect(secs < 1.0, "runtime " + std::to_string(secs) + " s under 1 s");
}

void ac2(Check& c) {
  const auto start = Clk::now();
  const CostModel costs = corpus_costs("fig1_outline.cwl");
  const std::string source = read_corpus("fig1_outline.cwl");
  const AnnotatedProgram ap = parse_annotated(source);

  // The hand outline's leaky mark is the one synthesis produces.
  const Program plain = parse_program(read_corpus("fig1.cwl"));
  const LabelReport labels = dl_certify(plain, SecurityLattice::two_point());
  const SynthesisResult syn = synthesize_leaky_assertions(plain, labels.pairs, secret_domain(plain), ExploreBounds{},
                                                          costs);
  c.expect(syn.assertions.size() == 1, "one synthesized assertion");
  c.expect(ap.leaky.size() == 1, "one leaky mark in the outline");
  if (syn.assertions.size() == 1 && ap.leaky.size() == 1) {
    c.expect(syn.assertions[0].first == ap.leaky.begin()->first, "mark location T2.l7");
    c.expect(structurally_equal(syn.assertions[0].second, ap.leaky.begin()->second),
             "outline mark equals the synthesized assertion");
  }

  // Domains: h 0..1, sem 0..1, v 0..4 from the declarations; t 0..64.
  ProofOptions o;
  o.costs = costs;
  o.clock_bound = 64;
  const ProofResult r = check_proof(ap, o);
  for (VcKind k : {VcKind::Sequential, VcKind::Interference, VcKind::LeakyStability}) {
    const std::string name(to_string(k));
    c.expect(r.count(k, VcStatus::Valid) > 0, name + " VCs present");
    c.expect(r.count(k, VcStatus::Counterexample) == 0 && r.count(k, VcStatus::Undischarged) == 0,
             "all " + name + " VCs valid");
  }
  c.expect(r.verdict == ProofVerdict::Proven, "outline proven");
  c.expect(r.leak_certified && r.message == "program certified leaky at T2.l7", "leak certified at l7");

  const std::string inverted = invert_consequents(source);
  c.expect(inverted != source, "inverted variant built");
  const ProofResult bad = check_proof(parse_annotated(inverted), o);
  std::size_t refuted = 0;
  for (VcKind k : {VcKind::Sequential, VcKind::Interference, VcKind::LeakyStability}) {
    refuted += bad.count(k, VcStatus::Counterexample);
  }
  c.expect(refuted >= 1, "inverted consequents give a counterexample");
  c.expect(!bad.leak_certified, "inverted variant not certified");
  const double secs = seconds_since(start);
  c.expect(secs < 10.0, "runtime " + std::to_string(secs) + " s under 10 s");
}

void ac3(Check& c) {
  const Program p = parse_program(read_corpus("delay50.cwl"));
  const LabelReport labels = dl_certify(p, SecurityLattice::two_point());
  const SecretDomain d = secret_domain(p);

  const SynthesisResult unit = synthesize_leaky_assertions(p, labels.pairs, d, ExploreBounds{});
  c.expect(unit.assertions.size() == 1, "unit costs: one assertion");
  if (unit.assertions.size() == 1) {
    const auto& [loc, a] = unit.assertions[0];
    c.expect(is_leaky_assertion(a, loc, p, d, ExploreBounds{}).verdict == LeakyVerdict::Leaky,
             "assertion separates h");
  }
  const KnowledgeReport scan = knowledge_partition(p, initial_store(p), d, ExploreBounds{});
  c.expect(scan.verdict == Verdict::Leak && scan.timing_leak, "leakscan finds a timing leak");

  // cost.T2.l2 = 47 makes the h=1 await path 50 ticks long as well
  const SynthesisResult eq =
      synthesize_leaky_assertions(p, labels.pairs, d, ExploreBounds{}, corpus_costs("delay50_eq.cwl"));
  c.expect(eq.assertions.empty(), "equalised costs: no assertion");
  c.expect(eq.pairs.size() == 1 && eq.pairs[0].status == SynthesisStatus::Indeterminate,
           "equalised costs: indeterminate");
  c.expect(eq.pairs.size() == 1 && eq.pairs[0].notice.find("indeterminate") != std::string::npos,
           "indeterminate notice");
}

void ac4(Check& c) {
  const AnnotatedProgram disjoint = parse_annotated(read_corpus("disjoint_outline.cwl"));
  const ProofResult dr = check_proof(disjoint);
  c.expect(dr.count(VcKind::Interference, VcStatus::Valid) > 0 &&
               dr.count(VcKind::Interference, VcStatus::Valid) ==
                   static_cast<std::size_t>(std::count_if(dr.vcs.begin(), dr.vcs.end(),
                                                          [](const VC& v) { return v.kind == VcKind::Interference; })),
           "disjoint: all interference VCs valid");

  const AnnotatedProgram clash = parse_annotated(read_corpus("interfering_outline.cwl"));
  const ProofResult cr = check_proof(clash);
  c.expect(cr.count(VcKind::Interference, VcStatus::Counterexample) >= 1, "x:=1 against {x=0} refuted");
  for (std::size_t i = 0; i < cr.vcs.size(); ++i) {
    if (cr.results[i].status == VcStatus::Counterexample) {
      c.expect(revalidates(cr.vcs[i], cr.results[i], clash.program), "classic counterexample revalidates");
    }
  }

  leaklab::testing::RandomPrograms gen(leaklab::testing::test_seed(4004));
  leaklab::testing::RandomProgramOptions opts;
  opts.loops = false;
  opts.max_stmts = 2;
  std::size_t counterexamples = 0;
  for (int i = 0; i < 100; ++i) {
    const AnnotatedProgram ap = gen.annotate(gen.program(opts));
    const ProofResult r = check_proof(ap);
    for (std::size_t k = 0; k < r.vcs.size(); ++k) {
      if (r.results[k].status != VcStatus::Counterexample) continue;
      ++counterexamples;
      if (!revalidates(r.vcs[k], r.results[k], ap.program)) {
        c.expect(false, "random program " + std::to_string(i) + ": counterexample does not revalidate for " +
                            describe_action(ap.program, r.vcs[k].action));
      }
    }
  }
  c.expect(counterexamples > 0, "random corpus produced counterexamples");
}

// Oracle for concurrent NI: walk every complete interleaving step by step.
bool conc_oracle(const SecurityLattice& lat, const std::vector<Op>& s1, const std::vector<Op>& s2,
                 const std::string& user, const MachineState& q0) {
  const ViewResult v0 = view(lat, q0, user);
  auto run = [&](const std::vector<Op>& ops) {
    MachineState q = q0;
    for (const Op& op : ops) {
      const DeltaResult d = delta(lat, q, op);
      if (std::holds_alternative<Epsilon>(d)) return false;
      q = std::get<MachineState>(d);
      if (view(lat, q, user) != v0) return false;
    }
    return true;
  };
  if (!run(s1) || !run(s2)) return false;
  std::vector<Op> merged;
  std::function<bool(std::size_t, std::size_t)> all = [&](std::size_t i, std::size_t j) {
    if (i == s1.size() && j == s2.size()) return run(merged);
    bool ok = true;
    if (i < s1.size()) {
      merged.push_back(s1[i]);
      ok = all(i + 1, j);
      merged.pop_back();
    }
    if (ok && j < s2.size()) {
      merged.push_back(s2[j]);
      ok = all(i, j + 1);
      merged.pop_back();
    }
    return ok;
  };
  return all(0, 0);
}

void ac5(Check& c) {
  std::mt19937 names_rng(leaklab::testing::test_seed(5005));
  std::vector<std::string> names = {"l", "m", "h"};
  const SecurityLattice lat = SecurityLattice::chain(names);
  leaklab::testing::RandomIfc gen(leaklab::testing::test_seed(5005), lat);
  std::size_t conc_ok = 0;
  std::size_t conc_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const MachineState q0 = gen.state();
    const std::string observer = "u" + std::to_string(gen.pick(0, 2));

    // label monotonicity and epsilon exactly on forbidden reads
    MachineState q = q0;
    for (const Op& op : gen.ops(6)) {
      const bool forbidden = op.access == Access::Read && !lat.leq(q.var_labels.at(op.var), q.users.at(op.user));
      const DeltaResult d = delta(lat, q, op);
      if (std::holds_alternative<Epsilon>(d) != forbidden) c.expect(false, "epsilon iff label(v) <= label(u) fails");
      if (forbidden) break;
      const MachineState& next = std::get<MachineState>(d);
      for (const auto& [v, l] : q.var_labels) {
        if (!lat.leq(l, next.var_labels.at(v))) c.expect(false, "label decreased along a run");
      }
      q = next;
    }

    // indistinguishability is an equivalence
    const MachineState a = gen.sibling(q0);
    MachineState b = gen.sibling(q0);
    MachineState e = gen.sibling(q0);
    if (gen.pick(0, 1)) b = a;  // make related pairs common
    if (gen.pick(0, 1)) {
      e = b;
      e.values["a"] = 1 - e.values["a"];
    }
    const bool ab = indistinguishable(lat, a, b, observer);
    const bool ba = indistinguishable(lat, b, a, observer);
    const bool be = indistinguishable(lat, b, e, observer);
    const bool ae = indistinguishable(lat, a, e, observer);
    if (!indistinguishable(lat, a, a, observer)) c.expect(false, "indistinguishable not reflexive");
    if (ab != ba) c.expect(false, "indistinguishable not symmetric");
    if (ab && be && !ae) c.expect(false, "indistinguishable not transitive");

    // concurrent NI against exhaustive interleavings
    const auto s1 = gen.ops(4);
    const auto s2 = gen.ops(4);
    const NiResult r = check_conc_ni(lat, s1, s2, observer, q0);
    if (r.ok()) {
      ++conc_ok;
      if (!check_seq_ni(lat, s1, observer, q0).ok() || !check_seq_ni(lat, s2, observer, q0).ok()) {
        c.expect(false, "concurrent NI without sequential NI");
      }
    } else {
      ++conc_bad;
    }
    if (r.ok() != conc_oracle(lat, s1, s2, observer, q0)) c.expect(false, "concurrent NI disagrees with oracle");
  }
  c.expect(conc_ok > 0 && conc_bad > 0, "both NI outcomes exercised");
}

void ac6(Check& c) {
  const std::vector<std::string> corpus = {"fig1.cwl",        "fig2.cwl",     "delay50.cwl",  "delay_secret.cwl",
                                           "high_print.cwl",  "two_regions.cwl", "loop_timing.cwl", "balanced.cwl",
                                           "disjoint.cwl",    "race.cwl"};
  std::size_t certified = 0;
  std::size_t assertions = 0;
  for (const auto& name : corpus) {
    const Program p = parse_program(read_corpus(name));
    const CostModel costs = corpus_costs(name);
    const SecretDomain d = secret_domain(p);
    const LabelReport labels = dl_certify(p, SecurityLattice::two_point());
    const SynthesisResult syn = synthesize_leaky_assertions(p, labels.pairs, d, ExploreBounds{}, costs);
    std::map<Location, ExprPtr> marks;
    for (const auto& [loc, a] : syn.assertions) {
      ++assertions;
      if (is_leaky_assertion(a, loc, p, d, ExploreBounds{}, costs).verdict != LeakyVerdict::Leaky) {
        c.expect(false, name + ": synthesized assertion at " + p.location_name(loc) + " is not leaky");
      }
      marks[loc] = a;
    }
    if (marks.empty()) continue;
    bool complete = false;
    const AnnotatedProgram ap = reachable_outline(p, d, ExploreBounds{}, costs, marks, &complete);
    if (!complete) continue;
    ProofOptions o;
    o.costs = costs;
    const ProofResult r = check_proof(ap, o);
    if (!r.leak_certified) continue;
    ++certified;
    const KnowledgeReport scan = knowledge_partition(p, initial_store(p), d, ExploreBounds{}, costs);
    c.expect(scan.verdict == Verdict::Leak, name + ": certified leak also found by leakscan");
  }
  c.expect(assertions > 0, "corpus yields assertions");
  c.expect(certified > 0, "corpus yields certified leaks");
}

void ac7(Check& c) {
  for (const char* name : {"fig1.cwl", "delay50.cwl", "loop_timing.cwl", "race.cwl", "disjoint.cwl", "balanced.cwl"}) {
    const Program p = parse_program(read_corpus(name));
    for (std::size_t steps = 1; steps <= 30; ++steps) {
      for (std::size_t configs : {std::size_t{3}, std::size_t{20}, std::size_t{2000000}}) {
        ExploreBounds b;
        b.max_steps = steps;
        b.max_configs = configs;
        const KnowledgeReport r = knowledge_partition(p, initial_store(p), secret_domain(p), b);
        if (!r.complete && r.verdict == Verdict::NoLeak) {
          c.expect(false, std::string(name) + ": no_leak under truncation at steps=" + std::to_string(steps));
        }
      }
    }
    const ExploreBounds b;
    const std::string first = leakscan_report_json(p, knowledge_partition(p, initial_store(p), secret_domain(p), b), b);
    for (unsigned jobs : {1u, 2u, 4u}) {
      const std::string again =
          leakscan_report_json(p, knowledge_partition(p, initial_store(p), secret_domain(p), b, {}, jobs), b);
      if (again != first) c.expect(false, std::string(name) + ": leakscan output differs between runs");
    }
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    const auto start = Clk::now();
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << (c.ok() ? "[PASS] " : "[FAIL] ") << name << " (" << seconds_since(start) << " s)\n";
    for (const auto& f : c.failures()) std::cout << "    " << f << "\n";
    if (!c.ok()) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
