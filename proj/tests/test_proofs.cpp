#include <gtest/gtest.h>

#include <chrono>

#include "leaklab/error.hpp"
#include "leaklab/parser.hpp"
#include "leaklab/proofs.hpp"
#include "test_util.hpp"

using namespace leaklab;
using leaklab::testing::corpus_costs;
using leaklab::testing::read_corpus;
using leaklab::testing::SymbolState;

namespace {

ProofOptions fig1_options() {
  ProofOptions o;
  o.costs = corpus_costs("fig1_outline.cwl");
  return o;
}

std::string invert_consequents(std::string text) {
  const std::string from = "(t@l7 - t@l0 < 12 -> h = 0) and (t@l7 - t@l0 >= 12 -> h = 1)";
  const std::string to = "(t@l7 - t@l0 < 12 -> h = 1) and (t@l7 - t@l0 >= 12 -> h = 0)";
  const auto pos = text.find(from);
  if (pos == std::string::npos) throw std::runtime_error("leaky mark not found");
  return text.replace(pos, from.size(), to);
}

// A counterexample must satisfy the VC's pre in `before` and either break
// the post in `after` or leave the domain (empty `after`).
void expect_revalidates(const VC& vc, const VcResult& r, const Program& p) {
  ASSERT_TRUE(r.counterexample);
  const SymbolState before(p, r.counterexample->before);
  EXPECT_TRUE(eval_assertion(*vc.pre, before.env())) << describe_action(p, vc.action);
  if (r.counterexample->after.empty()) return;
  std::map<std::string, Value> merged = r.counterexample->before;
  for (const auto& [k, v] : r.counterexample->after) merged[k] = v;
  const SymbolState after(p, merged);
  EXPECT_FALSE(eval_assertion(*vc.post, after.env())) << describe_action(p, vc.action);
}

}  // namespace

TEST(Proofs, AtomicActionsOfFig1) {
  const Program p = parse_program(read_corpus("fig1.cwl"));
  const auto t2 = atomic_actions(p, 1);
  // print, guard true, guard false, await, two assignments, skip, print
  ASSERT_EQ(t2.size(), 8u);
  EXPECT_EQ(t2[1].mode, ActionMode::GuardTrue);
  EXPECT_EQ(t2[1].successor, 2u);
  EXPECT_EQ(t2[2].mode, ActionMode::GuardFalse);
  EXPECT_EQ(t2[2].successor, 6u);
  EXPECT_EQ(describe_action(p, t2.back()), "T2.l7 print('d')");
}

TEST(Proofs, Fig1OutlineCertifiesLeak) {
  const AnnotatedProgram ap = parse_annotated(read_corpus("fig1_outline.cwl"));
  const auto start = std::chrono::steady_clock::now();
  const ProofResult r = check_proof(ap, fig1_options());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_EQ(r.verdict, ProofVerdict::Proven);
  EXPECT_TRUE(r.leak_certified);
  EXPECT_EQ(r.message, "program certified leaky at T2.l7");
  for (VcKind k : {VcKind::Sequential, VcKind::Interference, VcKind::LeakyStability}) {
    EXPECT_GT(r.count(k, VcStatus::Valid), 0u);
    EXPECT_EQ(r.count(k, VcStatus::Counterexample), 0u);
    EXPECT_EQ(r.count(k, VcStatus::Undischarged), 0u);
  }
  EXPECT_LT(secs, 10.0);
}

TEST(Proofs, InvertedConsequentsAreRefuted) {
  const AnnotatedProgram ap = parse_annotated(invert_consequents(read_corpus("fig1_outline.cwl")));
  const ProofResult r = check_proof(ap, fig1_options());
  EXPECT_EQ(r.verdict, ProofVerdict::Refuted);
  EXPECT_FALSE(r.leak_certified);
  std::size_t refuted = 0;
  for (std::size_t i = 0; i < r.vcs.size(); ++i) {
    if (r.results[i].status != VcStatus::Counterexample) continue;
    ++refuted;
    expect_revalidates(r.vcs[i], r.results[i], ap.program);
  }
  EXPECT_GT(refuted, 0u);
}

TEST(Proofs, UnitCostsCannotCertifyFig1Rule) {
  // Under unit costs the h=0 and h=1 duration sets overlap, so the rule with
  // threshold 12 is not an invariant at l7.
  const AnnotatedProgram ap = parse_annotated(read_corpus("fig1_outline.cwl"));
  EXPECT_EQ(check_proof(ap, ProofOptions{}).verdict, ProofVerdict::Refuted);
}

TEST(Proofs, DisjointInterferenceIsValid) {
  const AnnotatedProgram ap = parse_annotated(read_corpus("disjoint_outline.cwl"));
  const ProofResult r = check_proof(ap);
  EXPECT_EQ(r.verdict, ProofVerdict::Proven);
  EXPECT_GT(r.count(VcKind::Interference, VcStatus::Valid), 0u);
  EXPECT_EQ(r.count(VcKind::Interference, VcStatus::Counterexample), 0u);
  EXPECT_EQ(r.message, "functionally non-interfering; no leak assertions checked");
}

TEST(Proofs, ClassicInterferenceIsRefuted) {
  const AnnotatedProgram ap = parse_annotated(read_corpus("interfering_outline.cwl"));
  const ProofResult r = check_proof(ap);
  EXPECT_EQ(r.verdict, ProofVerdict::Refuted);
  bool found = false;
  for (std::size_t i = 0; i < r.vcs.size(); ++i) {
    if (r.results[i].status != VcStatus::Counterexample) continue;
    expect_revalidates(r.vcs[i], r.results[i], ap.program);
    if (r.vcs[i].kind == VcKind::Interference && describe_action(ap.program, r.vcs[i].action) == "B.l0 x = 1") {
      found = true;
      EXPECT_EQ(r.results[i].counterexample->before.at("x"), 0);
      EXPECT_EQ(r.results[i].counterexample->after.at("x"), 1);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Proofs, SequentialVcCounts) {
  const AnnotatedProgram ap = parse_annotated(read_corpus("fig1_outline.cwl"));
  // one VC per atomic action plus the initial-state VC
  EXPECT_EQ(gen_sequential_vcs(ap, 0).size(), atomic_actions(ap.program, 0).size());
  EXPECT_EQ(gen_sequential_vcs(ap, 1).size(), atomic_actions(ap.program, 1).size());
  EXPECT_EQ(gen_initial_vcs(ap).size(), 1u);
}

TEST(Proofs, NonStrictChecksFewerActions) {
  const AnnotatedProgram ap = parse_annotated(read_corpus("fig1_outline.cwl"));
  ProofOptions strict = fig1_options();
  ProofOptions loose = strict;
  loose.strict_stability = false;
  const auto a = gen_interference_vcs(ap, strict);
  const auto b = gen_interference_vcs(ap, loose);
  EXPECT_LT(b.size(), a.size());
  for (const VC& vc : b) {
    const StmtKind k = ap.program.threads[vc.action.loc.thread].at(vc.action.loc.label).kind;
    EXPECT_TRUE(k == StmtKind::Assign || k == StmtKind::Await);
  }
}

TEST(Proofs, LeakyVcShapes) {
  const AnnotatedProgram ap = parse_annotated(read_corpus("fig1_outline.cwl"));
  const auto vcs = gen_leaky_vcs(ap);
  // T1 has one await and two assignments; three triples each.
  EXPECT_EQ(vcs.size(), 9u);
  for (const VC& vc : vcs) EXPECT_EQ(vc.kind, VcKind::LeakyStability);
}

TEST(Proofs, MissingAnnotationIsAnError) {
  const AnnotatedProgram ap = parse_annotated("var x : int[0..1] = 0; thread T { {| x = 0 |} x = 1; print(x); }");
  EXPECT_THROW(check_proof(ap), AnnotationError);
}

TEST(Proofs, LeakyMarkOnAssignmentIsRejected) {
  const AnnotatedProgram ap = parse_annotated(
      "var h : bool = secret; var x : int[0..1] = 0;\n"
      "thread T { {| true |} @leaky {| h |} x = 1; post {| true |} }");
  EXPECT_THROW(check_proof(ap), AnnotationError);
}

TEST(Proofs, DomainViolationIsACounterexample) {
  const AnnotatedProgram ap = parse_annotated("var x : int[0..1] = 0; thread T { {| true |} x = x + 1; }");
  const ProofResult r = check_proof(ap);
  EXPECT_EQ(r.verdict, ProofVerdict::Refuted);
  bool domain = false;
  for (const auto& res : r.results) {
    if (res.counterexample && res.counterexample->after.empty()) {
      domain = true;
      EXPECT_EQ(res.counterexample->before.at("x"), 1);
    }
  }
  EXPECT_TRUE(domain);
}

TEST(Proofs, NodeBudgetGivesUndischarged) {
  const AnnotatedProgram ap = parse_annotated(read_corpus("fig1_outline.cwl"));
  ProofOptions o = fig1_options();
  o.node_budget = 10;
  const ProofResult r = check_proof(ap, o);
  EXPECT_EQ(r.verdict, ProofVerdict::Incomplete);
  EXPECT_FALSE(r.leak_certified);
}

TEST(Proofs, JobsDoNotChangeResults) {
  const AnnotatedProgram ap = parse_annotated(invert_consequents(read_corpus("fig1_outline.cwl")));
  ProofOptions o = fig1_options();
  const ProofResult one = check_proof(ap, o);
  o.jobs = 4;
  const ProofResult four = check_proof(ap, o);
  ASSERT_EQ(one.results.size(), four.results.size());
  for (std::size_t i = 0; i < one.results.size(); ++i) {
    EXPECT_EQ(one.results[i].status, four.results[i].status);
    EXPECT_EQ(one.results[i].nodes, four.results[i].nodes);
  }
}

TEST(Proofs, ReachableOutlineCertifiesSynthesizedRule) {
  const Program p = parse_program(read_corpus("fig1.cwl"));
  const CostModel costs = corpus_costs("fig1_outline.cwl");
  std::map<Location, ExprPtr> leaky;
  leaky[Location{1, 7}] = parse_assertion("(t@l7 - t@l0 < 12 -> h = 0) and (t@l7 - t@l0 >= 12 -> h = 1)", p, 1);
  bool complete = false;
  const AnnotatedProgram ap = reachable_outline(p, secret_domain(p), ExploreBounds{}, costs, leaky, &complete);
  EXPECT_TRUE(complete);
  ProofOptions o;
  o.costs = costs;
  const ProofResult r = check_proof(ap, o);
  EXPECT_EQ(r.verdict, ProofVerdict::Proven);
  EXPECT_TRUE(r.leak_certified);
}

TEST(Proofs, SmtEmission) {
  const AnnotatedProgram ap = parse_annotated(read_corpus("interfering_outline.cwl"));
  const auto vcs = gen_all_vcs(ap, ProofOptions{});
  ASSERT_FALSE(vcs.empty());
  for (const VC& vc : vcs) {
    const std::string smt = emit_smtlib(vc, ap.program, ProofOptions{});
    EXPECT_NE(smt.find("(set-logic ALL)"), std::string::npos);
    EXPECT_NE(smt.find("(check-sat)"), std::string::npos);
    EXPECT_NE(smt.find("(declare-const |x| Int)"), std::string::npos);
  }
  EXPECT_EQ(smt_file_name(vcs.front()), "vc_sequential_0.smt2");
}

TEST(Proofs, SmtRejectsLoopsInsideAwait) {
  const AnnotatedProgram ap = parse_annotated(
      "var x : int[0..3] = 0;\n"
      "thread T { {| true |} await true then { while x < 2 do x = x + 1; } post {| true |} }");
  const auto vcs = gen_all_vcs(ap, ProofOptions{});
  bool threw = false;
  for (const VC& vc : vcs) {
    try {
      emit_smtlib(vc, ap.program, ProofOptions{});
    } catch (const SemanticError&) {
      threw = true;
    }
  }
  EXPECT_TRUE(threw);
}
