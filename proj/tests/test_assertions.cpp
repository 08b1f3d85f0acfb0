#include <gtest/gtest.h>

#include "leaklab/assertions.hpp"
#include "leaklab/error.hpp"
#include "leaklab/parser.hpp"
#include "test_util.hpp"

using namespace leaklab;
using leaklab::testing::read_corpus;

namespace {

struct Fixture {
  Program p = parse_program(read_corpus("fig2.cwl"));
  Store store = initial_store(p);
  Snapshots snaps{p};
  std::vector<StmtId> pcs{0};

  AssertionEnv env(Clock clock = 0) {
    AssertionEnv e;
    e.store = &store;
    e.snapshots = &snaps;
    e.clock = clock;
    e.pcs = &pcs;
    return e;
  }
  bool eval(const std::string& text, Clock clock = 0) { return eval_assertion(*parse_assertion(text, p, 0), env(clock)); }
};

}  // namespace

TEST(Assertions, Arithmetic) {
  Fixture f;
  f.store[static_cast<std::size_t>(f.p.find_var("v"))] = 3;
  EXPECT_TRUE(f.eval("v = 3 and sem = 1"));
  EXPECT_TRUE(f.eval("v * 2 - 1 = 5"));
  EXPECT_TRUE(f.eval("v > 2 -> sem = 1"));
  EXPECT_TRUE(f.eval("(v = 1) <-> (sem = 0)"));
  EXPECT_FALSE(f.eval("v = 3 -> sem = 0"));
  EXPECT_TRUE(f.eval("-v < 0"));
}

TEST(Assertions, ClockSnapshotsAndControl) {
  Fixture f;
  f.snaps.record(Location{0, 0}, 0);
  f.snaps.record(Location{0, 7}, 6);
  f.pcs = {8};
  EXPECT_TRUE(f.eval("t@l7 - t@l0 = 6", 9));
  EXPECT_TRUE(f.eval("t = 9", 9));
  EXPECT_TRUE(f.eval("at(l8) and !at(l7)"));
  EXPECT_THROW(f.eval("t@l4 > 0"), SnapshotUndefined);
}

TEST(Assertions, IndexedSnapshots) {
  Fixture f;
  f.snaps.record(Location{0, 1}, 2);
  f.snaps.record(Location{0, 1}, 5);
  EXPECT_TRUE(f.eval("t@l1[1] = 2 and t@l1[2] = 5 and t@l1 = 5"));
  EXPECT_THROW(f.eval("t@l1[3] = 0"), SnapshotUndefined);
}

TEST(Assertions, ApproxTolerance) {
  Fixture f;
  f.store[static_cast<std::size_t>(f.p.find_var("v"))] = 4;
  EXPECT_TRUE(f.eval("approx(v, 4)"));
  EXPECT_FALSE(f.eval("approx(v, 2)"));
  EXPECT_TRUE(f.eval("approx(v, 2, 2)"));
  AssertionEnv e = f.env();
  e.tolerance = 3;
  EXPECT_TRUE(eval_assertion(*parse_assertion("approx(v, 1)", f.p, 0), e));
}

TEST(Assertions, Quantifiers) {
  Fixture f;
  f.store[static_cast<std::size_t>(f.p.find_var("v"))] = 2;
  EXPECT_TRUE(f.eval("exists k in 0..4 : v = k"));
  EXPECT_FALSE(f.eval("forall k in 0..4 : v >= k"));
  EXPECT_TRUE(f.eval("forall k in 0..2 : v >= k"));
}

TEST(Assertions, SecretVarsIn) {
  const Program p = parse_program(read_corpus("fig2.cwl"));
  EXPECT_EQ(secret_vars_in(*parse_assertion("h = 0 and v = 1", p, 0), p), (std::vector<int>{0}));
  EXPECT_TRUE(secret_vars_in(*parse_assertion("v = 1", p, 0), p).empty());
}

TEST(Assertions, LeakyStrictSubset) {
  const Program p = parse_program(read_corpus("fig2.cwl"));
  const LeakyResult r =
      is_leaky_assertion(parse_assertion("h = 1 and v = 2", p, 0), Location{0, 7}, p, secret_domain(p), {});
  EXPECT_EQ(r.verdict, LeakyVerdict::Leaky);
  EXPECT_EQ(r.consistent, (std::vector<Value>{1}));
  EXPECT_EQ(r.excluded, (std::vector<Value>{0}));
  EXPECT_EQ(r.states, 2u);
  EXPECT_EQ(r.satisfying, 1u);
}

TEST(Assertions, NotLeakyAndVacuous) {
  const Program p = parse_program(read_corpus("fig2.cwl"));
  EXPECT_EQ(is_leaky_assertion(parse_assertion("h = 0 or h = 1", p, 0), Location{0, 7}, p, secret_domain(p), {})
                .verdict,
            LeakyVerdict::NotLeaky);
  EXPECT_EQ(is_leaky_assertion(parse_assertion("h = 2", p, 0), Location{0, 7}, p, secret_domain(p), {}).verdict,
            LeakyVerdict::Vacuous);
}

TEST(Assertions, DurationRuleIsObservationConditioned) {
  const Program p = parse_program(read_corpus("fig2.cwl"));
  const ExprPtr rule = parse_assertion("(t@l7 - t@l0 < 4 -> h = 0) and (t@l7 - t@l0 >= 4 -> h = 1)", p, 0);
  const LeakyResult r = is_leaky_assertion(rule, Location{0, 7}, p, secret_domain(p), {});
  EXPECT_EQ(r.verdict, LeakyVerdict::Leaky);
  EXPECT_TRUE(r.observation_conditioned);
  EXPECT_EQ(r.satisfying, r.states);
  // The disjunctive form holds for every value of h and reveals nothing.
  const ExprPtr weak = parse_assertion("(t@l7 - t@l0 < 4 -> h = 0) or (t@l7 - t@l0 >= 4 -> h = 1)", p, 0);
  EXPECT_EQ(is_leaky_assertion(weak, Location{0, 7}, p, secret_domain(p), {}).verdict, LeakyVerdict::NotLeaky);
}

TEST(Assertions, UndefinedSnapshotsCountAsUnsatisfied) {
  const Program p = parse_program(read_corpus("fig2.cwl"));
  const LeakyResult r = is_leaky_assertion(parse_assertion("t@l7 >= 0 and h = 0", p, 0), Location{0, 1}, p,
                                           secret_domain(p), {});
  EXPECT_EQ(r.undefined, r.states);
  EXPECT_EQ(r.verdict, LeakyVerdict::Vacuous);
}

TEST(Assertions, AnnotatedProgramStructure) {
  const AnnotatedProgram ap = parse_annotated(read_corpus("fig1_outline.cwl"));
  EXPECT_EQ(ap.leaky.size(), 1u);
  EXPECT_EQ(ap.leaky.begin()->first, (Location{1, 7}));
  EXPECT_EQ(ap.post.size(), 2u);
  EXPECT_NE(ap.pre_at(Location{1, 7}), nullptr);
  EXPECT_EQ(ap.pre_at(Location{0, 1}), nullptr);  // inside the await body
}

TEST(Assertions, LeakyMarkNeedsASecret) {
  EXPECT_THROW(parse_annotated("var h : bool = secret; var x : int[0..1] = 0;\n"
                               "thread T { @leaky {| x = 0 |} print(x); }"),
               AnnotationError);
}

TEST(Assertions, RepeatedAnnotationsAreConjoined) {
  const AnnotatedProgram ap = parse_annotated("var x : int[0..1] = 0; thread T { {| x = 0 |} {| x < 1 |} skip; }");
  const ExprPtr pre = ap.pre_at(Location{0, 0});
  ASSERT_NE(pre, nullptr);
  EXPECT_EQ(pre->binop, BinOp::And);
}
