#include <gtest/gtest.h>

#include "leaklab/error.hpp"
#include "leaklab/explorer.hpp"
#include "leaklab/parser.hpp"
#include "leaklab/semantics.hpp"
#include "test_util.hpp"

using namespace leaklab;
using leaklab::testing::read_corpus;

namespace {

Store with(const Program& p, const std::string& var, Value v) {
  Store s = initial_store(p);
  s[static_cast<std::size_t>(p.find_var(var))] = v;
  return s;
}

std::vector<std::pair<std::string, Clock>> events(const std::vector<Event>& trace) {
  std::vector<std::pair<std::string, Clock>> out;
  for (const auto& e : trace) out.emplace_back(e.payload, e.time);
  return out;
}

}  // namespace

// Hand-stepped under unit costs: print c (1), guard (2), skip (3), print d (4).
TEST(Semantics, Fig2SecretZeroGolden) {
  const Program p = parse_program(read_corpus("fig2.cwl"));
  const RunResult r = run_deterministic(p, with(p, "h", 0));
  EXPECT_EQ(events(r.trace), (std::vector<std::pair<std::string, Clock>>{{"c", 1}, {"d", 4}}));
  EXPECT_EQ(r.clock, 4);
}

// print c (1), guard (2), await entry + body (4), v+2 (5), sem+1 (6), print d (7).
TEST(Semantics, Fig2SecretOneGolden) {
  const Program p = parse_program(read_corpus("fig2.cwl"));
  const RunResult r = run_deterministic(p, with(p, "h", 1));
  EXPECT_EQ(events(r.trace), (std::vector<std::pair<std::string, Clock>>{{"c", 1}, {"d", 7}}));
  EXPECT_EQ(r.store[static_cast<std::size_t>(p.find_var("v"))], 2);
  EXPECT_EQ(r.snapshots.latest(Location{0, 7}), 6);
  EXPECT_EQ(r.snapshots.latest(Location{0, 0}), 0);
}

TEST(Semantics, DelayThenPrint) {
  const Program p = parse_program("var x : int[0..1] = 0; thread T { delay(5); print('x'); }");
  const RunResult r = run_deterministic(p, initial_store(p));
  EXPECT_EQ(events(r.trace), (std::vector<std::pair<std::string, Clock>>{{"x", 6}}));
}

TEST(Semantics, DelayCostsAtLeastOneAndRejectsNegative) {
  const Program zero = parse_program("var x : int[0..1] = 0; thread T { delay(0); print('x'); }");
  EXPECT_EQ(run_deterministic(zero, initial_store(zero)).trace.at(0).time, 2);
  const Program neg = parse_program("var x : int[0..1] = 0; thread T { delay(x - 1); }");
  EXPECT_THROW(run_deterministic(neg, initial_store(neg)), RuntimeError);
}

TEST(Semantics, CostOverrides) {
  const Program p = parse_program(read_corpus("fig2.cwl"));
  const CostModel c = CostModel::parse("# comment\nunit_cost = 2\ncost.l0 = 5\ncost.T2.l7 = 3\n");
  const RunResult r = run_deterministic(p, with(p, "h", 0), c);
  // print c 5, guard 2, skip 2, print d 3
  EXPECT_EQ(events(r.trace), (std::vector<std::pair<std::string, Clock>>{{"c", 5}, {"d", 12}}));
  EXPECT_EQ(c.override_for(p, Location{0, 7}), 3);
  EXPECT_EQ(c.override_for(p, Location{0, 1}), std::nullopt);
}

TEST(Semantics, CostModelErrors) {
  EXPECT_THROW(CostModel::parse("unit_cost = 0"), ConfigError);
  EXPECT_THROW(CostModel::parse("cost.l1 = -3"), ConfigError);
  EXPECT_THROW(CostModel::parse("speed = 3"), ConfigError);
  EXPECT_THROW(CostModel::parse("cost.lx = 3"), ConfigError);
  EXPECT_THROW(CostModel::parse("cost.l1"), ConfigError);
  EXPECT_THROW(CostModel::load("/nonexistent/leaklab.cost"), ConfigError);
}

TEST(Semantics, AwaitCostIsEntryPlusBody) {
  const Program p = parse_program(
      "var s : int[0..1] = 1; thread T { await s > 0 then { s = s - 1; s = s + 1; } print('x'); }");
  EXPECT_EQ(run_deterministic(p, initial_store(p)).trace.at(0).time, 4);
  const CostModel c = CostModel::parse("cost.l0 = 10");
  EXPECT_EQ(run_deterministic(p, initial_store(p), c).trace.at(0).time, 13);
}

TEST(Semantics, PrintInsideAwaitTakesPostStepClock) {
  const Program p = parse_program("var s : int[0..1] = 1; thread T { await s > 0 then { print('in'); s = 0; } }");
  const RunResult r = run_deterministic(p, initial_store(p));
  EXPECT_EQ(events(r.trace), (std::vector<std::pair<std::string, Clock>>{{"in", 3}}));
}

TEST(Semantics, AwaitBlocksUntilGuardHolds) {
  const Program p = parse_program(read_corpus("fig1.cwl"));
  const Interpreter in(p);
  Configuration c = in.initial(with(p, "h", 1));
  // T1 takes the semaphore; T2 prints c and takes the branch.
  c = in.step(c, 0);
  c = in.step(in.step(c, 1), 1);
  EXPECT_EQ(c.pc(p, 1), 2u);
  EXPECT_FALSE(in.enabled(c, 1));
  EXPECT_EQ(in.enabled(c), (std::vector<ThreadId>{0}));
}

TEST(Semantics, DomainOverflowIsRuntimeError) {
  const Program p = parse_program("var x : int[0..1] = 1; thread T { x = x + 1; }");
  EXPECT_THROW(run_deterministic(p, initial_store(p)), RuntimeError);
}

TEST(Semantics, StepBoundOnDivergence) {
  const Program p = parse_program("var x : int[0..1] = 0; thread T { while x = 0 do skip; }");
  EXPECT_THROW(run_deterministic(p, initial_store(p), {}, 50), RuntimeError);
}

TEST(Semantics, BooleanPayloads) {
  const Program p = parse_program("var b : bool = true; thread T { print(b); print(!b); print(3); }");
  const RunResult r = run_deterministic(p, initial_store(p));
  ASSERT_EQ(r.trace.size(), 3u);
  EXPECT_EQ(r.trace[0].payload, "true");
  EXPECT_EQ(r.trace[1].payload, "false");
  EXPECT_EQ(r.trace[2].payload, "3");
}

TEST(Semantics, TraceDumpFormat) {
  const Program p = parse_program(read_corpus("fig2.cwl"));
  const RunResult r = run_deterministic(p, with(p, "h", 0));
  EXPECT_EQ(dump_trace(p, r.trace), "T2\tc\t1\nT2\td\t4\n");
}

TEST(Semantics, ScheduleRun) {
  const Program p = parse_program(read_corpus("fig1.cwl"));
  const Interpreter in(p);
  // T1 runs to completion first, then T2 with h = 0.
  const Configuration c = run_schedule(in, with(p, "h", 0), {0, 0, 0, 0, 0, 1, 1, 1, 1});
  EXPECT_TRUE(c.all_done());
  EXPECT_EQ(observe(c.trace, ExploreBounds{}).letters(), "a b c d");
  EXPECT_EQ(c.clock, 10);
}

TEST(Semantics, WhileLoopSnapshots) {
  const Program p = parse_program(read_corpus("loop_timing.cwl"));
  const RunResult r = run_deterministic(p, with(p, "h", 2));
  // The guard at l1 is reached three times: before each iteration and at exit.
  EXPECT_EQ(r.snapshots.arrivals(Location{0, 1}).size(), 3u);
  EXPECT_EQ(r.snapshots.nth(Location{0, 1}, 1), 1);
  EXPECT_EQ(r.snapshots.latest(Location{0, 3}), 6);
}
