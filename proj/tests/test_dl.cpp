#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "leaklab/assertions.hpp"
#include "leaklab/dl.hpp"
#include "leaklab/error.hpp"
#include "leaklab/parser.hpp"
#include "test_util.hpp"

using namespace leaklab;
using leaklab::testing::corpus_costs;
using leaklab::testing::read_corpus;

namespace {

std::set<std::pair<Location, FlagReason>> flag_set(const LabelReport& r) {
  std::set<std::pair<Location, FlagReason>> out;
  for (const auto& f : r.flags) out.emplace(f.loc, f.reason);
  return out;
}

// Syntactic oracle for programs without dynamic variables under the
// two-point lattice: an output is flagged when an enclosing guard or its own
// argument mentions a high variable.
std::set<std::pair<Location, FlagReason>> expected_flags(const Program& p) {
  std::set<std::string> high;
  for (const auto& v : p.vars) {
    if (v.label == "high") high.insert(v.name);
  }
  auto mentions_high = [&](const Expr& e) {
    for (const auto& n : free_vars(e)) {
      if (high.count(n)) return true;
    }
    return false;
  };
  std::set<std::pair<Location, FlagReason>> out;
  for (ThreadId t = 0; t < p.threads.size(); ++t) {
    const Thread& th = p.threads[t];
    std::function<void(const std::vector<StmtId>&, bool)> walk = [&](const std::vector<StmtId>& block, bool guard) {
      for (StmtId l : block) {
        const Stmt& s = th.at(l);
        const Location loc{t, l};
        if (s.kind == StmtKind::Print || s.kind == StmtKind::Delay) {
          if (guard) {
            out.emplace(loc, s.kind == StmtKind::Print ? FlagReason::HighGuardOutput : FlagReason::HighGuardDelay);
          }
          if (mentions_high(*s.expr)) out.emplace(loc, FlagReason::HighDataOutput);
        }
        const bool inner = guard || ((s.kind == StmtKind::If || s.kind == StmtKind::While ||
                                      s.kind == StmtKind::Await) &&
                                     mentions_high(*s.expr));
        walk(s.body, inner);
        walk(s.orelse, inner);
      }
    };
    walk(th.body, false);
  }
  return out;
}

std::vector<std::string> rendered(const char* name, const CostModel& costs = {}) {
  const Program p = parse_program(read_corpus(name));
  const LabelReport r = dl_certify(p, SecurityLattice::two_point());
  return synthesize_leaky_assertions(p, r.pairs, secret_domain(p), ExploreBounds{}, costs).render(p);
}

}  // namespace

TEST(Dl, HighGuardedPrints) {
  const Program p = parse_program(read_corpus("high_print.cwl"));
  const LabelReport r = dl_certify(p, SecurityLattice::two_point());
  EXPECT_EQ(flag_set(r), (std::set<std::pair<Location, FlagReason>>{{{0, 2}, FlagReason::HighGuardOutput},
                                                                     {{0, 3}, FlagReason::HighGuardOutput}}));
  EXPECT_TRUE(r.flagged(Location{0, 2}));
  EXPECT_FALSE(r.flagged(Location{0, 0}));
  EXPECT_EQ(r.flags.front().culprits, (std::vector<std::string>{"h"}));
  EXPECT_EQ(r.pairs, (std::vector<std::pair<Location, Location>>{{{0, 0}, {0, 4}}}));
}

TEST(Dl, Fig1HasNoDirectFlags) {
  const Program p = parse_program(read_corpus("fig1.cwl"));
  const LabelReport r = dl_certify(p, SecurityLattice::two_point());
  EXPECT_TRUE(r.flags.empty());
  EXPECT_EQ(r.pairs, (std::vector<std::pair<Location, Location>>{{{1, 0}, {1, 7}}}));
  EXPECT_NE(std::find(r.notes.begin(), r.notes.end(), "T2: no direct flag; timing analysis recommended"),
            r.notes.end());
  EXPECT_EQ(r.at(Location{1, 3})->pc, r.lattice.id("high"));
  EXPECT_EQ(r.at(Location{1, 7})->pc, r.lattice.id("low"));
}

TEST(Dl, ConstantPrintIsClean) {
  const Program p = parse_program("var x : int[0..1] = 0; thread T { print(5); }");
  const LabelReport r = dl_certify(p, SecurityLattice::two_point());
  EXPECT_TRUE(r.flags.empty());
  EXPECT_TRUE(r.pairs.empty());
}

TEST(Dl, TwoRegionsGiveTwoPairs) {
  const Program p = parse_program(read_corpus("two_regions.cwl"));
  const LabelReport r = dl_certify(p, SecurityLattice::two_point());
  EXPECT_EQ(r.pairs, (std::vector<std::pair<Location, Location>>{{{0, 0}, {0, 6}}, {{0, 6}, {0, 11}}}));
}

TEST(Dl, DynamicVariableCarriesData) {
  const Program p = parse_program(read_corpus("data_leak.cwl"));
  const LabelReport r = dl_certify(p, SecurityLattice::two_point());
  EXPECT_EQ(r.var_labels.at("x"), r.lattice.id("high"));
  EXPECT_EQ(flag_set(r), (std::set<std::pair<Location, FlagReason>>{{{0, 1}, FlagReason::HighDataOutput}}));
  ASSERT_TRUE(r.at(Location{0, 0})->assigned);
  EXPECT_EQ(r.at(Location{0, 0})->assigned->first, "x");
}

TEST(Dl, LabelOverrides) {
  const Program p = parse_program(read_corpus("high_print.cwl"));
  EXPECT_TRUE(dl_certify(p, SecurityLattice::two_point(), {{"h", "low"}}).flags.empty());
  EXPECT_THROW(dl_certify(p, SecurityLattice::two_point(), {{"h", "ultra"}}), ConfigError);
  EXPECT_THROW(dl_certify(p, SecurityLattice::two_point(), {{"nope", "high"}}), ConfigError);
}

TEST(Dl, ThreeLevelChain) {
  const Program p = parse_program(
      "var h : int[0..1] label top = 0; var m : int[0..1] label internal = 0;\n"
      "thread T { if m then print(1) else skip; if h then print(2) else skip; }");
  const LabelReport r = dl_certify(p, SecurityLattice::chain({"low", "internal", "top"}));
  EXPECT_EQ(r.flags.size(), 2u);
  EXPECT_EQ(r.at(Location{0, 1})->pc, r.lattice.id("internal"));
  EXPECT_EQ(r.at(Location{0, 4})->pc, r.lattice.id("top"));
}

TEST(Dl, FlagsMatchSyntacticOracle) {
  for (const char* name : {"fig1.cwl", "fig2.cwl", "high_print.cwl", "delay_secret.cwl", "balanced.cwl",
                           "two_regions.cwl", "loop_timing.cwl", "race.cwl", "disjoint.cwl", "delay50.cwl"}) {
    const Program p = parse_program(read_corpus(name));
    EXPECT_EQ(flag_set(dl_certify(p, SecurityLattice::two_point())), expected_flags(p)) << name;
  }
}

TEST(Dl, PcNeverDropsInsideCompound) {
  for (const char* name : {"fig1.cwl", "two_regions.cwl", "loop_timing.cwl", "delay_secret.cwl"}) {
    const Program p = parse_program(read_corpus(name));
    const LabelReport r = dl_certify(p, SecurityLattice::two_point());
    for (ThreadId t = 0; t < p.threads.size(); ++t) {
      for (const Stmt& s : p.threads[t].stmts) {
        const LabelId outer = r.at(Location{t, s.label})->pc;
        for (const auto* block : {&s.body, &s.orelse}) {
          for (StmtId c : *block) EXPECT_TRUE(r.lattice.leq(outer, r.at(Location{t, c})->pc)) << name;
        }
      }
    }
  }
}

TEST(Dl, SeparatingThreshold) {
  EXPECT_EQ(separating_threshold(3, 6), 4);
  EXPECT_EQ(separating_threshold(9, 15), 12);
  EXPECT_EQ(separating_threshold(3, 4), 4);
  EXPECT_EQ(separating_threshold(12, 52), 32);
  for (Clock a = 0; a < 30; ++a) {
    for (Clock b = a + 1; b < 40; ++b) {
      const Clock th = separating_threshold(a, b);
      EXPECT_GT(th, a);
      EXPECT_LE(th, b);
    }
  }
}

TEST(Dl, SynthesisFig2) {
  const Program p = parse_program(read_corpus("fig2.cwl"));
  // Oracle: durations from two deterministic runs.
  std::vector<Clock> d;
  for (Value h : {0, 1}) {
    Store s = initial_store(p);
    s[static_cast<std::size_t>(p.find_var("h"))] = h;
    const RunResult r = run_deterministic(p, s);
    d.push_back(*r.snapshots.latest(Location{0, 7}) - *r.snapshots.latest(Location{0, 0}));
  }
  ASSERT_EQ(d, (std::vector<Clock>{3, 6}));
  const Clock th = std::max(d[0] + 1, (d[0] + d[1]) / 2);
  const std::string want = "@leaky {| (t@l7 - t@l0 < " + std::to_string(th) + " -> h = 0) && (t@l7 - t@l0 >= " +
                           std::to_string(th) + " -> h = 1) |}";
  EXPECT_EQ(rendered("fig2.cwl"), (std::vector<std::string>{want}));
}

TEST(Dl, SynthesisDelay50) {
  EXPECT_EQ(rendered("delay50.cwl"),
            (std::vector<std::string>{"@leaky {| (t@l7 - t@l0 < 32 -> h = 1) && (t@l7 - t@l0 >= 32 -> h = 0) |}"}));
}

TEST(Dl, SynthesisIndeterminateWhenDurationsOverlap) {
  const Program p = parse_program(read_corpus("delay50.cwl"));
  const LabelReport r = dl_certify(p, SecurityLattice::two_point());
  const SynthesisResult s =
      synthesize_leaky_assertions(p, r.pairs, secret_domain(p), ExploreBounds{}, corpus_costs("delay50_eq.cwl"));
  ASSERT_EQ(s.pairs.size(), 1u);
  EXPECT_EQ(s.pairs[0].status, SynthesisStatus::Indeterminate);
  EXPECT_EQ(s.pairs[0].assertion, nullptr);
  EXPECT_TRUE(s.assertions.empty());
  EXPECT_NE(s.pairs[0].notice.find("indeterminate"), std::string::npos);
  // Alone, T2 still separates: the overlap comes from interleaving with T1.
  EXPECT_EQ(s.pairs[0].isolated.durations.at({1}), (std::set<Clock>{52}));
  EXPECT_EQ(s.pairs[0].isolated.durations.at({0}), (std::set<Clock>{52}));
}

TEST(Dl, SynthesisFig1UnitCostsIsIndeterminate) {
  EXPECT_TRUE(rendered("fig1.cwl").empty());
  EXPECT_EQ(rendered("fig1.cwl", corpus_costs("fig1.cwl")),
            (std::vector<std::string>{"@leaky {| (t@l7 - t@l0 < 12 -> h = 0) && (t@l7 - t@l0 >= 12 -> h = 1) |}"}));
}

TEST(Dl, SynthesisSecretIndependent) {
  const Program p = parse_program(read_corpus("balanced.cwl"));
  const LabelReport r = dl_certify(p, SecurityLattice::two_point());
  const SynthesisResult s = synthesize_leaky_assertions(p, r.pairs, secret_domain(p), ExploreBounds{});
  ASSERT_EQ(s.pairs.size(), 1u);
  EXPECT_EQ(s.pairs[0].status, SynthesisStatus::SecretIndependent);
  EXPECT_TRUE(s.assertions.empty());
}

TEST(Dl, SynthesisThreeBands) {
  const Program p = parse_program(read_corpus("loop_timing.cwl"));
  const LabelReport r = dl_certify(p, SecurityLattice::two_point());
  const SynthesisResult s = synthesize_leaky_assertions(p, r.pairs, secret_domain(p), ExploreBounds{});
  ASSERT_EQ(s.assertions.size(), 1u);
  EXPECT_EQ(s.pairs[0].bands.size(), 3u);
  EXPECT_EQ(s.pairs[0].bands[1], (std::pair<Value, Clock>{1, 3}));
  EXPECT_EQ(s.pairs[0].bands[2], (std::pair<Value, Clock>{2, 5}));
}

TEST(Dl, SynthesizedAssertionsAreLeaky) {
  for (const char* name : {"fig2.cwl", "delay50.cwl", "two_regions.cwl", "loop_timing.cwl", "delay_secret.cwl"}) {
    const Program p = parse_program(read_corpus(name));
    const LabelReport r = dl_certify(p, SecurityLattice::two_point());
    const SecretDomain d = secret_domain(p);
    const SynthesisResult s = synthesize_leaky_assertions(p, r.pairs, d, ExploreBounds{});
    ASSERT_FALSE(s.assertions.empty()) << name;
    for (const auto& [loc, a] : s.assertions) {
      EXPECT_EQ(is_leaky_assertion(a, loc, p, d, ExploreBounds{}).verdict, LeakyVerdict::Leaky) << name;
    }
  }
}

TEST(Dl, SynthesisSkipsPairsAcrossThreads) {
  const Program p = parse_program(read_corpus("fig1.cwl"));
  const SynthesisResult s =
      synthesize_leaky_assertions(p, {{Location{0, 0}, Location{1, 7}}}, secret_domain(p), ExploreBounds{});
  ASSERT_EQ(s.pairs.size(), 1u);
  EXPECT_TRUE(s.assertions.empty());
}
