// Cross-checks the enumerating discharge against z3 on the emitted SMT-LIB.

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "leaklab/parser.hpp"
#include "leaklab/proofs.hpp"
#include "test_util.hpp"

using namespace leaklab;
using leaklab::testing::corpus_costs;
using leaklab::testing::read_corpus;

namespace {

std::string z3_path() { return LEAKLAB_Z3; }

bool have_z3() {
  const std::string z = z3_path();
  return !z.empty() && z.find("NOTFOUND") == std::string::npos && std::filesystem::exists(z);
}

std::string run_z3(const std::string& script) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto file = dir / ("leaklab_z3_" + std::to_string(::getpid()) + ".smt2");
  {
    std::ofstream out(file);
    out << script;
  }
  const std::string cmd = z3_path() + " -T:30 " + file.string();
  std::string result;
  if (FILE* pipe = ::popen(cmd.c_str(), "r")) {
    char buf[256];
    while (std::fgets(buf, sizeof buf, pipe)) result += buf;
    ::pclose(pipe);
  }
  std::filesystem::remove(file);
  return result.substr(0, result.find('\n'));
}

void cross_check(const std::string& source, const ProofOptions& o) {
  const AnnotatedProgram ap = parse_annotated(source);
  const ProofResult r = check_proof(ap, o);
  for (std::size_t i = 0; i < r.vcs.size(); ++i) {
    const std::string answer = run_z3(emit_smtlib(r.vcs[i], ap.program, o));
    const std::string expected = r.results[i].status == VcStatus::Valid ? "unsat" : "sat";
    EXPECT_EQ(answer, expected) << smt_file_name(r.vcs[i]) << " " << describe_action(ap.program, r.vcs[i].action);
  }
}

}  // namespace

TEST(SmtZ3, Fig1Outline) {
  if (!have_z3()) GTEST_SKIP() << "z3 not installed";
  ProofOptions o;
  o.costs = corpus_costs("fig1_outline.cwl");
  cross_check(read_corpus("fig1_outline.cwl"), o);
}

TEST(SmtZ3, Fig1OutlineUnitCosts) {
  if (!have_z3()) GTEST_SKIP() << "z3 not installed";
  cross_check(read_corpus("fig1_outline.cwl"), ProofOptions{});
}

TEST(SmtZ3, InterferencePairs) {
  if (!have_z3()) GTEST_SKIP() << "z3 not installed";
  cross_check(read_corpus("interfering_outline.cwl"), ProofOptions{});
  cross_check(read_corpus("disjoint_outline.cwl"), ProofOptions{});
}

TEST(SmtZ3, AwaitBodiesAndBranches) {
  if (!have_z3()) GTEST_SKIP() << "z3 not installed";
  cross_check(
      "var s : int[0..1] = 1; var x : int[0..3] = 0;\n"
      "thread A { {| x <= 1 |} await s > 0 then { s = s - 1; if x = 0 then x = x + 1 else x = 0; s = s + 1; }\n"
      "  post {| x <= 1 |} }\n"
      "thread B { {| x <= 1 |} await s > 0 then x = 1 - x; post {| x <= 2 |} }",
      ProofOptions{});
}
