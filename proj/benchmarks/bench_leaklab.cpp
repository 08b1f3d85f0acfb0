#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "leaklab/dl.hpp"
#include "leaklab/explorer.hpp"
#include "leaklab/ifc.hpp"
#include "leaklab/parser.hpp"
#include "leaklab/proofs.hpp"

using namespace leaklab;

namespace {

std::string corpus(const std::string& name) {
  std::ifstream in(std::string(LEAKLAB_CORPUS_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void BM_ParseFig1Outline(benchmark::State& state) {
  const std::string text = corpus("fig1_outline.cwl");
  for (auto _ : state) benchmark::DoNotOptimize(parse_annotated(text));
}
BENCHMARK(BM_ParseFig1Outline);

void BM_LeakscanFig1(benchmark::State& state) {
  const Program p = parse_program(corpus("fig1.cwl"));
  const SecretDomain d = secret_domain(p);
  for (auto _ : state) benchmark::DoNotOptimize(knowledge_partition(p, initial_store(p), d, ExploreBounds{}));
}
BENCHMARK(BM_LeakscanFig1)->Unit(benchmark::kMicrosecond);

void BM_LeakscanDelaySecret(benchmark::State& state) {
  const Program p = parse_program(corpus("delay_secret.cwl"));
  const SecretDomain d = secret_domain(p);
  const auto jobs = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(knowledge_partition(p, initial_store(p), d, ExploreBounds{}, {}, jobs));
  }
}
BENCHMARK(BM_LeakscanDelaySecret)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_OgcheckFig1Outline(benchmark::State& state) {
  const AnnotatedProgram ap = parse_annotated(corpus("fig1_outline.cwl"));
  ProofOptions o;
  o.costs = CostModel::parse(corpus("fig1_outline.cost"));
  o.jobs = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(check_proof(ap, o));
}
BENCHMARK(BM_OgcheckFig1Outline)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_SynthesizeFig1(benchmark::State& state) {
  const Program p = parse_program(corpus("fig1.cwl"));
  const CostModel costs = CostModel::parse(corpus("fig1.cost"));
  const LabelReport r = dl_certify(p, SecurityLattice::two_point());
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize_leaky_assertions(p, r.pairs, secret_domain(p), ExploreBounds{}, costs));
  }
}
BENCHMARK(BM_SynthesizeFig1)->Unit(benchmark::kMicrosecond);

void BM_ConcurrentNi(benchmark::State& state) {
  const SecurityLattice lat = SecurityLattice::chain({"low", "mid", "high"});
  MachineState q;
  q.users = {{"a", 2}, {"b", 1}, {"o", 0}};
  q.var_labels = {{"x", 1}, {"y", 2}, {"z", 0}};
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<Op> s1;
  std::vector<Op> s2;
  for (std::size_t i = 0; i < n; ++i) {
    s1.push_back(Op{"a", i % 2 ? "y" : "x", Access::Read, std::nullopt});
    s2.push_back(Op{"b", "x", i % 2 ? Access::Write : Access::Read, std::nullopt});
  }
  for (auto _ : state) benchmark::DoNotOptimize(check_conc_ni(lat, s1, s2, "o", q));
}
BENCHMARK(BM_ConcurrentNi)->Arg(4)->Arg(8)->Arg(10);

}  // namespace
BENCHMARK_MAIN();
