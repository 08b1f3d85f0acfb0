#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>
#include <thread>

#include "leaklab/error.hpp"
#include "leaklab/proofs.hpp"

namespace leaklab {

ProofResult check_proof(const AnnotatedProgram& ap, const ProofOptions& o) {
  ProofResult r;
  r.vcs = gen_all_vcs(ap, o, &r.notices);
  r.results.resize(r.vcs.size());

  const unsigned jobs = std::max(1u, o.jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < r.vcs.size(); i = next++) {
      try {
        r.results[i] = discharge_vc(r.vcs[i], ap.program, o);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  bool refuted = false;
  bool undischarged = false;
  bool leaky_failed = false;
  for (std::size_t i = 0; i < r.vcs.size(); ++i) {
    if (r.results[i].status == VcStatus::Counterexample) refuted = true;
    if (r.results[i].status == VcStatus::Undischarged) undischarged = true;
    if (r.vcs[i].kind == VcKind::LeakyStability && r.results[i].status != VcStatus::Valid) leaky_failed = true;
  }
  r.verdict = refuted ? ProofVerdict::Refuted : (undischarged ? ProofVerdict::Incomplete : ProofVerdict::Proven);
  for (const auto& [loc, a] : ap.leaky) r.leaky_locations.push_back(loc);

  if (r.verdict == ProofVerdict::Proven && !ap.leaky.empty()) {
    r.leak_certified = true;
    r.message = "program certified leaky at";
    for (const auto& loc : r.leaky_locations) r.message += " " + ap.program.location_name(loc);
  } else if (ap.leaky.empty()) {
    r.message = r.verdict == ProofVerdict::Proven ? "functionally non-interfering; no leak assertions checked"
                                                   : "proof outline not established";
  } else if (leaky_failed) {
    r.message = "leak not established (assertions interfered with)";
  } else {
    r.message = "leak not established (proof outline not established)";
  }
  return r;
}

namespace {

ExprPtr eq(ExprPtr a, Value v) { return make_binary(BinOp::Eq, std::move(a), make_int(v)); }

ExprPtr var_equals(const Program& p, std::size_t slot, Value v) {
  const VarDecl& d = p.vars[slot];
  const ExprPtr x = make_var(d.name, static_cast<int>(slot));
  if (d.type == Type::Bool) return v ? x : make_unary(UnOp::Not, x);
  return eq(x, v);
}

void snapshot_refs(const Expr& e, ThreadId t, std::set<StmtId>& out) {
  if (e.kind == ExprKind::Snapshot && e.loc.thread == t) out.insert(e.loc.label);
  for (const auto& a : e.args) snapshot_refs(*a, t, out);
}

}  // namespace

AnnotatedProgram reachable_outline(const Program& p, const SecretDomain& domain, const ExploreBounds& b,
                                   const CostModel& costs, const std::map<Location, ExprPtr>& leaky,
                                   bool* complete) {
  std::vector<std::set<StmtId>> tracked(p.threads.size());
  for (const auto& [loc, a] : leaky) snapshot_refs(*a, loc.thread, tracked[loc.thread]);

  // Each disjunct is a tuple of values; a set keeps them unique and ordered.
  using Row = std::vector<Value>;
  std::map<Location, std::set<Row>> rows;
  bool all = true;
  const Store base = initial_store(p);
  for (const auto& v : domain.valuations) {
    all &= explore_states(p, domain.apply(base, v), b, costs, [&](const Configuration& c) {
      const auto pcs = c.pcs(p);
      for (ThreadId j = 0; j < p.threads.size(); ++j) {
        Row row(c.store.begin(), c.store.end());
        row.push_back(c.clock);
        for (ThreadId k = 0; k < p.threads.size(); ++k) {
          if (k != j) row.push_back(pcs[k]);
        }
        for (StmtId l : tracked[j]) {
          const auto s = c.snapshots.latest(Location{j, l});
          row.push_back(s ? *s : -1);
        }
        rows[Location{j, pcs[j]}].insert(std::move(row));
      }
    });
  }
  if (complete) *complete = all;

  AnnotatedProgram ap;
  ap.program = p;
  ap.leaky = leaky;
  for (ThreadId j = 0; j < p.threads.size(); ++j) {
    for (StmtId l : control_points(p.threads[j])) {
      std::vector<ExprPtr> disjuncts;
      for (const Row& row : rows[Location{j, l}]) {
        std::vector<ExprPtr> conj;
        std::size_t i = 0;
        for (; i < p.vars.size(); ++i) conj.push_back(var_equals(p, i, row[i]));
        conj.push_back(eq(make_clock(), row[i++]));
        for (ThreadId k = 0; k < p.threads.size(); ++k) {
          if (k != j) conj.push_back(make_at(Location{k, static_cast<StmtId>(row[i++])}));
        }
        for (StmtId s : tracked[j]) {
          const Value v = row[i++];
          if (v >= 0) conj.push_back(eq(make_snapshot(Location{j, s}), v));
        }
        disjuncts.push_back(conjoin(conj));
      }
      const ExprPtr pre = disjoin(disjuncts);
      if (l == p.threads[j].exit_label()) {
        ap.post[j] = pre;
      } else {
        ap.pre[Location{j, l}] = pre;
      }
    }
  }
  return ap;
}

}  // namespace leaklab
