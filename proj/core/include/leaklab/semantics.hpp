#pragma once

// Small-step interleaving semantics with an abstract global clock.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leaklab/lang.hpp"

namespace leaklab {

/// Per-action costs. Keys in the config file:
///   unit_cost = 1
///   cost.l3 = 2       (label l3 of every thread)
///   cost.T2.l3 = 2    (label l3 of thread T2 only; wins over cost.l3)
/// An override replaces the statement's own cost; for an await that is the
/// entry cost, the body actions are still added.
struct CostModel {
  Clock unit_cost = 1;
  std::map<StmtId, Clock> by_label;
  std::map<std::string, std::map<StmtId, Clock>> by_thread_label;

  static CostModel parse(std::string_view text);
  static CostModel load(const std::string& path);

  std::optional<Clock> override_for(const Program& p, Location loc) const;
  bool operator==(const CostModel&) const = default;
};

/// Values indexed by declaration slot.
using Store = std::vector<Value>;

/// Store with declared initializers; secrets start at their lower bound.
Store initial_store(const Program& p);

struct Event {
  ThreadId thread = 0;
  std::string payload;
  Clock time = 0;

  bool operator==(const Event&) const = default;
};

/// Clock values recorded on every arrival at a control location, in order.
class Snapshots {
 public:
  Snapshots() = default;
  explicit Snapshots(const Program& p);

  void record(Location loc, Clock c);
  /// Latest arrival, or nullopt when never reached.
  std::optional<Clock> latest(Location loc) const;
  /// 1-based arrival index.
  std::optional<Clock> nth(Location loc, std::uint32_t index) const;
  const std::vector<Clock>& arrivals(Location loc) const;

  bool operator==(const Snapshots&) const = default;
  auto operator<=>(const Snapshots&) const = default;

 private:
  std::vector<std::vector<std::vector<Clock>>> data_;  // [thread][label]
};

struct Configuration {
  /// Continuation stack per thread, next statement at the back. Empty means
  /// the thread is done.
  std::vector<std::vector<StmtId>> residues;
  Store store;
  Clock clock = 0;
  std::vector<Event> trace;
  Snapshots snapshots;

  bool done(ThreadId t) const { return residues[t].empty(); }
  bool all_done() const;
  /// Current control location label of a thread (exit label when done).
  StmtId pc(const Program& p, ThreadId t) const;
  std::vector<StmtId> pcs(const Program& p) const;
};

/// Evaluates a program expression. Booleans are 0/1. Throws RuntimeError on
/// assertion-only constructs.
Value eval_expr(const Expr& e, const Store& s);

/// Renders a print argument's value: string literal text, or the number
/// (`true`/`false` for booleans).
std::string render_payload(const Expr& arg, const Store& s, const Program& p);

/// Pure transition system over configurations of one program.
class Interpreter {
 public:
  explicit Interpreter(const Program& p, CostModel costs = {});

  const Program& program() const { return *p_; }
  const CostModel& costs() const { return costs_; }

  Configuration initial(const Store& init) const;

  /// Threads that can take a step. Empty with a non-done thread = deadlock.
  std::vector<ThreadId> enabled(const Configuration& c) const;
  bool enabled(const Configuration& c, ThreadId t) const;

  /// Advances thread `t` by one atomic action. Throws RuntimeError on a
  /// domain violation, a negative delay or a diverging await body.
  Configuration step(const Configuration& c, ThreadId t) const;
  void step_in_place(Configuration& c, ThreadId t) const;

  /// Cost of the plain action at `loc` (for an await, only the entry cost).
  Clock base_cost(Location loc) const;
  /// Cost of a delay whose argument evaluated to `amount`.
  Clock delay_cost(Location loc, Value amount) const;

 private:
  /// Executes an await body atomically; returns the accumulated cost.
  Clock run_atomic(ThreadId t, const std::vector<StmtId>& body, Configuration& c,
                   std::vector<std::string>& prints) const;
  void assign(Configuration& c, const Stmt& s) const;

  const Program* p_;
  CostModel costs_;
};

struct RunResult {
  std::vector<Event> trace;
  Store store;
  Snapshots snapshots;
  Clock clock = 0;
};

/// Runs a single-thread program to completion. Throws RuntimeError when the
/// step bound is exceeded or the thread blocks forever.
RunResult run_deterministic(const Program& p, const Store& init, const CostModel& costs = {},
                            std::size_t max_steps = 100000);

/// Runs with an explicit schedule (thread index per step).
Configuration run_schedule(const Interpreter& in, const Store& init,
                           const std::vector<ThreadId>& schedule);

/// One event per line: `thread\tpayload\ttimestamp`.
std::string dump_trace(const Program& p, const std::vector<Event>& trace);

}  // namespace leaklab
