#pragma once

// Owicki-Gries style proof outlines: verification conditions over atomic
// actions, discharge by finite enumeration, SMT-LIB emission.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "leaklab/assertions.hpp"
#include "leaklab/explorer.hpp"
#include "leaklab/lang.hpp"
#include "leaklab/semantics.hpp"

namespace leaklab {

enum class VcKind : std::uint8_t { Sequential, Interference, LeakyStability };

std::string_view to_string(VcKind k);

enum class ActionMode : std::uint8_t {
  Init,        // the initial state itself; no transition
  Normal,      // skip, assign, print, delay, await (guard true)
  GuardTrue,   // if/while guard evaluated true
  GuardFalse,  // if/while guard evaluated false
};

/// One atomic step of thread `loc.thread` from `loc.label` to `successor`.
struct Action {
  ActionMode mode = ActionMode::Normal;
  Location loc;
  StmtId successor = 0;
};

/// Atomic actions of a thread, one per control point (two for guards).
std::vector<Action> atomic_actions(const Program& p, ThreadId t);

/// "T2.l7 print('d')" style description.
std::string describe_action(const Program& p, const Action& a);

/// Hoare triple {pre} action {post}. `pre` already carries the implicit
/// control conjuncts at(...) of the threads involved.
struct VC {
  VcKind kind = VcKind::Sequential;
  std::size_t index = 0;  // position within its kind
  ExprPtr pre;
  Action action;
  ExprPtr post;
  std::string provenance;
};

struct ProofOptions {
  bool strict_stability = true;          // every atomic action is checked for interference
  Clock clock_bound = 64;                // t and snapshots range over 0..clock_bound
  std::uint64_t node_budget = 50000000;  // enumeration nodes per VC
  Value tolerance = 0;                   // default approx() theta
  CostModel costs;
  unsigned jobs = 1;
};

/// Pre-assertion used for VCs at `loc`: the annotation conjoined with any
/// leaky mark there. Throws AnnotationError when a statement label lacks
/// an annotation.
ExprPtr effective_pre(const AnnotatedProgram& ap, Location loc);

/// {initial state} -> conjunction of every thread's pre at l0.
std::vector<VC> gen_initial_vcs(const AnnotatedProgram& ap);
std::vector<VC> gen_sequential_vcs(const AnnotatedProgram& ap, ThreadId t);
std::vector<VC> gen_interference_vcs(const AnnotatedProgram& ap, const ProofOptions& o);
/// Per leaky mark A at output T of thread j and each assignment/await S of
/// another thread with {P} S {Q}: {Q and A} T {Q}, {P and A} T {P},
/// {A and P} S {A}.
std::vector<VC> gen_leaky_vcs(const AnnotatedProgram& ap, std::vector<std::string>* notices = nullptr);

enum class VcStatus : std::uint8_t { Valid, Counterexample, Undischarged };

std::string_view to_string(VcStatus s);

struct Counterexample {
  std::map<std::string, Value> before;  // pre-state symbols
  std::map<std::string, Value> after;   // post-state symbols (empty on a domain violation)
  std::string reason;
};

struct VcResult {
  VcStatus status = VcStatus::Valid;
  std::optional<Counterexample> counterexample;
  std::string reason;  // for Undischarged
  std::uint64_t nodes = 0;
};

/// Enumerates every assignment of the referenced symbols within their
/// domains, pruning with three-valued partial evaluation of `pre`.
/// A domain violation by the action counts as a counterexample.
VcResult discharge_vc(const VC& vc, const Program& p, const ProofOptions& o);

/// SMT-LIB v2 script asserting pre, the transition and (not post or an
/// out-of-domain write); unsat means valid. Throws SemanticError on
/// unsupported constructs (loops inside awaits, indexed snapshots).
std::string emit_smtlib(const VC& vc, const Program& p, const ProofOptions& o);

/// vc_<kind>_<index>.smt2
std::string smt_file_name(const VC& vc);

enum class ProofVerdict : std::uint8_t { Proven, Refuted, Incomplete };

std::string_view to_string(ProofVerdict v);

struct ProofResult {
  std::vector<VC> vcs;
  std::vector<VcResult> results;
  ProofVerdict verdict = ProofVerdict::Proven;
  bool leak_certified = false;
  std::vector<Location> leaky_locations;
  std::string message;
  std::vector<std::string> notices;

  std::size_t count(VcKind k, VcStatus s) const;
};

/// All VCs of the outline, discharged.
std::vector<VC> gen_all_vcs(const AnnotatedProgram& ap, const ProofOptions& o,
                            std::vector<std::string>* notices = nullptr);
ProofResult check_proof(const AnnotatedProgram& ap, const ProofOptions& o = {});

/// Outline whose pre at each control location is the disjunction, over
/// reachable configurations, of the exact store, clock, other threads'
/// locations and this thread's snapshots named by `leaky`. The leaky marks
/// are attached as given. `complete` is false when exploration was cut.
AnnotatedProgram reachable_outline(const Program& p, const SecretDomain& domain, const ExploreBounds& b,
                                   const CostModel& costs, const std::map<Location, ExprPtr>& leaky = {},
                                   bool* complete = nullptr);

}  // namespace leaklab
