#pragma once

// Assertions over program variables, the clock `t`, snapshots `t@l` and
// control predicates `at(T.l)`; the leaky-assertion test.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "leaklab/explorer.hpp"
#include "leaklab/lang.hpp"
#include "leaklab/parser.hpp"
#include "leaklab/semantics.hpp"

namespace leaklab {

/// A program with its proof outline.
struct AnnotatedProgram {
  Program program;
  std::map<Location, ExprPtr> pre;     // pre-assertion per control location
  std::map<ThreadId, ExprPtr> post;    // thread post-assertions
  std::map<Location, ExprPtr> leaky;   // `@leaky` marks

  /// Conjoins repeated annotations at one location. Throws AnnotationError on
  /// marks at non-control locations and on leaky marks without a secret.
  static AnnotatedProgram from_source(const ParsedSource& src);

  /// Annotation at `loc`; the thread post at the exit label (true when the
  /// thread has no post). nullptr when a statement label is unannotated.
  ExprPtr pre_at(Location loc) const;
};

AnnotatedProgram parse_annotated(std::string_view text);

/// Everything an assertion may refer to.
struct AssertionEnv {
  const Store* store = nullptr;
  const Snapshots* snapshots = nullptr;
  Clock clock = 0;
  const std::vector<StmtId>* pcs = nullptr;  // control location per thread
  Value tolerance = 0;                       // default theta for approx()
};

/// Two-valued evaluation. Throws SnapshotUndefined when a referenced
/// snapshot has no recorded arrival.
bool eval_assertion(const Expr& a, const AssertionEnv& env);
Value eval_assertion_term(const Expr& e, const AssertionEnv& env);

/// Evaluates against a configuration of `p`.
bool eval_assertion(const Expr& a, const Program& p, const Configuration& c, Value tolerance = 0);

/// Secret variables whose names occur in `a`.
std::vector<int> secret_vars_in(const Expr& a, const Program& p);

enum class LeakyVerdict : std::uint8_t { Leaky, NotLeaky, Vacuous };

std::string_view to_string(LeakyVerdict v);

struct LeakyResult {
  LeakyVerdict verdict = LeakyVerdict::NotLeaky;
  int secret_slot = -1;              // the determinized variable
  std::vector<Value> consistent;     // its values compatible with the assertion
  std::vector<Value> excluded;       // its values ruled out
  bool observation_conditioned = false;  // found by varying the secret in one state
  std::string witness;               // state used by the observation-conditioned test
  std::size_t states = 0;            // reachable states at the location
  std::size_t satisfying = 0;
  std::size_t undefined = 0;         // states where a snapshot was undefined
  bool complete = true;              // exploration finished within bounds
};

/// Leaky when, for some secret variable x, either the values of x among the
/// reachable states at `loc` satisfying `a` form a nonempty strict subset of
/// x's domain, or some reachable state satisfies `a` while changing only x
/// in it falsifies `a` for part of x's domain. Vacuous when no reachable
/// state satisfies `a`.
LeakyResult is_leaky_assertion(const ExprPtr& a, Location loc, const Program& p, const SecretDomain& domain,
                               const ExploreBounds& b, const CostModel& costs = {}, Value tolerance = 0);

}  // namespace leaklab
