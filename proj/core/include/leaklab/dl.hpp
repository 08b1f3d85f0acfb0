#pragma once

// Dynamic labelling: forward propagation of security labels through
// variables and the program counter, flagging public outputs that depend on
// sensitive data, and duration-based leaky assertion synthesis.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "leaklab/explorer.hpp"
#include "leaklab/lang.hpp"
#include "leaklab/lattice.hpp"
#include "leaklab/semantics.hpp"

namespace leaklab {

enum class FlagReason : std::uint8_t { HighGuardOutput, HighDataOutput, HighGuardDelay };

std::string_view to_string(FlagReason r);

struct LabelFlag {
  Location loc;
  FlagReason reason = FlagReason::HighGuardOutput;
  std::vector<std::string> culprits;  // guard or data variables above the sink label
  std::string expression;             // the guard(s) or the output expression, as source text
};

struct LocationLabel {
  Location loc;
  StmtKind kind = StmtKind::Skip;
  LabelId pc = 0;
  std::optional<std::pair<std::string, LabelId>> assigned;  // target of an assignment and its label
};

struct LabelReport {
  SecurityLattice lattice = SecurityLattice::two_point();
  std::map<std::string, LabelId> var_labels;  // after propagation
  std::vector<LocationLabel> locations;       // every statement, thread then label order
  std::vector<LabelFlag> flags;
  std::vector<std::pair<Location, Location>> pairs;  // suggested snapshot pairs
  std::vector<std::string> notes;

  const LocationLabel* at(Location loc) const;
  bool flagged(Location loc) const;
};

/// Labels come from the declarations unless `labels` overrides them by
/// variable name. The output sink carries the lattice bottom. Dynamic
/// variables are raised to pc join label(rhs) until a fixpoint; a static
/// variable receiving a higher flow is reported in `notes`. Unknown labels
/// raise ConfigError. The returned report already holds
/// suggest_snapshot_pairs().
LabelReport dl_certify(const Program& p, const SecurityLattice& lattice,
                       const std::map<std::string, std::string>& labels = {});

/// Per statement block: for each compound statement that contains a
/// statement under a raised pc, the nearest unflagged low-pc print/delay
/// before it and after it in the same block. Duplicates are dropped.
std::vector<std::pair<Location, Location>> suggest_snapshot_pairs(const LabelReport& report, const Program& p);

enum class SynthesisStatus : std::uint8_t {
  Separable,
  Indeterminate,      // duration sets overlap
  SecretIndependent,  // every secret value sees the same durations
  Unexplored,         // some valuation never reaches both endpoints
  Truncated,          // exploration hit a bound
};

std::string_view to_string(SynthesisStatus s);

struct PairSynthesis {
  Location from;
  Location to;
  SynthesisStatus status = SynthesisStatus::Indeterminate;
  DurationStats isolated;  // thread alone, locations renumbered to thread 0
  DurationStats composed;
  int secret_slot = -1;                     // separating variable
  std::vector<std::pair<Value, Clock>> bands;  // secret value and lower threshold (first band has none)
  ExprPtr assertion;                        // only when Separable
  std::string notice;
};

struct SynthesisResult {
  std::vector<PairSynthesis> pairs;
  std::vector<std::pair<Location, ExprPtr>> assertions;  // the separable ones

  /// Each assertion as `@leaky {| ... |}` to splice before its location.
  std::vector<std::string> render(const Program& p) const;
};

/// Threshold between duration sets whose maxima and minima are a < b.
Clock separating_threshold(Clock a, Clock b);

/// Duration of `to` since `from` per valuation, alone and composed. An
/// assertion is emitted only when some secret variable's values have
/// pairwise disjoint, ordered duration ranges in the composed analysis:
/// (d < th1 -> x = c1) and (th1 <= d and d < th2 -> x = c2) and ... and
/// (d >= thk -> x = ck), where d = t@to - t@from.
SynthesisResult synthesize_leaky_assertions(const Program& p, const std::vector<std::pair<Location, Location>>& pairs,
                                            const SecretDomain& domain, const ExploreBounds& b,
                                            const CostModel& costs = {});

}  // namespace leaklab
