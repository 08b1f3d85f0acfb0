#pragma once

// Information-flow state machine: labelled states, the transition function
// with read/write flow constraints, views and non-interference checks.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "leaklab/lang.hpp"
#include "leaklab/lattice.hpp"

namespace leaklab {

enum class Access : std::uint8_t { Read, Write };

/// One input: user `user` performs `access` on variable `var`. A write may
/// carry the new value; without one the value is kept.
struct Op {
  std::string user;
  std::string var;
  Access access = Access::Read;
  std::optional<Value> value;

  bool operator==(const Op&) const = default;
};

std::string to_string(const Op& op);  // "bob:x:w=1"

struct MachineState {
  std::map<std::string, LabelId> users;      // user labels
  std::map<std::string, LabelId> var_labels;
  std::map<std::string, Value> values;

  auto operator<=>(const MachineState&) const = default;
};

/// The error result of a transition: the read that would break the policy.
struct Epsilon {
  Op op;
  std::string constraint;  // e.g. "high <= low"
};

using DeltaResult = std::variant<MachineState, Epsilon>;

/// Read: unchanged when label(v) <= label(u), else Epsilon.
/// Write: updates the value; when label(u) is not <= label(v) the variable
/// is relabelled to label(u) join label(v). Throws ConfigError for unknown
/// users or variables.
DeltaResult delta(const SecurityLattice& lat, const MachineState& q, const Op& op);

struct VarView {
  bool visible = false;
  LabelId label = 0;  // meaningful only when visible
  Value value = 0;

  bool operator==(const VarView&) const = default;
};

using ViewResult = std::map<std::string, VarView>;

ViewResult view(const SecurityLattice& lat, const MachineState& q, const std::string& user);

/// Throws ConfigError when the two states have different variable sets.
bool indistinguishable(const SecurityLattice& lat, const MachineState& a, const MachineState& b,
                       const std::string& user);

enum class NiStatus : std::uint8_t { NonInterfering, FlowViolation, ViewChanged };

std::string_view to_string(NiStatus s);

struct NiResult {
  NiStatus status = NiStatus::NonInterfering;
  std::vector<Op> witness;  // violating prefix or interleaving
  int condition = 0;        // concurrent check: 1 or 2 when violated
  std::string detail;

  bool ok() const { return status == NiStatus::NonInterfering; }
};

/// Runs every prefix of `ops` from q0; fails on the first Epsilon or on a
/// state whose view for `user` differs from q0's.
NiResult check_seq_ni(const SecurityLattice& lat, const std::vector<Op>& ops, const std::string& user,
                      const MachineState& q0);

/// Condition 1: both sequences are sequentially non-interfering. Condition
/// 2: every interleaving of every pair of prefixes keeps the view of q0.
NiResult check_conc_ni(const SecurityLattice& lat, const std::vector<Op>& s1, const std::vector<Op>& s2,
                       const std::string& user, const MachineState& q0);

/// Input sequence of one statement: reads of the free variables of its
/// expression in first-occurrence order, then the write (an assignment
/// writes its target, a print writes `out`). Compound statements give
/// their guard reads only. Values are not tracked.
std::vector<Op> iseq(const Program& p, ThreadId t, StmtId label, const std::string& user);

/// Every branch-resolved path of a thread as one input sequence. Loops are
/// unrolled at most `unroll` times; an await contributes its guard reads
/// followed by its body.
std::vector<std::vector<Op>> program_to_iseq(const Program& p, ThreadId t, const std::string& user,
                                             std::size_t unroll = 2);

/// Name of the output sink variable written by print.
inline constexpr std::string_view kOutputVar = "out";

/// A JSON scenario: lattice (optional, default low/high), users, variables
/// with label and value, observer, and one or two op sequences.
struct IfcScenario {
  SecurityLattice lattice = SecurityLattice::two_point();
  MachineState initial;
  std::string observer;
  std::vector<std::vector<Op>> sequences;

  static IfcScenario from_json(std::string_view text);
};

}  // namespace leaklab
