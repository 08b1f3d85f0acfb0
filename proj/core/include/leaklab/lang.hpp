#pragma once

// Abstract syntax of the concurrent while-language: expressions (shared with
// the assertion language), labelled statements, threads and programs.

#include <compare>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace leaklab {

using Value = std::int64_t;
using Clock = std::int64_t;
using StmtId = std::uint32_t;
using ThreadId = std::uint32_t;

inline constexpr ThreadId kUnresolvedThread = std::numeric_limits<ThreadId>::max();

enum class Type : std::uint8_t { Int, Bool };

/// A control location: thread index plus the statement label inside it.
/// Label `exit_label()` of a thread denotes its exit point.
struct Location {
  ThreadId thread = 0;
  StmtId label = 0;

  friend auto operator<=>(const Location&, const Location&) = default;
};

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class ExprKind : std::uint8_t {
  Int,
  Bool,
  Str,       // string literal; only legal as a print argument
  Var,       // program variable, `slot` is its declaration index
  Bound,     // quantifier-bound variable, `slot` is its de Bruijn index
  Unary,
  Binary,
  Clock,     // assertion-only: the current value of the global clock `t`
  Snapshot,  // assertion-only: t@l7, t@T2.l7, t@l7[1]
  At,        // assertion-only: at(T1.l3), thread control is at a location
  Quant,     // assertion-only: forall/exists x in lo..hi : body
  Approx,    // assertion-only: approx(a, b[, theta])
};

enum class UnOp : std::uint8_t { Neg, Not };

enum class BinOp : std::uint8_t {
  Add, Sub, Mul,
  Eq, Ne, Lt, Le, Gt, Ge,
  And, Or,
  Implies, Iff,  // assertion-only
};

enum class Quantifier : std::uint8_t { ForAll, Exists };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression node. Children live in `args`.
struct Expr {
  ExprKind kind = ExprKind::Int;
  Value value = 0;       // Int/Bool literal
  std::string name;      // Var/Bound/Quant variable name, Str text, Snapshot/At thread name as written
  int slot = -1;         // Var: declaration index; Bound: de Bruijn index
  UnOp unop = UnOp::Neg;
  BinOp binop = BinOp::Add;
  Quantifier quant = Quantifier::ForAll;
  Location loc;                          // Snapshot / At
  std::optional<std::uint32_t> arrival;  // Snapshot: 1-based arrival index, latest when empty
  Value lo = 0;                          // Quant range
  Value hi = 0;
  std::vector<ExprPtr> args;
};

ExprPtr make_int(Value v);
ExprPtr make_bool(bool b);
ExprPtr make_str(std::string text);
ExprPtr make_var(std::string name, int slot);
ExprPtr make_bound(std::string name, int depth);
ExprPtr make_unary(UnOp op, ExprPtr operand);
ExprPtr make_binary(BinOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_clock();
ExprPtr make_snapshot(Location loc, std::optional<std::uint32_t> arrival = std::nullopt);
ExprPtr make_at(Location loc);
ExprPtr make_quant(Quantifier q, std::string var, Value lo, Value hi, ExprPtr body);
ExprPtr make_approx(ExprPtr a, ExprPtr b, std::optional<ExprPtr> theta = std::nullopt);

/// Conjunction of all non-null parts; `true` when empty.
ExprPtr conjoin(const std::vector<ExprPtr>& parts);
ExprPtr disjoin(const std::vector<ExprPtr>& parts);

bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

/// True when the expression uses any assertion-only construct.
bool is_assertion_only(const Expr& e);

// ---------------------------------------------------------------------------
// Statements and programs
// ---------------------------------------------------------------------------

enum class StmtKind : std::uint8_t { Skip, Assign, Print, Delay, If, While, Await };

std::string_view to_string(StmtKind k);

/// A labelled statement stored in its thread's arena, indexed by label.
/// Compound statements refer to their children by label.
struct Stmt {
  StmtKind kind = StmtKind::Skip;
  StmtId label = 0;
  int target = -1;               // Assign: declaration index of the assigned variable
  ExprPtr expr;                  // Assign rhs, If/While/Await guard, Print/Delay argument
  std::vector<StmtId> body;      // If then-branch, While body, Await body
  std::vector<StmtId> orelse;    // If else-branch
};

struct Thread {
  std::string name;
  std::vector<Stmt> stmts;   // stmts[i].label == i, preorder
  std::vector<StmtId> body;  // top-level statement sequence

  StmtId exit_label() const { return static_cast<StmtId>(stmts.size()); }
  const Stmt& at(StmtId label) const { return stmts.at(label); }
};

struct VarDecl {
  std::string name;
  Type type = Type::Int;
  Value lo = 0;  // inclusive domain bounds; bool is 0..1
  Value hi = 0;
  std::string label = "low";  // security label name
  bool dynamic = false;       // label may be raised by flows (dynamic labelling)
  bool secret = false;        // initial value ranges over the whole domain
  Value init = 0;             // ignored when secret

  bool in_domain(Value v) const { return v >= lo && v <= hi; }
  std::uint64_t domain_size() const { return static_cast<std::uint64_t>(hi - lo) + 1; }
};

struct Program {
  std::vector<VarDecl> vars;
  std::vector<Thread> threads;

  int find_var(std::string_view name) const;
  std::optional<ThreadId> find_thread(std::string_view name) const;
  std::vector<int> secret_slots() const;
  std::string location_name(Location loc) const;  // "T2.l7"
};

// ---------------------------------------------------------------------------
// Unlabelled syntax trees. Builders and the parser produce these;
// label_statements() flattens them into a labelled Program.
// ---------------------------------------------------------------------------

struct StmtTree {
  StmtKind kind = StmtKind::Skip;
  int target = -1;
  ExprPtr expr;
  std::vector<StmtTree> body;
  std::vector<StmtTree> orelse;
};

struct ThreadTree {
  std::string name;
  std::vector<StmtTree> body;
};

struct ProgramTree {
  std::vector<VarDecl> vars;
  std::vector<ThreadTree> threads;
};

namespace build {
StmtTree skip();
StmtTree assign(int target, ExprPtr rhs);
StmtTree print(ExprPtr arg);
StmtTree delay(ExprPtr arg);
StmtTree if_(ExprPtr guard, std::vector<StmtTree> then_branch, std::vector<StmtTree> else_branch = {});
StmtTree while_(ExprPtr guard, std::vector<StmtTree> body);
StmtTree await(ExprPtr guard, std::vector<StmtTree> body);
}  // namespace build

/// Assigns preorder labels l0, l1, ... per thread (then-branch before
/// else-branch) and validates the result (see validate()).
Program label_statements(const ProgramTree& tree);

/// Re-derives the tree form; label_statements(to_tree(p)) == p.
ProgramTree to_tree(const Program& p);

/// Throws SemanticError on: no threads, duplicate variable/thread names,
/// unresolved variables, ill-typed expressions, nested await, assertion-only
/// constructs inside statements, bad declarations.
void validate(const Program& p);

bool structurally_equal(const Program& a, const Program& b);

/// Static type of an expression; throws SemanticError when ill-typed.
Type type_of(const Expr& e, const Program& p);

std::set<std::string> free_vars(const Expr& e);
std::set<std::string> free_vars(const StmtTree& s, const Program& p);
std::set<std::string> free_vars(const Thread& t, StmtId label, const Program& p);

/// Static control flow of one thread.
struct ControlFlow {
  /// Where control goes after the statement completes normally (for If/While,
  /// after the whole compound statement). Exit label for the last statement.
  std::vector<StmtId> succ;
  /// Successor of an If/While guard step taking the true / false branch.
  std::vector<StmtId> succ_true;
  std::vector<StmtId> succ_false;
  /// True for statements nested inside an await body (never a control point).
  std::vector<bool> inside_await;
  /// Parent compound statement, or the exit label for top-level statements.
  std::vector<StmtId> parent;
};

ControlFlow control_flow(const Thread& t);

/// Labels a thread's control can rest at: every statement outside await
/// bodies plus the exit label, ascending.
std::vector<StmtId> control_points(const Thread& t);

}  // namespace leaklab
