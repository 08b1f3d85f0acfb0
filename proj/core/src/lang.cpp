#include "leaklab/lang.hpp"

#include <functional>
#include <unordered_set>
#include <utility>

#include "leaklab/error.hpp"

namespace leaklab {

namespace {

std::shared_ptr<Expr> node(ExprKind kind) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  return e;
}

}  // namespace

ExprPtr make_int(Value v) {
  auto e = node(ExprKind::Int);
  e->value = v;
  return e;
}

ExprPtr make_bool(bool b) {
  auto e = node(ExprKind::Bool);
  e->value = b ? 1 : 0;
  return e;
}

ExprPtr make_str(std::string text) {
  auto e = node(ExprKind::Str);
  e->name = std::move(text);
  return e;
}

ExprPtr make_var(std::string name, int slot) {
  auto e = node(ExprKind::Var);
  e->name = std::move(name);
  e->slot = slot;
  return e;
}

ExprPtr make_bound(std::string name, int depth) {
  auto e = node(ExprKind::Bound);
  e->name = std::move(name);
  e->slot = depth;
  return e;
}

ExprPtr make_unary(UnOp op, ExprPtr operand) {
  auto e = node(ExprKind::Unary);
  e->unop = op;
  e->args = {std::move(operand)};
  return e;
}

ExprPtr make_binary(BinOp op, ExprPtr lhs, ExprPtr rhs) {
  auto e = node(ExprKind::Binary);
  e->binop = op;
  e->args = {std::move(lhs), std::move(rhs)};
  return e;
}

ExprPtr make_clock() { return node(ExprKind::Clock); }

ExprPtr make_snapshot(Location loc, std::optional<std::uint32_t> arrival) {
  auto e = node(ExprKind::Snapshot);
  e->loc = loc;
  e->arrival = arrival;
  return e;
}

ExprPtr make_at(Location loc) {
  auto e = node(ExprKind::At);
  e->loc = loc;
  return e;
}

ExprPtr make_quant(Quantifier q, std::string var, Value lo, Value hi, ExprPtr body) {
  auto e = node(ExprKind::Quant);
  e->quant = q;
  e->name = std::move(var);
  e->lo = lo;
  e->hi = hi;
  e->args = {std::move(body)};
  return e;
}

ExprPtr make_approx(ExprPtr a, ExprPtr b, std::optional<ExprPtr> theta) {
  auto e = node(ExprKind::Approx);
  e->args = {std::move(a), std::move(b)};
  if (theta) e->args.push_back(std::move(*theta));
  return e;
}

ExprPtr conjoin(const std::vector<ExprPtr>& parts) {
  ExprPtr acc;
  for (const auto& p : parts) {
    if (!p) continue;
    if (p->kind == ExprKind::Bool && p->value == 1) continue;
    acc = acc ? make_binary(BinOp::And, acc, p) : p;
  }
  return acc ? acc : make_bool(true);
}

ExprPtr disjoin(const std::vector<ExprPtr>& parts) {
  ExprPtr acc;
  for (const auto& p : parts) {
    if (!p) continue;
    acc = acc ? make_binary(BinOp::Or, acc, p) : p;
  }
  return acc ? acc : make_bool(false);
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::Int:
    case ExprKind::Bool:
      return a.value == b.value;
    case ExprKind::Str:
      return a.name == b.name;
    case ExprKind::Var:
      return a.slot == b.slot && a.name == b.name;
    case ExprKind::Bound:
      return a.slot == b.slot;
    case ExprKind::Unary:
      if (a.unop != b.unop) return false;
      break;
    case ExprKind::Binary:
      if (a.binop != b.binop) return false;
      break;
    case ExprKind::Clock:
      return true;
    case ExprKind::Snapshot:
      return a.loc == b.loc && a.arrival == b.arrival;
    case ExprKind::At:
      return a.loc == b.loc;
    case ExprKind::Quant:
      if (a.quant != b.quant || a.lo != b.lo || a.hi != b.hi) return false;
      break;
    case ExprKind::Approx:
      break;
  }
  if (a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return structurally_equal(*a, *b);
}

bool is_assertion_only(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Clock:
    case ExprKind::Snapshot:
    case ExprKind::At:
    case ExprKind::Quant:
    case ExprKind::Approx:
    case ExprKind::Bound:
      return true;
    case ExprKind::Binary:
      if (e.binop == BinOp::Implies || e.binop == BinOp::Iff) return true;
      break;
    default:
      break;
  }
  for (const auto& a : e.args) {
    if (is_assertion_only(*a)) return true;
  }
  return false;
}

std::string_view to_string(StmtKind k) {
  switch (k) {
    case StmtKind::Skip: return "skip";
    case StmtKind::Assign: return "assign";
    case StmtKind::Print: return "print";
    case StmtKind::Delay: return "delay";
    case StmtKind::If: return "if";
    case StmtKind::While: return "while";
    case StmtKind::Await: return "await";
  }
  return "?";
}

int Program::find_var(std::string_view name) const {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::optional<ThreadId> Program::find_thread(std::string_view name) const {
  for (std::size_t i = 0; i < threads.size(); ++i) {
    if (threads[i].name == name) return static_cast<ThreadId>(i);
  }
  return std::nullopt;
}

std::vector<int> Program::secret_slots() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].secret) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::string Program::location_name(Location loc) const {
  std::string thread = loc.thread < threads.size() ? threads[loc.thread].name
                                                   : "#" + std::to_string(loc.thread);
  return thread + ".l" + std::to_string(loc.label);
}

namespace build {

StmtTree skip() { return StmtTree{}; }

StmtTree assign(int target, ExprPtr rhs) {
  StmtTree s;
  s.kind = StmtKind::Assign;
  s.target = target;
  s.expr = std::move(rhs);
  return s;
}

StmtTree print(ExprPtr arg) {
  StmtTree s;
  s.kind = StmtKind::Print;
  s.expr = std::move(arg);
  return s;
}

StmtTree delay(ExprPtr arg) {
  StmtTree s;
  s.kind = StmtKind::Delay;
  s.expr = std::move(arg);
  return s;
}

StmtTree if_(ExprPtr guard, std::vector<StmtTree> then_branch, std::vector<StmtTree> else_branch) {
  StmtTree s;
  s.kind = StmtKind::If;
  s.expr = std::move(guard);
  s.body = std::move(then_branch);
  s.orelse = std::move(else_branch);
  return s;
}

StmtTree while_(ExprPtr guard, std::vector<StmtTree> body) {
  StmtTree s;
  s.kind = StmtKind::While;
  s.expr = std::move(guard);
  s.body = std::move(body);
  return s;
}

StmtTree await(ExprPtr guard, std::vector<StmtTree> body) {
  StmtTree s;
  s.kind = StmtKind::Await;
  s.expr = std::move(guard);
  s.body = std::move(body);
  return s;
}

}  // namespace build

namespace {

StmtId flatten(const StmtTree& tree, Thread& out) {
  const auto label = static_cast<StmtId>(out.stmts.size());
  out.stmts.emplace_back();
  {
    Stmt& s = out.stmts.back();
    s.kind = tree.kind;
    s.label = label;
    s.target = tree.target;
    s.expr = tree.expr;
  }
  std::vector<StmtId> body;
  for (const auto& child : tree.body) body.push_back(flatten(child, out));
  std::vector<StmtId> orelse;
  for (const auto& child : tree.orelse) orelse.push_back(flatten(child, out));
  out.stmts[label].body = std::move(body);
  out.stmts[label].orelse = std::move(orelse);
  return label;
}

StmtTree unflatten(const Thread& t, StmtId label) {
  const Stmt& s = t.at(label);
  StmtTree tree;
  tree.kind = s.kind;
  tree.target = s.target;
  tree.expr = s.expr;
  for (StmtId c : s.body) tree.body.push_back(unflatten(t, c));
  for (StmtId c : s.orelse) tree.orelse.push_back(unflatten(t, c));
  return tree;
}

}  // namespace

Program label_statements(const ProgramTree& tree) {
  Program p;
  p.vars = tree.vars;
  for (const auto& tt : tree.threads) {
    Thread t;
    t.name = tt.name;
    for (const auto& s : tt.body) t.body.push_back(flatten(s, t));
    p.threads.push_back(std::move(t));
  }
  validate(p);
  return p;
}

ProgramTree to_tree(const Program& p) {
  ProgramTree tree;
  tree.vars = p.vars;
  for (const auto& t : p.threads) {
    ThreadTree tt;
    tt.name = t.name;
    for (StmtId s : t.body) tt.body.push_back(unflatten(t, s));
    tree.threads.push_back(std::move(tt));
  }
  return tree;
}

Type type_of(const Expr& e, const Program& p) {
  auto expect = [&](const ExprPtr& sub, Type want, const char* what) {
    if (type_of(*sub, p) != want) {
      throw SemanticError(std::string("type error: ") + what + " expects " +
                          (want == Type::Int ? "int" : "bool") + " operand");
    }
  };
  switch (e.kind) {
    case ExprKind::Int:
      return Type::Int;
    case ExprKind::Bool:
      return Type::Bool;
    case ExprKind::Str:
      throw SemanticError("type error: string literal is only allowed as a print argument");
    case ExprKind::Var:
      if (e.slot < 0 || static_cast<std::size_t>(e.slot) >= p.vars.size()) {
        throw SemanticError("undeclared variable '" + e.name + "'");
      }
      return p.vars[e.slot].type;
    case ExprKind::Bound:
    case ExprKind::Clock:
    case ExprKind::Snapshot:
      return Type::Int;
    case ExprKind::At:
      return Type::Bool;
    case ExprKind::Unary:
      if (e.unop == UnOp::Neg) {
        expect(e.args[0], Type::Int, "unary '-'");
        return Type::Int;
      }
      expect(e.args[0], Type::Bool, "'!'");
      return Type::Bool;
    case ExprKind::Binary:
      switch (e.binop) {
        case BinOp::Add:
        case BinOp::Sub:
        case BinOp::Mul:
          expect(e.args[0], Type::Int, "arithmetic");
          expect(e.args[1], Type::Int, "arithmetic");
          return Type::Int;
        case BinOp::Lt:
        case BinOp::Le:
        case BinOp::Gt:
        case BinOp::Ge:
          expect(e.args[0], Type::Int, "comparison");
          expect(e.args[1], Type::Int, "comparison");
          return Type::Bool;
        case BinOp::Eq:
        case BinOp::Ne: {
          const Type l = type_of(*e.args[0], p);
          if (type_of(*e.args[1], p) != l) throw SemanticError("type error: '=' operands differ in type");
          return Type::Bool;
        }
        case BinOp::And:
        case BinOp::Or:
        case BinOp::Implies:
        case BinOp::Iff:
          expect(e.args[0], Type::Bool, "connective");
          expect(e.args[1], Type::Bool, "connective");
          return Type::Bool;
      }
      break;
    case ExprKind::Quant:
      expect(e.args[0], Type::Bool, "quantifier body");
      return Type::Bool;
    case ExprKind::Approx:
      for (const auto& a : e.args) expect(a, Type::Int, "approx");
      return Type::Bool;
  }
  throw SemanticError("type error: unknown expression");
}

namespace {

void validate_stmt(const Program& p, const Thread& t, StmtId label, bool in_await) {
  const Stmt& s = t.at(label);
  const std::string where = t.name + ".l" + std::to_string(label);
  auto check_expr = [&](const ExprPtr& e) {
    if (!e) throw SemanticError(where + ": missing expression");
    if (is_assertion_only(*e)) {
      throw SemanticError(where + ": assertion-only construct inside a statement");
    }
  };
  switch (s.kind) {
    case StmtKind::Skip:
      break;
    case StmtKind::Assign: {
      check_expr(s.expr);
      if (s.target < 0 || static_cast<std::size_t>(s.target) >= p.vars.size()) {
        throw SemanticError(where + ": assignment to undeclared variable");
      }
      if (type_of(*s.expr, p) != p.vars[s.target].type) {
        throw SemanticError(where + ": type error in assignment to '" + p.vars[s.target].name + "'");
      }
      break;
    }
    case StmtKind::Print:
      check_expr(s.expr);
      if (s.expr->kind != ExprKind::Str) type_of(*s.expr, p);
      break;
    case StmtKind::Delay:
      check_expr(s.expr);
      if (type_of(*s.expr, p) != Type::Int) throw SemanticError(where + ": delay expects an int");
      break;
    case StmtKind::If:
    case StmtKind::While:
    case StmtKind::Await:
      check_expr(s.expr);
      if (type_of(*s.expr, p) != Type::Bool) {
        throw SemanticError(where + ": " + std::string(to_string(s.kind)) + " guard must be bool");
      }
      if (s.kind == StmtKind::Await && in_await) {
        throw SemanticError(where + ": nested await is not allowed");
      }
      break;
  }
  const bool child_in_await = in_await || s.kind == StmtKind::Await;
  for (StmtId c : s.body) validate_stmt(p, t, c, child_in_await);
  for (StmtId c : s.orelse) validate_stmt(p, t, c, child_in_await);
}

}  // namespace

void validate(const Program& p) {
  if (p.threads.empty()) throw SemanticError("program has no threads");
  std::unordered_set<std::string> names;
  for (const auto& v : p.vars) {
    if (!names.insert(v.name).second) throw SemanticError("duplicate declaration of '" + v.name + "'");
    if (v.name == "t") throw SemanticError("'t' is reserved for the clock");
    if (v.lo > v.hi) throw SemanticError("empty domain for '" + v.name + "'");
    if (v.type == Type::Bool && (v.lo != 0 || v.hi != 1)) {
      throw SemanticError("bool variable '" + v.name + "' must have domain 0..1");
    }
    if (!v.secret && !v.in_domain(v.init)) {
      throw SemanticError("initial value of '" + v.name + "' is outside its domain");
    }
  }
  std::unordered_set<std::string> tnames;
  for (const auto& t : p.threads) {
    if (!tnames.insert(t.name).second) throw SemanticError("duplicate thread name '" + t.name + "'");
    for (std::size_t i = 0; i < t.stmts.size(); ++i) {
      if (t.stmts[i].label != i) throw SemanticError("thread " + t.name + ": labels are not dense");
    }
    for (StmtId s : t.body) validate_stmt(p, t, s, false);
  }
}

namespace {

bool equal_stmt(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.label == b.label && a.target == b.target &&
         structurally_equal(a.expr, b.expr) && a.body == b.body && a.orelse == b.orelse;
}

bool equal_decl(const VarDecl& a, const VarDecl& b) {
  return a.name == b.name && a.type == b.type && a.lo == b.lo && a.hi == b.hi && a.label == b.label &&
         a.dynamic == b.dynamic && a.secret == b.secret && (a.secret || a.init == b.init);
}

}  // namespace

bool structurally_equal(const Program& a, const Program& b) {
  if (a.vars.size() != b.vars.size() || a.threads.size() != b.threads.size()) return false;
  for (std::size_t i = 0; i < a.vars.size(); ++i) {
    if (!equal_decl(a.vars[i], b.vars[i])) return false;
  }
  for (std::size_t i = 0; i < a.threads.size(); ++i) {
    const auto& x = a.threads[i];
    const auto& y = b.threads[i];
    if (x.name != y.name || x.body != y.body || x.stmts.size() != y.stmts.size()) return false;
    for (std::size_t j = 0; j < x.stmts.size(); ++j) {
      if (!equal_stmt(x.stmts[j], y.stmts[j])) return false;
    }
  }
  return true;
}

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  std::function<void(const Expr&)> walk = [&](const Expr& x) {
    if (x.kind == ExprKind::Var) out.insert(x.name);
    for (const auto& a : x.args) walk(*a);
  };
  walk(e);
  return out;
}

std::set<std::string> free_vars(const StmtTree& s, const Program& p) {
  std::set<std::string> out;
  if (s.kind == StmtKind::Assign && s.target >= 0) out.insert(p.vars.at(s.target).name);
  if (s.expr) out.merge(free_vars(*s.expr));
  for (const auto& c : s.body) out.merge(free_vars(c, p));
  for (const auto& c : s.orelse) out.merge(free_vars(c, p));
  return out;
}

std::set<std::string> free_vars(const Thread& t, StmtId label, const Program& p) {
  return free_vars(unflatten(t, label), p);
}

ControlFlow control_flow(const Thread& t) {
  ControlFlow cf;
  const std::size_t n = t.stmts.size();
  cf.succ.assign(n, t.exit_label());
  cf.succ_true.assign(n, t.exit_label());
  cf.succ_false.assign(n, t.exit_label());
  cf.inside_await.assign(n, false);
  cf.parent.assign(n, t.exit_label());

  std::function<void(const std::vector<StmtId>&, StmtId, StmtId, bool)> walk =
      [&](const std::vector<StmtId>& block, StmtId after, StmtId parent, bool in_await) {
        for (std::size_t i = 0; i < block.size(); ++i) {
          const StmtId id = block[i];
          const StmtId next = i + 1 < block.size() ? block[i + 1] : after;
          cf.succ[id] = next;
          cf.inside_await[id] = in_await;
          cf.parent[id] = parent;
          const Stmt& s = t.at(id);
          switch (s.kind) {
            case StmtKind::If:
              cf.succ_true[id] = s.body.empty() ? next : s.body.front();
              cf.succ_false[id] = s.orelse.empty() ? next : s.orelse.front();
              walk(s.body, next, id, in_await);
              walk(s.orelse, next, id, in_await);
              break;
            case StmtKind::While:
              cf.succ_true[id] = s.body.empty() ? id : s.body.front();
              cf.succ_false[id] = next;
              walk(s.body, id, id, in_await);
              break;
            case StmtKind::Await:
              walk(s.body, next, id, true);
              break;
            default:
              break;
          }
        }
      };
  walk(t.body, t.exit_label(), t.exit_label(), false);
  return cf;
}

std::vector<StmtId> control_points(const Thread& t) {
  const ControlFlow cf = control_flow(t);
  std::vector<StmtId> out;
  for (StmtId i = 0; i < t.stmts.size(); ++i) {
    if (!cf.inside_await[i]) out.push_back(i);
  }
  out.push_back(t.exit_label());
  return out;
}

}  // namespace leaklab
