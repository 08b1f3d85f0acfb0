#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

#include "leaklab/error.hpp"
#include "leaklab/proofs.hpp"

namespace leaklab {

namespace {

using K3 = std::optional<Value>;

/// Partial valuation of the VC symbols. Unknown entries are nullopt.
struct SymState {
  std::vector<K3> vars;                 // by declaration slot
  K3 t;
  std::vector<std::vector<K3>> snaps;   // [thread][label]
  std::vector<K3> pcs;                  // by thread
};

struct Unsupported {
  std::string what;
};

/// Three-valued (Kleene) evaluation over a partial valuation.
class Eval3 {
 public:
  explicit Eval3(Value tolerance) : tolerance_(tolerance) {}

  K3 operator()(const Expr& e, const SymState& s) { return eval(e, s); }

 private:
  K3 eval(const Expr& e, const SymState& s) {
    switch (e.kind) {
      case ExprKind::Int:
      case ExprKind::Bool:
        return e.value;
      case ExprKind::Str:
        throw Unsupported{"string literal"};
      case ExprKind::Var:
        return s.vars[static_cast<std::size_t>(e.slot)];
      case ExprKind::Bound:
        return bound_[bound_.size() - 1 - static_cast<std::size_t>(e.slot)];
      case ExprKind::Clock:
        return s.t;
      case ExprKind::Snapshot:
        if (e.arrival) throw Unsupported{"indexed snapshot"};
        return s.snaps[e.loc.thread][e.loc.label];
      case ExprKind::At: {
        const K3 pc = s.pcs[e.loc.thread];
        if (!pc) return std::nullopt;
        return *pc == static_cast<Value>(e.loc.label) ? 1 : 0;
      }
      case ExprKind::Quant: {
        const bool forall = e.quant == Quantifier::ForAll;
        bool unknown = false;
        for (Value v = e.lo; v <= e.hi; ++v) {
          bound_.push_back(v);
          const K3 b = eval(*e.args[0], s);
          bound_.pop_back();
          if (!b) {
            unknown = true;
          } else if ((*b != 0) != forall) {
            return forall ? 0 : 1;
          }
        }
        if (unknown) return std::nullopt;
        return forall ? 1 : 0;
      }
      case ExprKind::Approx: {
        const K3 a = eval(*e.args[0], s);
        const K3 b = eval(*e.args[1], s);
        const K3 th = e.args.size() > 2 ? eval(*e.args[2], s) : K3(tolerance_);
        if (!a || !b || !th) return std::nullopt;
        return (*a - *b <= *th && *b - *a <= *th) ? 1 : 0;
      }
      case ExprKind::Unary: {
        const K3 v = eval(*e.args[0], s);
        if (!v) return std::nullopt;
        return e.unop == UnOp::Neg ? -*v : (*v ? 0 : 1);
      }
      case ExprKind::Binary:
        break;
    }
    const K3 a = eval(*e.args[0], s);
    switch (e.binop) {
      case BinOp::And: {
        if (a && !*a) return 0;
        const K3 b = eval(*e.args[1], s);
        if (b && !*b) return 0;
        if (a && b) return 1;
        return std::nullopt;
      }
      case BinOp::Or: {
        if (a && *a) return 1;
        const K3 b = eval(*e.args[1], s);
        if (b && *b) return 1;
        if (a && b) return 0;
        return std::nullopt;
      }
      case BinOp::Implies: {
        if (a && !*a) return 1;
        const K3 b = eval(*e.args[1], s);
        if (b && *b) return 1;
        if (a && b) return 0;
        return std::nullopt;
      }
      default:
        break;
    }
    const K3 b = eval(*e.args[1], s);
    if (!a || !b) return std::nullopt;
    switch (e.binop) {
      case BinOp::Add: return *a + *b;
      case BinOp::Sub: return *a - *b;
      case BinOp::Mul: return *a * *b;
      case BinOp::Eq: return *a == *b;
      case BinOp::Ne: return *a != *b;
      case BinOp::Lt: return *a < *b;
      case BinOp::Le: return *a <= *b;
      case BinOp::Gt: return *a > *b;
      case BinOp::Ge: return *a >= *b;
      case BinOp::Iff: return (*a != 0) == (*b != 0);
      default: return std::nullopt;
    }
  }

  Value tolerance_;
  std::vector<Value> bound_;
};

struct Symbols {
  std::set<int> vars;
  bool t = false;
  std::set<Location> snaps;
  std::set<ThreadId> pcs;
};

void collect(const Expr& e, Symbols& s) {
  switch (e.kind) {
    case ExprKind::Var: s.vars.insert(e.slot); break;
    case ExprKind::Clock: s.t = true; break;
    case ExprKind::Snapshot: s.snaps.insert(e.loc); break;
    case ExprKind::At: s.pcs.insert(e.loc.thread); break;
    default: break;
  }
  for (const auto& a : e.args) collect(*a, s);
}

void collect_stmt(const Thread& t, StmtId l, Symbols& s, bool deep = false) {
  const Stmt& st = t.at(l);
  if (st.expr) collect(*st.expr, s);
  if (st.target >= 0) s.vars.insert(st.target);
  if (deep || st.kind == StmtKind::Await) {
    for (StmtId c : st.body) collect_stmt(t, c, s, true);
    for (StmtId c : st.orelse) collect_stmt(t, c, s, true);
  }
}

enum class ExecKind { Blocked, Ok, Violation };

struct Exec {
  ExecKind kind = ExecKind::Ok;
  std::string message;
};

/// Direct big-step interpreter for one atomic action on a total valuation.
class ActionRunner {
 public:
  ActionRunner(const Program& p, const CostModel& costs, Eval3& ev) : p_(p), costs_(costs), ev_(ev) {}

  Exec run(const Action& a, SymState& s) {
    if (a.mode == ActionMode::Init) return {};
    const Thread& th = p_.threads[a.loc.thread];
    const Stmt& st = th.at(a.loc.label);
    Clock cost = 0;
    Exec r;
    switch (st.kind) {
      case StmtKind::If:
      case StmtKind::While: {
        const bool g = known(*st.expr, s) != 0;
        if (g != (a.mode == ActionMode::GuardTrue)) return {ExecKind::Blocked, ""};
        cost = own_cost(a.loc);
        break;
      }
      case StmtKind::Await: {
        if (!known(*st.expr, s)) return {ExecKind::Blocked, ""};
        cost = own_cost(a.loc);
        std::vector<StmtId> stack(st.body.rbegin(), st.body.rend());
        std::size_t steps = 0;
        while (!stack.empty()) {
          if (++steps > 100000) throw Unsupported{"await body does not terminate"};
          const Stmt& b = th.at(stack.back());
          const Location bl{a.loc.thread, b.label};
          if (b.kind == StmtKind::While) {
            if (known(*b.expr, s)) {
              stack.insert(stack.end(), b.body.rbegin(), b.body.rend());
            } else {
              stack.pop_back();
            }
            cost += own_cost(bl);
            continue;
          }
          stack.pop_back();
          if (b.kind == StmtKind::If) {
            const auto& br = known(*b.expr, s) ? b.body : b.orelse;
            stack.insert(stack.end(), br.rbegin(), br.rend());
            cost += own_cost(bl);
            continue;
          }
          Clock c = 0;
          r = simple(b, bl, s, c);
          if (r.kind != ExecKind::Ok) return r;
          cost += c;
        }
        break;
      }
      default:
        r = simple(st, a.loc, s, cost);
        if (r.kind != ExecKind::Ok) return r;
        break;
    }
    if (s.t) s.t = *s.t + cost;
    s.pcs[a.loc.thread] = a.successor;
    s.snaps[a.loc.thread][a.successor] = s.t;
    return r;
  }

 private:
  Value known(const Expr& e, const SymState& s) {
    const K3 v = ev_(e, s);
    if (!v) throw Unsupported{"action reads an unassigned symbol"};
    return *v;
  }

  Clock own_cost(Location l) const {
    if (auto o = costs_.override_for(p_, l)) return *o;
    return costs_.unit_cost;
  }

  Exec simple(const Stmt& st, Location l, SymState& s, Clock& cost) {
    switch (st.kind) {
      case StmtKind::Assign: {
        const Value v = known(*st.expr, s);
        const VarDecl& d = p_.vars[static_cast<std::size_t>(st.target)];
        if (!d.in_domain(v)) {
          return {ExecKind::Violation, d.name + " = " + std::to_string(v) + " outside " + std::to_string(d.lo) +
                                           ".." + std::to_string(d.hi)};
        }
        s.vars[static_cast<std::size_t>(st.target)] = v;
        cost = own_cost(l);
        return {};
      }
      case StmtKind::Delay: {
        const Value v = known(*st.expr, s);
        if (auto o = costs_.override_for(p_, l)) {
          cost = *o;
        } else if (v < 0) {
          return {ExecKind::Violation, "negative delay " + std::to_string(v)};
        } else {
          cost = std::max<Clock>(1, v);
        }
        return {};
      }
      case StmtKind::Skip:
      case StmtKind::Print:
        if (st.kind == StmtKind::Print && st.expr->kind != ExprKind::Str) known(*st.expr, s);
        cost = own_cost(l);
        return {};
      default:
        throw Unsupported{"nested compound statement"};
    }
  }

  const Program& p_;
  const CostModel& costs_;
  Eval3& ev_;
};

struct Found {};
struct OutOfBudget {};

struct Symbol {
  enum Kind { Pc, Var, Time, Snap } kind;
  std::size_t index = 0;  // thread / slot
  Location loc;
  std::vector<Value> values;
};

std::map<std::string, Value> render_state(const Program& p, const SymState& s) {
  std::map<std::string, Value> out;
  for (std::size_t i = 0; i < s.vars.size(); ++i) {
    if (s.vars[i]) out[p.vars[i].name] = *s.vars[i];
  }
  if (s.t) out["t"] = *s.t;
  for (ThreadId t = 0; t < s.snaps.size(); ++t) {
    for (StmtId l = 0; l < s.snaps[t].size(); ++l) {
      if (s.snaps[t][l]) out["t@" + p.location_name(Location{t, l})] = *s.snaps[t][l];
    }
  }
  for (ThreadId t = 0; t < s.pcs.size(); ++t) {
    if (s.pcs[t]) out["at:" + p.threads[t].name] = *s.pcs[t];
  }
  return out;
}

/// Replays a counterexample through the two-valued assertion evaluator.
bool self_check(const VC& vc, const Program& p, const ProofOptions& o, const SymState& before,
                const SymState* after) {
  auto env_eval = [&](const Expr& e, const SymState& s) {
    Store store;
    for (std::size_t i = 0; i < p.vars.size(); ++i) store.push_back(s.vars[i].value_or(p.vars[i].lo));
    Snapshots snaps(p);
    for (ThreadId t = 0; t < s.snaps.size(); ++t) {
      for (StmtId l = 0; l < s.snaps[t].size(); ++l) {
        if (s.snaps[t][l]) snaps.record(Location{t, l}, *s.snaps[t][l]);
      }
    }
    std::vector<StmtId> pcs;
    for (const auto& pc : s.pcs) pcs.push_back(static_cast<StmtId>(pc.value_or(0)));
    AssertionEnv env{&store, &snaps, s.t.value_or(0), &pcs, o.tolerance};
    return eval_assertion(e, env);
  };
  if (!env_eval(*vc.pre, before)) return false;
  if (after && env_eval(*vc.post, *after)) return false;
  return true;
}

}  // namespace

VcResult discharge_vc(const VC& vc, const Program& p, const ProofOptions& o) {
  VcResult result;
  Symbols pre_syms, post_syms, act_syms;
  collect(*vc.pre, pre_syms);
  collect(*vc.post, post_syms);
  if (vc.action.mode != ActionMode::Init) {
    collect_stmt(p.threads[vc.action.loc.thread], vc.action.loc.label, act_syms);
    act_syms.pcs.insert(vc.action.loc.thread);
  }

  std::optional<Location> written;
  if (vc.action.mode != ActionMode::Init) written = Location{vc.action.loc.thread, vc.action.successor};

  std::vector<Symbol> order;
  std::set<ThreadId> pcs = pre_syms.pcs;
  pcs.insert(post_syms.pcs.begin(), post_syms.pcs.end());
  pcs.insert(act_syms.pcs.begin(), act_syms.pcs.end());
  for (ThreadId t : pcs) {
    Symbol s{Symbol::Pc, t, {}, {}};
    for (StmtId l : control_points(p.threads[t])) s.values.push_back(l);
    order.push_back(std::move(s));
  }
  std::set<int> vars = pre_syms.vars;
  vars.insert(post_syms.vars.begin(), post_syms.vars.end());
  vars.insert(act_syms.vars.begin(), act_syms.vars.end());
  for (int v : vars) {
    const VarDecl& d = p.vars[static_cast<std::size_t>(v)];
    Symbol s{Symbol::Var, static_cast<std::size_t>(v), {}, {}};
    for (Value x = d.lo; x <= d.hi; ++x) s.values.push_back(x);
    order.push_back(std::move(s));
  }
  std::vector<Value> clock_values;
  for (Clock c = 0; c <= o.clock_bound; ++c) clock_values.push_back(c);
  const bool need_t = pre_syms.t || post_syms.t || (written && post_syms.snaps.count(*written));
  if (need_t) order.push_back(Symbol{Symbol::Time, 0, {}, clock_values});
  std::set<Location> snaps = pre_syms.snaps;
  for (const Location& l : post_syms.snaps) {
    if (!written || l != *written) snaps.insert(l);
  }
  for (const Location& l : snaps) order.push_back(Symbol{Symbol::Snap, 0, l, clock_values});

  SymState state;
  state.vars.assign(p.vars.size(), std::nullopt);
  state.pcs.assign(p.threads.size(), std::nullopt);
  for (const auto& t : p.threads) state.snaps.emplace_back(t.stmts.size() + 1, std::nullopt);

  Eval3 ev(o.tolerance);
  ActionRunner runner(p, o.costs, ev);

  auto set = [&](const Symbol& s, K3 v) {
    switch (s.kind) {
      case Symbol::Pc: state.pcs[s.index] = v; break;
      case Symbol::Var: state.vars[s.index] = v; break;
      case Symbol::Time: state.t = v; break;
      case Symbol::Snap: state.snaps[s.loc.thread][s.loc.label] = v; break;
    }
  };

  auto leaf = [&]() {
    const K3 pre = ev(*vc.pre, state);
    if (!pre) throw Unsupported{"precondition not decided by the enumerated symbols"};
    if (!*pre) return;
    SymState after = state;
    const Exec r = runner.run(vc.action, after);
    if (r.kind == ExecKind::Blocked) return;
    Counterexample cex;
    cex.before = render_state(p, state);
    if (r.kind == ExecKind::Violation) {
      cex.reason = "domain violation: " + r.message;
      if (!self_check(vc, p, o, state, nullptr)) throw std::logic_error("counterexample self-check failed");
      result.counterexample = std::move(cex);
      throw Found{};
    }
    const K3 post = ev(*vc.post, after);
    if (!post) throw Unsupported{"postcondition not decided by the enumerated symbols"};
    if (*post) return;
    cex.after = render_state(p, after);
    cex.reason = "postcondition violated";
    if (!self_check(vc, p, o, state, &after)) throw std::logic_error("counterexample self-check failed");
    result.counterexample = std::move(cex);
    throw Found{};
  };

  std::function<void(std::size_t)> dfs = [&](std::size_t k) {
    if (++result.nodes > o.node_budget) throw OutOfBudget{};
    const K3 pre = ev(*vc.pre, state);
    if (pre && !*pre) return;
    if (k == order.size()) {
      leaf();
      return;
    }
    for (Value v : order[k].values) {
      set(order[k], v);
      dfs(k + 1);
    }
    set(order[k], std::nullopt);
  };

  try {
    dfs(0);
    result.status = VcStatus::Valid;
  } catch (const Found&) {
    result.status = VcStatus::Counterexample;
  } catch (const OutOfBudget&) {
    result.status = VcStatus::Undischarged;
    result.reason = "enumeration budget of " + std::to_string(o.node_budget) + " nodes exhausted";
  } catch (const Unsupported& u) {
    result.status = VcStatus::Undischarged;
    result.reason = "unsupported: " + u.what;
  }
  return result;
}

}  // namespace leaklab
