#include <set>
#include <sstream>

#include "leaklab/error.hpp"
#include "leaklab/proofs.hpp"

namespace leaklab {

namespace {

std::string quote(const std::string& name) { return "|" + name + "|"; }

std::string lit(Value v) { return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v); }

/// Current SMT term for every state component.
struct Env {
  std::map<int, std::string> vars;
  std::string t;
  std::map<Location, std::string> snaps;
  std::map<ThreadId, std::string> pcs;
};

class SmtWriter {
 public:
  SmtWriter(const Program& p, const ProofOptions& o) : p_(p), o_(o) {}

  std::string run(const VC& vc) {
    collect(*vc.pre);
    collect(*vc.post);
    const bool acts = vc.action.mode != ActionMode::Init;
    if (acts) {
      collect_stmt(p_.threads[vc.action.loc.thread], vc.action.loc.label);
      pcs_.insert(vc.action.loc.thread);
    }
    Env env;
    for (int v : vars_) {
      const VarDecl& d = p_.vars[static_cast<std::size_t>(v)];
      env.vars[v] = declare(quote(d.name), d.type);
      if (d.type == Type::Int) {
        assert_("(and (<= " + lit(d.lo) + " " + env.vars[v] + ") (<= " + env.vars[v] + " " + lit(d.hi) + "))");
      }
    }
    env.t = declare(quote("t"), Type::Int);
    bound_clock(env.t);
    for (const Location& l : snaps_) {
      env.snaps[l] = declare(quote("t@" + p_.location_name(l)), Type::Int);
      bound_clock(env.snaps[l]);
    }
    for (ThreadId t : pcs_) {
      env.pcs[t] = declare(quote("at:" + p_.threads[t].name), Type::Int);
      std::string dom = "(or";
      for (StmtId l : control_points(p_.threads[t])) dom += " (= " + env.pcs[t] + " " + std::to_string(l) + ")";
      assert_(dom + ")");
    }
    assert_(term(*vc.pre, env));

    Env after = env;
    if (acts) transition(vc.action, env, after);
    std::string bad = "(not " + term(*vc.post, after) + ")";
    if (!oob_.empty()) {
      bad = "(or " + bad;
      for (const auto& c : oob_) bad += " " + c;
      bad += ")";
    }
    assert_(bad);

    std::ostringstream out;
    out << "; " << std::string(to_string(vc.kind)) << " VC " << vc.index << ": " << vc.provenance << "\n";
    out << "; unsat means the triple is valid\n";
    out << "(set-logic ALL)\n" << decls_.str() << asserts_.str() << "(check-sat)\n";
    return out.str();
  }

 private:
  void collect(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Var: vars_.insert(e.slot); break;
      case ExprKind::Snapshot:
        if (e.arrival) throw SemanticError("unsupported construct: indexed snapshot");
        snaps_.insert(e.loc);
        break;
      case ExprKind::At: pcs_.insert(e.loc.thread); break;
      case ExprKind::Str: throw SemanticError("unsupported construct: string literal in an assertion");
      default: break;
    }
    for (const auto& a : e.args) collect(*a);
  }

  /// Symbols of the action at `l`; an await pulls in its whole body.
  void collect_stmt(const Thread& t, StmtId l, bool deep = false) {
    const Stmt& s = t.at(l);
    if (s.expr && s.expr->kind != ExprKind::Str) collect(*s.expr);
    if (s.target >= 0) vars_.insert(s.target);
    if (deep || s.kind == StmtKind::Await) {
      for (StmtId c : s.body) collect_stmt(t, c, true);
      for (StmtId c : s.orelse) collect_stmt(t, c, true);
    }
  }

  std::string declare(const std::string& name, Type type) {
    decls_ << "(declare-const " << name << (type == Type::Bool ? " Bool)\n" : " Int)\n");
    return name;
  }

  std::string fresh(const std::string& base, Type type) {
    return declare(quote(base + "'" + std::to_string(++fresh_)), type);
  }

  void assert_(const std::string& s) { asserts_ << "(assert " << s << ")\n"; }

  void bound_clock(const std::string& name) {
    assert_("(and (<= 0 " + name + ") (<= " + name + " " + std::to_string(o_.clock_bound) + "))");
  }

  Clock own_cost(Location l) const {
    if (auto c = o_.costs.override_for(p_, l)) return *c;
    return o_.costs.unit_cost;
  }

  std::string term(const Expr& e, const Env& env) {
    switch (e.kind) {
      case ExprKind::Int: return lit(e.value);
      case ExprKind::Bool: return e.value ? "true" : "false";
      case ExprKind::Str: throw SemanticError("unsupported construct: string literal");
      case ExprKind::Var: return env.vars.at(e.slot);
      case ExprKind::Bound: return bound_.at(bound_.size() - 1 - static_cast<std::size_t>(e.slot));
      case ExprKind::Clock: return env.t;
      case ExprKind::Snapshot:
        if (e.arrival) throw SemanticError("unsupported construct: indexed snapshot");
        return env.snaps.at(e.loc);
      case ExprKind::At: return "(= " + env.pcs.at(e.loc.thread) + " " + std::to_string(e.loc.label) + ")";
      case ExprKind::Quant: {
        const std::string q = quote(e.name + "!" + std::to_string(bound_.size()));
        bound_.push_back(q);
        const std::string body = term(*e.args[0], env);
        bound_.pop_back();
        const std::string range = "(and (<= " + lit(e.lo) + " " + q + ") (<= " + q + " " + lit(e.hi) + "))";
        if (e.quant == Quantifier::ForAll) return "(forall ((" + q + " Int)) (=> " + range + " " + body + "))";
        return "(exists ((" + q + " Int)) (and " + range + " " + body + "))";
      }
      case ExprKind::Approx: {
        const std::string a = term(*e.args[0], env);
        const std::string b = term(*e.args[1], env);
        const std::string th = e.args.size() > 2 ? term(*e.args[2], env) : lit(o_.tolerance);
        return "(and (<= (- " + a + " " + b + ") " + th + ") (<= (- " + b + " " + a + ") " + th + "))";
      }
      case ExprKind::Unary:
        return (e.unop == UnOp::Neg ? "(- " : "(not ") + term(*e.args[0], env) + ")";
      case ExprKind::Binary:
        break;
    }
    const char* op = "";
    switch (e.binop) {
      case BinOp::Add: op = "+"; break;
      case BinOp::Sub: op = "-"; break;
      case BinOp::Mul: op = "*"; break;
      case BinOp::Eq: op = "="; break;
      case BinOp::Ne: op = "distinct"; break;
      case BinOp::Lt: op = "<"; break;
      case BinOp::Le: op = "<="; break;
      case BinOp::Gt: op = ">"; break;
      case BinOp::Ge: op = ">="; break;
      case BinOp::And: op = "and"; break;
      case BinOp::Or: op = "or"; break;
      case BinOp::Implies: op = "=>"; break;
      case BinOp::Iff: op = "="; break;
    }
    return std::string("(") + op + " " + term(*e.args[0], env) + " " + term(*e.args[1], env) + ")";
  }

  static std::string guarded(const std::string& path, const std::string& cond) {
    return path == "true" ? cond : "(and " + path + " " + cond + ")";
  }

  /// Encodes one statement; returns its cost term.
  std::string stmt(const Thread& th, StmtId l, Env& env, const std::string& path) {
    const Stmt& s = th.at(l);
    const Location loc{static_cast<ThreadId>(&th - p_.threads.data()), l};
    switch (s.kind) {
      case StmtKind::Skip:
      case StmtKind::Print:
        return std::to_string(own_cost(loc));
      case StmtKind::Assign: {
        const VarDecl& d = p_.vars[static_cast<std::size_t>(s.target)];
        const std::string rhs = term(*s.expr, env);
        const std::string v = fresh(d.name, d.type);
        assert_("(= " + v + " " + rhs + ")");
        if (d.type == Type::Int) {
          oob_.push_back(guarded(path, "(or (< " + v + " " + lit(d.lo) + ") (> " + v + " " + lit(d.hi) + "))"));
        }
        env.vars[s.target] = v;
        return std::to_string(own_cost(loc));
      }
      case StmtKind::Delay: {
        if (auto c = o_.costs.override_for(p_, loc)) return std::to_string(*c);
        const std::string a = term(*s.expr, env);
        oob_.push_back(guarded(path, "(< " + a + " 0)"));
        return "(ite (< " + a + " 1) 1 " + a + ")";
      }
      case StmtKind::If: {
        const std::string g = term(*s.expr, env);
        Env then_env = env;
        Env else_env = env;
        const std::string ct = block(th, s.body, then_env, guarded(path, g));
        const std::string ce = block(th, s.orelse, else_env, guarded(path, "(not " + g + ")"));
        for (auto& [slot, cur] : env.vars) {
          if (then_env.vars[slot] == else_env.vars[slot]) {
            cur = then_env.vars[slot];
            continue;
          }
          const VarDecl& d = p_.vars[static_cast<std::size_t>(slot)];
          const std::string v = fresh(d.name, d.type);
          assert_("(= " + v + " (ite " + g + " " + then_env.vars[slot] + " " + else_env.vars[slot] + "))");
          cur = v;
        }
        return "(+ " + std::to_string(own_cost(loc)) + " (ite " + g + " " + ct + " " + ce + "))";
      }
      case StmtKind::While:
        throw SemanticError("unsupported construct: while loop inside an await body at " + p_.location_name(loc));
      case StmtKind::Await:
        throw SemanticError("unsupported construct: nested await");
    }
    return "0";
  }

  std::string block(const Thread& th, const std::vector<StmtId>& body, Env& env, const std::string& path) {
    std::string cost = "0";
    for (StmtId l : body) cost = "(+ " + cost + " " + stmt(th, l, env, path) + ")";
    return cost;
  }

  void transition(const Action& a, const Env& before, Env& after) {
    const Thread& th = p_.threads[a.loc.thread];
    const Stmt& s = th.at(a.loc.label);
    std::string cost;
    switch (s.kind) {
      case StmtKind::If:
      case StmtKind::While: {
        const std::string g = term(*s.expr, before);
        assert_(a.mode == ActionMode::GuardTrue ? g : "(not " + g + ")");
        cost = std::to_string(own_cost(a.loc));
        break;
      }
      case StmtKind::Await:
        assert_(term(*s.expr, before));
        cost = "(+ " + std::to_string(own_cost(a.loc)) + " " + block(th, s.body, after, "true") + ")";
        break;
      default:
        cost = stmt(th, a.loc.label, after, "true");
        break;
    }
    after.t = declare(quote("t'"), Type::Int);
    assert_("(= " + after.t + " (+ " + before.t + " " + cost + "))");
    after.pcs[a.loc.thread] = std::to_string(a.successor);
    after.snaps[Location{a.loc.thread, a.successor}] = after.t;
  }

  const Program& p_;
  const ProofOptions& o_;
  std::set<int> vars_;
  std::set<Location> snaps_;
  std::set<ThreadId> pcs_;
  std::vector<std::string> bound_;
  std::vector<std::string> oob_;
  std::ostringstream decls_;
  std::ostringstream asserts_;
  int fresh_ = 0;
};

}  // namespace

std::string emit_smtlib(const VC& vc, const Program& p, const ProofOptions& o) {
  return SmtWriter(p, o).run(vc);
}

std::string smt_file_name(const VC& vc) {
  return "vc_" + std::string(to_string(vc.kind)) + "_" + std::to_string(vc.index) + ".smt2";
}

}  // namespace leaklab
