#include <sstream>

#include "leaklab/parser.hpp"

namespace leaklab {

namespace {

// Binding strength, loosest first. Mirrors the recursive-descent levels.
enum Prec : int {
  kQuant = 0,
  kImplies = 1,
  kOr = 2,
  kAnd = 3,
  kNot = 4,
  kCmp = 5,
  kAdd = 6,
  kMul = 7,
  kNeg = 8,
  kAtom = 9,
};

int prec_of(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Quant:
      return kQuant;
    case ExprKind::Unary:
      return e.unop == UnOp::Not ? kNot : kNeg;
    case ExprKind::Binary:
      switch (e.binop) {
        case BinOp::Implies:
        case BinOp::Iff: return kImplies;
        case BinOp::Or: return kOr;
        case BinOp::And: return kAnd;
        case BinOp::Add:
        case BinOp::Sub: return kAdd;
        case BinOp::Mul: return kMul;
        default: return kCmp;
      }
    case ExprKind::Int:
      return e.value < 0 ? kNeg : kAtom;
    default:
      return kAtom;
  }
}

const char* op_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Eq: return "=";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
    case BinOp::Implies: return "->";
    case BinOp::Iff: return "<->";
  }
  return "?";
}

class ExprPrinter {
 public:
  ExprPrinter(const Program& p, std::optional<ThreadId> context) : p_(p), ctx_(context) {}

  std::string print(const Expr& e, int min_prec) const {
    std::string s = raw(e);
    return prec_of(e) < min_prec ? "(" + s + ")" : s;
  }

 private:
  std::string location(Location loc) const {
    std::string label = "l" + std::to_string(loc.label);
    if (ctx_ && *ctx_ == loc.thread) return label;
    if (loc.thread < p_.threads.size()) return p_.threads[loc.thread].name + "." + label;
    return label;
  }

  std::string raw(const Expr& e) const {
    switch (e.kind) {
      case ExprKind::Int:
        return std::to_string(e.value);
      case ExprKind::Bool:
        return e.value ? "true" : "false";
      case ExprKind::Str:
        return e.name.find('\'') == std::string::npos ? "'" + e.name + "'" : "\"" + e.name + "\"";
      case ExprKind::Var:
      case ExprKind::Bound:
        return e.name;
      case ExprKind::Clock:
        return "t";
      case ExprKind::Snapshot: {
        std::string s = "t@" + location(e.loc);
        if (e.arrival) s += "[" + std::to_string(*e.arrival) + "]";
        return s;
      }
      case ExprKind::At:
        return "at(" + location(e.loc) + ")";
      case ExprKind::Approx: {
        std::string s = "approx(" + print(*e.args[0], kAdd) + ", " + print(*e.args[1], kAdd);
        if (e.args.size() > 2) s += ", " + print(*e.args[2], kAdd);
        return s + ")";
      }
      case ExprKind::Quant:
        return std::string(e.quant == Quantifier::ForAll ? "forall " : "exists ") + e.name + " in " +
               std::to_string(e.lo) + ".." + std::to_string(e.hi) + " : " + print(*e.args[0], kQuant);
      case ExprKind::Unary:
        if (e.unop == UnOp::Not) return "!" + print(*e.args[0], kNot);
        return "-" + print(*e.args[0], kNeg);
      case ExprKind::Binary:
        break;
    }
    const int pr = prec_of(e);
    int lmin = pr;
    int rmin = pr + 1;
    if (e.binop == BinOp::Implies) {
      lmin = pr + 1;
      rmin = pr;
    } else if (pr == kCmp || e.binop == BinOp::Iff) {
      lmin = pr + 1;
    }
    return print(*e.args[0], lmin) + " " + op_text(e.binop) + " " + print(*e.args[1], rmin);
  }

  const Program& p_;
  std::optional<ThreadId> ctx_;
};

class ProgramPrinter {
 public:
  ProgramPrinter(const Program& p, const UnparseOptions& o) : p_(p), o_(o) {}

  std::string run() {
    for (const auto& v : p_.vars) decl(v);
    for (ThreadId i = 0; i < p_.threads.size(); ++i) {
      if (i > 0 || !p_.vars.empty()) out_ << "\n";
      thread(i);
    }
    return out_.str();
  }

 private:
  void decl(const VarDecl& v) {
    out_ << "var " << v.name << " : ";
    if (v.type == Type::Bool) {
      out_ << "bool";
    } else {
      out_ << "int[" << v.lo << ".." << v.hi << "]";
    }
    if (v.label != "low") out_ << " label " << v.label;
    if (v.dynamic) out_ << " dynamic";
    if (v.secret) {
      out_ << " = secret";
    } else if (v.type == Type::Bool) {
      out_ << " = " << (v.init ? "true" : "false");
    } else {
      out_ << " = " << v.init;
    }
    out_ << ";\n";
  }

  void indent(int depth) { out_ << std::string(static_cast<std::size_t>(depth) * 2, ' '); }

  std::string expr(const Expr& e) const { return ExprPrinter(p_, thread_).print(e, kQuant); }

  void annotations_at(StmtId label, int depth, bool exit) {
    if (!o_.annotations) return;
    for (const auto& a : *o_.annotations) {
      if (a.at.thread != thread_ || a.at.label != label) continue;
      const bool post_like = a.kind == AnnotationKind::Post || exit;
      if (exit != post_like) continue;
      indent(depth);
      if (exit) {
        out_ << "post ";
      } else if (a.kind == AnnotationKind::Leaky) {
        out_ << "@leaky ";
      }
      out_ << "{| " << expr(*a.assertion) << " |}\n";
    }
  }

  void thread(ThreadId i) {
    thread_ = i;
    const Thread& t = p_.threads[i];
    out_ << "thread " << t.name << " {\n";
    for (StmtId s : t.body) stmt(t, s, 1);
    if (o_.labels) out_ << "  l" << t.exit_label() << ":\n";
    annotations_at(t.exit_label(), 1, true);
    out_ << "}\n";
  }

  void block(const Thread& t, const std::vector<StmtId>& body, int depth) {
    out_ << "{\n";
    for (StmtId s : body) stmt(t, s, depth + 1);
    indent(depth);
    out_ << "}";
  }

  void stmt(const Thread& t, StmtId label, int depth) {
    const Stmt& s = t.at(label);
    annotations_at(label, depth, false);
    indent(depth);
    if (o_.labels) out_ << "l" << label << ": ";
    switch (s.kind) {
      case StmtKind::Skip:
        out_ << "skip;";
        break;
      case StmtKind::Assign:
        out_ << p_.vars[s.target].name << " = " << expr(*s.expr) << ";";
        break;
      case StmtKind::Print:
        out_ << "print(" << expr(*s.expr) << ");";
        break;
      case StmtKind::Delay:
        out_ << "delay(" << expr(*s.expr) << ");";
        break;
      case StmtKind::If:
        out_ << "if " << expr(*s.expr) << " then ";
        block(t, s.body, depth);
        if (!s.orelse.empty()) {
          out_ << " else ";
          block(t, s.orelse, depth);
        }
        break;
      case StmtKind::While:
        out_ << "while " << expr(*s.expr) << " do ";
        block(t, s.body, depth);
        break;
      case StmtKind::Await:
        out_ << "await " << expr(*s.expr) << " then ";
        block(t, s.body, depth);
        break;
    }
    out_ << "\n";
  }

  const Program& p_;
  const UnparseOptions& o_;
  ThreadId thread_ = 0;
  std::ostringstream out_;
};

}  // namespace

std::string unparse(const Program& p, const UnparseOptions& options) {
  return ProgramPrinter(p, options).run();
}

std::string unparse_expr(const Expr& e, const Program& p, std::optional<ThreadId> context) {
  return ExprPrinter(p, context).print(e, kQuant);
}

}  // namespace leaklab
