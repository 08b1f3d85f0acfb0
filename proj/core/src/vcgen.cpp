#include <algorithm>

#include "leaklab/error.hpp"
#include "leaklab/parser.hpp"
#include "leaklab/proofs.hpp"

namespace leaklab {

std::string_view to_string(VcKind k) {
  switch (k) {
    case VcKind::Sequential: return "sequential";
    case VcKind::Interference: return "interference";
    case VcKind::LeakyStability: return "leaky";
  }
  return "?";
}

std::string_view to_string(VcStatus s) {
  switch (s) {
    case VcStatus::Valid: return "valid";
    case VcStatus::Counterexample: return "counterexample";
    case VcStatus::Undischarged: return "undischarged";
  }
  return "?";
}

std::string_view to_string(ProofVerdict v) {
  switch (v) {
    case ProofVerdict::Proven: return "proven";
    case ProofVerdict::Refuted: return "refuted";
    case ProofVerdict::Incomplete: return "incomplete";
  }
  return "?";
}

std::vector<Action> atomic_actions(const Program& p, ThreadId t) {
  const Thread& th = p.threads.at(t);
  const ControlFlow cf = control_flow(th);
  std::vector<Action> out;
  for (StmtId l : control_points(th)) {
    if (l == th.exit_label()) continue;
    const Stmt& s = th.at(l);
    if (s.kind == StmtKind::If || s.kind == StmtKind::While) {
      out.push_back(Action{ActionMode::GuardTrue, Location{t, l}, cf.succ_true[l]});
      out.push_back(Action{ActionMode::GuardFalse, Location{t, l}, cf.succ_false[l]});
    } else {
      out.push_back(Action{ActionMode::Normal, Location{t, l}, cf.succ[l]});
    }
  }
  return out;
}

std::string describe_action(const Program& p, const Action& a) {
  if (a.mode == ActionMode::Init) return "init";
  const Stmt& s = p.threads.at(a.loc.thread).at(a.loc.label);
  std::string out = p.location_name(a.loc) + " ";
  const std::string e = s.expr ? unparse_expr(*s.expr, p, a.loc.thread) : "";
  switch (s.kind) {
    case StmtKind::Skip: out += "skip"; break;
    case StmtKind::Assign: out += p.vars[static_cast<std::size_t>(s.target)].name + " = " + e; break;
    case StmtKind::Print: out += "print(" + e + ")"; break;
    case StmtKind::Delay: out += "delay(" + e + ")"; break;
    case StmtKind::If: out += "if " + e; break;
    case StmtKind::While: out += "while " + e; break;
    case StmtKind::Await: out += "await " + e; break;
  }
  if (a.mode == ActionMode::GuardTrue) out += " [true]";
  if (a.mode == ActionMode::GuardFalse) out += " [false]";
  return out;
}

ExprPtr effective_pre(const AnnotatedProgram& ap, Location loc) {
  ExprPtr pre = ap.pre_at(loc);
  if (!pre) {
    throw AnnotationError("missing annotation at " + ap.program.location_name(loc) + " (" +
                          std::string(to_string(ap.program.threads[loc.thread].at(loc.label).kind)) + ")");
  }
  auto it = ap.leaky.find(loc);
  return it == ap.leaky.end() ? pre : conjoin({pre, it->second});
}

namespace {

ExprPtr at(Location loc) { return make_at(loc); }

bool is_assign_or_await(const Program& p, Location loc) {
  const auto k = p.threads[loc.thread].at(loc.label).kind;
  return k == StmtKind::Assign || k == StmtKind::Await;
}

StmtId entry_label(const Thread& t) { return t.body.empty() ? t.exit_label() : t.body.front(); }

Action action_at(const Program& p, Location loc) {
  for (const Action& a : atomic_actions(p, loc.thread)) {
    if (a.loc == loc) return a;
  }
  throw AnnotationError("leaky mark at " + p.location_name(loc) + " is not at a control point");
}

}  // namespace

std::vector<VC> gen_initial_vcs(const AnnotatedProgram& ap) {
  const Program& p = ap.program;
  std::vector<ExprPtr> init;
  for (std::size_t i = 0; i < p.vars.size(); ++i) {
    const VarDecl& d = p.vars[i];
    if (d.secret) continue;
    const ExprPtr lit = d.type == Type::Bool ? make_bool(d.init != 0) : make_int(d.init);
    init.push_back(make_binary(BinOp::Eq, make_var(d.name, static_cast<int>(i)), lit));
  }
  init.push_back(make_binary(BinOp::Eq, make_clock(), make_int(0)));
  std::vector<ExprPtr> post;
  for (ThreadId t = 0; t < p.threads.size(); ++t) {
    const Location l0{t, entry_label(p.threads[t])};
    init.push_back(make_binary(BinOp::Eq, make_snapshot(l0), make_int(0)));
    init.push_back(at(l0));
    post.push_back(effective_pre(ap, l0));
  }
  VC vc;
  vc.kind = VcKind::Sequential;
  vc.pre = conjoin(init);
  vc.action = Action{ActionMode::Init, Location{0, 0}, 0};
  vc.post = conjoin(post);
  vc.provenance = "initial state";
  return {vc};
}

std::vector<VC> gen_sequential_vcs(const AnnotatedProgram& ap, ThreadId t) {
  const Program& p = ap.program;
  std::vector<VC> out;
  for (const Action& a : atomic_actions(p, t)) {
    VC vc;
    vc.kind = VcKind::Sequential;
    vc.pre = conjoin({effective_pre(ap, a.loc), at(a.loc)});
    vc.action = a;
    vc.post = effective_pre(ap, Location{t, a.successor});
    vc.provenance = describe_action(p, a) + " -> " + p.location_name(Location{t, a.successor});
    out.push_back(std::move(vc));
  }
  return out;
}

std::vector<VC> gen_interference_vcs(const AnnotatedProgram& ap, const ProofOptions& o) {
  const Program& p = ap.program;
  std::vector<VC> out;
  for (ThreadId j = 0; j < p.threads.size(); ++j) {
    for (const Action& a : atomic_actions(p, j)) {
      if (!o.strict_stability && !is_assign_or_await(p, a.loc)) continue;
      const ExprPtr pre_t = conjoin({effective_pre(ap, a.loc), at(a.loc)});
      for (ThreadId i = 0; i < p.threads.size(); ++i) {
        if (i == j) continue;
        const Thread& ti = p.threads[i];
        for (StmtId l : control_points(ti)) {
          const Location li{i, l};
          const bool is_exit = l == ti.exit_label();
          if (!is_exit && !o.strict_stability && !is_assign_or_await(p, li)) continue;
          const ExprPtr assertion = effective_pre(ap, li);
          VC vc;
          vc.kind = VcKind::Interference;
          vc.pre = conjoin({assertion, at(li), pre_t});
          vc.action = a;
          vc.post = assertion;
          vc.provenance = describe_action(p, a) + " preserves " + (is_exit ? "post of " + ti.name : "pre of " + p.location_name(li));
          out.push_back(std::move(vc));
        }
      }
    }
  }
  return out;
}

std::vector<VC> gen_leaky_vcs(const AnnotatedProgram& ap, std::vector<std::string>* notices) {
  const Program& p = ap.program;
  std::vector<VC> out;
  if (ap.leaky.empty()) {
    if (notices) notices->push_back("no leaky marks; no leaky VCs generated");
    return out;
  }
  for (const auto& [loc_t, a] : ap.leaky) {
    const Stmt& st = p.threads[loc_t.thread].at(loc_t.label);
    if (st.kind == StmtKind::Delay) {
      if (notices) notices->push_back("leaky mark at " + p.location_name(loc_t) + " sits on a delay, not an output");
    } else if (st.kind != StmtKind::Print) {
      throw AnnotationError("leaky mark at " + p.location_name(loc_t) + " must precede a print or delay");
    }
    const Action t_action = action_at(p, loc_t);
    for (ThreadId i = 0; i < p.threads.size(); ++i) {
      if (i == loc_t.thread) continue;
      for (const Action& s : atomic_actions(p, i)) {
        if (!is_assign_or_await(p, s.loc)) continue;
        const Location after{i, s.successor};
        const ExprPtr P = effective_pre(ap, s.loc);
        const ExprPtr Q = effective_pre(ap, after);
        const std::string pair = describe_action(p, t_action) + " / " + describe_action(p, s);
        VC q;
        q.kind = VcKind::LeakyStability;
        q.pre = conjoin({Q, a, at(after), at(loc_t)});
        q.action = t_action;
        q.post = Q;
        q.provenance = pair + ": {Q and A} T {Q}";
        out.push_back(q);
        VC pp;
        pp.kind = VcKind::LeakyStability;
        pp.pre = conjoin({P, a, at(s.loc), at(loc_t)});
        pp.action = t_action;
        pp.post = P;
        pp.provenance = pair + ": {P and A} T {P}";
        out.push_back(pp);
        VC st3;
        st3.kind = VcKind::LeakyStability;
        st3.pre = conjoin({a, P, at(s.loc), at(loc_t)});
        st3.action = s;
        st3.post = a;
        st3.provenance = pair + ": {A and P} S {A}";
        out.push_back(st3);
      }
    }
  }
  return out;
}

std::vector<VC> gen_all_vcs(const AnnotatedProgram& ap, const ProofOptions& o, std::vector<std::string>* notices) {
  std::vector<VC> all = gen_initial_vcs(ap);
  for (ThreadId t = 0; t < ap.program.threads.size(); ++t) {
    auto seq = gen_sequential_vcs(ap, t);
    all.insert(all.end(), seq.begin(), seq.end());
  }
  auto inter = gen_interference_vcs(ap, o);
  all.insert(all.end(), inter.begin(), inter.end());
  auto leaky = gen_leaky_vcs(ap, notices);
  all.insert(all.end(), leaky.begin(), leaky.end());
  std::map<VcKind, std::size_t> next;
  for (auto& vc : all) vc.index = next[vc.kind]++;
  return all;
}

std::size_t ProofResult::count(VcKind k, VcStatus s) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < vcs.size(); ++i) {
    if (vcs[i].kind == k && results[i].status == s) ++n;
  }
  return n;
}

}  // namespace leaklab
