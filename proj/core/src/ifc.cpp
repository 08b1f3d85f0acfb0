#include "leaklab/ifc.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <tuple>

#include "json.hpp"
#include "leaklab/error.hpp"

namespace leaklab {

std::string to_string(const Op& op) {
  std::string s = op.user + ":" + op.var + ":" + (op.access == Access::Read ? "r" : "w");
  if (op.value) s += "=" + std::to_string(*op.value);
  return s;
}

std::string_view to_string(NiStatus s) {
  switch (s) {
    case NiStatus::NonInterfering: return "non_interfering";
    case NiStatus::FlowViolation: return "flow_violation";
    case NiStatus::ViewChanged: return "view_changed";
  }
  return "?";
}

namespace {

LabelId user_label(const MachineState& q, const std::string& u) {
  auto it = q.users.find(u);
  if (it == q.users.end()) throw ConfigError("unknown user '" + u + "'");
  return it->second;
}

LabelId var_label(const MachineState& q, const std::string& v) {
  auto it = q.var_labels.find(v);
  if (it == q.var_labels.end()) throw ConfigError("unknown variable '" + v + "'");
  return it->second;
}

}  // namespace

DeltaResult delta(const SecurityLattice& lat, const MachineState& q, const Op& op) {
  const LabelId lu = user_label(q, op.user);
  const LabelId lv = var_label(q, op.var);
  if (op.access == Access::Read) {
    if (lat.leq(lv, lu)) return q;
    return Epsilon{op, lat.name(lv) + " <= " + lat.name(lu)};
  }
  MachineState next = q;
  if (!lat.leq(lu, lv)) next.var_labels[op.var] = lat.join(lu, lv);
  if (op.value) next.values[op.var] = *op.value;
  return next;
}

ViewResult view(const SecurityLattice& lat, const MachineState& q, const std::string& user) {
  const LabelId lu = user_label(q, user);
  ViewResult out;
  for (const auto& [v, l] : q.var_labels) {
    VarView vv;
    if (lat.leq(l, lu)) {
      vv.visible = true;
      vv.label = l;
      auto it = q.values.find(v);
      vv.value = it == q.values.end() ? 0 : it->second;
    }
    out[v] = vv;
  }
  return out;
}

bool indistinguishable(const SecurityLattice& lat, const MachineState& a, const MachineState& b,
                       const std::string& user) {
  if (a.var_labels.size() != b.var_labels.size()) throw ConfigError("states have different variable universes");
  for (const auto& [v, l] : a.var_labels) {
    if (!b.var_labels.count(v)) throw ConfigError("states have different variable universes");
  }
  if (user_label(a, user) != user_label(b, user)) {
    throw ConfigError("observer '" + user + "' has different labels in the two states");
  }
  return view(lat, a, user) == view(lat, b, user);
}

NiResult check_seq_ni(const SecurityLattice& lat, const std::vector<Op>& ops, const std::string& user,
                      const MachineState& q0) {
  NiResult r;
  const ViewResult v0 = view(lat, q0, user);
  MachineState q = q0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    r.witness.push_back(ops[i]);
    DeltaResult d = delta(lat, q, ops[i]);
    if (auto* eps = std::get_if<Epsilon>(&d)) {
      r.status = NiStatus::FlowViolation;
      r.detail = "step " + std::to_string(i + 1) + " (" + to_string(ops[i]) + ") violates " + eps->constraint;
      return r;
    }
    q = std::get<MachineState>(std::move(d));
    if (view(lat, q, user) != v0) {
      r.status = NiStatus::ViewChanged;
      r.detail = "view of '" + user + "' changes after step " + std::to_string(i + 1) + " (" + to_string(ops[i]) + ")";
      return r;
    }
  }
  r.witness.clear();
  return r;
}

NiResult check_conc_ni(const SecurityLattice& lat, const std::vector<Op>& s1, const std::vector<Op>& s2,
                       const std::string& user, const MachineState& q0) {
  for (const auto* s : {&s1, &s2}) {
    NiResult r = check_seq_ni(lat, *s, user, q0);
    if (!r.ok()) {
      r.condition = 1;
      r.detail = std::string(s == &s1 ? "first" : "second") + " sequence: " + r.detail;
      return r;
    }
  }
  const ViewResult v0 = view(lat, q0, user);
  NiResult r;
  std::vector<Op> path;
  // Subtrees already explored without a violation.
  std::set<std::tuple<std::size_t, std::size_t, MachineState>> clean;
  std::function<bool(const MachineState&, std::size_t, std::size_t)> dfs = [&](const MachineState& q, std::size_t i,
                                                                              std::size_t j) {
    if (clean.count({i, j, q})) return true;
    for (int side = 0; side < 2; ++side) {
      const auto& seq = side == 0 ? s1 : s2;
      const std::size_t pos = side == 0 ? i : j;
      if (pos >= seq.size()) continue;
      const Op& op = seq[pos];
      path.push_back(op);
      DeltaResult d = delta(lat, q, op);
      if (auto* eps = std::get_if<Epsilon>(&d)) {
        r.status = NiStatus::FlowViolation;
        r.detail = "interleaving step " + std::to_string(path.size()) + " (" + to_string(op) + ") violates " +
                   eps->constraint;
        return false;
      }
      const MachineState& next = std::get<MachineState>(d);
      if (view(lat, next, user) != v0) {
        r.status = NiStatus::ViewChanged;
        r.detail = "view of '" + user + "' changes after interleaving step " + std::to_string(path.size());
        return false;
      }
      if (!dfs(next, side == 0 ? i + 1 : i, side == 1 ? j + 1 : j)) return false;
      path.pop_back();
    }
    clean.insert({i, j, q});
    return true;
  };
  if (!dfs(q0, 0, 0)) {
    r.condition = 2;
    r.witness = path;
  }
  return r;
}

// ---------------------------------------------------------------------------

namespace {

void reads_in_order(const Expr& e, std::vector<std::string>& out) {
  if (e.kind == ExprKind::Var && std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
  for (const auto& a : e.args) reads_in_order(*a, out);
}

void append_reads(const Expr& e, const std::string& user, std::vector<Op>& ops) {
  std::vector<std::string> names;
  reads_in_order(e, names);
  for (auto& n : names) ops.push_back(Op{user, n, Access::Read, std::nullopt});
}

}  // namespace

std::vector<Op> iseq(const Program& p, ThreadId t, StmtId label, const std::string& user) {
  const Stmt& s = p.threads.at(t).at(label);
  std::vector<Op> ops;
  switch (s.kind) {
    case StmtKind::Skip:
      break;
    case StmtKind::Assign:
      append_reads(*s.expr, user, ops);
      ops.push_back(Op{user, p.vars[static_cast<std::size_t>(s.target)].name, Access::Write, std::nullopt});
      break;
    case StmtKind::Print:
      append_reads(*s.expr, user, ops);
      ops.push_back(Op{user, std::string(kOutputVar), Access::Write, std::nullopt});
      break;
    case StmtKind::Delay:
    case StmtKind::If:
    case StmtKind::While:
    case StmtKind::Await:
      append_reads(*s.expr, user, ops);
      break;
  }
  return ops;
}

std::vector<std::vector<Op>> program_to_iseq(const Program& p, ThreadId t, const std::string& user,
                                             std::size_t unroll) {
  constexpr std::size_t kMaxPaths = 10000;
  const Thread& th = p.threads.at(t);
  std::vector<std::vector<Op>> out;
  std::function<void(std::vector<StmtId>, std::vector<Op>, std::map<StmtId, std::size_t>)> go =
      [&](std::vector<StmtId> stack, std::vector<Op> cur, std::map<StmtId, std::size_t> unrolled) {
        if (out.size() >= kMaxPaths) throw ConfigError("more than 10000 paths; lower the unroll bound");
        if (stack.empty()) {
          out.push_back(std::move(cur));
          return;
        }
        const StmtId l = stack.back();
        stack.pop_back();
        const Stmt& s = th.at(l);
        const auto own = iseq(p, t, l, user);
        cur.insert(cur.end(), own.begin(), own.end());
        switch (s.kind) {
          case StmtKind::If: {
            auto st = stack;
            st.insert(st.end(), s.body.rbegin(), s.body.rend());
            go(st, cur, unrolled);
            st = stack;
            st.insert(st.end(), s.orelse.rbegin(), s.orelse.rend());
            go(st, cur, unrolled);
            return;
          }
          case StmtKind::While: {
            go(stack, cur, unrolled);
            if (unrolled[l] < unroll) {
              ++unrolled[l];
              stack.push_back(l);
              stack.insert(stack.end(), s.body.rbegin(), s.body.rend());
              go(stack, cur, unrolled);
            }
            return;
          }
          case StmtKind::Await:
            stack.insert(stack.end(), s.body.rbegin(), s.body.rend());
            go(stack, cur, unrolled);
            return;
          default:
            go(stack, cur, unrolled);
            return;
        }
      };
  go(std::vector<StmtId>(th.body.rbegin(), th.body.rend()), {}, {});
  return out;
}

// ---------------------------------------------------------------------------

IfcScenario IfcScenario::from_json(std::string_view text) {
  IfcScenario sc;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("lattice")) sc.lattice = SecurityLattice::from_json(j.at("lattice").dump());
    for (const auto& [u, l] : j.at("users").items()) sc.initial.users[u] = sc.lattice.id(l.get<std::string>());
    for (const auto& [v, spec] : j.at("variables").items()) {
      sc.initial.var_labels[v] = sc.lattice.id(spec.at("label").get<std::string>());
      sc.initial.values[v] = spec.value("value", Value{0});
    }
    sc.observer = j.at("observer").get<std::string>();
    if (!sc.initial.users.count(sc.observer)) throw ConfigError("observer '" + sc.observer + "' is not a user");
    for (const auto& seq : j.at("sequences")) {
      std::vector<Op> ops;
      for (const auto& o : seq) {
        Op op;
        op.user = o.at("user").get<std::string>();
        op.var = o.at("var").get<std::string>();
        const std::string a = o.at("op").get<std::string>();
        if (a != "r" && a != "w") throw ConfigError("op must be \"r\" or \"w\"");
        op.access = a == "r" ? Access::Read : Access::Write;
        if (o.contains("value")) op.value = o.at("value").get<Value>();
        if (!sc.initial.users.count(op.user)) throw ConfigError("unknown user '" + op.user + "'");
        if (!sc.initial.var_labels.count(op.var)) throw ConfigError("unknown variable '" + op.var + "'");
        ops.push_back(std::move(op));
      }
      sc.sequences.push_back(std::move(ops));
    }
    if (sc.sequences.empty() || sc.sequences.size() > 2) throw ConfigError("a scenario has one or two sequences");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad scenario JSON: ") + e.what());
  }
  return sc;
}

}  // namespace leaklab
