#include "leaklab/dl.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "leaklab/error.hpp"
#include "leaklab/parser.hpp"

namespace leaklab {

std::string_view to_string(FlagReason r) {
  switch (r) {
    case FlagReason::HighGuardOutput: return "HighGuardOutput";
    case FlagReason::HighDataOutput: return "HighDataOutput";
    case FlagReason::HighGuardDelay: return "HighGuardDelay";
  }
  return "?";
}

std::string_view to_string(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::Separable: return "separable";
    case SynthesisStatus::Indeterminate: return "indeterminate";
    case SynthesisStatus::SecretIndependent: return "secret_independent";
    case SynthesisStatus::Unexplored: return "unexplored";
    case SynthesisStatus::Truncated: return "truncated";
  }
  return "?";
}

const LocationLabel* LabelReport::at(Location loc) const {
  for (const auto& l : locations) {
    if (l.loc == loc) return &l;
  }
  return nullptr;
}

bool LabelReport::flagged(Location loc) const {
  return std::any_of(flags.begin(), flags.end(), [&](const LabelFlag& f) { return f.loc == loc; });
}

namespace {

class Labeller {
 public:
  Labeller(const Program& p, const SecurityLattice& lat, std::vector<LabelId> labels)
      : p_(p), lat_(lat), labels_(std::move(labels)) {}

  LabelId expr_label(const Expr& e) const {
    LabelId l = lat_.bottom();
    if (e.kind == ExprKind::Var) l = labels_[static_cast<std::size_t>(e.slot)];
    for (const auto& a : e.args) l = lat_.join(l, expr_label(*a));
    return l;
  }

  void high_vars(const Expr& e, std::set<std::string>& out) const {
    if (e.kind == ExprKind::Var && !low(labels_[static_cast<std::size_t>(e.slot)])) out.insert(e.name);
    for (const auto& a : e.args) high_vars(*a, out);
  }

  bool low(LabelId l) const { return lat_.leq(l, lat_.bottom()); }

  using Visit = std::function<void(ThreadId, const Stmt&, LabelId pc, const std::vector<const Expr*>& guards)>;

  void walk(const Visit& visit) const {
    for (ThreadId t = 0; t < p_.threads.size(); ++t) {
      std::vector<const Expr*> guards;
      block(t, p_.threads[t].body, lat_.bottom(), guards, visit);
    }
  }

  std::vector<LabelId>& labels() { return labels_; }

 private:
  void block(ThreadId t, const std::vector<StmtId>& body, LabelId pc, std::vector<const Expr*>& guards,
             const Visit& visit) const {
    for (StmtId l : body) {
      const Stmt& s = p_.threads[t].at(l);
      visit(t, s, pc, guards);
      if (s.kind == StmtKind::If || s.kind == StmtKind::While || s.kind == StmtKind::Await) {
        const LabelId inner = lat_.join(pc, expr_label(*s.expr));
        guards.push_back(s.expr.get());
        block(t, s.body, inner, guards, visit);
        block(t, s.orelse, inner, guards, visit);
        guards.pop_back();
      }
    }
  }

  const Program& p_;
  const SecurityLattice& lat_;
  std::vector<LabelId> labels_;
};

std::string join_text(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

LabelReport dl_certify(const Program& p, const SecurityLattice& lattice,
                       const std::map<std::string, std::string>& labels) {
  for (const auto& [name, l] : labels) {
    if (p.find_var(name) < 0) throw ConfigError("label override for undeclared variable '" + name + "'");
  }
  std::vector<LabelId> declared;
  for (const auto& d : p.vars) {
    auto it = labels.find(d.name);
    declared.push_back(lattice.id(it == labels.end() ? d.label : it->second));
  }

  LabelReport r;
  r.lattice = lattice;
  Labeller lab(p, lattice, declared);
  std::set<std::pair<std::string, std::string>> static_flows;
  for (bool changed = true; changed;) {
    changed = false;
    lab.walk([&](ThreadId t, const Stmt& s, LabelId pc, const std::vector<const Expr*>&) {
      if (s.kind != StmtKind::Assign) return;
      const auto slot = static_cast<std::size_t>(s.target);
      const LabelId flow = lattice.join(pc, lab.expr_label(*s.expr));
      LabelId& cur = lab.labels()[slot];
      if (p.vars[slot].dynamic) {
        const LabelId next = lattice.join(cur, flow);
        if (next != cur) {
          cur = next;
          changed = true;
        }
      } else if (!lattice.leq(flow, cur)) {
        static_flows.insert({p.location_name(Location{t, s.label}),
                             "flow from " + lattice.name(flow) + " into static-labelled '" + p.vars[slot].name +
                                 "' (" + lattice.name(cur) + ")"});
      }
    });
  }
  for (const auto& [loc, msg] : static_flows) r.notes.push_back(loc + ": " + msg);
  for (std::size_t i = 0; i < p.vars.size(); ++i) r.var_labels[p.vars[i].name] = lab.labels()[i];

  std::vector<bool> raised(p.threads.size(), false);
  lab.walk([&](ThreadId t, const Stmt& s, LabelId pc, const std::vector<const Expr*>& guards) {
    const Location loc{t, s.label};
    LocationLabel ll{loc, s.kind, pc, std::nullopt};
    if (s.kind == StmtKind::Assign) {
      const auto slot = static_cast<std::size_t>(s.target);
      ll.assigned = std::make_pair(p.vars[slot].name, lab.labels()[slot]);
    }
    r.locations.push_back(std::move(ll));
    if (!lab.low(pc)) raised[t] = true;
    if (s.kind != StmtKind::Print && s.kind != StmtKind::Delay) return;
    if (!lab.low(pc)) {
      std::set<std::string> vars;
      std::vector<std::string> texts;
      for (const Expr* g : guards) {
        if (lab.low(lab.expr_label(*g))) continue;
        lab.high_vars(*g, vars);
        texts.push_back(unparse_expr(*g, p, t));
      }
      r.flags.push_back(LabelFlag{loc,
                                  s.kind == StmtKind::Print ? FlagReason::HighGuardOutput : FlagReason::HighGuardDelay,
                                  {vars.begin(), vars.end()}, join_text(texts, " and ")});
    }
    if (!lab.low(lab.expr_label(*s.expr))) {
      std::set<std::string> vars;
      lab.high_vars(*s.expr, vars);
      r.flags.push_back(
          LabelFlag{loc, FlagReason::HighDataOutput, {vars.begin(), vars.end()}, unparse_expr(*s.expr, p, t)});
    }
  });
  std::sort(r.locations.begin(), r.locations.end(),
            [](const LocationLabel& a, const LocationLabel& b) { return a.loc < b.loc; });
  std::stable_sort(r.flags.begin(), r.flags.end(),
                   [](const LabelFlag& a, const LabelFlag& b) { return a.loc < b.loc; });

  for (ThreadId t = 0; t < p.threads.size(); ++t) {
    const bool any_flag =
        std::any_of(r.flags.begin(), r.flags.end(), [&](const LabelFlag& f) { return f.loc.thread == t; });
    if (raised[t] && !any_flag) r.notes.push_back(p.threads[t].name + ": no direct flag; timing analysis recommended");
  }
  r.pairs = suggest_snapshot_pairs(r, p);
  return r;
}

std::vector<std::pair<Location, Location>> suggest_snapshot_pairs(const LabelReport& report, const Program& p) {
  std::vector<std::pair<Location, Location>> out;
  auto low_pc = [&](Location loc) {
    const LocationLabel* ll = report.at(loc);
    return ll && report.lattice.leq(ll->pc, report.lattice.bottom());
  };
  for (ThreadId t = 0; t < p.threads.size(); ++t) {
    const Thread& th = p.threads[t];
    std::function<bool(StmtId)> has_raised = [&](StmtId l) {
      const Stmt& s = th.at(l);
      for (const auto* kids : {&s.body, &s.orelse}) {
        for (StmtId k : *kids) {
          if (!low_pc(Location{t, k}) || has_raised(k)) return true;
        }
      }
      return false;
    };
    auto is_public_output = [&](StmtId l) {
      const Stmt& s = th.at(l);
      const Location loc{t, l};
      return (s.kind == StmtKind::Print || s.kind == StmtKind::Delay) && low_pc(loc) && !report.flagged(loc);
    };
    std::function<void(const std::vector<StmtId>&)> block = [&](const std::vector<StmtId>& body) {
      for (std::size_t i = 0; i < body.size(); ++i) {
        const Stmt& s = th.at(body[i]);
        block(s.body);
        block(s.orelse);
        if (!has_raised(body[i])) continue;
        std::optional<StmtId> before;
        std::optional<StmtId> after;
        for (std::size_t j = i; j-- > 0;) {
          if (is_public_output(body[j])) {
            before = body[j];
            break;
          }
        }
        for (std::size_t j = i + 1; j < body.size(); ++j) {
          if (is_public_output(body[j])) {
            after = body[j];
            break;
          }
        }
        if (!before || !after) continue;
        std::pair<Location, Location> pr{Location{t, *before}, Location{t, *after}};
        if (std::find(out.begin(), out.end(), pr) == out.end()) out.push_back(pr);
      }
    };
    block(th.body);
  }
  return out;
}

Clock separating_threshold(Clock a, Clock b) { return std::max(a + 1, (a + b) / 2); }

namespace {

std::string render_set(const std::set<Clock>& s) {
  if (s.empty()) return "{}";
  std::vector<Clock> v(s.begin(), s.end());
  const bool contiguous = v.back() - v.front() + 1 == static_cast<Clock>(v.size());
  if (v.size() > 3 && contiguous) return "{" + std::to_string(v.front()) + ".." + std::to_string(v.back()) + "}";
  if (v.size() > 8) {
    return "{" + std::to_string(v.front()) + ", ..., " + std::to_string(v.back()) + "} (" + std::to_string(v.size()) +
           " values)";
  }
  std::string out = "{";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
  return out + "}";
}

ExprPtr secret_equals(const Program& p, int slot, Value v) {
  const VarDecl& d = p.vars[static_cast<std::size_t>(slot)];
  ExprPtr x = make_var(d.name, slot);
  if (d.type == Type::Bool) return v ? x : make_unary(UnOp::Not, x);
  return make_binary(BinOp::Eq, x, make_int(v));
}

std::string describe_groups(const Program& p, int slot, const std::map<Value, std::set<Clock>>& groups) {
  std::vector<std::string> parts;
  for (const auto& [v, s] : groups) parts.push_back(p.vars[static_cast<std::size_t>(slot)].name + "=" +
                                                    std::to_string(v) + ": " + render_set(s));
  return join_text(parts, ", ");
}

}  // namespace

SynthesisResult synthesize_leaky_assertions(const Program& p, const std::vector<std::pair<Location, Location>>& pairs,
                                            const SecretDomain& domain, const ExploreBounds& b,
                                            const CostModel& costs) {
  SynthesisResult out;
  for (const auto& [from, to] : pairs) {
    PairSynthesis ps;
    ps.from = from;
    ps.to = to;
    const std::string where = p.location_name(from) + " -> " + p.location_name(to);
    if (from.thread != to.thread || from.thread >= p.threads.size()) {
      ps.status = SynthesisStatus::Unexplored;
      ps.notice = where + ": endpoints are not in one thread; skipped";
      out.pairs.push_back(std::move(ps));
      continue;
    }
    const ThreadId t = from.thread;
    ps.isolated = duration_stats(isolate_thread(p, t), Location{0, from.label}, Location{0, to.label}, domain, b, costs);
    ps.composed = duration_stats(p, from, to, domain, b, costs);

    const bool unexplored = std::any_of(ps.composed.durations.begin(), ps.composed.durations.end(),
                                        [](const auto& kv) { return kv.second.empty(); });
    if (!ps.composed.complete) {
      ps.status = SynthesisStatus::Truncated;
      ps.notice = where + ": exploration truncated by bounds; no assertion postulated";
    } else if (unexplored || ps.composed.durations.empty()) {
      ps.status = SynthesisStatus::Unexplored;
      ps.notice = where + ": some secret valuation never reaches both endpoints; skipped";
    } else {
      bool any_dependent = false;
      std::string overlap;
      for (std::size_t k = 0; k < domain.slots.size() && ps.status != SynthesisStatus::Separable; ++k) {
        std::map<Value, std::set<Clock>> groups;
        for (const auto& [val, ds] : ps.composed.durations) groups[val[k]].insert(ds.begin(), ds.end());
        if (groups.size() < 2) continue;
        const bool all_equal = std::all_of(groups.begin(), groups.end(),
                                           [&](const auto& kv) { return kv.second == groups.begin()->second; });
        if (all_equal) continue;
        any_dependent = true;
        std::vector<std::pair<Value, const std::set<Clock>*>> ordered;
        for (const auto& [v, s] : groups) ordered.emplace_back(v, &s);
        std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b2) {
          return std::make_pair(*a.second->begin(), a.first) < std::make_pair(*b2.second->begin(), b2.first);
        });
        bool separable = true;
        for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
          if (*ordered[i].second->rbegin() >= *ordered[i + 1].second->begin()) separable = false;
        }
        const int slot = domain.slots[k];
        if (!separable) {
          if (overlap.empty()) overlap = describe_groups(p, slot, groups);
          continue;
        }
        ps.status = SynthesisStatus::Separable;
        ps.secret_slot = slot;
        const ExprPtr d = make_binary(BinOp::Sub, make_snapshot(to), make_snapshot(from));
        std::vector<ExprPtr> rules;
        for (std::size_t i = 0; i < ordered.size(); ++i) {
          const Clock lower = i == 0 ? 0 : separating_threshold(*ordered[i - 1].second->rbegin(),
                                                                *ordered[i].second->begin());
          ps.bands.emplace_back(ordered[i].first, lower);
        }
        for (std::size_t i = 0; i < ps.bands.size(); ++i) {
          std::vector<ExprPtr> cond;
          if (i > 0) cond.push_back(make_binary(BinOp::Ge, d, make_int(ps.bands[i].second)));
          if (i + 1 < ps.bands.size()) cond.push_back(make_binary(BinOp::Lt, d, make_int(ps.bands[i + 1].second)));
          rules.push_back(
              make_binary(BinOp::Implies, conjoin(cond), secret_equals(p, slot, ps.bands[i].first)));
        }
        ps.assertion = conjoin(rules);
        ps.notice = where + ": durations separable (" + describe_groups(p, slot, groups) + ")";
      }
      if (ps.status != SynthesisStatus::Separable) {
        if (any_dependent) {
          ps.status = SynthesisStatus::Indeterminate;
          ps.notice = where + ": indeterminate, duration sets overlap (" + overlap + "); no leaky assertion postulated";
        } else {
          ps.status = SynthesisStatus::SecretIndependent;
          ps.notice = where + ": durations do not depend on the secret; no leaky assertion";
        }
      }
    }
    if (ps.assertion) out.assertions.emplace_back(to, ps.assertion);
    out.pairs.push_back(std::move(ps));
  }
  return out;
}

std::vector<std::string> SynthesisResult::render(const Program& p) const {
  std::vector<std::string> lines;
  for (const auto& [loc, a] : assertions) lines.push_back("@leaky {| " + unparse_expr(*a, p, loc.thread) + " |}");
  return lines;
}

}  // namespace leaklab
