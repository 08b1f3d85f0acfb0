#include "leaklab/assertions.hpp"

#include <algorithm>
#include <set>

#include "leaklab/error.hpp"

namespace leaklab {

AnnotatedProgram AnnotatedProgram::from_source(const ParsedSource& src) {
  AnnotatedProgram ap;
  ap.program = src.program;
  const Program& p = ap.program;
  std::vector<ControlFlow> flows;
  for (const auto& t : p.threads) flows.push_back(control_flow(t));
  auto where = [&](const RawAnnotation& a) {
    return std::to_string(a.line) + ":" + std::to_string(a.column) + ": ";
  };
  for (const auto& a : src.annotations) {
    const Thread& t = p.threads.at(a.at.thread);
    if (a.at.label < t.exit_label() && flows[a.at.thread].inside_await[a.at.label]) {
      throw AnnotationError(where(a) + "annotation inside an await body at " + p.location_name(a.at));
    }
    switch (a.kind) {
      case AnnotationKind::Pre:
        if (a.at.label == t.exit_label()) {
          ap.post[a.at.thread] = conjoin({ap.post[a.at.thread], a.assertion});
        } else {
          ap.pre[a.at] = conjoin({ap.pre[a.at], a.assertion});
        }
        break;
      case AnnotationKind::Post:
        ap.post[a.at.thread] = conjoin({ap.post[a.at.thread], a.assertion});
        break;
      case AnnotationKind::Leaky:
        if (secret_vars_in(*a.assertion, p).empty()) {
          throw AnnotationError(where(a) + "leaky assertion at " + p.location_name(a.at) +
                                " mentions no secret variable");
        }
        ap.leaky[a.at] = conjoin({ap.leaky[a.at], a.assertion});
        break;
    }
  }
  return ap;
}

ExprPtr AnnotatedProgram::pre_at(Location loc) const {
  if (loc.label == program.threads.at(loc.thread).exit_label()) {
    auto it = post.find(loc.thread);
    return it == post.end() ? make_bool(true) : it->second;
  }
  auto it = pre.find(loc);
  return it == pre.end() ? nullptr : it->second;
}

AnnotatedProgram parse_annotated(std::string_view text) { return AnnotatedProgram::from_source(parse_source(text)); }

// ---------------------------------------------------------------------------

namespace {

struct Evaluator {
  const AssertionEnv& env;
  std::vector<Value> bound;  // innermost last

  Value term(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Int:
      case ExprKind::Bool:
        return e.value;
      case ExprKind::Str:
        throw SemanticError("string literal in an assertion");
      case ExprKind::Var:
        if (!env.store) throw SemanticError("assertion needs a store");
        return env.store->at(static_cast<std::size_t>(e.slot));
      case ExprKind::Bound:
        return bound.at(bound.size() - 1 - static_cast<std::size_t>(e.slot));
      case ExprKind::Clock:
        return env.clock;
      case ExprKind::Snapshot: {
        std::optional<Clock> v;
        if (env.snapshots) v = e.arrival ? env.snapshots->nth(e.loc, *e.arrival) : env.snapshots->latest(e.loc);
        if (!v) {
          throw SnapshotUndefined("snapshot undefined: T" + std::to_string(e.loc.thread) + ".l" +
                                  std::to_string(e.loc.label) + " not reached");
        }
        return *v;
      }
      case ExprKind::At:
        if (!env.pcs) throw SemanticError("at() needs control locations");
        return env.pcs->at(e.loc.thread) == e.loc.label;
      case ExprKind::Quant: {
        const bool forall = e.quant == Quantifier::ForAll;
        for (Value v = e.lo; v <= e.hi; ++v) {
          bound.push_back(v);
          const bool b = term(*e.args[0]) != 0;
          bound.pop_back();
          if (b != forall) return forall ? 0 : 1;
        }
        return forall ? 1 : 0;
      }
      case ExprKind::Approx: {
        const Value a = term(*e.args[0]);
        const Value b = term(*e.args[1]);
        const Value theta = e.args.size() > 2 ? term(*e.args[2]) : env.tolerance;
        return (a - b <= theta && b - a <= theta) ? 1 : 0;
      }
      case ExprKind::Unary: {
        const Value v = term(*e.args[0]);
        return e.unop == UnOp::Neg ? -v : (v ? 0 : 1);
      }
      case ExprKind::Binary:
        break;
    }
    const Value a = term(*e.args[0]);
    switch (e.binop) {
      case BinOp::And:
        return a ? (term(*e.args[1]) != 0) : 0;
      case BinOp::Or:
        return a ? 1 : (term(*e.args[1]) != 0);
      case BinOp::Implies:
        return a ? (term(*e.args[1]) != 0) : 1;
      default:
        break;
    }
    const Value b = term(*e.args[1]);
    switch (e.binop) {
      case BinOp::Add: return a + b;
      case BinOp::Sub: return a - b;
      case BinOp::Mul: return a * b;
      case BinOp::Eq: return a == b;
      case BinOp::Ne: return a != b;
      case BinOp::Lt: return a < b;
      case BinOp::Le: return a <= b;
      case BinOp::Gt: return a > b;
      case BinOp::Ge: return a >= b;
      case BinOp::Iff: return (a != 0) == (b != 0);
      default: return 0;
    }
  }
};

void collect_vars(const Expr& e, std::set<int>& out) {
  if (e.kind == ExprKind::Var) out.insert(e.slot);
  for (const auto& a : e.args) collect_vars(*a, out);
}

}  // namespace

Value eval_assertion_term(const Expr& e, const AssertionEnv& env) {
  Evaluator ev{env, {}};
  return ev.term(e);
}

bool eval_assertion(const Expr& a, const AssertionEnv& env) { return eval_assertion_term(a, env) != 0; }

bool eval_assertion(const Expr& a, const Program& p, const Configuration& c, Value tolerance) {
  const auto pcs = c.pcs(p);
  AssertionEnv env{&c.store, &c.snapshots, c.clock, &pcs, tolerance};
  return eval_assertion(a, env);
}

std::vector<int> secret_vars_in(const Expr& a, const Program& p) {
  std::set<int> vars;
  collect_vars(a, vars);
  std::vector<int> out;
  for (int s : vars) {
    if (p.vars.at(static_cast<std::size_t>(s)).secret) out.push_back(s);
  }
  return out;
}

std::string_view to_string(LeakyVerdict v) {
  switch (v) {
    case LeakyVerdict::Leaky: return "leaky";
    case LeakyVerdict::NotLeaky: return "not_leaky";
    case LeakyVerdict::Vacuous: return "vacuous";
  }
  return "?";
}

LeakyResult is_leaky_assertion(const ExprPtr& a, Location loc, const Program& p, const SecretDomain& domain,
                               const ExploreBounds& b, const CostModel& costs, Value tolerance) {
  LeakyResult r;
  const auto states = reachable_at(p, loc, domain, b, costs, &r.complete);
  r.states = states.size();

  auto holds = [&](const Configuration& c, const Store& store, bool& undefined) {
    const auto pcs = c.pcs(p);
    AssertionEnv env{&store, &c.snapshots, c.clock, &pcs, tolerance};
    try {
      return eval_assertion(*a, env);
    } catch (const SnapshotUndefined&) {
      undefined = true;
      return false;
    }
  };

  std::vector<std::set<Value>> seen(domain.slots.size());
  std::vector<const Configuration*> satisfying;
  for (const auto& s : states) {
    bool undefined = false;
    if (holds(s.config, s.config.store, undefined)) {
      satisfying.push_back(&s.config);
      for (std::size_t k = 0; k < domain.slots.size(); ++k) {
        seen[k].insert(s.config.store[static_cast<std::size_t>(domain.slots[k])]);
      }
    }
    if (undefined) ++r.undefined;
  }
  r.satisfying = satisfying.size();
  if (satisfying.empty()) {
    r.verdict = LeakyVerdict::Vacuous;
    return r;
  }

  for (std::size_t k = 0; k < domain.slots.size(); ++k) {
    const auto all = domain.values_of(k);
    if (seen[k].size() < all.size()) {
      r.verdict = LeakyVerdict::Leaky;
      r.secret_slot = domain.slots[k];
      r.consistent.assign(seen[k].begin(), seen[k].end());
      for (Value v : all) {
        if (!seen[k].count(v)) r.excluded.push_back(v);
      }
      return r;
    }
  }

  for (const Configuration* c : satisfying) {
    for (std::size_t k = 0; k < domain.slots.size(); ++k) {
      const auto slot = static_cast<std::size_t>(domain.slots[k]);
      Store varied = c->store;
      std::vector<Value> ok, bad;
      for (Value v : domain.values_of(k)) {
        varied[slot] = v;
        bool undefined = false;
        (holds(*c, varied, undefined) ? ok : bad).push_back(v);
      }
      if (!bad.empty()) {
        r.verdict = LeakyVerdict::Leaky;
        r.observation_conditioned = true;
        r.secret_slot = domain.slots[k];
        r.consistent = ok;
        r.excluded = bad;
        std::string w = "t=" + std::to_string(c->clock);
        for (std::size_t i = 0; i < p.vars.size(); ++i) {
          w += ", " + p.vars[i].name + "=" + std::to_string(c->store[i]);
        }
        for (StmtId l = 0; l <= p.threads[loc.thread].exit_label(); ++l) {
          if (auto s = c->snapshots.latest(Location{loc.thread, l})) {
            w += ", t@" + p.location_name(Location{loc.thread, l}) + "=" + std::to_string(*s);
          }
        }
        r.witness = w;
        return r;
      }
    }
  }
  r.verdict = LeakyVerdict::NotLeaky;
  return r;
}

}  // namespace leaklab
