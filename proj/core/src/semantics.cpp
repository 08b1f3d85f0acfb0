#include "leaklab/semantics.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "leaklab/error.hpp"

namespace leaklab {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

Clock parse_cost(const std::string& text, std::size_t line) {
  Clock v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    throw ConfigError("cost config line " + std::to_string(line) + ": '" + text + "' is not an integer");
  }
  if (v < 1) {
    throw ConfigError("cost config line " + std::to_string(line) + ": costs must be at least 1");
  }
  return v;
}

StmtId parse_label(const std::string& text, std::size_t line) {
  StmtId v = 0;
  if (text.size() >= 2 && text[0] == 'l') {
    auto [p, ec] = std::from_chars(text.data() + 1, text.data() + text.size(), v);
    if (ec == std::errc() && p == text.data() + text.size()) return v;
  }
  throw ConfigError("cost config line " + std::to_string(line) + ": bad label '" + text + "'");
}

}  // namespace

CostModel CostModel::parse(std::string_view text) {
  CostModel m;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string l = trim(raw);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("cost config line " + std::to_string(line) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(l).substr(0, eq));
    const Clock value = parse_cost(trim(std::string_view(l).substr(eq + 1)), line);
    if (key == "unit_cost") {
      m.unit_cost = value;
    } else if (key.rfind("cost.", 0) == 0) {
      const std::string rest = key.substr(5);
      const auto dot = rest.find('.');
      if (dot == std::string::npos) {
        m.by_label[parse_label(rest, line)] = value;
      } else {
        m.by_thread_label[rest.substr(0, dot)][parse_label(rest.substr(dot + 1), line)] = value;
      }
    } else {
      throw ConfigError("cost config line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }
  return m;
}

CostModel CostModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read cost config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<Clock> CostModel::override_for(const Program& p, Location loc) const {
  if (loc.thread < p.threads.size()) {
    auto t = by_thread_label.find(p.threads[loc.thread].name);
    if (t != by_thread_label.end()) {
      auto it = t->second.find(loc.label);
      if (it != t->second.end()) return it->second;
    }
  }
  auto it = by_label.find(loc.label);
  if (it != by_label.end()) return it->second;
  return std::nullopt;
}

Store initial_store(const Program& p) {
  Store s;
  s.reserve(p.vars.size());
  for (const auto& v : p.vars) s.push_back(v.secret ? v.lo : v.init);
  return s;
}

// ---------------------------------------------------------------------------

Snapshots::Snapshots(const Program& p) {
  data_.resize(p.threads.size());
  for (std::size_t i = 0; i < p.threads.size(); ++i) data_[i].resize(p.threads[i].stmts.size() + 1);
}

void Snapshots::record(Location loc, Clock c) { data_.at(loc.thread).at(loc.label).push_back(c); }

std::optional<Clock> Snapshots::latest(Location loc) const {
  if (loc.thread >= data_.size() || loc.label >= data_[loc.thread].size()) return std::nullopt;
  const auto& v = data_[loc.thread][loc.label];
  if (v.empty()) return std::nullopt;
  return v.back();
}

std::optional<Clock> Snapshots::nth(Location loc, std::uint32_t index) const {
  if (loc.thread >= data_.size() || loc.label >= data_[loc.thread].size() || index == 0) return std::nullopt;
  const auto& v = data_[loc.thread][loc.label];
  if (index > v.size()) return std::nullopt;
  return v[index - 1];
}

const std::vector<Clock>& Snapshots::arrivals(Location loc) const {
  static const std::vector<Clock> empty;
  if (loc.thread >= data_.size() || loc.label >= data_[loc.thread].size()) return empty;
  return data_[loc.thread][loc.label];
}

bool Configuration::all_done() const {
  return std::all_of(residues.begin(), residues.end(), [](const auto& r) { return r.empty(); });
}

StmtId Configuration::pc(const Program& p, ThreadId t) const {
  return residues[t].empty() ? p.threads[t].exit_label() : residues[t].back();
}

std::vector<StmtId> Configuration::pcs(const Program& p) const {
  std::vector<StmtId> out;
  for (ThreadId t = 0; t < residues.size(); ++t) out.push_back(pc(p, t));
  return out;
}

// ---------------------------------------------------------------------------

Value eval_expr(const Expr& e, const Store& s) {
  switch (e.kind) {
    case ExprKind::Int:
    case ExprKind::Bool:
      return e.value;
    case ExprKind::Var:
      return s.at(static_cast<std::size_t>(e.slot));
    case ExprKind::Unary: {
      const Value v = eval_expr(*e.args[0], s);
      return e.unop == UnOp::Neg ? -v : (v ? 0 : 1);
    }
    case ExprKind::Binary: {
      const Value a = eval_expr(*e.args[0], s);
      if (e.binop == BinOp::And && !a) return 0;
      if (e.binop == BinOp::Or && a) return 1;
      const Value b = eval_expr(*e.args[1], s);
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
        case BinOp::And:
        case BinOp::Or: return b ? 1 : 0;
        case BinOp::Implies: return (!a || b) ? 1 : 0;
        case BinOp::Iff: return (!a == !b) ? 1 : 0;
      }
      break;
    }
    default:
      break;
  }
  throw RuntimeError("expression cannot be evaluated on a store alone");
}

std::string render_payload(const Expr& arg, const Store& s, const Program& p) {
  if (arg.kind == ExprKind::Str) return arg.name;
  const Value v = eval_expr(arg, s);
  if (type_of(arg, p) == Type::Bool) return v ? "true" : "false";
  return std::to_string(v);
}

// ---------------------------------------------------------------------------

Interpreter::Interpreter(const Program& p, CostModel costs) : p_(&p), costs_(std::move(costs)) {}

Configuration Interpreter::initial(const Store& init) const {
  if (init.size() != p_->vars.size()) throw RuntimeError("initial store has the wrong number of variables");
  Configuration c;
  c.store = init;
  for (std::size_t i = 0; i < init.size(); ++i) {
    if (!p_->vars[i].in_domain(init[i])) {
      throw RuntimeError("initial value of '" + p_->vars[i].name + "' is outside its domain");
    }
  }
  c.snapshots = Snapshots(*p_);
  for (ThreadId t = 0; t < p_->threads.size(); ++t) {
    const auto& body = p_->threads[t].body;
    c.residues.emplace_back(body.rbegin(), body.rend());
    c.snapshots.record(Location{t, c.pc(*p_, t)}, 0);
  }
  return c;
}

bool Interpreter::enabled(const Configuration& c, ThreadId t) const {
  if (c.done(t)) return false;
  const Stmt& s = p_->threads[t].at(c.residues[t].back());
  if (s.kind != StmtKind::Await) return true;
  return eval_expr(*s.expr, c.store) != 0;
}

std::vector<ThreadId> Interpreter::enabled(const Configuration& c) const {
  std::vector<ThreadId> out;
  for (ThreadId t = 0; t < c.residues.size(); ++t) {
    if (enabled(c, t)) out.push_back(t);
  }
  return out;
}

Clock Interpreter::base_cost(Location loc) const {
  if (auto o = costs_.override_for(*p_, loc)) return *o;
  return costs_.unit_cost;
}

Clock Interpreter::delay_cost(Location loc, Value amount) const {
  if (auto o = costs_.override_for(*p_, loc)) return *o;
  if (amount < 0) {
    throw RuntimeError(p_->location_name(loc) + ": negative delay " + std::to_string(amount));
  }
  return std::max<Clock>(1, amount);
}

void Interpreter::assign(Configuration& c, const Stmt& s) const {
  const Value v = eval_expr(*s.expr, c.store);
  const VarDecl& d = p_->vars[static_cast<std::size_t>(s.target)];
  if (!d.in_domain(v)) {
    throw RuntimeError("domain overflow: " + d.name + " = " + std::to_string(v) + " outside " +
                       std::to_string(d.lo) + ".." + std::to_string(d.hi));
  }
  c.store[static_cast<std::size_t>(s.target)] = v;
}

Clock Interpreter::run_atomic(ThreadId t, const std::vector<StmtId>& body, Configuration& c,
                              std::vector<std::string>& prints) const {
  constexpr std::size_t kMaxAtomicSteps = 100000;
  const Thread& th = p_->threads[t];
  std::vector<StmtId> stack(body.rbegin(), body.rend());
  Clock cost = 0;
  std::size_t steps = 0;
  while (!stack.empty()) {
    if (++steps > kMaxAtomicSteps) {
      throw RuntimeError(th.name + ": await body does not terminate within " +
                         std::to_string(kMaxAtomicSteps) + " steps");
    }
    const Stmt& s = th.at(stack.back());
    const Location loc{t, s.label};
    switch (s.kind) {
      case StmtKind::Skip:
        stack.pop_back();
        cost += base_cost(loc);
        break;
      case StmtKind::Assign:
        stack.pop_back();
        assign(c, s);
        cost += base_cost(loc);
        break;
      case StmtKind::Print:
        stack.pop_back();
        prints.push_back(render_payload(*s.expr, c.store, *p_));
        cost += base_cost(loc);
        break;
      case StmtKind::Delay:
        stack.pop_back();
        cost += delay_cost(loc, eval_expr(*s.expr, c.store));
        break;
      case StmtKind::If: {
        stack.pop_back();
        const auto& branch = eval_expr(*s.expr, c.store) ? s.body : s.orelse;
        stack.insert(stack.end(), branch.rbegin(), branch.rend());
        cost += base_cost(loc);
        break;
      }
      case StmtKind::While:
        if (eval_expr(*s.expr, c.store)) {
          stack.insert(stack.end(), s.body.rbegin(), s.body.rend());
        } else {
          stack.pop_back();
        }
        cost += base_cost(loc);
        break;
      case StmtKind::Await:
        throw RuntimeError("nested await");
    }
  }
  return cost;
}

void Interpreter::step_in_place(Configuration& c, ThreadId t) const {
  if (c.done(t)) throw RuntimeError("step on a finished thread");
  auto& stack = c.residues[t];
  const Stmt& s = p_->threads[t].at(stack.back());
  const Location loc{t, s.label};
  Clock cost = 0;
  std::vector<std::string> prints;
  switch (s.kind) {
    case StmtKind::Skip:
      stack.pop_back();
      cost = base_cost(loc);
      break;
    case StmtKind::Assign:
      assign(c, s);
      stack.pop_back();
      cost = base_cost(loc);
      break;
    case StmtKind::Print:
      prints.push_back(render_payload(*s.expr, c.store, *p_));
      stack.pop_back();
      cost = base_cost(loc);
      break;
    case StmtKind::Delay:
      cost = delay_cost(loc, eval_expr(*s.expr, c.store));
      stack.pop_back();
      break;
    case StmtKind::If: {
      const bool g = eval_expr(*s.expr, c.store) != 0;
      stack.pop_back();
      const auto& branch = g ? s.body : s.orelse;
      stack.insert(stack.end(), branch.rbegin(), branch.rend());
      cost = base_cost(loc);
      break;
    }
    case StmtKind::While:
      if (eval_expr(*s.expr, c.store)) {
        stack.insert(stack.end(), s.body.rbegin(), s.body.rend());
      } else {
        stack.pop_back();
      }
      cost = base_cost(loc);
      break;
    case StmtKind::Await:
      if (!eval_expr(*s.expr, c.store)) throw RuntimeError("step on a blocked await");
      stack.pop_back();
      cost = base_cost(loc) + run_atomic(t, s.body, c, prints);
      break;
  }
  c.clock += cost;
  for (auto& text : prints) c.trace.push_back(Event{t, std::move(text), c.clock});
  c.snapshots.record(Location{t, c.pc(*p_, t)}, c.clock);
}

Configuration Interpreter::step(const Configuration& c, ThreadId t) const {
  Configuration next = c;
  step_in_place(next, t);
  return next;
}

// ---------------------------------------------------------------------------

RunResult run_deterministic(const Program& p, const Store& init, const CostModel& costs,
                            std::size_t max_steps) {
  if (p.threads.size() != 1) throw RuntimeError("run_deterministic needs a single-thread program");
  Interpreter in(p, costs);
  Configuration c = in.initial(init);
  std::size_t steps = 0;
  while (!c.all_done()) {
    if (!in.enabled(c, 0)) {
      throw RuntimeError(p.location_name(Location{0, c.pc(p, 0)}) + ": await blocks forever");
    }
    if (++steps > max_steps) throw RuntimeError("step bound of " + std::to_string(max_steps) + " exceeded");
    in.step_in_place(c, 0);
  }
  return RunResult{std::move(c.trace), std::move(c.store), std::move(c.snapshots), c.clock};
}

Configuration run_schedule(const Interpreter& in, const Store& init, const std::vector<ThreadId>& schedule) {
  Configuration c = in.initial(init);
  for (ThreadId t : schedule) {
    if (t >= c.residues.size() || !in.enabled(c, t)) {
      throw RuntimeError("schedule chooses a thread that is not enabled");
    }
    in.step_in_place(c, t);
  }
  return c;
}

std::string dump_trace(const Program& p, const std::vector<Event>& trace) {
  std::string out;
  for (const auto& e : trace) {
    out += p.threads.at(e.thread).name;
    out += '\t';
    out += e.payload;
    out += '\t';
    out += std::to_string(e.time);
    out += '\n';
  }
  return out;
}

}  // namespace leaklab
