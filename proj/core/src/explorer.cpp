#include "leaklab/explorer.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstring>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "leaklab/error.hpp"

namespace leaklab {

void ExploreBounds::validate() const {
  if (max_steps == 0) throw ConfigError("step bound must be positive");
  if (max_configs == 0) throw ConfigError("configuration bound must be positive");
}

std::string Observation::letters() const {
  std::string out;
  for (const auto& e : events) {
    if (!out.empty()) out += ' ';
    out += e.payload;
  }
  return out;
}

std::string Observation::render() const {
  std::string out;
  for (const auto& e : events) {
    if (!out.empty()) out += ' ';
    if (e.thread >= 0) out += "[" + std::to_string(e.thread) + "]";
    out += e.payload;
    if (e.time >= 0) out += "@" + std::to_string(e.time);
  }
  return out;
}

Observation Observation::payload_only() const {
  Observation o;
  for (const auto& e : events) o.events.push_back(ObservedEvent{e.payload, -1, e.thread});
  return o;
}

bool Observation::is_prefix_of(const Observation& other) const {
  return events.size() <= other.events.size() &&
         std::equal(events.begin(), events.end(), other.events.begin());
}

Observation observe(const std::vector<Event>& trace, const ExploreBounds& b) {
  Observation o;
  o.events.reserve(trace.size());
  for (const auto& e : trace) {
    o.events.push_back(ObservedEvent{e.payload, b.timing_blind ? -1 : e.time,
                                     b.observe_threads ? static_cast<int>(e.thread) : -1});
  }
  return o;
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Terminated: return "terminated";
    case Outcome::Deadlocked: return "deadlocked";
    case Outcome::Faulted: return "faulted";
    case Outcome::Truncated: return "truncated";
  }
  return "?";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::NoLeak: return "no_leak";
    case Verdict::Leak: return "leak";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::set<Observation> ExploreResult::complete_observations() const {
  std::set<Observation> out;
  for (const auto& [o, outcomes] : executions) {
    for (Outcome k : outcomes) {
      if (k != Outcome::Truncated) {
        out.insert(o);
        break;
      }
    }
  }
  return out;
}

bool ExploreResult::truncated() const {
  return std::any_of(executions.begin(), executions.end(),
                     [](const auto& kv) { return kv.second.count(Outcome::Truncated) > 0; });
}

namespace {

/// Byte-string key of a configuration for the visited map.
class KeyBuilder {
 public:
  void add(std::int64_t v) {
    char buf[sizeof v];
    std::memcpy(buf, &v, sizeof v);
    key_.append(buf, sizeof v);
  }
  void add(const std::string& s) {
    add(static_cast<std::int64_t>(s.size()));
    key_ += s;
  }
  std::string take() { return std::move(key_); }

 private:
  std::string key_;
};

enum class KeyMode { Observation, State };

std::string config_key(const Configuration& c, KeyMode mode, const ExploreBounds& b, const Program& p) {
  KeyBuilder k;
  for (const auto& r : c.residues) {
    k.add(static_cast<std::int64_t>(r.size()));
    for (StmtId s : r) k.add(s);
  }
  for (Value v : c.store) k.add(v);
  if (mode == KeyMode::State || !b.timing_blind) k.add(c.clock);
  if (mode == KeyMode::Observation) {
    k.add(static_cast<std::int64_t>(c.trace.size()));
    for (const auto& e : c.trace) {
      k.add(e.payload);
      if (!b.timing_blind) k.add(e.time);
      if (b.observe_threads) k.add(e.thread);
    }
  } else {
    for (ThreadId t = 0; t < p.threads.size(); ++t) {
      for (StmtId l = 0; l <= p.threads[t].exit_label(); ++l) {
        const auto& a = c.snapshots.arrivals(Location{t, l});
        k.add(static_cast<std::int64_t>(a.size()));
        for (Clock x : a) k.add(x);
      }
    }
  }
  return k.take();
}

class Explorer {
 public:
  Explorer(const Program& p, const ExploreBounds& b, const CostModel& costs, KeyMode mode)
      : p_(p), in_(p, costs), b_(b), mode_(mode) {}

  ExploreResult run(const Store& init, const std::function<void(const Configuration&)>* visit) {
    visit_ = visit;
    Configuration c = in_.initial(init);
    dfs(c, 0);
    result_.configurations = visited_.size();
    return std::move(result_);
  }

 private:
  void finish(const Configuration& c, Outcome o) {
    if (mode_ == KeyMode::Observation) result_.executions[observe(c.trace, b_)].insert(o);
  }

  void dfs(const Configuration& c, std::size_t depth) {
    if (result_.budget_exhausted) return;
    std::string key = config_key(c, mode_, b_, p_);
    auto it = visited_.find(key);
    if (it != visited_.end()) {
      if (it->second <= depth) return;
      it->second = depth;
    } else {
      if (visited_.size() >= b_.max_configs) {
        result_.budget_exhausted = true;
        return;
      }
      visited_.emplace(std::move(key), depth);
      if (visit_) (*visit_)(c);
    }
    if (c.all_done()) {
      finish(c, Outcome::Terminated);
      return;
    }
    const auto choices = in_.enabled(c);
    if (choices.empty()) {
      finish(c, Outcome::Deadlocked);
      return;
    }
    if (depth >= b_.max_steps) {
      finish(c, Outcome::Truncated);
      truncated_ = true;
      return;
    }
    for (ThreadId t : choices) {
      Configuration next = c;
      try {
        in_.step_in_place(next, t);
      } catch (const RuntimeError& e) {
        finish(c, Outcome::Faulted);
        if (std::find(result_.faults.begin(), result_.faults.end(), e.what()) == result_.faults.end()) {
          result_.faults.emplace_back(e.what());
        }
        continue;
      }
      dfs(next, depth + 1);
      if (result_.budget_exhausted) return;
    }
  }

 public:
  bool truncated_ = false;

 private:
  const Program& p_;
  Interpreter in_;
  const ExploreBounds& b_;
  KeyMode mode_;
  const std::function<void(const Configuration&)>* visit_ = nullptr;
  std::unordered_map<std::string, std::size_t> visited_;
  ExploreResult result_;
};

}  // namespace

ExploreResult explore(const Program& p, const Store& init, const ExploreBounds& b, const CostModel& costs) {
  b.validate();
  Explorer ex(p, b, costs, KeyMode::Observation);
  ExploreResult r = ex.run(init, nullptr);
  std::sort(r.faults.begin(), r.faults.end());
  return r;
}

bool explore_states(const Program& p, const Store& init, const ExploreBounds& b, const CostModel& costs,
                    const std::function<void(const Configuration&)>& visit) {
  b.validate();
  Explorer ex(p, b, costs, KeyMode::State);
  ExploreResult r = ex.run(init, &visit);
  return !r.budget_exhausted && !ex.truncated_;
}

// ---------------------------------------------------------------------------

std::string SecretDomain::render(const Program& p, const SecretValuation& v) const {
  std::string out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i) out += ",";
    out += p.vars[static_cast<std::size_t>(slots[i])].name + "=" + std::to_string(v[i]);
  }
  return out;
}

Store SecretDomain::apply(const Store& base, const SecretValuation& v) const {
  Store s = base;
  for (std::size_t i = 0; i < slots.size(); ++i) s[static_cast<std::size_t>(slots[i])] = v[i];
  return s;
}

std::vector<Value> SecretDomain::values_of(std::size_t k) const {
  std::set<Value> vals;
  for (const auto& v : valuations) vals.insert(v[k]);
  return {vals.begin(), vals.end()};
}

SecretDomain secret_domain(const Program& p, const std::map<std::string, std::pair<Value, Value>>& ranges) {
  for (const auto& [name, r] : ranges) {
    const int slot = p.find_var(name);
    if (slot < 0) throw ConfigError("--secret names unknown variable '" + name + "'");
    if (!p.vars[static_cast<std::size_t>(slot)].secret) {
      throw ConfigError("--secret names '" + name + "', which is not declared secret");
    }
    const VarDecl& d = p.vars[static_cast<std::size_t>(slot)];
    if (r.first > r.second || !d.in_domain(r.first) || !d.in_domain(r.second)) {
      throw ConfigError("secret range for '" + name + "' is empty or outside the declared domain");
    }
  }
  SecretDomain dom;
  std::vector<std::pair<Value, Value>> bounds;
  for (int slot : p.secret_slots()) {
    const VarDecl& d = p.vars[static_cast<std::size_t>(slot)];
    auto it = ranges.find(d.name);
    dom.slots.push_back(slot);
    bounds.push_back(it == ranges.end() ? std::make_pair(d.lo, d.hi) : it->second);
  }
  SecretValuation cur;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == bounds.size()) {
      dom.valuations.push_back(cur);
      return;
    }
    for (Value v = bounds[i].first; v <= bounds[i].second; ++v) {
      cur.push_back(v);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return dom;
}

std::pair<std::string, std::pair<Value, Value>> parse_secret_range(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("bad --secret '" + text + "', expected h=0..1");
  const std::string name = text.substr(0, eq);
  const std::string rest = text.substr(eq + 1);
  auto num = [&](const std::string& s) {
    Value v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      throw ConfigError("bad --secret '" + text + "', expected h=0..1");
    }
    return v;
  };
  const auto dots = rest.find("..");
  if (dots == std::string::npos) {
    const Value v = num(rest);
    return {name, {v, v}};
  }
  const Value lo = num(rest.substr(0, dots));
  const Value hi = num(rest.substr(dots + 2));
  if (lo > hi) throw ConfigError("empty range in --secret '" + text + "'");
  return {name, {lo, hi}};
}

// ---------------------------------------------------------------------------

namespace {

/// Runs `work(i)` for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& work) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  for (unsigned w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

using ProjectFn = Observation (*)(const Observation&);

Observation identity(const Observation& o) { return o; }
Observation payloads(const Observation& o) { return o.payload_only(); }

std::vector<KnowledgeEntry> partition(const SecretDomain& dom, const std::vector<ExploreResult>& runs,
                                      ProjectFn project) {
  std::map<Observation, std::set<std::size_t>> k;
  std::vector<std::vector<Observation>> truncated(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (const auto& [o, outcomes] : runs[i].executions) {
      Observation po = project(o);
      for (Outcome out : outcomes) {
        if (out == Outcome::Truncated) {
          truncated[i].push_back(po);
        } else {
          k[po].insert(i);
        }
      }
    }
  }
  std::vector<KnowledgeEntry> entries;
  for (const auto& [o, members] : k) {
    KnowledgeEntry e;
    e.observation = o;
    for (std::size_t i : members) e.knowledge.push_back(dom.valuations[i]);
    e.leaky = members.size() < dom.valuations.size();
    if (e.leaky) {
      e.confirmed = true;
      for (std::size_t i = 0; i < runs.size() && e.confirmed; ++i) {
        if (members.count(i)) continue;
        if (runs[i].budget_exhausted) {
          e.confirmed = false;
          break;
        }
        for (const auto& prefix : truncated[i]) {
          if (prefix.is_prefix_of(o)) {
            e.confirmed = false;
            break;
          }
        }
      }
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace

const KnowledgeEntry* KnowledgeReport::find_letters(const std::string& letters) const {
  for (const auto& e : payload_entries) {
    if (e.observation.letters() == letters) return &e;
  }
  return nullptr;
}

KnowledgeReport knowledge_partition(const Program& p, const Store& init_public, const SecretDomain& domain,
                                    const ExploreBounds& b, const CostModel& costs, unsigned jobs) {
  b.validate();
  if (domain.valuations.empty()) throw ConfigError("empty secret domain");
  std::vector<ExploreResult> runs(domain.valuations.size());
  parallel_for(domain.valuations.size(), jobs, [&](std::size_t i) {
    runs[i] = explore(p, domain.apply(init_public, domain.valuations[i]), b, costs);
  });

  KnowledgeReport r;
  r.domain = domain;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    ValuationSummary s;
    s.valuation = domain.valuations[i];
    s.configurations = runs[i].configurations;
    for (const auto& [o, outcomes] : runs[i].executions) s.executions += outcomes.size();
    s.truncated = runs[i].truncated();
    s.budget_exhausted = runs[i].budget_exhausted;
    s.faults = runs[i].faults;
    if (s.truncated || s.budget_exhausted) r.complete = false;
    r.valuations.push_back(std::move(s));
  }
  r.entries = partition(domain, runs, identity);
  r.payload_entries = b.timing_blind ? r.entries : partition(domain, runs, payloads);

  const bool any_confirmed =
      std::any_of(r.entries.begin(), r.entries.end(), [](const KnowledgeEntry& e) { return e.confirmed; });
  r.verdict = any_confirmed ? Verdict::Leak : (r.complete ? Verdict::NoLeak : Verdict::Inconclusive);

  if (!b.timing_blind) {
    std::map<Observation, bool> payload_leaky;
    for (const auto& e : r.payload_entries) payload_leaky[e.observation] = e.leaky;
    for (const auto& e : r.entries) {
      if (e.confirmed && !payload_leaky[e.observation.payload_only()]) r.timing_leak = true;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

std::vector<ReachableState> reachable_at(const Program& p, Location loc, const SecretDomain& domain,
                                         const ExploreBounds& b, const CostModel& costs, bool* complete) {
  if (loc.thread >= p.threads.size() || loc.label > p.threads[loc.thread].exit_label()) {
    throw SemanticError("unknown location " + p.location_name(loc));
  }
  std::vector<ReachableState> out;
  bool all = true;
  const Store base = initial_store(p);
  for (const auto& v : domain.valuations) {
    all &= explore_states(p, domain.apply(base, v), b, costs, [&](const Configuration& c) {
      if (c.pc(p, loc.thread) == loc.label) out.push_back(ReachableState{v, c});
    });
  }
  if (complete) *complete = all;
  return out;
}

DurationStats duration_stats(const Program& p, Location from, Location to, const SecretDomain& domain,
                             const ExploreBounds& b, const CostModel& costs) {
  if (from.thread != to.thread) throw SemanticError("duration endpoints must be in the same thread");
  for (Location l : {from, to}) {
    if (l.thread >= p.threads.size() || l.label > p.threads[l.thread].exit_label()) {
      throw SemanticError("unknown location " + p.location_name(l));
    }
  }
  DurationStats st;
  st.from = from;
  st.to = to;
  const Store base = initial_store(p);
  for (const auto& v : domain.valuations) {
    auto& set = st.durations[v];
    st.complete &= explore_states(p, domain.apply(base, v), b, costs, [&](const Configuration& c) {
      const auto& starts = c.snapshots.arrivals(from);
      for (Clock end : c.snapshots.arrivals(to)) {
        auto it = std::upper_bound(starts.begin(), starts.end(), end);
        if (it == starts.begin()) continue;
        set.insert(end - *std::prev(it));
      }
    });
  }
  return st;
}

Program isolate_thread(const Program& p, ThreadId t) {
  Program q;
  q.vars = p.vars;
  q.threads.push_back(p.threads.at(t));
  return q;
}

}  // namespace leaklab
