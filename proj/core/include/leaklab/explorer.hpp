#pragma once

// Exhaustive bounded interleaving exploration and attacker knowledge.

#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "leaklab/lang.hpp"
#include "leaklab/semantics.hpp"

namespace leaklab {

struct ExploreBounds {
  std::size_t max_steps = 200;         // per execution
  std::size_t max_configs = 2000000;   // distinct configurations per valuation
  bool timing_blind = false;
  bool observe_threads = false;        // attacker also sees which thread printed

  void validate() const;
};

struct ObservedEvent {
  std::string payload;
  Clock time = -1;     // -1 when timing-blind
  int thread = -1;     // -1 unless threads are observed

  auto operator<=>(const ObservedEvent&) const = default;
};

struct Observation {
  std::vector<ObservedEvent> events;

  auto operator<=>(const Observation&) const = default;

  /// "a c d b" (payloads only)
  std::string letters() const;
  /// "a@2 c@3 d@5 b@6"; equals letters() when timing-blind.
  std::string render() const;
  Observation payload_only() const;
  bool is_prefix_of(const Observation& other) const;
};

Observation observe(const std::vector<Event>& trace, const ExploreBounds& b);

enum class Outcome : std::uint8_t { Terminated, Deadlocked, Faulted, Truncated };

std::string_view to_string(Outcome o);

struct ExploreResult {
  /// Observation of every maximal execution, with how it ended. Truncated
  /// entries hold the observation of the prefix explored so far.
  std::map<Observation, std::set<Outcome>> executions;
  std::vector<std::string> faults;  // distinct runtime error messages
  std::size_t configurations = 0;
  bool budget_exhausted = false;

  /// Observations of complete (non-truncated) executions.
  std::set<Observation> complete_observations() const;
  bool truncated() const;
  bool fully_explored() const { return !budget_exhausted && !truncated(); }
};

/// Explores every schedule of `p` from `init`.
ExploreResult explore(const Program& p, const Store& init, const ExploreBounds& b,
                      const CostModel& costs = {});

/// Visits every distinct reachable configuration (keyed on residues, store,
/// clock and snapshots; the trace is ignored). Returns false when a bound cut
/// the search short.
bool explore_states(const Program& p, const Store& init, const ExploreBounds& b, const CostModel& costs,
                    const std::function<void(const Configuration&)>& visit);

// ---------------------------------------------------------------------------
// Secrets and knowledge
// ---------------------------------------------------------------------------

/// Values of the secret variables, in declaration order.
using SecretValuation = std::vector<Value>;

struct SecretDomain {
  std::vector<int> slots;                    // secret variable slots
  std::vector<SecretValuation> valuations;   // cartesian product, lexicographic

  std::string render(const Program& p, const SecretValuation& v) const;  // "h=0"
  Store apply(const Store& base, const SecretValuation& v) const;
  /// Distinct values of slot index `k` (index into `slots`).
  std::vector<Value> values_of(std::size_t k) const;
};

/// Cartesian product of declared secret domains. `ranges` maps a variable
/// name to an overriding inclusive range ("h" -> {0, 1}).
SecretDomain secret_domain(const Program& p, const std::map<std::string, std::pair<Value, Value>>& ranges = {});

/// Parses "h=0..1" or "h=3".
std::pair<std::string, std::pair<Value, Value>> parse_secret_range(const std::string& text);

enum class Verdict : std::uint8_t { NoLeak, Leak, Inconclusive };

std::string_view to_string(Verdict v);

struct KnowledgeEntry {
  Observation observation;
  std::vector<SecretValuation> knowledge;  // K(o), sorted
  bool leaky = false;                      // K(o) is a strict subset of the domain
  bool confirmed = false;                  // leaky and not an artefact of truncation
};

struct ValuationSummary {
  SecretValuation valuation;
  std::size_t configurations = 0;
  std::size_t executions = 0;
  bool truncated = false;
  bool budget_exhausted = false;
  std::vector<std::string> faults;
};

struct KnowledgeReport {
  SecretDomain domain;
  std::vector<KnowledgeEntry> entries;          // sorted by observation
  std::vector<KnowledgeEntry> payload_entries;  // same partition on payloads alone
  std::vector<ValuationSummary> valuations;
  Verdict verdict = Verdict::NoLeak;
  bool complete = true;
  bool timing_leak = false;  // a timed observation leaks while its payloads alone do not

  const KnowledgeEntry* find_letters(const std::string& letters) const;  // payload entry
};

/// K(o) for every observation over all valuations of `domain`. Public
/// variables take their values from `init_public`. `jobs` > 1 explores
/// valuations concurrently; the report does not depend on it.
KnowledgeReport knowledge_partition(const Program& p, const Store& init_public, const SecretDomain& domain,
                                    const ExploreBounds& b, const CostModel& costs = {}, unsigned jobs = 1);

// ---------------------------------------------------------------------------
// Reachability helpers
// ---------------------------------------------------------------------------

struct ReachableState {
  SecretValuation valuation;
  Configuration config;
};

/// Distinct reachable configurations in which thread `loc.thread` rests at
/// `loc.label`, over all valuations. `complete` reports whether every
/// exploration finished within bounds.
std::vector<ReachableState> reachable_at(const Program& p, Location loc, const SecretDomain& domain,
                                         const ExploreBounds& b, const CostModel& costs, bool* complete = nullptr);

struct DurationStats {
  Location from;
  Location to;
  std::map<SecretValuation, std::set<Clock>> durations;  // per valuation
  bool complete = true;
};

/// For each valuation, the achievable differences between an arrival at `to`
/// and the latest arrival at `from` not after it.
DurationStats duration_stats(const Program& p, Location from, Location to, const SecretDomain& domain,
                             const ExploreBounds& b, const CostModel& costs = {});

/// The program restricted to one thread (same declarations).
Program isolate_thread(const Program& p, ThreadId t);

}  // namespace leaklab
