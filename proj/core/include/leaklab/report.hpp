#pragma once

// Deterministic JSON reports. Every report is an object with "tool",
// "version" and "kind"; docs/report.schema.json describes them all.

#include <string>
#include <vector>

#include "leaklab/dl.hpp"
#include "leaklab/explorer.hpp"
#include "leaklab/ifc.hpp"
#include "leaklab/proofs.hpp"

namespace leaklab {

inline constexpr const char* kVersion = "0.1.0";

std::string parse_report_json(const Program& p, const std::string& listing);

/// All observations of one initial store.
std::string run_report_json(const Program& p, const Store& init, const ExploreResult& r);

/// One schedule or a deterministic single-thread run.
std::string trace_report_json(const Program& p, const Store& init, const std::vector<Event>& trace,
                              const Store& final_store, Clock clock, const std::string& outcome);

std::string leakscan_report_json(const Program& p, const KnowledgeReport& r, const ExploreBounds& b);

std::string proof_report_json(const Program& p, const ProofResult& r);

/// `synthesis` may be null.
std::string dl_report_json(const Program& p, const LabelReport& r, const SynthesisResult* synthesis);

struct IfcCheck {
  std::string check;  // "sequential" or "concurrent"
  std::vector<std::size_t> sequences;
  NiResult result;
};

std::string ifc_report_json(const IfcScenario& sc, const std::vector<IfcCheck>& checks);

std::string emit_report_json(const Program& p, const std::vector<VC>& vcs, const std::vector<std::string>& files);

}  // namespace leaklab
