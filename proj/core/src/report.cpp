#include "leaklab/report.hpp"

#include "json.hpp"
#include "leaklab/parser.hpp"

namespace leaklab {

namespace {

using json = nlohmann::ordered_json;

json header(std::string_view kind) {
  json j;
  j["tool"] = "leaklab";
  j["version"] = kVersion;
  j["kind"] = kind;
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json store_json(const Program& p, const Store& s) {
  json j = json::object();
  for (std::size_t i = 0; i < p.vars.size() && i < s.size(); ++i) {
    if (p.vars[i].type == Type::Bool) {
      j[p.vars[i].name] = s[i] != 0;
    } else {
      j[p.vars[i].name] = s[i];
    }
  }
  return j;
}

json observation_json(const Observation& o) {
  json events = json::array();
  for (const auto& e : o.events) {
    json ev;
    ev["payload"] = e.payload;
    if (e.time >= 0) ev["time"] = e.time;
    if (e.thread >= 0) ev["thread"] = e.thread;
    events.push_back(ev);
  }
  json j;
  j["text"] = o.render();
  j["letters"] = o.letters();
  j["events"] = events;
  return j;
}

json entry_json(const Program& p, const SecretDomain& d, const KnowledgeEntry& e) {
  json j;
  j["observation"] = observation_json(e.observation);
  json k = json::array();
  for (const auto& v : e.knowledge) k.push_back(d.render(p, v));
  j["knowledge"] = k;
  j["leaky"] = e.leaky;
  j["confirmed"] = e.confirmed;
  return j;
}

json location_json(const Program& p, Location loc) { return p.location_name(loc); }

json symbols_json(const std::map<std::string, Value>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

json durations_json(const Program& p, const SecretDomain* d, const DurationStats& st) {
  json j = json::array();
  for (const auto& [val, ds] : st.durations) {
    json row;
    std::string name;
    if (d) {
      name = d->render(p, val);
    } else {
      for (std::size_t i = 0; i < val.size(); ++i) name += (i ? "," : "") + std::to_string(val[i]);
    }
    row["valuation"] = name;
    row["durations"] = json(std::vector<Clock>(ds.begin(), ds.end()));
    j.push_back(row);
  }
  return j;
}

json ni_json(const NiResult& r) {
  json j;
  j["status"] = to_string(r.status);
  j["ok"] = r.ok();
  if (r.condition) j["condition"] = r.condition;
  json w = json::array();
  for (const auto& op : r.witness) w.push_back(to_string(op));
  j["witness"] = w;
  j["detail"] = r.detail;
  return j;
}

}  // namespace

std::string parse_report_json(const Program& p, const std::string& listing) {
  json j = header("parse");
  json vars = json::array();
  for (const auto& d : p.vars) {
    json v;
    v["name"] = d.name;
    v["type"] = d.type == Type::Bool ? "bool" : "int";
    v["lo"] = d.lo;
    v["hi"] = d.hi;
    v["label"] = d.label;
    v["dynamic"] = d.dynamic;
    v["secret"] = d.secret;
    if (!d.secret) v["init"] = d.init;
    vars.push_back(v);
  }
  j["variables"] = vars;
  json threads = json::array();
  for (ThreadId t = 0; t < p.threads.size(); ++t) {
    const Thread& th = p.threads[t];
    json tj;
    tj["name"] = th.name;
    json stmts = json::array();
    for (const auto& s : th.stmts) {
      json sj;
      sj["label"] = "l" + std::to_string(s.label);
      sj["kind"] = to_string(s.kind);
      if (s.expr) sj["expr"] = unparse_expr(*s.expr, p, t);
      stmts.push_back(sj);
    }
    tj["statements"] = stmts;
    tj["exit"] = "l" + std::to_string(th.exit_label());
    threads.push_back(tj);
  }
  j["threads"] = threads;
  j["listing"] = listing;
  return dump(j);
}

std::string run_report_json(const Program& p, const Store& init, const ExploreResult& r) {
  json j = header("run");
  j["initial"] = store_json(p, init);
  json execs = json::array();
  for (const auto& [o, outcomes] : r.executions) {
    json e;
    e["observation"] = observation_json(o);
    json oc = json::array();
    for (Outcome x : outcomes) oc.push_back(to_string(x));
    e["outcomes"] = oc;
    execs.push_back(e);
  }
  j["executions"] = execs;
  j["faults"] = r.faults;
  j["configurations"] = r.configurations;
  j["complete"] = r.fully_explored();
  return dump(j);
}

std::string trace_report_json(const Program& p, const Store& init, const std::vector<Event>& trace,
                              const Store& final_store, Clock clock, const std::string& outcome) {
  json j = header("trace");
  j["initial"] = store_json(p, init);
  json events = json::array();
  for (const auto& e : trace) {
    json ev;
    ev["thread"] = p.threads.at(e.thread).name;
    ev["payload"] = e.payload;
    ev["time"] = e.time;
    events.push_back(ev);
  }
  j["events"] = events;
  j["final"] = store_json(p, final_store);
  j["clock"] = clock;
  j["outcome"] = outcome;
  return dump(j);
}

std::string leakscan_report_json(const Program& p, const KnowledgeReport& r, const ExploreBounds& b) {
  json j = header("leakscan");
  json bounds;
  bounds["steps"] = b.max_steps;
  bounds["configs"] = b.max_configs;
  bounds["timing_blind"] = b.timing_blind;
  bounds["observe_threads"] = b.observe_threads;
  j["bounds"] = bounds;
  json domain = json::array();
  for (const auto& v : r.domain.valuations) domain.push_back(r.domain.render(p, v));
  j["domain"] = domain;
  json entries = json::array();
  for (const auto& e : r.entries) entries.push_back(entry_json(p, r.domain, e));
  j["observations"] = entries;
  json payload = json::array();
  for (const auto& e : r.payload_entries) payload.push_back(entry_json(p, r.domain, e));
  j["payload_observations"] = payload;
  json vals = json::array();
  for (const auto& v : r.valuations) {
    json vj;
    vj["valuation"] = r.domain.render(p, v.valuation);
    vj["configurations"] = v.configurations;
    vj["executions"] = v.executions;
    vj["truncated"] = v.truncated;
    vj["budget_exhausted"] = v.budget_exhausted;
    vj["faults"] = v.faults;
    vals.push_back(vj);
  }
  j["valuations"] = vals;
  j["verdict"] = to_string(r.verdict);
  j["timing_leak"] = r.timing_leak;
  j["complete"] = r.complete;
  return dump(j);
}

std::string proof_report_json(const Program& p, const ProofResult& r) {
  json j = header("ogcheck");
  json vcs = json::array();
  for (std::size_t i = 0; i < r.vcs.size(); ++i) {
    const VC& vc = r.vcs[i];
    const VcResult& res = r.results[i];
    const std::optional<ThreadId> ctx = vc.action.loc.thread;
    json v;
    v["kind"] = to_string(vc.kind);
    v["index"] = vc.index;
    v["file"] = smt_file_name(vc);
    v["action"] = describe_action(p, vc.action);
    v["provenance"] = vc.provenance;
    v["pre"] = unparse_expr(*vc.pre, p, ctx);
    v["post"] = unparse_expr(*vc.post, p, ctx);
    v["status"] = to_string(res.status);
    v["nodes"] = res.nodes;
    if (!res.reason.empty()) v["reason"] = res.reason;
    if (res.counterexample) {
      json c;
      c["before"] = symbols_json(res.counterexample->before);
      c["after"] = symbols_json(res.counterexample->after);
      c["reason"] = res.counterexample->reason;
      v["counterexample"] = c;
    }
    vcs.push_back(v);
  }
  j["vcs"] = vcs;
  json summary = json::object();
  for (VcKind k : {VcKind::Sequential, VcKind::Interference, VcKind::LeakyStability}) {
    json s;
    for (VcStatus st : {VcStatus::Valid, VcStatus::Counterexample, VcStatus::Undischarged}) {
      s[std::string(to_string(st))] = r.count(k, st);
    }
    summary[std::string(to_string(k))] = s;
  }
  j["summary"] = summary;
  j["verdict"] = to_string(r.verdict);
  j["leak_certified"] = r.leak_certified;
  json locs = json::array();
  for (const auto& l : r.leaky_locations) locs.push_back(location_json(p, l));
  j["leaky_locations"] = locs;
  j["message"] = r.message;
  j["notices"] = r.notices;
  return dump(j);
}

std::string dl_report_json(const Program& p, const LabelReport& r, const SynthesisResult* synthesis) {
  json j = header("dl");
  j["lattice"] = json::parse(r.lattice.to_json());
  json vl = json::object();
  for (const auto& [v, l] : r.var_labels) vl[v] = r.lattice.name(l);
  j["variables"] = vl;
  json locs = json::array();
  for (const auto& l : r.locations) {
    json lj;
    lj["location"] = location_json(p, l.loc);
    lj["statement"] = to_string(l.kind);
    lj["pc"] = r.lattice.name(l.pc);
    if (l.assigned) {
      lj["assigned"] = l.assigned->first;
      lj["assigned_label"] = r.lattice.name(l.assigned->second);
    }
    locs.push_back(lj);
  }
  j["locations"] = locs;
  json flags = json::array();
  for (const auto& f : r.flags) {
    json fj;
    fj["location"] = location_json(p, f.loc);
    fj["reason"] = to_string(f.reason);
    fj["culprits"] = f.culprits;
    fj["expression"] = f.expression;
    flags.push_back(fj);
  }
  j["flags"] = flags;
  json pairs = json::array();
  for (const auto& [a, b] : r.pairs) pairs.push_back(json::array({location_json(p, a), location_json(p, b)}));
  j["snapshot_pairs"] = pairs;
  j["notes"] = r.notes;
  if (synthesis) {
    json syn = json::array();
    for (const auto& ps : synthesis->pairs) {
      json sj;
      sj["from"] = location_json(p, ps.from);
      sj["to"] = location_json(p, ps.to);
      sj["status"] = to_string(ps.status);
      sj["isolated"] = durations_json(p, nullptr, ps.isolated);
      sj["composed"] = durations_json(p, nullptr, ps.composed);
      if (ps.assertion) {
        sj["variable"] = p.vars[static_cast<std::size_t>(ps.secret_slot)].name;
        json bands = json::array();
        for (const auto& [v, th] : ps.bands) {
          json b;
          b["value"] = v;
          b["from"] = th;
          bands.push_back(b);
        }
        sj["bands"] = bands;
        sj["assertion"] = "@leaky {| " + unparse_expr(*ps.assertion, p, ps.to.thread) + " |}";
      }
      sj["notice"] = ps.notice;
      syn.push_back(sj);
    }
    j["synthesis"] = syn;
  }
  return dump(j);
}

std::string ifc_report_json(const IfcScenario& sc, const std::vector<IfcCheck>& checks) {
  json j = header("ifc");
  j["lattice"] = json::parse(sc.lattice.to_json());
  j["observer"] = sc.observer;
  json users = json::object();
  for (const auto& [u, l] : sc.initial.users) users[u] = sc.lattice.name(l);
  j["users"] = users;
  json seqs = json::array();
  for (const auto& s : sc.sequences) {
    json ops = json::array();
    for (const auto& op : s) ops.push_back(to_string(op));
    seqs.push_back(ops);
  }
  j["sequences"] = seqs;
  json cj = json::array();
  bool ok = true;
  for (const auto& c : checks) {
    json x;
    x["check"] = c.check;
    x["sequences"] = c.sequences;
    x["result"] = ni_json(c.result);
    ok &= c.result.ok();
    cj.push_back(x);
  }
  j["checks"] = cj;
  j["non_interfering"] = ok;
  return dump(j);
}

std::string emit_report_json(const Program& p, const std::vector<VC>& vcs, const std::vector<std::string>& files) {
  json j = header("emit-smt");
  json arr = json::array();
  for (std::size_t i = 0; i < vcs.size(); ++i) {
    json v;
    v["kind"] = to_string(vcs[i].kind);
    v["index"] = vcs[i].index;
    v["action"] = describe_action(p, vcs[i].action);
    v["file"] = files.at(i);
    arr.push_back(v);
  }
  j["vcs"] = arr;
  return dump(j);
}

}  // namespace leaklab
