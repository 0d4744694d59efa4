#include "provaudit/report.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace provaudit {

using nlohmann::ordered_json;

namespace {

std::size_t slot(JoinClassification::Kind kind) { return static_cast<std::size_t>(kind); }

ordered_json counts_json(const ClassificationCounts& counts) {
  ordered_json j;
  for (const auto kind : kAllJoinKinds) j[std::string(to_string(kind))] = counts[slot(kind)];
  return j;
}

template <typename Set>
ordered_json category_list(const Set& categories) {
  ordered_json j = ordered_json::array();
  for (const auto c : categories) j.push_back(to_string(c));
  return j;
}

ordered_json evidence_json(const FingerprintEvidence& ev) {
  ordered_json j;
  j["distinct_fonts"] = ev.distinct_fonts;
  j["small_text_ops"] = ev.small_text_ops;
  j["readback_calls"] = ev.readback_calls;
  j["max_text_distinct_chars"] = ev.max_text_distinct_chars;
  j["disqualifying_calls"] = ev.disqualifying_calls;
  ordered_json hits = ordered_json::object();
  for (const auto& [symbol, n] : ev.symbol_hits) hits[symbol] = n;
  j["symbol_hits"] = std::move(hits);
  return j;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

template <typename Range, typename Fn>
std::string joined(const Range& items, Fn&& fn) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out.push_back(';');
    out += fn(item);
  }
  return out;
}

}  // namespace

AuditReport build_report(std::vector<OriginClassification> classifications,
                         std::vector<ObfuscationFinding> findings,
                         std::vector<FingerprintVerdict> verdicts, const AuditOptions& opts) {
  AuditReport report;
  report.config = config_echo(opts);

  std::sort(classifications.begin(), classifications.end(),
            [](const auto& a, const auto& b) { return a.origin < b.origin; });
  std::sort(verdicts.begin(), verdicts.end(), [](const auto& a, const auto& b) {
    return GroupKey{a.visit_id, a.script_location} < GroupKey{b.visit_id, b.script_location};
  });
  std::sort(findings.begin(), findings.end(), [](const auto& a, const auto& b) {
    return std::tie(a.visit_id, a.label) < std::tie(b.visit_id, b.label);
  });

  std::map<GroupKey, JoinClassification::Kind> kind_of;
  for (const auto& c : classifications) {
    const auto s = slot(c.classification.kind);
    ++report.totals[s];
    auto& visit = report.per_visit[c.origin.visit_id];
    ++visit[s];
    kind_of.emplace(c.origin, c.classification.kind);
  }

  for (const auto category : {FingerprintCategory::kCanvas, FingerprintCategory::kCanvasFont,
                              FingerprintCategory::kAudio, FingerprintCategory::kWebRtc}) {
    report.cross_tab[category] = ClassificationCounts{};
  }
  for (const auto& v : verdicts) {
    const auto it = kind_of.find(GroupKey{v.visit_id, v.script_location});
    if (it == kind_of.end()) continue;
    for (const auto c : v.categories) ++report.cross_tab[c][slot(it->second)];
  }

  for (auto& f : findings) {
    if (opts.verbose || f.corroboration == ObfuscationFinding::Corroboration::kPragmaExact) {
      report.findings.push_back(std::move(f));
    }
  }
  report.origins = std::move(classifications);
  report.verdicts = std::move(verdicts);
  return report;
}

AuditReport run_audit(std::span<const JsEvent> events, std::span<const RequestRecord> requests,
                      std::span<const ScriptBody> bodies, const AuditOptions& opts) {
  const GroupedEvents grouped = group_events(events, opts.attribution);
  auto verdicts = classify_groups(grouped, opts.heuristics);

  std::set<GroupKey> origins;
  for (const auto& [key, group] : grouped.groups) origins.insert(key);
  auto joined = join_scripts_to_requests(origins, requests, opts.normalize);

  PragmaIndex index;
  for (const auto& b : bodies) index.add(b);
  const auto suspects = collect_suspects(joined);
  auto findings = resolve_masked_labels(suspects, index, verdicts);

  AuditReport report =
      build_report(std::move(joined), std::move(findings), std::move(verdicts), opts);
  report.weak_basename_hints = weak_basename_hints(suspects, requests, bodies);
  report.diagnostics.unattributable_events = grouped.unattributable;
  report.diagnostics.duplicate_bodies = index.duplicates().size();
  return report;
}

std::string report_to_json(const AuditReport& r) {
  ordered_json j;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["config"] = r.config;

  ordered_json summary;
  summary["origins"] = r.origins.size();
  summary["counts"] = counts_json(r.totals);
  summary["findings"] = r.findings.size();
  summary["fingerprinting_scripts"] = r.verdicts.size();
  j["summary"] = std::move(summary);

  ordered_json per_visit = ordered_json::array();
  for (const auto& [visit, counts] : r.per_visit) {
    per_visit.push_back({{"visit_id", visit}, {"counts", counts_json(counts)}});
  }
  j["per_visit"] = std::move(per_visit);

  ordered_json origins = ordered_json::array();
  for (const auto& o : r.origins) {
    ordered_json row;
    row["visit_id"] = o.origin.visit_id;
    row["origin_kind"] = to_string(o.origin.origin.kind());
    row["origin"] = o.origin.origin.text();
    row["classification"] = to_string(o.classification.kind);
    if (o.classification.kind == JoinClassification::Kind::kMatched) {
      row["request_url"] = o.classification.request_url;
    }
    origins.push_back(std::move(row));
  }
  j["origins"] = std::move(origins);

  ordered_json findings = ordered_json::array();
  for (const auto& f : r.findings) {
    ordered_json row;
    row["visit_id"] = f.visit_id;
    row["label"] = f.label;
    row["corroboration"] = to_string(f.corroboration);
    row["candidate_true_origins"] = f.candidate_true_origins;
    row["fingerprint_categories"] = category_list(f.fingerprint_categories);
    findings.push_back(std::move(row));
  }
  j["findings"] = std::move(findings);

  ordered_json hints = ordered_json::array();
  for (const auto& h : r.weak_basename_hints) {
    hints.push_back(
        {{"visit_id", h.visit_id}, {"label", h.label}, {"url", h.url}, {"source", h.source}});
  }
  j["weak_basename_hints"] = std::move(hints);

  ordered_json verdicts = ordered_json::array();
  for (const auto& v : r.verdicts) {
    ordered_json row;
    row["visit_id"] = v.visit_id;
    row["origin_kind"] = to_string(v.script_location.kind());
    row["origin"] = v.script_location.text();
    row["categories"] = category_list(v.categories);
    row["evidence"] = evidence_json(v.evidence);
    verdicts.push_back(std::move(row));
  }
  j["verdicts"] = std::move(verdicts);

  ordered_json cross;
  for (const auto& [category, counts] : r.cross_tab) {
    cross[std::string(to_string(category))] = counts_json(counts);
  }
  j["cross_tab"] = std::move(cross);

  ordered_json diag;
  diag["js_record_errors"] = r.diagnostics.js_record_errors;
  diag["request_record_errors"] = r.diagnostics.request_record_errors;
  diag["script_body_record_errors"] = r.diagnostics.script_body_record_errors;
  diag["unattributable_events"] = r.diagnostics.unattributable_events;
  diag["duplicate_bodies"] = r.diagnostics.duplicate_bodies;
  j["diagnostics"] = std::move(diag);

  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

std::string report_to_csv(const AuditReport& r) {
  std::map<GroupKey, const FingerprintVerdict*> verdict_of;
  for (const auto& v : r.verdicts) verdict_of[GroupKey{v.visit_id, v.script_location}] = &v;
  std::map<std::pair<std::int64_t, std::string>, const ObfuscationFinding*> finding_of;
  for (const auto& f : r.findings) finding_of[{f.visit_id, f.label}] = &f;

  std::ostringstream out;
  out << "visit_id,origin_kind,origin,classification,request_url,fingerprint_categories,"
         "corroboration,candidate_true_origins\n";
  for (const auto& o : r.origins) {
    std::string categories;
    if (const auto it = verdict_of.find(o.origin); it != verdict_of.end()) {
      categories = joined(it->second->categories, [](auto c) { return std::string(to_string(c)); });
    }
    std::string corroboration;
    std::string candidates;
    if (o.classification.kind == JoinClassification::Kind::kOpaqueLabelSuspect) {
      const auto it = finding_of.find({o.origin.visit_id, o.origin.origin.text()});
      if (it != finding_of.end()) {
        corroboration = to_string(it->second->corroboration);
        candidates = joined(it->second->candidate_true_origins, [](const auto& s) { return s; });
      }
    }
    out << o.origin.visit_id << ',' << to_string(o.origin.origin.kind()) << ','
        << csv_field(o.origin.origin.text()) << ',' << to_string(o.classification.kind) << ','
        << csv_field(o.classification.request_url) << ',' << csv_field(categories) << ','
        << corroboration << ',' << csv_field(candidates) << '\n';
  }
  return out.str();
}

}  // namespace provaudit
