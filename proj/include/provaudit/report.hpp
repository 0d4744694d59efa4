#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "provaudit/audit.hpp"
#include "provaudit/provenance.hpp"

namespace provaudit {

using ClassificationCounts = std::array<std::int64_t, JoinClassification::kKindCount>;

struct AuditDiagnostics {
  std::size_t js_record_errors = 0;
  std::size_t request_record_errors = 0;
  std::size_t script_body_record_errors = 0;
  std::size_t unattributable_events = 0;
  std::size_t duplicate_bodies = 0;
};

struct AuditReport {
  nlohmann::ordered_json config;
  ClassificationCounts totals{};
  std::map<std::int64_t, ClassificationCounts> per_visit;
  std::vector<OriginClassification> origins;     // by (visit_id, origin)
  std::vector<ObfuscationFinding> findings;      // by (visit_id, label)
  std::vector<WeakBasenameHint> weak_basename_hints;
  std::vector<FingerprintVerdict> verdicts;      // by (visit_id, origin)
  std::map<FingerprintCategory, ClassificationCounts> cross_tab;
  AuditDiagnostics diagnostics;

  std::int64_t count(JoinClassification::Kind kind) const {
    return totals[static_cast<std::size_t>(kind)];
  }
};

/// Aggregates join results, findings and verdicts. Uncorroborated findings
/// are kept only when `opts.verbose` is set.
AuditReport build_report(std::vector<OriginClassification> classifications,
                         std::vector<ObfuscationFinding> findings,
                         std::vector<FingerprintVerdict> verdicts, const AuditOptions& opts);

/// Full pipeline over loaded records: attribute and group events, classify
/// fingerprinting, join origins to requests, resolve masked labels.
AuditReport run_audit(std::span<const JsEvent> events, std::span<const RequestRecord> requests,
                      std::span<const ScriptBody> bodies, const AuditOptions& opts);

std::string report_to_json(const AuditReport& report);

// One row per (visit, origin).
std::string report_to_csv(const AuditReport& report);

}  // namespace provaudit
