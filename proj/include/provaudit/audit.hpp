#pragma once

#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "provaudit/fingerprint.hpp"
#include "provaudit/ingestion.hpp"
#include "provaudit/url.hpp"

namespace provaudit {

inline constexpr std::string_view kToolName = "provenance-audit";
inline constexpr std::string_view kToolVersion = "0.1.0";

struct AuditOptions {
  HeuristicConfig heuristics;
  AttributionOptions attribution;
  NormalizeOptions normalize;
  bool verbose = false;
  // Fraction of malformed lines per input file above which the audit aborts.
  double max_malformed_ratio = 0.10;
};

// Library defaults plus the extension-URL instrumentation markers.
AuditOptions default_audit_options();

/// Overlays a config document onto `opts`. Keys are the HeuristicConfig field
/// names plus `symbol_aliases`, `markers`, `dialect`, `internal_tags`,
/// `keep_query`, `verbose` and `max_malformed_ratio`. Unknown keys and
/// ill-typed values throw Error(kConfigError).
void apply_config(AuditOptions& opts, const nlohmann::json& doc);

// Reads and applies a JSON config file.
void apply_config_file(AuditOptions& opts, const std::string& path);

// Echo of the effective configuration, with stable key order.
nlohmann::ordered_json config_echo(const AuditOptions& opts);

}  // namespace provaudit
