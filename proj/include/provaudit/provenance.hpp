#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "provaudit/fingerprint.hpp"
#include "provaudit/ingestion.hpp"
#include "provaudit/pragma_scanner.hpp"
#include "provaudit/url.hpp"

namespace provaudit {

/// Outcome of joining one (visit, origin) against that visit's requests.
struct JoinClassification {
  enum class Kind { kMatched, kUnmatchedUrl, kOpaqueLabelSuspect, kInline, kInternal };
  static constexpr std::size_t kKindCount = 5;

  Kind kind = Kind::kInline;
  std::string request_url;  // set for kMatched only: first matching request, as logged

  friend bool operator==(const JoinClassification&, const JoinClassification&) = default;
};

std::string_view to_string(JoinClassification::Kind kind);
constexpr std::array<JoinClassification::Kind, JoinClassification::kKindCount> kAllJoinKinds = {
    JoinClassification::Kind::kMatched, JoinClassification::Kind::kUnmatchedUrl,
    JoinClassification::Kind::kOpaqueLabelSuspect, JoinClassification::Kind::kInline,
    JoinClassification::Kind::kInternal};

struct OriginClassification {
  GroupKey origin;
  JoinClassification classification;

  friend bool operator==(const OriginClassification&, const OriginClassification&) = default;
};

/// Visit-scoped join of script origins to request URLs under normalize_url
/// equality. Output is in `origins` order, one entry per origin.
std::vector<OriginClassification> join_scripts_to_requests(
    const std::set<GroupKey>& origins, std::span<const RequestRecord> requests,
    const NormalizeOptions& opts = {});

struct MaskSuspect {
  std::int64_t visit_id;
  std::string label;

  friend auto operator<=>(const MaskSuspect&, const MaskSuspect&) = default;
};

std::vector<MaskSuspect> collect_suspects(std::span<const OriginClassification> joined);

struct ObfuscationFinding {
  enum class Corroboration { kPragmaExact, kNone };

  std::int64_t visit_id = 0;
  std::string label;
  std::set<std::string> candidate_true_origins;
  Corroboration corroboration = Corroboration::kNone;
  std::set<FingerprintCategory> fingerprint_categories;

  friend bool operator==(const ObfuscationFinding&, const ObfuscationFinding&) = default;
};

std::string_view to_string(ObfuscationFinding::Corroboration c);

/// Unmasks suspected labels by exact, case-sensitive lookup of the label
/// among the effective sourceURLs of fetched bodies. Uncorroborated suspects
/// come back with Corroboration::kNone and an empty candidate set.
std::vector<ObfuscationFinding> resolve_masked_labels(std::span<const MaskSuspect> suspects,
                                                      const PragmaIndex& index,
                                                      std::span<const FingerprintVerdict> verdicts);

/// Analyst hint only: a same-visit request URL or a fetched body URL whose
/// last path segment equals the label. Never counted as corroboration.
struct WeakBasenameHint {
  std::int64_t visit_id;
  std::string label;
  std::string url;
  std::string source;  // "request" or "script_body"

  friend auto operator<=>(const WeakBasenameHint&, const WeakBasenameHint&) = default;
};

std::vector<WeakBasenameHint> weak_basename_hints(std::span<const MaskSuspect> suspects,
                                                  std::span<const RequestRecord> requests,
                                                  std::span<const ScriptBody> bodies);

}  // namespace provaudit
