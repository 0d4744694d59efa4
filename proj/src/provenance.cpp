#include "provaudit/provenance.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace provaudit {

std::string_view to_string(JoinClassification::Kind kind) {
  switch (kind) {
    case JoinClassification::Kind::kMatched:
      return "MATCHED";
    case JoinClassification::Kind::kUnmatchedUrl:
      return "UNMATCHED_URL";
    case JoinClassification::Kind::kOpaqueLabelSuspect:
      return "OPAQUE_LABEL_SUSPECT";
    case JoinClassification::Kind::kInline:
      return "INLINE";
    case JoinClassification::Kind::kInternal:
      return "INTERNAL";
  }
  return "?";
}

std::string_view to_string(ObfuscationFinding::Corroboration c) {
  return c == ObfuscationFinding::Corroboration::kPragmaExact ? "PRAGMA_EXACT" : "NONE";
}

std::vector<OriginClassification> join_scripts_to_requests(
    const std::set<GroupKey>& origins, std::span<const RequestRecord> requests,
    const NormalizeOptions& opts) {
  // visit -> normalized URL -> first raw URL in stream order
  std::map<std::int64_t, std::unordered_map<std::string, std::string>> fetched;
  for (const auto& r : requests) {
    if (auto n = try_normalize_url(r.url, opts)) {
      fetched[r.visit_id].try_emplace(std::move(*n), r.url);
    }
  }

  std::vector<OriginClassification> out;
  out.reserve(origins.size());
  for (const GroupKey& key : origins) {
    JoinClassification c;
    switch (key.origin.kind()) {
      case ScriptLocation::Kind::kAbsoluteUrl: {
        c.kind = JoinClassification::Kind::kUnmatchedUrl;
        const auto visit = fetched.find(key.visit_id);
        const auto normalized = try_normalize_url(key.origin.text(), opts);
        if (visit != fetched.end() && normalized) {
          if (const auto hit = visit->second.find(*normalized); hit != visit->second.end()) {
            c.kind = JoinClassification::Kind::kMatched;
            c.request_url = hit->second;
          }
        }
        break;
      }
      case ScriptLocation::Kind::kOpaqueLabel:
        c.kind = JoinClassification::Kind::kOpaqueLabelSuspect;
        break;
      case ScriptLocation::Kind::kInline:
        c.kind = JoinClassification::Kind::kInline;
        break;
      case ScriptLocation::Kind::kInternal:
        c.kind = JoinClassification::Kind::kInternal;
        break;
    }
    out.push_back({key, std::move(c)});
  }
  return out;
}

std::vector<MaskSuspect> collect_suspects(std::span<const OriginClassification> joined) {
  std::set<MaskSuspect> suspects;
  for (const auto& j : joined) {
    if (j.classification.kind == JoinClassification::Kind::kOpaqueLabelSuspect) {
      suspects.insert({j.origin.visit_id, j.origin.origin.text()});
    }
  }
  return {suspects.begin(), suspects.end()};
}

std::vector<ObfuscationFinding> resolve_masked_labels(std::span<const MaskSuspect> suspects,
                                                      const PragmaIndex& index,
                                                      std::span<const FingerprintVerdict> verdicts) {
  std::vector<ObfuscationFinding> out;
  out.reserve(suspects.size());
  for (const MaskSuspect& s : suspects) {
    ObfuscationFinding f;
    f.visit_id = s.visit_id;
    f.label = s.label;
    if (const auto* hosts = index.find(s.label); hosts && !hosts->empty()) {
      f.candidate_true_origins = *hosts;
      f.corroboration = ObfuscationFinding::Corroboration::kPragmaExact;
    }
    const auto masked = ScriptLocation::opaque_label(s.label);
    for (const auto& v : verdicts) {
      if (v.visit_id == s.visit_id && v.script_location == masked) {
        f.fingerprint_categories.insert(v.categories.begin(), v.categories.end());
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<WeakBasenameHint> weak_basename_hints(std::span<const MaskSuspect> suspects,
                                                  std::span<const RequestRecord> requests,
                                                  std::span<const ScriptBody> bodies) {
  std::map<std::pair<std::int64_t, std::string>, std::set<std::string>> request_names;
  for (const auto& r : requests) request_names[{r.visit_id, url_basename(r.url)}].insert(r.url);
  std::map<std::string, std::set<std::string>> body_names;
  for (const auto& b : bodies) body_names[url_basename(b.url)].insert(b.url);

  std::set<WeakBasenameHint> hints;
  for (const MaskSuspect& s : suspects) {
    if (s.label.empty()) continue;
    if (const auto it = request_names.find({s.visit_id, s.label}); it != request_names.end()) {
      for (const auto& url : it->second) hints.insert({s.visit_id, s.label, url, "request"});
    }
    if (const auto it = body_names.find(s.label); it != body_names.end()) {
      for (const auto& url : it->second) hints.insert({s.visit_id, s.label, url, "script_body"});
    }
  }
  return {hints.begin(), hints.end()};
}

}  // namespace provaudit
