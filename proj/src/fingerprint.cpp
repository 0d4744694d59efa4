#include "provaudit/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "provaudit/error.hpp"

namespace provaudit {

std::string_view to_string(FingerprintCategory c) {
  switch (c) {
    case FingerprintCategory::kCanvas:
      return "CANVAS";
    case FingerprintCategory::kCanvasFont:
      return "CANVAS_FONT";
    case FingerprintCategory::kAudio:
      return "AUDIO";
    case FingerprintCategory::kWebRtc:
      return "WEBRTC";
  }
  return "?";
}

namespace {

constexpr std::string_view kFontProperty = "CanvasRenderingContext2D.font";
constexpr std::string_view kFillText = "CanvasRenderingContext2D.fillText";
constexpr std::string_view kStrokeText = "CanvasRenderingContext2D.strokeText";
constexpr std::string_view kMeasureText = "CanvasRenderingContext2D.measureText";
constexpr std::string_view kToDataUrl = "HTMLCanvasElement.toDataURL";
constexpr std::string_view kGetImageData = "CanvasRenderingContext2D.getImageData";

// Code points of UTF-8 text; a stray byte counts as one.
std::vector<char32_t> code_points(std::string_view s) {
  std::vector<char32_t> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 0;
    bool valid = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; valid && k < len; ++k) {
      valid = (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    }
    if (!valid) {
      out.push_back(0x110000u + b);  // outside the Unicode range, distinct per byte
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? b : len == 2 ? (b & 0x1F) : len == 3 ? (b & 0x0F) : (b & 0x07);
    for (std::size_t k = 1; k < len; ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::optional<double> as_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool covers(const std::map<std::string, std::int64_t>& hits,
            const std::set<std::string>& required) {
  return std::all_of(required.begin(), required.end(), [&](const std::string& entry) {
    std::string_view rest = entry;
    while (true) {
      const auto bar = rest.find('|');
      const auto alt = rest.substr(0, bar);
      if (hits.find(std::string(alt)) != hits.end()) return true;
      if (bar == std::string_view::npos) return false;
      rest.remove_prefix(bar + 1);
    }
  });
}

}  // namespace

void HeuristicConfig::validate() const {
  const std::pair<const char*, int> thresholds[] = {
      {"font_min_distinct_fonts", font_min_distinct_fonts},
      {"font_min_text_ops", font_min_text_ops},
      {"font_max_text_length", font_max_text_length},
      {"canvas_min_area_px", canvas_min_area_px},
      {"canvas_min_distinct_chars", canvas_min_distinct_chars},
  };
  for (const auto& [name, value] : thresholds) {
    if (value < 1) {
      throw Error(ErrorCode::kConfigError, std::string(name) + " must be >= 1");
    }
  }
}

std::string HeuristicConfig::canonical_symbol(std::string_view symbol) const {
  std::string s(symbol);
  if (s.rfind("window.", 0) == 0) s.erase(0, 7);
  for (auto pos = s.find(".prototype"); pos != std::string::npos; pos = s.find(".prototype", pos)) {
    const auto end = pos + 10;
    if (end == s.size() || s[end] == '.') {
      s.erase(pos, 10);
    } else {
      pos = end;
    }
  }
  if (const auto it = symbol_aliases.find(s); it != symbol_aliases.end()) return it->second;
  return s;
}

std::optional<ScriptLocation> attribute_event(const JsEvent& event,
                                              const AttributionOptions& opts) {
  if (event.stack_raw) {
    const ParsedStack parsed = parse_stack(*event.stack_raw, opts.dialect, opts.internal_tags);
    if (!parsed.frames.empty()) {
      return derive_call_context(parsed.frames, opts.markers).script_location;
    }
  }
  if (event.script_url) return classify_location(*event.script_url, opts.internal_tags);
  return std::nullopt;
}

GroupedEvents group_events(std::span<const JsEvent> events, const AttributionOptions& opts) {
  GroupedEvents out;
  for (const JsEvent& e : events) {
    if (auto origin = attribute_event(e, opts)) {
      out.groups[GroupKey{e.visit_id, std::move(*origin)}].push_back(&e);
    } else {
      ++out.unattributable;
    }
  }
  return out;
}

FingerprintEvidence collect_evidence(const EventGroup& group, const HeuristicConfig& cfg) {
  FingerprintEvidence ev;
  std::set<std::string> fonts;
  for (const JsEvent* e : group) {
    const std::string symbol = cfg.canonical_symbol(e->symbol);
    ++ev.symbol_hits[symbol];
    if (cfg.canvas_disqualifying_symbols.count(symbol) != 0) ++ev.disqualifying_calls;

    if (symbol == kFontProperty && e->operation == ApiOperation::kSet && e->value) {
      fonts.insert(*e->value);
      continue;
    }
    if (e->operation != ApiOperation::kCall) continue;
    const bool writes_text = symbol == kFillText || symbol == kStrokeText;
    if ((writes_text || symbol == kMeasureText) && e->arguments && !e->arguments->empty()) {
      const auto cps = code_points(e->arguments->front());
      if (static_cast<std::int64_t>(cps.size()) <= cfg.font_max_text_length) {
        ++ev.small_text_ops;
      }
      if (writes_text) {
        const std::set<char32_t> distinct(cps.begin(), cps.end());
        ev.max_text_distinct_chars =
            std::max(ev.max_text_distinct_chars, static_cast<std::int64_t>(distinct.size()));
      }
    } else if (symbol == kToDataUrl) {
      ++ev.readback_calls;
    } else if (symbol == kGetImageData && e->arguments && e->arguments->size() >= 4) {
      const auto w = as_number((*e->arguments)[2]);
      const auto h = as_number((*e->arguments)[3]);
      if (w && h && std::abs(*w * *h) >= cfg.canvas_min_area_px) ++ev.readback_calls;
    }
  }
  ev.distinct_fonts = static_cast<std::int64_t>(fonts.size());
  return ev;
}

bool detect_font_fp(const FingerprintEvidence& ev, const HeuristicConfig& cfg) {
  return ev.distinct_fonts >= cfg.font_min_distinct_fonts &&
         ev.small_text_ops >= cfg.font_min_text_ops;
}

bool detect_canvas_fp(const FingerprintEvidence& ev, const HeuristicConfig& cfg) {
  return ev.readback_calls > 0 && ev.max_text_distinct_chars >= cfg.canvas_min_distinct_chars &&
         ev.disqualifying_calls == 0;
}

bool detect_audio_fp(const FingerprintEvidence& ev, const HeuristicConfig& cfg) {
  return !cfg.audio_required_symbols.empty() && covers(ev.symbol_hits, cfg.audio_required_symbols);
}

bool detect_webrtc_fp(const FingerprintEvidence& ev, const HeuristicConfig& cfg) {
  return !cfg.webrtc_required_symbols.empty() &&
         covers(ev.symbol_hits, cfg.webrtc_required_symbols);
}

bool detect_font_fp(const EventGroup& group, const HeuristicConfig& cfg) {
  return detect_font_fp(collect_evidence(group, cfg), cfg);
}

bool detect_canvas_fp(const EventGroup& group, const HeuristicConfig& cfg) {
  return detect_canvas_fp(collect_evidence(group, cfg), cfg);
}

bool detect_audio_fp(const EventGroup& group, const HeuristicConfig& cfg) {
  return detect_audio_fp(collect_evidence(group, cfg), cfg);
}

bool detect_webrtc_fp(const EventGroup& group, const HeuristicConfig& cfg) {
  return detect_webrtc_fp(collect_evidence(group, cfg), cfg);
}

std::set<FingerprintCategory> classify_group(const FingerprintEvidence& ev,
                                             const HeuristicConfig& cfg) {
  std::set<FingerprintCategory> out;
  if (detect_canvas_fp(ev, cfg)) out.insert(FingerprintCategory::kCanvas);
  if (detect_font_fp(ev, cfg)) out.insert(FingerprintCategory::kCanvasFont);
  if (detect_audio_fp(ev, cfg)) out.insert(FingerprintCategory::kAudio);
  if (detect_webrtc_fp(ev, cfg)) out.insert(FingerprintCategory::kWebRtc);
  return out;
}

std::vector<FingerprintVerdict> classify_groups(const GroupedEvents& grouped,
                                                const HeuristicConfig& cfg) {
  std::vector<FingerprintVerdict> out;
  for (const auto& [key, group] : grouped.groups) {
    FingerprintEvidence ev = collect_evidence(group, cfg);
    auto categories = classify_group(ev, cfg);
    if (categories.empty()) continue;
    out.push_back({key.visit_id, key.origin, std::move(categories), std::move(ev)});
  }
  return out;
}

std::vector<FingerprintVerdict> classify_scripts(std::span<const JsEvent> events,
                                                 const HeuristicConfig& cfg,
                                                 const AttributionOptions& opts) {
  return classify_groups(group_events(events, opts), cfg);
}

}  // namespace provaudit
