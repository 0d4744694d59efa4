#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "provaudit/ingestion.hpp"
#include "provaudit/script_location.hpp"
#include "provaudit/stack_parser.hpp"

namespace provaudit {

enum class FingerprintCategory { kCanvas, kCanvasFont, kAudio, kWebRtc };

std::string_view to_string(FingerprintCategory c);

/// Thresholds and API-path sets for the four detectors. Only the font
/// thresholds (50 fonts, 50 text operations) come from the published rule;
/// the rest are reconstructed defaults and meant to be overridden.
struct HeuristicConfig {
  int font_min_distinct_fonts = 50;
  int font_min_text_ops = 50;
  int font_max_text_length = 32;
  int canvas_min_area_px = 256;
  int canvas_min_distinct_chars = 10;
  std::set<std::string> canvas_disqualifying_symbols{
      "CanvasRenderingContext2D.save",
      "CanvasRenderingContext2D.restore",
      "HTMLCanvasElement.addEventListener",
  };
  // Each entry must be touched; `a|b` accepts either path.
  std::set<std::string> audio_required_symbols{
      "OfflineAudioContext|webkitOfflineAudioContext",
      "OscillatorNode.start",
      "AnalyserNode.getFloatFrequencyData|AudioBuffer.getChannelData",
  };
  std::set<std::string> webrtc_required_symbols{
      "RTCPeerConnection",
      "RTCPeerConnection.createDataChannel|RTCPeerConnection.createOffer",
      "RTCPeerConnection.onicecandidate|RTCIceCandidate.candidate",
  };
  // Producer-specific name -> canonical dotted path.
  std::map<std::string, std::string> symbol_aliases;

  // Throws Error(kConfigError) when a threshold is below 1.
  void validate() const;

  // Strips `window.` and `.prototype`, then applies the alias table.
  std::string canonical_symbol(std::string_view symbol) const;
};

/// Counters gathered from one group; every detector reads from the same set.
struct FingerprintEvidence {
  std::int64_t distinct_fonts = 0;
  std::int64_t small_text_ops = 0;
  std::int64_t readback_calls = 0;
  std::int64_t max_text_distinct_chars = 0;
  std::int64_t disqualifying_calls = 0;
  std::map<std::string, std::int64_t> symbol_hits;  // canonical path -> count

  friend bool operator==(const FingerprintEvidence&, const FingerprintEvidence&) = default;
};

struct FingerprintVerdict {
  std::int64_t visit_id = 0;
  ScriptLocation script_location = ScriptLocation::inline_origin();
  std::set<FingerprintCategory> categories;
  FingerprintEvidence evidence;

  friend bool operator==(const FingerprintVerdict&, const FingerprintVerdict&) = default;
};

struct GroupKey {
  std::int64_t visit_id;
  ScriptLocation origin;

  friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
  friend bool operator==(const GroupKey&, const GroupKey&) = default;
};

using EventGroup = std::vector<const JsEvent*>;

struct AttributionOptions {
  StackDialect dialect = StackDialect::kAuto;
  std::vector<std::string> markers;
  InternalTagSet internal_tags;
};

struct GroupedEvents {
  std::map<GroupKey, EventGroup> groups;
  std::size_t unattributable = 0;
};

// Origin of a single event, or nullopt when neither a usable stack nor a
// script_url is present.
std::optional<ScriptLocation> attribute_event(const JsEvent& event,
                                              const AttributionOptions& opts);

/// Groups events by (visit, attributed origin). The groups point into
/// `events`, which must outlive the result.
GroupedEvents group_events(std::span<const JsEvent> events, const AttributionOptions& opts);

FingerprintEvidence collect_evidence(const EventGroup& group, const HeuristicConfig& cfg);

bool detect_font_fp(const FingerprintEvidence& ev, const HeuristicConfig& cfg);
bool detect_canvas_fp(const FingerprintEvidence& ev, const HeuristicConfig& cfg);
bool detect_audio_fp(const FingerprintEvidence& ev, const HeuristicConfig& cfg);
bool detect_webrtc_fp(const FingerprintEvidence& ev, const HeuristicConfig& cfg);

// Convenience overloads that collect evidence first.
bool detect_font_fp(const EventGroup& group, const HeuristicConfig& cfg);
bool detect_canvas_fp(const EventGroup& group, const HeuristicConfig& cfg);
bool detect_audio_fp(const EventGroup& group, const HeuristicConfig& cfg);
bool detect_webrtc_fp(const EventGroup& group, const HeuristicConfig& cfg);

std::set<FingerprintCategory> classify_group(const FingerprintEvidence& ev,
                                             const HeuristicConfig& cfg);

/// Verdicts for every group that trips at least one detector, ordered by
/// (visit_id, origin).
std::vector<FingerprintVerdict> classify_groups(const GroupedEvents& grouped,
                                                const HeuristicConfig& cfg);

std::vector<FingerprintVerdict> classify_scripts(std::span<const JsEvent> events,
                                                 const HeuristicConfig& cfg,
                                                 const AttributionOptions& opts = {});

}  // namespace provaudit
