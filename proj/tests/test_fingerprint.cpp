#include <doctest.h>

#include <algorithm>
#include <random>

#include "provaudit/error.hpp"
#include "provaudit/fingerprint.hpp"

using namespace provaudit;
using Cat = FingerprintCategory;

namespace {

JsEvent event(std::string symbol, ApiOperation op, std::vector<std::string> args = {},
              std::optional<std::string> value = std::nullopt,
              std::string script_url = "https://a.com/fp.js", std::int64_t visit = 1) {
  JsEvent e;
  e.visit_id = visit;
  e.top_level_url = "https://site.example/";
  e.symbol = std::move(symbol);
  e.operation = op;
  if (!args.empty()) e.arguments = std::move(args);
  e.value = std::move(value);
  e.script_url = std::move(script_url);
  return e;
}

std::vector<JsEvent> font_events(int fonts, int text_ops, const std::string& text = "mmmmmmmmlli",
                                 const std::string& op = "CanvasRenderingContext2D.measureText") {
  std::vector<JsEvent> out;
  for (int i = 0; i < fonts; ++i) {
    out.push_back(event("CanvasRenderingContext2D.font", ApiOperation::kSet, {},
                        "72px font-" + std::to_string(i) + ", monospace"));
  }
  for (int i = 0; i < text_ops; ++i) out.push_back(event(op, ApiOperation::kCall, {text}));
  return out;
}

EventGroup as_group(const std::vector<JsEvent>& events) {
  EventGroup g;
  for (const auto& e : events) g.push_back(&e);
  return g;
}

std::vector<JsEvent> canvas_events() {
  return {event("CanvasRenderingContext2D.fillText", ApiOperation::kCall,
                {"Cwm fjordbank glyphs vext quiz", "2", "15"}),
          event("HTMLCanvasElement.toDataURL", ApiOperation::kCall)};
}

std::vector<JsEvent> audio_events() {
  return {event("OfflineAudioContext", ApiOperation::kCall),
          event("OscillatorNode.start", ApiOperation::kCall),
          event("AudioBuffer.getChannelData", ApiOperation::kCall)};
}

std::vector<JsEvent> webrtc_events() {
  return {event("RTCPeerConnection", ApiOperation::kCall),
          event("RTCPeerConnection.createDataChannel", ApiOperation::kCall),
          event("RTCPeerConnection.onicecandidate", ApiOperation::kSet)};
}

}  // namespace

TEST_CASE("font rule: 50 fonts and 50 small text draws flag") {
  const HeuristicConfig cfg;
  const auto events = font_events(50, 50);
  CHECK(detect_font_fp(as_group(events), cfg));
}

TEST_CASE("font rule: 49 fonts is below the threshold") {
  const auto events = font_events(49, 200);
  CHECK_FALSE(detect_font_fp(as_group(events), HeuristicConfig{}));
}

TEST_CASE("font rule: long strings are not small text") {
  const HeuristicConfig cfg;
  const std::string long_text(500, 'w');
  const auto events = font_events(50, 50, long_text, "CanvasRenderingContext2D.fillText");
  // Oracle: count text calls whose first argument fits the length limit.
  const auto qualifying = std::count_if(events.begin(), events.end(), [&](const JsEvent& e) {
    return e.symbol != "CanvasRenderingContext2D.font" &&
           static_cast<int>(e.arguments->front().size()) <= cfg.font_max_text_length;
  });
  CHECK(qualifying == 0);
  CHECK_FALSE(detect_font_fp(as_group(events), cfg));
  CHECK(collect_evidence(as_group(events), cfg).small_text_ops == qualifying);
}

TEST_CASE("font rule counts distinct fonts, not assignments") {
  std::vector<JsEvent> events = font_events(10, 50);
  for (int i = 0; i < 100; ++i) {
    events.push_back(event("CanvasRenderingContext2D.font", ApiOperation::kSet, {}, "72px font-1, monospace"));
  }
  CHECK(collect_evidence(as_group(events), HeuristicConfig{}).distinct_fonts == 10);
}

TEST_CASE("text length is measured in code points") {
  HeuristicConfig cfg;
  cfg.font_max_text_length = 3;
  const auto events = font_events(1, 1, "ééé");
  CHECK(collect_evidence(as_group(events), cfg).small_text_ops == 1);
}

TEST_CASE("canvas rule: text then read-back flags") {
  const HeuristicConfig cfg;
  const auto events = canvas_events();
  const auto ev = collect_evidence(as_group(events), cfg);
  // Direct predicate evaluation on the fixture.
  const bool a = ev.readback_calls > 0;
  const bool b = ev.max_text_distinct_chars >= cfg.canvas_min_distinct_chars;
  const bool c = ev.disqualifying_calls == 0;
  CHECK(ev.max_text_distinct_chars == 27);  // len(set(text)) in Python
  CHECK((a && b && c));
  CHECK(detect_canvas_fp(ev, cfg));
}

TEST_CASE("canvas rule: a save() call disqualifies") {
  auto events = canvas_events();
  events.push_back(event("CanvasRenderingContext2D.save", ApiOperation::kCall));
  CHECK_FALSE(detect_canvas_fp(as_group(events), HeuristicConfig{}));
}

TEST_CASE("canvas rule: read-back without text does not flag") {
  const std::vector<JsEvent> events = {event("HTMLCanvasElement.toDataURL", ApiOperation::kCall)};
  CHECK_FALSE(detect_canvas_fp(as_group(events), HeuristicConfig{}));
}

TEST_CASE("canvas rule: getImageData counts only above the minimum area") {
  const HeuristicConfig cfg;
  auto events = canvas_events();
  events.pop_back();
  events.push_back(event("CanvasRenderingContext2D.getImageData", ApiOperation::kCall, {"0", "0", "15", "17"}));
  CHECK_FALSE(detect_canvas_fp(as_group(events), cfg));
  events.push_back(event("CanvasRenderingContext2D.getImageData", ApiOperation::kCall, {"0", "0", "16", "16"}));
  CHECK(detect_canvas_fp(as_group(events), cfg));
}

TEST_CASE("audio rule needs every required symbol") {
  const HeuristicConfig cfg;
  auto events = audio_events();
  CHECK(detect_audio_fp(as_group(events), cfg));
  for (std::size_t skip = 0; skip < events.size(); ++skip) {
    std::vector<JsEvent> partial;
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (i != skip) partial.push_back(events[i]);
    }
    CHECK_FALSE(detect_audio_fp(as_group(partial), cfg));
  }
  CHECK_FALSE(detect_audio_fp(EventGroup{}, cfg));
}

TEST_CASE("webrtc rule needs every required symbol") {
  const HeuristicConfig cfg;
  auto events = webrtc_events();
  CHECK(detect_webrtc_fp(as_group(events), cfg));
  events.pop_back();
  CHECK_FALSE(detect_webrtc_fp(as_group(events), cfg));
  CHECK_FALSE(detect_webrtc_fp(EventGroup{}, cfg));
}

TEST_CASE("required-set detectors agree with a subset oracle") {
  std::mt19937 rng(23);
  const HeuristicConfig cfg;
  const std::vector<std::string> pool = {"OfflineAudioContext", "OscillatorNode.start",
                                         "AudioBuffer.getChannelData", "AnalyserNode.getFloatFrequencyData",
                                         "RTCPeerConnection", "RTCPeerConnection.createOffer",
                                         "RTCIceCandidate.candidate", "Navigator.userAgent"};
  for (int i = 0; i < 500; ++i) {
    std::vector<JsEvent> events;
    std::set<std::string> touched;
    for (const auto& s : pool) {
      if (rng() % 2) {
        events.push_back(event(s, ApiOperation::kCall));
        touched.insert(s);
      }
    }
    const bool audio = touched.count("OfflineAudioContext") && touched.count("OscillatorNode.start") &&
                       (touched.count("AudioBuffer.getChannelData") ||
                        touched.count("AnalyserNode.getFloatFrequencyData"));
    const bool rtc = touched.count("RTCPeerConnection") && touched.count("RTCPeerConnection.createOffer") &&
                     touched.count("RTCIceCandidate.candidate");
    CHECK(detect_audio_fp(as_group(events), cfg) == audio);
    CHECK(detect_webrtc_fp(as_group(events), cfg) == rtc);
  }
}

TEST_CASE("symbol names are canonicalized") {
  HeuristicConfig cfg;
  CHECK(cfg.canonical_symbol("window.HTMLCanvasElement.prototype.toDataURL") == "HTMLCanvasElement.toDataURL");
  CHECK(cfg.canonical_symbol("Foo.prototypeX") == "Foo.prototypeX");
  cfg.symbol_aliases["canvas.toDataURL"] = "HTMLCanvasElement.toDataURL";
  CHECK(cfg.canonical_symbol("canvas.toDataURL") == "HTMLCanvasElement.toDataURL");
  const std::vector<JsEvent> events = {
      event("CanvasRenderingContext2D.prototype.fillText", ApiOperation::kCall, {"Cwm fjordbank glyphs"}),
      event("canvas.toDataURL", ApiOperation::kCall)};
  CHECK(detect_canvas_fp(as_group(events), cfg));
}

TEST_CASE("config thresholds must be positive") {
  HeuristicConfig cfg;
  cfg.validate();
  cfg.font_min_text_ops = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("group_events attributes by stack first, then script_url") {
  std::vector<JsEvent> events = {event("A.b", ApiOperation::kGet), event("A.c", ApiOperation::kGet)};
  const AttributionOptions opts;
  auto grouped = group_events(events, opts);
  REQUIRE(grouped.groups.size() == 1);
  CHECK(grouped.groups.begin()->second.size() == 2);

  CHECK(group_events(std::vector<JsEvent>{}, opts).groups.empty());

  const std::vector<JsEvent> masked = {event("A.b", ApiOperation::kGet, {}, {}, "dna.min.js")};
  grouped = group_events(masked, opts);
  REQUIRE(grouped.groups.size() == 1);
  CHECK(grouped.groups.begin()->first.origin == ScriptLocation::opaque_label("dna.min.js"));

  JsEvent stacked = event("A.b", ApiOperation::kGet, {}, {}, "ignored.js");
  stacked.stack_raw = "wrap@moz-extension://id/c.js:1:1\nrun@dna-persist.min.js:2:1\n";
  AttributionOptions with_markers;
  with_markers.markers = {"moz-extension://"};
  JsEvent orphan = event("A.b", ApiOperation::kGet);
  orphan.script_url.reset();
  orphan.stack_raw = "   ";
  const std::vector<JsEvent> mixed = {stacked, orphan};
  grouped = group_events(mixed, with_markers);
  REQUIRE(grouped.groups.size() == 1);
  CHECK(grouped.groups.begin()->first.origin == ScriptLocation::opaque_label("dna-persist.min.js"));
  CHECK(grouped.unattributable == 1);
}

TEST_CASE("classify_scripts composes detectors into one verdict per group") {
  const HeuristicConfig cfg;
  CHECK(classify_scripts(std::vector<JsEvent>{}, cfg).empty());

  auto events = font_events(50, 50);
  for (const auto& e : canvas_events()) events.push_back(e);
  for (const auto& e : audio_events()) {
    auto other = e;
    other.script_url = "https://b.com/audio.js";
    events.push_back(other);
  }
  const auto verdicts = classify_scripts(events, cfg);
  REQUIRE(verdicts.size() == 2);
  CHECK(verdicts[0].script_location == ScriptLocation::absolute_url("https://a.com/fp.js"));
  CHECK(verdicts[0].categories == std::set<Cat>{Cat::kCanvas, Cat::kCanvasFont});
  CHECK(verdicts[0].evidence.distinct_fonts >= cfg.font_min_distinct_fonts);
  CHECK(verdicts[1].categories == std::set<Cat>{Cat::kAudio});
}

TEST_CASE("verdicts are invariant under event permutation") {
  std::mt19937 rng(29);
  const HeuristicConfig cfg;
  auto events = font_events(50, 50);
  for (const auto& e : canvas_events()) events.push_back(e);
  for (auto e : webrtc_events()) {
    e.visit_id = 2;
    events.push_back(e);
  }
  const auto baseline = classify_scripts(events, cfg);
  REQUIRE(baseline.size() == 2);
  for (int i = 0; i < 50; ++i) {
    std::shuffle(events.begin(), events.end(), rng);
    CHECK(classify_scripts(events, cfg) == baseline);
  }
}

TEST_CASE("font, audio and webrtc flags are monotone; canvas is not") {
  std::mt19937 rng(31);
  const HeuristicConfig cfg;
  const std::vector<JsEvent> extras = {
      event("CanvasRenderingContext2D.font", ApiOperation::kSet, {}, "10px x"),
      event("CanvasRenderingContext2D.measureText", ApiOperation::kCall, {"abc"}),
      event("Navigator.userAgent", ApiOperation::kGet),
      event("CanvasRenderingContext2D.restore", ApiOperation::kCall),
      event("OscillatorNode.start", ApiOperation::kCall)};
  for (int i = 0; i < 200; ++i) {
    std::vector<JsEvent> events = font_events(50, 50);
    for (const auto& e : audio_events()) events.push_back(e);
    for (const auto& e : webrtc_events()) events.push_back(e);
    const auto before = classify_group(collect_evidence(as_group(events), cfg), cfg);
    const int n = static_cast<int>(rng() % 10);
    for (int k = 0; k < n; ++k) events.push_back(extras[rng() % extras.size()]);
    const auto after = classify_group(collect_evidence(as_group(events), cfg), cfg);
    for (auto c : {Cat::kCanvasFont, Cat::kAudio, Cat::kWebRtc}) {
      if (before.count(c)) CHECK(after.count(c));
    }
  }
  auto canvas = canvas_events();
  CHECK(detect_canvas_fp(as_group(canvas), cfg));
  canvas.push_back(event("HTMLCanvasElement.addEventListener", ApiOperation::kCall));
  CHECK_FALSE(detect_canvas_fp(as_group(canvas), cfg));
}

TEST_CASE("raising a minimum threshold never adds a flag") {
  std::mt19937 rng(37);
  for (int i = 0; i < 300; ++i) {
    auto events = font_events(45 + static_cast<int>(rng() % 10), 45 + static_cast<int>(rng() % 10));
    if (rng() % 2) {
      for (const auto& e : canvas_events()) events.push_back(e);
    }
    HeuristicConfig cfg;
    cfg.canvas_min_distinct_chars = 20 + static_cast<int>(rng() % 6);
    const auto base = classify_group(collect_evidence(as_group(events), cfg), cfg);
    for (int knob = 0; knob < 4; ++knob) {
      HeuristicConfig raised = cfg;
      if (knob == 0) ++raised.font_min_distinct_fonts;
      if (knob == 1) ++raised.font_min_text_ops;
      if (knob == 2) ++raised.canvas_min_area_px;
      if (knob == 3) ++raised.canvas_min_distinct_chars;
      const auto after = classify_group(collect_evidence(as_group(events), raised), raised);
      CHECK(std::includes(base.begin(), base.end(), after.begin(), after.end()));
    }
  }
}
