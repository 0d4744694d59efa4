#include "provaudit/audit.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "provaudit/error.hpp"

namespace provaudit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::kConfigError, "config key " + key + ": " + what);
}

int as_int(const std::string& key, const json& v) {
  if (!v.is_number_integer()) bad(key, "expected an integer");
  const auto n = v.get<std::int64_t>();
  if (n < 1 || n > std::numeric_limits<int>::max()) bad(key, "must be between 1 and INT_MAX");
  return static_cast<int>(n);
}

std::vector<std::string> as_strings(const std::string& key, const json& v) {
  if (!v.is_array()) bad(key, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) bad(key, "expected an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

bool as_bool(const std::string& key, const json& v) {
  if (!v.is_boolean()) bad(key, "expected true or false");
  return v.get<bool>();
}

}  // namespace

AuditOptions default_audit_options() {
  AuditOptions opts;
  opts.attribution.markers = {"moz-extension://", "chrome-extension://"};
  return opts;
}

void apply_config(AuditOptions& opts, const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kConfigError, "config must be a JSON object");
  auto& h = opts.heuristics;
  for (const auto& [key, v] : doc.items()) {
    if (key == "font_min_distinct_fonts") {
      h.font_min_distinct_fonts = as_int(key, v);
    } else if (key == "font_min_text_ops") {
      h.font_min_text_ops = as_int(key, v);
    } else if (key == "font_max_text_length") {
      h.font_max_text_length = as_int(key, v);
    } else if (key == "canvas_min_area_px") {
      h.canvas_min_area_px = as_int(key, v);
    } else if (key == "canvas_min_distinct_chars") {
      h.canvas_min_distinct_chars = as_int(key, v);
    } else if (key == "canvas_disqualifying_symbols") {
      const auto list = as_strings(key, v);
      h.canvas_disqualifying_symbols = {list.begin(), list.end()};
    } else if (key == "audio_required_symbols") {
      const auto list = as_strings(key, v);
      h.audio_required_symbols = {list.begin(), list.end()};
    } else if (key == "webrtc_required_symbols") {
      const auto list = as_strings(key, v);
      h.webrtc_required_symbols = {list.begin(), list.end()};
    } else if (key == "symbol_aliases") {
      if (!v.is_object()) bad(key, "expected an object of strings");
      h.symbol_aliases.clear();
      for (const auto& [alias, target] : v.items()) {
        if (!target.is_string()) bad(key, "expected an object of strings");
        h.symbol_aliases[alias] = target.get<std::string>();
      }
    } else if (key == "markers") {
      opts.attribution.markers = as_strings(key, v);
    } else if (key == "internal_tags") {
      opts.attribution.internal_tags = InternalTagSet(as_strings(key, v));
    } else if (key == "dialect") {
      if (!v.is_string()) bad(key, "expected a string");
      const auto d = parse_dialect(v.get<std::string>());
      if (!d) bad(key, "expected gecko, v8 or auto");
      opts.attribution.dialect = *d;
    } else if (key == "keep_query") {
      opts.normalize.keep_query = as_bool(key, v);
    } else if (key == "verbose") {
      opts.verbose = as_bool(key, v);
    } else if (key == "max_malformed_ratio") {
      if (!v.is_number()) bad(key, "expected a number");
      const double r = v.get<double>();
      if (!(r >= 0.0 && r <= 1.0)) bad(key, "must be within [0, 1]");
      opts.max_malformed_ratio = r;
    } else {
      bad(key, "unknown key");
    }
  }
  h.validate();
}

void apply_config_file(AuditOptions& opts, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const json doc = json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kConfigError, "config file is not valid JSON: " + path);
  apply_config(opts, doc);
}

ordered_json config_echo(const AuditOptions& opts) {
  const auto& h = opts.heuristics;
  ordered_json heur;
  heur["font_min_distinct_fonts"] = h.font_min_distinct_fonts;
  heur["font_min_text_ops"] = h.font_min_text_ops;
  heur["font_max_text_length"] = h.font_max_text_length;
  heur["canvas_min_area_px"] = h.canvas_min_area_px;
  heur["canvas_min_distinct_chars"] = h.canvas_min_distinct_chars;
  heur["canvas_disqualifying_symbols"] = h.canvas_disqualifying_symbols;
  heur["audio_required_symbols"] = h.audio_required_symbols;
  heur["webrtc_required_symbols"] = h.webrtc_required_symbols;
  heur["symbol_aliases"] = h.symbol_aliases;

  ordered_json out;
  out["heuristics"] = std::move(heur);
  out["dialect"] = to_string(opts.attribution.dialect);
  out["markers"] = opts.attribution.markers;
  out["internal_tags"] = opts.attribution.internal_tags.tags();
  out["keep_query"] = opts.normalize.keep_query;
  out["verbose"] = opts.verbose;
  out["max_malformed_ratio"] = opts.max_malformed_ratio;
  return out;
}

}  // namespace provaudit
