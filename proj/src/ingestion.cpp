#include "provaudit/ingestion.hpp"

#include <openssl/sha.h>

#include <array>
#include <cstdio>
#include <json.hpp>

#include "provaudit/error.hpp"
#include "provaudit/url.hpp"

namespace provaudit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::optional<int> take_int(std::string_view s, std::size_t pos, std::size_t width) {
  if (pos + width > s.size()) return std::nullopt;
  int v = 0;
  for (std::size_t i = pos; i < pos + width; ++i) {
    if (!is_digit(s[i])) return std::nullopt;
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

// Field access with per-record error reasons.
class Fields {
 public:
  explicit Fields(const json& obj) : obj_(obj) {}

  const json* get(const char* key) const {
    const auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string required_string(const char* key) const {
    const json* v = get(key);
    if (!v) throw RecordError{0, std::string("missing field ") + key};
    if (!v->is_string()) throw RecordError{0, std::string("field ") + key + " must be a string"};
    return v->get<std::string>();
  }

  std::optional<std::string> optional_string(const char* key) const {
    const json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw RecordError{0, std::string("field ") + key + " must be a string"};
    return v->get<std::string>();
  }

  std::int64_t required_int(const char* key) const {
    const json* v = get(key);
    if (!v) throw RecordError{0, std::string("missing field ") + key};
    if (v->is_number_integer()) return v->get<std::int64_t>();
    throw RecordError{0, std::string("field ") + key + " must be an integer"};
  }

  Timestamp required_timestamp(const char* key) const {
    const auto text = required_string(key);
    auto ts = parse_timestamp(text);
    if (!ts) throw RecordError{0, std::string("invalid timestamp in field ") + key};
    return *ts;
  }

 private:
  const json& obj_;
};

json parse_object(std::string_view line) {
  json obj = json::parse(line.begin(), line.end(), nullptr, false);
  if (obj.is_discarded()) throw RecordError{0, "invalid JSON"};
  if (!obj.is_object()) throw RecordError{0, "record is not a JSON object"};
  return obj;
}

template <typename Record, typename Fn>
std::variant<Record, RecordError> decode_with(std::string_view line, Fn&& fn) {
  try {
    const json obj = parse_object(line);
    return fn(Fields(obj));
  } catch (RecordError& e) {
    return e;
  }
}

bool is_lower_hex64(std::string_view s) {
  if (s.size() != 64) return false;
  for (char c : s) {
    if (!is_digit(c) && !(c >= 'a' && c <= 'f')) return false;
  }
  return true;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':') {
    return std::nullopt;
  }
  const auto y = take_int(s, 0, 4), mo = take_int(s, 5, 2), d = take_int(s, 8, 2);
  const auto h = take_int(s, 11, 2), mi = take_int(s, 14, 2), se = take_int(s, 17, 2);
  if (!y || !mo || !d || !h || !mi || !se || *h > 23 || *mi > 59 || *se > 59) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{*y},
                                        std::chrono::month{static_cast<unsigned>(*mo)},
                                        std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;

  std::size_t pos = 19;
  int millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && is_digit(s[pos])) {
      if (pos - start < 3) millis = millis * 10 + (s[pos] - '0');
      ++pos;
    }
    if (pos == start) return std::nullopt;
    for (std::size_t n = pos - start; n < 3; ++n) millis *= 10;
  }
  const auto zone = s.substr(pos);
  if (!(zone.empty() || zone == "Z" || zone == "z" || zone == "+00:00")) return std::nullopt;

  using namespace std::chrono;
  return sys_days{ymd} + hours{*h} + minutes{*mi} + seconds{*se} + milliseconds{millis};
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  const auto day = floor<days>(ts);
  const year_month_day ymd{day};
  const hh_mm_ss<milliseconds> tod{ts - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()),
                static_cast<int>(tod.subseconds().count()));
  return buf;
}

std::string_view to_string(ApiOperation op) {
  switch (op) {
    case ApiOperation::kGet:
      return "get";
    case ApiOperation::kSet:
      return "set";
    case ApiOperation::kCall:
      return "call";
  }
  return "?";
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest.data());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (unsigned char b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

std::variant<JsEvent, RecordError> decode_js_event(std::string_view line) {
  return decode_with<JsEvent>(line, [](const Fields& f) {
    JsEvent e;
    e.visit_id = f.required_int("visit_id");
    e.top_level_url = f.required_string("top_level_url");
    e.symbol = f.required_string("symbol");
    if (e.symbol.empty()) throw RecordError{0, "field symbol must be nonempty"};
    const auto op = f.required_string("operation");
    if (op == "get" || op == "GET") {
      e.operation = ApiOperation::kGet;
    } else if (op == "set" || op == "SET") {
      e.operation = ApiOperation::kSet;
    } else if (op == "call" || op == "CALL") {
      e.operation = ApiOperation::kCall;
    } else {
      throw RecordError{0, "invalid operation " + op};
    }
    e.value = f.optional_string("value");
    if (const json* args = f.get("arguments")) {
      if (!args->is_array()) throw RecordError{0, "field arguments must be an array of strings"};
      std::vector<std::string> list;
      for (const auto& a : *args) {
        if (!a.is_string()) throw RecordError{0, "field arguments must be an array of strings"};
        list.push_back(a.get<std::string>());
      }
      e.arguments = std::move(list);
    }
    e.stack_raw = f.optional_string("stack_raw");
    e.script_url = f.optional_string("script_url");
    e.func_name = f.optional_string("func_name");
    if (!e.stack_raw && !e.script_url) {
      throw RecordError{0, "missing field stack_raw or script_url"};
    }
    e.time_stamp = f.required_timestamp("time_stamp");
    return e;
  });
}

std::variant<RequestRecord, RecordError> decode_request(std::string_view line) {
  return decode_with<RequestRecord>(line, [](const Fields& f) {
    RequestRecord r;
    r.visit_id = f.required_int("visit_id");
    r.url = f.required_string("url");
    if (!is_absolute_url(r.url)) throw RecordError{0, "field url is not an absolute URL"};
    r.method = f.required_string("method");
    r.resource_type = f.required_string("resource_type");
    r.time_stamp = f.required_timestamp("time_stamp");
    return r;
  });
}

std::variant<ScriptBody, RecordError> decode_script_body(std::string_view line) {
  return decode_with<ScriptBody>(line, [](const Fields& f) {
    ScriptBody b;
    b.url = f.required_string("url");
    b.sha256 = f.required_string("sha256");
    for (auto& c : b.sha256) {
      if (c >= 'A' && c <= 'F') c = static_cast<char>(c - 'A' + 'a');
    }
    if (!is_lower_hex64(b.sha256)) throw RecordError{0, "field sha256 must be 64 hex characters"};
    b.content = f.required_string("content");
    if (sha256_hex(b.content) != b.sha256) throw RecordError{0, "hash mismatch"};
    return b;
  });
}

std::string encode(const JsEvent& e) {
  ordered_json j;
  j["visit_id"] = e.visit_id;
  j["top_level_url"] = e.top_level_url;
  j["symbol"] = e.symbol;
  j["operation"] = to_string(e.operation);
  if (e.value) j["value"] = *e.value;
  if (e.arguments) j["arguments"] = *e.arguments;
  if (e.stack_raw) j["stack_raw"] = *e.stack_raw;
  if (e.script_url) j["script_url"] = *e.script_url;
  if (e.func_name) j["func_name"] = *e.func_name;
  j["time_stamp"] = format_timestamp(e.time_stamp);
  return j.dump();
}

std::string encode(const RequestRecord& r) {
  ordered_json j;
  j["visit_id"] = r.visit_id;
  j["url"] = r.url;
  j["method"] = r.method;
  j["resource_type"] = r.resource_type;
  j["time_stamp"] = format_timestamp(r.time_stamp);
  return j.dump();
}

std::string encode(const ScriptBody& b) {
  ordered_json j;
  j["url"] = b.url;
  j["sha256"] = b.sha256;
  j["content"] = b.content;
  return j.dump();
}

namespace {

template <typename Record>
std::variant<Record, RecordError> decode_line(std::string_view line) {
  if constexpr (std::is_same_v<Record, JsEvent>) {
    return decode_js_event(line);
  } else if constexpr (std::is_same_v<Record, RequestRecord>) {
    return decode_request(line);
  } else {
    return decode_script_body(line);
  }
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n\v\f") == std::string_view::npos;
}

template <typename Record>
LoadResult<Record> load_all(std::istream& in) {
  LoadResult<Record> out;
  RecordReader<Record> reader(in);
  while (auto item = reader.next()) {
    if (auto* rec = std::get_if<Record>(&*item)) {
      out.records.push_back(std::move(*rec));
    } else {
      out.errors.push_back(std::get<RecordError>(std::move(*item)));
    }
  }
  return out;
}

}  // namespace

template <typename Record>
std::optional<typename RecordReader<Record>::Item> RecordReader<Record>::next() {
  std::string line;
  while (true) {
    if (!std::getline(*in_, line)) {
      if (in_->bad()) throw Error(ErrorCode::kIoError, "read error on record stream");
      return std::nullopt;
    }
    ++line_number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    auto item = decode_line<Record>(line);
    if (auto* err = std::get_if<RecordError>(&item)) err->line_number = line_number_;
    return item;
  }
}

template class RecordReader<JsEvent>;
template class RecordReader<RequestRecord>;
template class RecordReader<ScriptBody>;

LoadResult<JsEvent> load_js_events(std::istream& in) { return load_all<JsEvent>(in); }
LoadResult<RequestRecord> load_requests(std::istream& in) { return load_all<RequestRecord>(in); }
LoadResult<ScriptBody> load_script_bodies(std::istream& in) { return load_all<ScriptBody>(in); }

}  // namespace provaudit
