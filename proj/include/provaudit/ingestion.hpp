#pragma once

#include <chrono>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace provaudit {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// `2020-02-01T00:00:00.000Z`; fractional seconds and `Z` are optional on
// input, an explicit `+00:00` offset is also accepted.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

enum class ApiOperation { kGet, kSet, kCall };

std::string_view to_string(ApiOperation op);  // "get", "set", "call"

/// One instrumented API access (a row of the javascript table).
struct JsEvent {
  std::int64_t visit_id = 0;
  std::string top_level_url;
  std::string symbol;
  ApiOperation operation = ApiOperation::kCall;
  std::optional<std::string> value;
  std::optional<std::vector<std::string>> arguments;
  std::optional<std::string> stack_raw;
  std::optional<std::string> script_url;
  std::optional<std::string> func_name;
  Timestamp time_stamp{};

  friend bool operator==(const JsEvent&, const JsEvent&) = default;
};

/// One network request (a row of the requests table).
struct RequestRecord {
  std::int64_t visit_id = 0;
  std::string url;
  std::string method;
  std::string resource_type;
  Timestamp time_stamp{};

  friend bool operator==(const RequestRecord&, const RequestRecord&) = default;
};

/// A fetched script source.
struct ScriptBody {
  std::string url;
  std::string sha256;  // lowercase hex
  std::string content;

  friend bool operator==(const ScriptBody&, const ScriptBody&) = default;
};

struct RecordError {
  std::size_t line_number;  // 1-based
  std::string reason;

  friend bool operator==(const RecordError&, const RecordError&) = default;
};

std::string sha256_hex(std::string_view data);

// Line codecs. The decoders return RecordError with line_number 0; the
// readers below fill it in.
std::variant<JsEvent, RecordError> decode_js_event(std::string_view line);
std::variant<RequestRecord, RecordError> decode_request(std::string_view line);
std::variant<ScriptBody, RecordError> decode_script_body(std::string_view line);

std::string encode(const JsEvent& e);
std::string encode(const RequestRecord& r);
std::string encode(const ScriptBody& b);

/// Pull-style reader over a JSON-lines stream. Blank lines are skipped; a
/// malformed line yields a RecordError and reading continues. A stream
/// failure other than EOF throws Error(kIoError).
template <typename Record>
class RecordReader {
 public:
  using Item = std::variant<Record, RecordError>;

  explicit RecordReader(std::istream& in) : in_(&in) {}

  std::optional<Item> next();

  std::size_t lines_read() const noexcept { return line_number_; }

 private:
  std::istream* in_;
  std::size_t line_number_ = 0;
};

using JsEventReader = RecordReader<JsEvent>;
using RequestReader = RecordReader<RequestRecord>;
using ScriptBodyReader = RecordReader<ScriptBody>;

extern template class RecordReader<JsEvent>;
extern template class RecordReader<RequestRecord>;
extern template class RecordReader<ScriptBody>;

template <typename Record>
struct LoadResult {
  std::vector<Record> records;
  std::vector<RecordError> errors;

  std::size_t total() const noexcept { return records.size() + errors.size(); }
};

LoadResult<JsEvent> load_js_events(std::istream& in);
LoadResult<RequestRecord> load_requests(std::istream& in);
LoadResult<ScriptBody> load_script_bodies(std::istream& in);

}  // namespace provaudit
