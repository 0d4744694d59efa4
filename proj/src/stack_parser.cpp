#include "provaudit/stack_parser.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "provaudit/error.hpp"

namespace provaudit {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::optional<std::uint32_t> parse_u32(std::string_view digits) {
  if (digits.empty() || digits.size() > 10) return std::nullopt;
  std::uint64_t v = 0;
  for (char c : digits) {
    if (!is_digit(c)) return std::nullopt;
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  if (v > std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
  return static_cast<std::uint32_t>(v);
}

// Splits a trailing `:<digits>` group off `s`.
std::optional<std::uint32_t> pop_number(std::string_view& s) {
  std::size_t i = s.size();
  while (i > 0 && is_digit(s[i - 1])) --i;
  if (i == s.size() || i == 0 || s[i - 1] != ':') return std::nullopt;
  auto n = parse_u32(s.substr(i));
  if (n) s = s.substr(0, i - 1);
  return n;
}

struct Position {
  std::string_view location;
  std::optional<std::uint32_t> line;
  std::optional<std::uint32_t> column;
};

// `loc:line:col` or `loc:line` or `loc`.
Position split_position(std::string_view s) {
  Position p{s, std::nullopt, std::nullopt};
  std::string_view rest = s;
  auto last = pop_number(rest);
  if (!last) return p;
  std::string_view rest2 = rest;
  if (auto first = pop_number(rest2)) {
    p.location = rest2;
    p.line = first;
    p.column = last;
  } else {
    p.location = rest;
    p.line = last;
  }
  return p;
}

struct LocationSpec {
  std::string_view outer;  // outermost concrete location
  std::optional<std::uint32_t> line;
  std::optional<std::uint32_t> column;
  std::uint32_t eval_depth = 0;
};

// Gecko: `https://a.com/x.js line 2 > eval line 1 > Function:3:7`.
LocationSpec parse_gecko_location(std::string_view s) {
  const Position pos = split_position(s);
  LocationSpec spec{pos.location, pos.line, pos.column, 0};
  std::string_view chain = pos.location;
  std::optional<std::size_t> first_link;
  std::size_t from = 0;
  while (true) {
    const auto at = chain.find(" line ", from);
    if (at == std::string_view::npos) break;
    std::size_t i = at + 6;
    const std::size_t digits_start = i;
    while (i < chain.size() && is_digit(chain[i])) ++i;
    if (i > digits_start && chain.substr(i, 3) == " > ") {
      if (!first_link) first_link = at;
      ++spec.eval_depth;
      from = i + 3;
    } else {
      from = at + 1;
    }
  }
  if (first_link) spec.outer = chain.substr(0, *first_link);
  return spec;
}

// Index of the ')' matching the '(' at `open`, or npos.
std::size_t match_forward(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')' && --depth == 0) return i;
  }
  return std::string_view::npos;
}

// Index of the '(' matching the ')' that ends `s`, or npos.
std::size_t match_backward(std::string_view s) {
  int depth = 0;
  for (std::size_t i = s.size(); i > 0; --i) {
    const char c = s[i - 1];
    if (c == ')') ++depth;
    if (c == '(' && --depth == 0) return i - 1;
  }
  return std::string_view::npos;
}

// V8: `eval at outer (eval at inner (https://a.com/x.js:1:2), <anonymous>:3:4), <anonymous>:5:6`.
LocationSpec parse_v8_location(std::string_view s, int guard = 0) {
  constexpr std::string_view kEval = "eval at ";
  if (s.substr(0, kEval.size()) != kEval || guard > 256) {
    const Position pos = split_position(s);
    return {pos.location, pos.line, pos.column, 0};
  }
  const auto open = s.find('(');
  const auto close = open == std::string_view::npos ? open : match_forward(s, open);
  std::string_view trailing;
  if (close != std::string_view::npos) {
    trailing = s.substr(close + 1);
    if (!trailing.empty() && trailing.front() == ',') trailing.remove_prefix(1);
  } else if (const auto comma = s.rfind(", "); comma != std::string_view::npos) {
    trailing = s.substr(comma + 2);
  }
  const Position pos = split_position(trim(trailing));
  if (close == std::string_view::npos) {
    return {pos.location, pos.line, pos.column, 1};
  }
  LocationSpec inner = parse_v8_location(s.substr(open + 1, close - open - 1), guard + 1);
  return {inner.outer, pos.line, pos.column, inner.eval_depth + 1};
}

StackFrame make_frame(std::string_view func, const LocationSpec& spec,
                      std::string_view raw_line, const InternalTagSet& tags) {
  StackFrame f;
  f.func_name = std::string(func);
  f.location_raw = std::string(spec.outer);
  f.location = classify_location(spec.outer, tags);
  f.line = spec.line;
  f.column = spec.column;
  f.eval_depth = spec.eval_depth;
  f.raw_line = std::string(raw_line);
  return f;
}

StackFrame unrecognized_frame(std::string_view trimmed, std::string_view raw_line) {
  StackFrame f;
  f.location_raw = std::string(trimmed);
  f.location = ScriptLocation::opaque_label(std::string(trimmed));
  f.raw_line = std::string(raw_line);
  return f;
}

std::optional<StackFrame> parse_gecko_line(std::string_view t, std::string_view raw,
                                           const InternalTagSet& tags) {
  const auto at = t.find('@');
  if (at == std::string_view::npos || at + 1 >= t.size()) return std::nullopt;
  return make_frame(t.substr(0, at), parse_gecko_location(t.substr(at + 1)), raw, tags);
}

bool starts_with_at(std::string_view t) {
  return t.substr(0, 3) == "at " || t.substr(0, 3) == "at\t";
}

std::optional<StackFrame> parse_v8_line(std::string_view t, std::string_view raw,
                                        const InternalTagSet& tags) {
  if (!starts_with_at(t)) return std::nullopt;
  const std::string_view rest = trim(t.substr(3));
  if (rest.empty()) return std::nullopt;
  if (rest.back() == ')') {
    const auto open = match_backward(rest);
    if (open == std::string_view::npos) return std::nullopt;
    const auto func = trim(rest.substr(0, open));
    const auto inside = rest.substr(open + 1, rest.size() - open - 2);
    return make_frame(func, parse_v8_location(inside), raw, tags);
  }
  return make_frame({}, parse_v8_location(rest), raw, tags);
}

}  // namespace

std::string_view to_string(StackDialect dialect) {
  switch (dialect) {
    case StackDialect::kGecko:
      return "gecko";
    case StackDialect::kV8:
      return "v8";
    case StackDialect::kAuto:
      return "auto";
  }
  return "?";
}

std::optional<StackDialect> parse_dialect(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "gecko" || lower == "firefox") return StackDialect::kGecko;
  if (lower == "v8" || lower == "chromium" || lower == "chrome") return StackDialect::kV8;
  if (lower == "auto") return StackDialect::kAuto;
  return std::nullopt;
}

StackDialect detect_dialect(std::string_view raw) {
  std::size_t start = 0;
  while (start <= raw.size()) {
    auto end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    if (starts_with_at(trim(raw.substr(start, end - start)))) return StackDialect::kV8;
    start = end + 1;
  }
  return StackDialect::kGecko;
}

ParsedStack parse_stack(std::string_view raw, StackDialect dialect,
                        const InternalTagSet& internal_tags) {
  ParsedStack out;
  out.dialect = dialect == StackDialect::kAuto ? detect_dialect(raw) : dialect;

  bool seen_content = false;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start < raw.size()) {
    auto end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    const std::string_view line = raw.substr(start, end - start);
    start = end + 1;
    ++line_number;

    const std::string_view t = trim(line);
    if (t.empty()) continue;
    const bool first = !seen_content;
    seen_content = true;

    std::optional<StackFrame> frame;
    if (out.dialect == StackDialect::kV8) {
      if (first && !starts_with_at(t)) {
        out.diagnostics.push_back(
            {StackDiagnostic::Kind::kHeaderSkipped, line_number, std::string(line)});
        continue;
      }
      frame = parse_v8_line(t, line, internal_tags);
    } else {
      frame = parse_gecko_line(t, line, internal_tags);
    }
    if (frame) {
      out.frames.push_back(std::move(*frame));
    } else {
      out.diagnostics.push_back(
          {StackDiagnostic::Kind::kUnrecognized, line_number, std::string(line)});
      out.frames.push_back(unrecognized_frame(t, line));
    }
  }
  return out;
}

CallContext derive_call_context(std::span<const StackFrame> frames,
                                std::span<const std::string> markers) {
  if (frames.empty()) {
    throw Error(ErrorCode::kEmptyStack, "cannot derive a call context from an empty stack");
  }
  const auto is_instrumentation = [&](const StackFrame& f) {
    return std::any_of(markers.begin(), markers.end(), [&](const std::string& m) {
      return !m.empty() && f.location_raw.find(m) != std::string::npos;
    });
  };
  std::size_t skipped = 0;
  while (skipped < frames.size() && is_instrumentation(frames[skipped])) ++skipped;
  if (skipped == frames.size()) skipped = frames.size() - 1;

  const StackFrame& origin = frames[skipped];
  return CallContext{origin.location, origin.func_name,
                     std::vector<StackFrame>(frames.begin(), frames.end()), skipped};
}

}  // namespace provaudit
