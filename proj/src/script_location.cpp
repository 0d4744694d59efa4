#include "provaudit/script_location.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "provaudit/url.hpp"

namespace provaudit {

ScriptLocation ScriptLocation::absolute_url(std::string canonical_url) {
  return {Kind::kAbsoluteUrl, std::move(canonical_url)};
}

ScriptLocation ScriptLocation::opaque_label(std::string label) {
  return {Kind::kOpaqueLabel, std::move(label)};
}

ScriptLocation ScriptLocation::inline_origin() { return {Kind::kInline, {}}; }

ScriptLocation ScriptLocation::internal(std::string tag) {
  return {Kind::kInternal, std::move(tag)};
}

std::string_view to_string(ScriptLocation::Kind kind) {
  switch (kind) {
    case ScriptLocation::Kind::kAbsoluteUrl:
      return "ABSOLUTE_URL";
    case ScriptLocation::Kind::kOpaqueLabel:
      return "OPAQUE_LABEL";
    case ScriptLocation::Kind::kInline:
      return "INLINE";
    case ScriptLocation::Kind::kInternal:
      return "INTERNAL";
  }
  return "?";
}

std::string describe(const ScriptLocation& loc) {
  std::string out(to_string(loc.kind()));
  if (!loc.is(ScriptLocation::Kind::kInline)) {
    out += "(\"" + loc.text() + "\")";
  }
  return out;
}

InternalTagSet::InternalTagSet()
    : tags_{"(program)", "[native code]", "debugger eval code"} {}

bool InternalTagSet::matches(std::string_view loc) const {
  return std::any_of(tags_.begin(), tags_.end(), [loc](const std::string& tag) {
    if (tag.empty() || loc.substr(0, tag.size()) != tag) return false;
    auto rest = loc.substr(tag.size());
    while (!rest.empty()) {
      if (rest.front() != ':' || rest.size() < 2) return false;
      rest.remove_prefix(1);
      std::size_t digits = 0;
      while (digits < rest.size() &&
             std::isdigit(static_cast<unsigned char>(rest[digits]))) {
        ++digits;
      }
      if (digits == 0) return false;
      rest.remove_prefix(digits);
    }
    return true;
  });
}

bool is_script_scheme(std::string_view scheme) {
  static constexpr std::array<std::string_view, 9> kSchemes = {
      "http",     "https",         "blob",
      "data",     "file",          "chrome",
      "resource", "moz-extension", "chrome-extension"};
  return std::find(kSchemes.begin(), kSchemes.end(), scheme) != kSchemes.end();
}

ScriptLocation classify_location(std::string_view loc,
                                 const InternalTagSet& internal_tags) {
  if (loc.empty()) return ScriptLocation::inline_origin();
  if (internal_tags.matches(loc)) return ScriptLocation::internal(std::string(loc));
  if (const auto scheme = url_scheme(loc); scheme && is_script_scheme(*scheme)) {
    if (auto canonical = try_normalize_url(loc)) {
      return ScriptLocation::absolute_url(std::move(*canonical));
    }
  }
  return ScriptLocation::opaque_label(std::string(loc));
}

}  // namespace provaudit
