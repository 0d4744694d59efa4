#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace provaudit {

/// What a "script URL" string reported by the instrumentation actually is.
///
/// Crawl logs record the origin of an API access as free text. Most of the
/// time that text is a fetchable URL, but it can also be empty (inline code),
/// a debugger-internal tag such as `(program):2`, or an arbitrary label
/// supplied by a `sourceURL` pragma. Only the first kind can be joined against
/// the request log.
class ScriptLocation {
 public:
  enum class Kind { kAbsoluteUrl, kOpaqueLabel, kInline, kInternal };

  static ScriptLocation absolute_url(std::string canonical_url);
  static ScriptLocation opaque_label(std::string label);
  static ScriptLocation inline_origin();
  static ScriptLocation internal(std::string tag);

  Kind kind() const noexcept { return kind_; }
  bool is(Kind k) const noexcept { return kind_ == k; }

  // URL, label or tag; empty for inline.
  const std::string& text() const noexcept { return text_; }

  // Ordered by text first so reports sort by origin text.
  friend auto operator<=>(const ScriptLocation& a, const ScriptLocation& b) {
    if (auto c = a.text_ <=> b.text_; c != 0) return c;
    return a.kind_ <=> b.kind_;
  }
  friend bool operator==(const ScriptLocation&, const ScriptLocation&) = default;

 private:
  ScriptLocation(Kind kind, std::string text) : kind_(kind), text_(std::move(text)) {}

  Kind kind_ = Kind::kInline;
  std::string text_;
};

std::string_view to_string(ScriptLocation::Kind kind);

// Debug form, e.g. `OPAQUE_LABEL("dna.min.js")`.
std::string describe(const ScriptLocation& loc);

/// Tags that identify browser/debugger-internal origins. A tag matches the
/// exact text, or the text followed by one or more `:<digits>` suffixes.
class InternalTagSet {
 public:
  InternalTagSet();  // `(program)`, `[native code]`, `debugger eval code`
  explicit InternalTagSet(std::vector<std::string> tags) : tags_(std::move(tags)) {}

  bool matches(std::string_view loc) const;
  const std::vector<std::string>& tags() const noexcept { return tags_; }

 private:
  std::vector<std::string> tags_;
};

// Schemes accepted as ABSOLUTE_URL origins.
bool is_script_scheme(std::string_view lowercase_scheme);

/// Total classification of an origin string into the four variants.
ScriptLocation classify_location(std::string_view loc,
                                 const InternalTagSet& internal_tags = {});

}  // namespace provaudit
