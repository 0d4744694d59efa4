#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace provaudit {

struct ScriptBody;

/// A `sourceURL` / `sourceMappingURL` comment pragma found in script text.
struct Directive {
  enum class Kind { kSourceUrl, kSourceMappingUrl };
  enum class Marker { kHash, kAt };
  enum class CommentForm { kLine, kBlock };

  Kind kind;
  std::string value;  // nonempty, no whitespace
  std::size_t line;   // 1-based line holding the keyword
  Marker marker;
  CommentForm comment_form;

  friend bool operator==(const Directive&, const Directive&) = default;
};

std::string_view to_string(Directive::Kind kind);
std::string_view to_string(Directive::Marker marker);
std::string_view to_string(Directive::CommentForm form);

struct PragmaScan {
  std::vector<Directive> directives;  // source order
  std::optional<std::string> effective_source_url;          // last wins
  std::optional<std::string> effective_source_mapping_url;  // last wins

  friend bool operator==(const PragmaScan&, const PragmaScan&) = default;
};

/// Finds directives that sit in real comments. The scan tracks line and
/// block comments, quoted strings, template literals (with `${}` nesting) and
/// regex literals, so directive text inside literals is ignored. A `/` after
/// an identifier, number, `)` or `]` is taken as division, otherwise it opens
/// a regex literal. Unterminated tokens end at EOF.
PragmaScan scan_pragmas(std::string_view source);

/// Inverse of the scan over a crawl's fetched scripts: effective sourceURL
/// label -> URLs of the bodies that declare it.
class PragmaIndex {
 public:
  struct DuplicateBody {
    std::string url;
    std::string kept_sha256;
    std::string dropped_sha256;
  };

  // Scans and indexes one body. A second body with the same URL and a
  // different hash is reported as a duplicate and ignored.
  void add(const ScriptBody& body);

  // Associative union; duplicates across partitions keep `this` side.
  void merge(const PragmaIndex& other);

  const std::set<std::string>* find(std::string_view label) const;

  const std::map<std::string, std::set<std::string>, std::less<>>& labels() const {
    return labels_;
  }
  const std::vector<DuplicateBody>& duplicates() const { return duplicates_; }

 private:
  std::map<std::string, std::set<std::string>, std::less<>> labels_;
  std::map<std::string, std::string, std::less<>> seen_hashes_;  // url -> sha256
  std::map<std::string, std::string, std::less<>> url_labels_;   // url -> label
  std::vector<DuplicateBody> duplicates_;
};

}  // namespace provaudit
