#include "provaudit/pragma_scanner.hpp"

#include <algorithm>

#include "provaudit/ingestion.hpp"

namespace provaudit {

std::string_view to_string(Directive::Kind kind) {
  return kind == Directive::Kind::kSourceUrl ? "sourceURL" : "sourceMappingURL";
}

std::string_view to_string(Directive::Marker marker) {
  return marker == Directive::Marker::kHash ? "#" : "@";
}

std::string_view to_string(Directive::CommentForm form) {
  return form == Directive::CommentForm::kLine ? "line" : "block";
}

namespace {

bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_ident_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || (u >= '0' && u <= '9') ||
         u == '_' || u == '$' || u >= 0x80;
}

// Parses `[ws] (#|@) [ws] keyword=value` at the start of a comment body.
std::optional<Directive> match_directive(std::string_view body, std::size_t line,
                                         Directive::CommentForm form) {
  std::size_t p = 0;
  const auto skip_ws = [&] {
    while (p < body.size() && is_ws(body[p])) {
      if (body[p] == '\n') ++line;
      ++p;
    }
  };
  skip_ws();
  if (p >= body.size() || (body[p] != '#' && body[p] != '@')) return std::nullopt;
  const auto marker = body[p] == '#' ? Directive::Marker::kHash : Directive::Marker::kAt;
  ++p;
  skip_ws();

  constexpr std::string_view kSourceUrl = "sourceURL=";
  constexpr std::string_view kSourceMappingUrl = "sourceMappingURL=";
  Directive::Kind kind;
  const auto rest = body.substr(p);
  if (rest.substr(0, kSourceUrl.size()) == kSourceUrl) {
    kind = Directive::Kind::kSourceUrl;
    p += kSourceUrl.size();
  } else if (rest.substr(0, kSourceMappingUrl.size()) == kSourceMappingUrl) {
    kind = Directive::Kind::kSourceMappingUrl;
    p += kSourceMappingUrl.size();
  } else {
    return std::nullopt;
  }
  while (p < body.size() && (body[p] == ' ' || body[p] == '\t')) ++p;
  const std::size_t start = p;
  while (p < body.size() && !is_ws(body[p])) ++p;
  if (p == start) return std::nullopt;
  return Directive{kind, std::string(body.substr(start, p - start)), line, marker, form};
}

class Scanner {
 public:
  explicit Scanner(std::string_view src) : src_(src) {}

  PragmaScan run() {
    if (src_.substr(0, 2) == "#!") skip_to_newline();
    while (pos_ < src_.size()) step();
    for (const auto& d : scan_.directives) {
      auto& slot = d.kind == Directive::Kind::kSourceUrl ? scan_.effective_source_url
                                                         : scan_.effective_source_mapping_url;
      slot = d.value;
    }
    return std::move(scan_);
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') ++line_;
    ++pos_;
  }

  void skip_to_newline() {
    while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
  }

  void step() {
    const char c = src_[pos_];
    if (is_ws(c)) {
      advance();
      return;
    }
    if (c == '/' && peek(1) == '/') {
      const std::size_t begin = pos_ + 2;
      skip_to_newline();
      record(src_.substr(begin, pos_ - begin), line_, Directive::CommentForm::kLine);
      return;
    }
    if (c == '/' && peek(1) == '*') {
      const std::size_t line = line_;
      advance();
      advance();
      const std::size_t begin = pos_;
      auto end = src_.find("*/", pos_);
      if (end == std::string_view::npos) end = src_.size();
      while (pos_ < end) advance();
      record(src_.substr(begin, end - begin), line, Directive::CommentForm::kBlock);
      pos_ = std::min(end + 2, src_.size());
      return;
    }
    if (c == '/') {
      advance();
      if (!operand_before_) skip_regex();
      operand_before_ = !operand_before_;
      return;
    }
    if (c == '\'' || c == '"') {
      skip_string(c);
      operand_before_ = true;
      return;
    }
    if (c == '`') {
      advance();
      skip_template();
      operand_before_ = true;
      return;
    }
    if (c == '{') {
      if (!template_braces_.empty()) ++template_braces_.back();
      advance();
      operand_before_ = false;
      return;
    }
    if (c == '}') {
      advance();
      operand_before_ = false;
      if (!template_braces_.empty()) {
        if (template_braces_.back() == 0) {
          template_braces_.pop_back();
          skip_template();
          operand_before_ = true;
        } else {
          --template_braces_.back();
        }
      }
      return;
    }
    if (is_ident_char(c)) {
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
      operand_before_ = true;
      return;
    }
    operand_before_ = c == ')' || c == ']';
    advance();
  }

  // Called just after the opening quote.
  void skip_string(char quote) {
    advance();
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\\') {
        advance();
        if (pos_ < src_.size()) advance();
        continue;
      }
      if (c == '\n') return;  // unterminated; resume as code on the next line
      advance();
      if (c == quote) return;
    }
  }

  // Consumes template text until the closing backtick or a `${`.
  void skip_template() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\\') {
        advance();
        if (pos_ < src_.size()) advance();
        continue;
      }
      if (c == '`') {
        advance();
        return;
      }
      if (c == '$' && peek(1) == '{') {
        advance();
        advance();
        template_braces_.push_back(0);
        operand_before_ = false;
        return;
      }
      advance();
    }
  }

  // Called just after the opening slash of a regex literal.
  void skip_regex() {
    bool in_class = false;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n') return;
      if (c == '\\') {
        advance();
        if (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      advance();
      if (c == '[') in_class = true;
      else if (c == ']') in_class = false;
      else if (c == '/' && !in_class) break;
    }
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
  }

  void record(std::string_view body, std::size_t line, Directive::CommentForm form) {
    if (auto d = match_directive(body, line, form)) scan_.directives.push_back(std::move(*d));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  bool operand_before_ = false;
  std::vector<int> template_braces_;
  PragmaScan scan_;
};

}  // namespace

PragmaScan scan_pragmas(std::string_view source) { return Scanner(source).run(); }

void PragmaIndex::add(const ScriptBody& body) {
  if (const auto it = seen_hashes_.find(body.url); it != seen_hashes_.end()) {
    if (it->second != body.sha256) {
      duplicates_.push_back({body.url, it->second, body.sha256});
    }
    return;
  }
  seen_hashes_.emplace(body.url, body.sha256);
  const PragmaScan scan = scan_pragmas(body.content);
  if (scan.effective_source_url) {
    labels_[*scan.effective_source_url].insert(body.url);
    url_labels_.emplace(body.url, *scan.effective_source_url);
  }
}

void PragmaIndex::merge(const PragmaIndex& other) {
  for (const auto& dup : other.duplicates_) duplicates_.push_back(dup);
  for (const auto& [url, sha] : other.seen_hashes_) {
    if (const auto it = seen_hashes_.find(url); it != seen_hashes_.end()) {
      if (it->second != sha) duplicates_.push_back({url, it->second, sha});
      continue;
    }
    seen_hashes_.emplace(url, sha);
    if (const auto lab = other.url_labels_.find(url); lab != other.url_labels_.end()) {
      labels_[lab->second].insert(url);
      url_labels_.emplace(url, lab->second);
    }
  }
}

const std::set<std::string>* PragmaIndex::find(std::string_view label) const {
  const auto it = labels_.find(label);
  return it == labels_.end() ? nullptr : &it->second;
}

}  // namespace provaudit
