#include "provaudit/url.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "provaudit/error.hpp"

namespace provaudit {

namespace {

constexpr std::array<std::string_view, 11> kHierarchicalSchemes = {
    "http",     "https",         "ws",
    "wss",      "ftp",           "file",
    "chrome",   "resource",      "moz-extension",
    "chrome-extension", "safari-web-extension"};

bool is_hierarchical(std::string_view scheme) {
  return std::find(kHierarchicalSchemes.begin(), kHierarchicalSchemes.end(),
                   scheme) != kHierarchicalSchemes.end();
}

std::string_view default_port(std::string_view scheme) {
  if (scheme == "http" || scheme == "ws") return "80";
  if (scheme == "https" || scheme == "wss") return "443";
  return {};
}

char to_lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

std::string lowered(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), to_lower);
  return out;
}

bool is_hex(char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; }

// Uppercases the two hex digits of every well-formed %XX escape.
void append_percent_normalized(std::string& out, std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() &&
        is_hex(s[i + 1]) && is_hex(s[i + 2])) {
      out.push_back('%');
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(s[i + 1]))));
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(s[i + 2]))));
      i += 2;
      continue;
    }
    out.push_back(s[i]);
  }
}

struct SchemeSplit {
  std::string scheme;  // lowercased
  std::string_view rest;
};

std::optional<SchemeSplit> split_scheme(std::string_view raw) {
  if (raw.empty() || !std::isalpha(static_cast<unsigned char>(raw[0]))) {
    return std::nullopt;
  }
  std::size_t i = 1;
  while (i < raw.size()) {
    const char c = raw[i];
    if (c == ':') break;
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' &&
        c != '.') {
      return std::nullopt;
    }
    ++i;
  }
  if (i >= raw.size()) return std::nullopt;
  return SchemeSplit{lowered(raw.substr(0, i)), raw.substr(i + 1)};
}

bool has_forbidden_chars(std::string_view raw) {
  return std::any_of(raw.begin(), raw.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u <= 0x20 || u == 0x7f;
  });
}

struct Authority {
  std::string_view userinfo;  // without '@'
  bool has_userinfo = false;
  std::string_view host;
  std::string_view port;
  bool has_port = false;
};

Authority split_authority(std::string_view auth) {
  Authority a;
  if (const auto at = auth.rfind('@'); at != std::string_view::npos) {
    a.userinfo = auth.substr(0, at);
    a.has_userinfo = true;
    auth.remove_prefix(at + 1);
  }
  std::size_t host_end = auth.size();
  if (!auth.empty() && auth.front() == '[') {
    const auto close = auth.find(']');
    host_end = close == std::string_view::npos ? auth.size() : close + 1;
  } else if (const auto colon = auth.rfind(':'); colon != std::string_view::npos) {
    host_end = colon;
  }
  a.host = auth.substr(0, host_end);
  if (host_end < auth.size() && auth[host_end] == ':') {
    a.port = auth.substr(host_end + 1);
    a.has_port = true;
  }
  return a;
}

bool all_digits(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

// Removes the fragment and optionally the query from a path-and-after tail.
std::string_view trim_tail(std::string_view tail, const NormalizeOptions& opts) {
  if (const auto hash = tail.find('#'); hash != std::string_view::npos) {
    tail = tail.substr(0, hash);
  }
  if (!opts.keep_query) {
    if (const auto q = tail.find('?'); q != std::string_view::npos) {
      tail = tail.substr(0, q);
    }
  }
  return tail;
}

}  // namespace

std::optional<std::string> url_scheme(std::string_view raw) {
  if (!is_absolute_url(raw)) return std::nullopt;
  return split_scheme(raw)->scheme;
}

bool is_absolute_url(std::string_view raw) {
  if (has_forbidden_chars(raw)) return false;
  const auto split = split_scheme(raw);
  if (!split || split->rest.empty()) return false;
  if (split->scheme == "blob") return true;
  if (!is_hierarchical(split->scheme)) return true;
  if (split->rest.substr(0, 2) != "//") return false;
  const auto after = split->rest.substr(2);
  const auto auth_end = after.find_first_of("/?#");
  const auto auth = after.substr(0, auth_end);
  if (split->scheme == "file") return true;
  const auto parts = split_authority(auth);
  if (parts.host.empty()) return false;
  if (parts.has_port && !all_digits(parts.port)) return false;
  return true;
}

std::optional<std::string> try_normalize_url(std::string_view raw,
                                             const NormalizeOptions& opts) {
  if (!is_absolute_url(raw)) return std::nullopt;
  const auto split = *split_scheme(raw);
  std::string out = split.scheme;
  out.push_back(':');

  if (split.scheme == "blob") {
    if (auto inner = try_normalize_url(split.rest, opts)) {
      out += *inner;
    } else {
      append_percent_normalized(out, trim_tail(split.rest, opts));
    }
    return out;
  }
  if (!is_hierarchical(split.scheme)) {
    // Opaque payloads (data:, mailto:, ...) keep their query-like text.
    std::string_view body = split.rest;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    append_percent_normalized(out, body);
    return out;
  }

  const auto after = split.rest.substr(2);
  const auto auth_end = std::min(after.find_first_of("/?#"), after.size());
  const auto parts = split_authority(after.substr(0, auth_end));
  out += "//";
  if (parts.has_userinfo) {
    append_percent_normalized(out, parts.userinfo);
    out.push_back('@');
  }
  append_percent_normalized(out, lowered(parts.host));
  if (parts.has_port && !parts.port.empty() &&
      parts.port != default_port(split.scheme)) {
    out.push_back(':');
    out += parts.port;
  }
  append_percent_normalized(out, trim_tail(after.substr(auth_end), opts));
  return out;
}

std::string normalize_url(std::string_view raw, const NormalizeOptions& opts) {
  if (auto n = try_normalize_url(raw, opts)) return std::move(*n);
  throw Error(ErrorCode::kNotAUrl, "not an absolute URL: " + std::string(raw));
}

std::string url_basename(std::string_view url) {
  std::string_view path = url;
  if (const auto split = split_scheme(url)) {
    path = split->rest;
    if (path.substr(0, 2) == "//") {
      path.remove_prefix(2);
      const auto slash = path.find_first_of("/?#");
      path = slash == std::string_view::npos ? std::string_view{} : path.substr(slash);
    }
  }
  if (const auto cut = path.find_first_of("?#"); cut != std::string_view::npos) {
    path = path.substr(0, cut);
  }
  while (!path.empty() && path.back() == '/') path.remove_suffix(1);
  const auto slash = path.rfind('/');
  return std::string(slash == std::string_view::npos ? path : path.substr(slash + 1));
}

}  // namespace provaudit
