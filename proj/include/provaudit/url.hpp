#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace provaudit {

struct NormalizeOptions {
  // Dropping the query lets `x.js?v=1` and `x.js?v=2` join as one resource.
  bool keep_query = true;
};

// Splits `scheme:rest` and reports whether `raw` is an absolute URL: a valid
// scheme followed by a nonempty remainder, with an authority for the
// hierarchical schemes (http, https, ws, wss, ftp, file, *-extension, ...).
bool is_absolute_url(std::string_view raw);

// Lowercase scheme of an absolute URL, or nullopt.
std::optional<std::string> url_scheme(std::string_view raw);

// Canonical form used for joins: lowercase scheme and host, default port
// dropped, fragment dropped, percent escapes in uppercase hex, query and
// trailing slash kept as given. Returns nullopt when `raw` is not absolute.
std::optional<std::string> try_normalize_url(std::string_view raw,
                                             const NormalizeOptions& opts = {});

// Throws Error(kNotAUrl) where try_normalize_url returns nullopt.
std::string normalize_url(std::string_view raw, const NormalizeOptions& opts = {});

// Last nonempty path segment ("https://a.com/x/dna.min.js?q" -> "dna.min.js").
std::string url_basename(std::string_view url);

}  // namespace provaudit
