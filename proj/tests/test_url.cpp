#include <doctest.h>

#include <random>

#include "provaudit/error.hpp"
#include "provaudit/url.hpp"

using namespace provaudit;

TEST_CASE("normalize_url applies each canonicalization rule") {
  CHECK(normalize_url("HTTPS://A.com:443/x.js#f") == "https://a.com/x.js");
  CHECK(normalize_url("https://a.com/x.js?v=2") == "https://a.com/x.js?v=2");
  CHECK(normalize_url("http://A.COM:80/") == "http://a.com/");
  CHECK(normalize_url("http://a.com:8080/p") == "http://a.com:8080/p");
  CHECK(normalize_url("http://a.com:443/p") == "http://a.com:443/p");
  CHECK(normalize_url("https://a.com/a%2fb%c3%a9") == "https://a.com/a%2Fb%C3%A9");
  CHECK(normalize_url("https://a.com/dir/") == "https://a.com/dir/");
  CHECK(normalize_url("https://a.com/dir") == "https://a.com/dir");
  CHECK(normalize_url("https://User@A.com/Path") == "https://User@a.com/Path");
  CHECK(normalize_url("https://[::1]:443/x") == "https://[::1]/x");
}

TEST_CASE("normalize_url rejects non-URLs with NOT_A_URL") {
  for (const char* bad : {"dna.min.js", "", "(program):2", "/rel/path.js", "https://", "http://a b.com/"}) {
    CAPTURE(bad);
    CHECK_FALSE(try_normalize_url(bad).has_value());
    try {
      normalize_url(bad);
      FAIL("expected an exception");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNotAUrl);
    }
  }
}

TEST_CASE("normalize_url handles opaque and nested schemes") {
  CHECK(normalize_url("DATA:text/javascript,x%3d1#frag") == "data:text/javascript,x%3D1");
  CHECK(normalize_url("blob:HTTPS://A.com/uuid") == "blob:https://a.com/uuid");
  CHECK(normalize_url("file:///tmp/x.js") == "file:///tmp/x.js");
  CHECK(normalize_url("moz-extension://ABC/content.js") == "moz-extension://abc/content.js");
}

TEST_CASE("query can be dropped on request") {
  NormalizeOptions opts;
  opts.keep_query = false;
  CHECK(normalize_url("https://a.com/x.js?v=2#f", opts) == "https://a.com/x.js");
}

TEST_CASE("normalization is idempotent over generated URLs") {
  std::mt19937 rng(7);
  const std::vector<std::string> schemes = {"http", "HTTPS", "Http", "blob:https", "data", "file"};
  const std::vector<std::string> hosts = {"A.com", "cdn.X.org", "[::1]", "b.net:443", "c.io:80", "d.io:8443", "u:p@E.com"};
  const std::vector<std::string> paths = {"", "/", "/x.js", "/a%2fb", "/dir/", "/q?x=%aa&y=1", "/f#frag", "/%zz"};
  for (int i = 0; i < 2000; ++i) {
    const auto& s = schemes[rng() % schemes.size()];
    std::string url = s == "data" ? "data:text/plain," + paths[rng() % paths.size()]
                                  : s + "://" + hosts[rng() % hosts.size()] + paths[rng() % paths.size()];
    CAPTURE(url);
    const auto once = try_normalize_url(url);
    REQUIRE(once.has_value());
    CHECK(try_normalize_url(*once) == once);
  }
}

TEST_CASE("url_basename takes the last path segment") {
  CHECK(url_basename("https://a.com/x/dna.min.js?q=1#f") == "dna.min.js");
  CHECK(url_basename("https://a.com/x/") == "x");
  CHECK(url_basename("https://a.com") == "");
  CHECK(url_basename("dna.min.js") == "dna.min.js");
}
