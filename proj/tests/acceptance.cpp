// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "provaudit/fingerprint.hpp"
#include "provaudit/pragma_scanner.hpp"
#include "provaudit/provenance.hpp"
#include "provaudit/stack_parser.hpp"

namespace fs = std::filesystem;
using namespace provaudit;
using nlohmann::json;

namespace {

const std::string kCli = PROVAUDIT_CLI_PATH;
const std::string kFixtures = PROVAUDIT_FIXTURE_DIR;
const std::string kData = PROVAUDIT_TEST_DATA_DIR;

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("provaudit_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Runs the CLI audit on a fixture set; returns the exit status.
int run_audit_cli(const std::string& set, const fs::path& out) {
  const auto dir = kFixtures + "/" + set + "/";
  const std::string cmd = "'" + kCli + "' audit --js '" + dir + "js_events.jsonl' --requests '" + dir +
                          "requests.jsonl' --scripts '" + dir + "script_bodies.jsonl' --out '" +
                          out.string() + "' 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// --- masked / clean scenarios --------------------------------------------

Outcome masked_scenario() {
  const auto t0 = Clock::now();
  const auto out = work_dir() / "masked.json";
  const int code = run_audit_cli("masked", out);
  const double elapsed = seconds_since(t0);
  const json report = json::parse(slurp(out), nullptr, false);
  if (report.is_discarded()) return {false, "report is not JSON"};

  const auto suspects = report["summary"]["counts"]["OPAQUE_LABEL_SUSPECT"].get<int>();
  int exact = 0;
  std::string resolved;
  for (const auto& f : report["findings"]) {
    if (f["corroboration"] == "PRAGMA_EXACT" && f["label"] == "dna.min.js") {
      ++exact;
      resolved = f["candidate_true_origins"].dump();
    }
  }
  // The fixture itself must encode the scenario: pragma in the hosting body,
  // no request bearing the label.
  const bool hosting_has_pragma =
      slurp(kFixtures + "/masked/script_bodies.jsonl").find("//# sourceURL=dna.min.js") != std::string::npos;
  const bool no_label_request =
      slurp(kFixtures + "/masked/requests.jsonl").find("dna.min.js") == std::string::npos;

  std::ostringstream d;
  d << "suspects=" << suspects << " pragma_exact=" << exact << " resolved=" << resolved
    << " exit=" << code << " runtime=" << elapsed << "s";
  const bool pass = suspects == 1 && report["findings"].size() == 1 && exact == 1 &&
                    resolved == R"(["https://t.example/px.js"])" && code == 2 && elapsed < 5.0 &&
                    hosting_has_pragma && no_label_request;
  return {pass, d.str()};
}

Outcome clean_scenario() {
  const auto out = work_dir() / "clean.json";
  const int code = run_audit_cli("clean", out);
  const json report = json::parse(slurp(out), nullptr, false);
  if (report.is_discarded()) return {false, "report is not JSON"};
  const auto& counts = report["summary"]["counts"];
  const int origins = report["summary"]["origins"].get<int>();
  std::ostringstream d;
  d << "findings=" << report["findings"].size() << " matched=" << counts["MATCHED"] << "/" << origins
    << " exit=" << code;
  const bool pass = report["findings"].empty() && counts["MATCHED"].get<int>() == origins && origins > 0 &&
                    code == 0;
  return {pass, d.str()};
}

// --- font heuristic boundary ----------------------------------------------

Outcome font_boundary() {
  const HeuristicConfig cfg;
  int cases = 0, wrong = 0;
  bool at_50_50 = false, at_49_50 = true, at_50_49 = true;
  for (int fonts = cfg.font_min_distinct_fonts - 2; fonts <= cfg.font_min_distinct_fonts + 2; ++fonts) {
    for (int ops = cfg.font_min_text_ops - 2; ops <= cfg.font_min_text_ops + 2; ++ops) {
      std::vector<JsEvent> events;
      for (int i = 0; i < fonts; ++i) {
        JsEvent e;
        e.symbol = "CanvasRenderingContext2D.font";
        e.operation = ApiOperation::kSet;
        e.value = "72px f" + std::to_string(i);
        e.script_url = "https://a.com/fp.js";
        events.push_back(e);
      }
      for (int i = 0; i < ops; ++i) {
        JsEvent e;
        e.symbol = i % 2 ? "CanvasRenderingContext2D.measureText" : "CanvasRenderingContext2D.fillText";
        e.operation = ApiOperation::kCall;
        e.arguments = std::vector<std::string>{"mmmmmmmmlli"};
        e.script_url = "https://a.com/fp.js";
        events.push_back(e);
      }
      EventGroup group;
      for (const auto& e : events) group.push_back(&e);
      const bool flagged = detect_font_fp(group, cfg);
      const bool expected = fonts >= 50 && ops >= 50;
      ++cases;
      if (flagged != expected) ++wrong;
      if (fonts == 50 && ops == 50) at_50_50 = flagged;
      if (fonts == 49 && ops == 50) at_49_50 = flagged;
      if (fonts == 50 && ops == 49) at_50_49 = flagged;
    }
  }
  std::ostringstream d;
  d << cases << " grid points, " << wrong << " wrong; (50,50)=" << at_50_50 << " (49,50)=" << at_49_50
    << " (50,49)=" << at_50_49;
  return {wrong == 0 && at_50_50 && !at_49_50 && !at_50_49 && cases == 25, d.str()};
}

// --- join oracle ------------------------------------------------------------

std::string random_url(std::mt19937& rng) {
  static const std::vector<std::string> schemes = {"https", "HTTPS", "http"};
  static const std::vector<std::string> hosts = {"a.com", "A.com", "cdn.t.example", "CDN.T.example:443",
                                                 "b.org:80", "b.org", "c.net:8443"};
  static const std::vector<std::string> paths = {"/fp.js", "/x/%7euser.js", "/x/%7Euser.js", "/lib/",
                                                 "/lib", "/p.js?v=1", "/p.js?v=2", "/p.js#frag"};
  return schemes[rng() % schemes.size()] + "://" + hosts[rng() % hosts.size()] + paths[rng() % paths.size()];
}

Outcome join_oracle() {
  std::mt19937 rng(20200201);
  const auto t0 = Clock::now();
  int mismatches = 0;
  std::size_t total_origins = 0;
  for (int instance = 0; instance < 1000; ++instance) {
    const int visits = 1 + static_cast<int>(rng() % 4);
    std::set<GroupKey> origins;
    const int n_origins = static_cast<int>(rng() % 101);
    for (int i = 0; i < n_origins; ++i) {
      const auto visit = static_cast<std::int64_t>(rng() % visits);
      switch (rng() % 8) {
        case 0: origins.insert({visit, classify_location("dna.min.js")}); break;
        case 1: origins.insert({visit, classify_location("")}); break;
        case 2: origins.insert({visit, classify_location("(program):2")}); break;
        default: origins.insert({visit, classify_location(random_url(rng))});
      }
    }
    std::vector<RequestRecord> requests(rng() % 1001);
    for (auto& r : requests) {
      r.visit_id = static_cast<std::int64_t>(rng() % visits);
      r.url = random_url(rng);
    }
    const auto actual = join_scripts_to_requests(origins, requests);

    // Nested-loop oracle over normalized URL equality.
    std::vector<OriginClassification> expected;
    for (const auto& o : origins) {
      JoinClassification c;
      switch (o.origin.kind()) {
        case ScriptLocation::Kind::kAbsoluteUrl:
          c.kind = JoinClassification::Kind::kUnmatchedUrl;
          for (const auto& r : requests) {
            if (r.visit_id == o.visit_id && normalize_url(r.url) == normalize_url(o.origin.text())) {
              c.kind = JoinClassification::Kind::kMatched;
              c.request_url = r.url;
              break;
            }
          }
          break;
        case ScriptLocation::Kind::kOpaqueLabel: c.kind = JoinClassification::Kind::kOpaqueLabelSuspect; break;
        case ScriptLocation::Kind::kInline: c.kind = JoinClassification::Kind::kInline; break;
        case ScriptLocation::Kind::kInternal: c.kind = JoinClassification::Kind::kInternal; break;
      }
      expected.push_back({o, c});
    }
    if (actual != expected) ++mismatches;
    total_origins += origins.size();
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << "1000 instances, " << total_origins << " origins, " << mismatches << " mismatches, " << elapsed << "s";
  return {mismatches == 0 && elapsed < 60.0, d.str()};
}

// --- pragma scanner properties ---------------------------------------------

struct SourceGen {
  std::mt19937 rng{7};

  std::string pick(const std::vector<std::string>& v) { return v[rng() % v.size()]; }

  std::string payload() {
    static const std::vector<std::string> p = {"//# sourceURL=fake.js", "//@ sourceURL=x.js",
                                               "/*# sourceMappingURL=m.map */", "//# sourceMappingURL=a.map",
                                               "\\n//# sourceURL=dna.min.js", "*/ //# sourceURL=y.js /*"};
    return pick(p);
  }

  // A literal with directive text inside it; never contains a real comment.
  std::string literal() {
    switch (rng() % 5) {
      case 0: return "\"" + payload() + " \\\" q\"";
      case 1: return "'" + payload() + " \\' q'";
      case 2: return "`" + payload() + "\n line2 " + payload() + "`";
      case 3: return "`a ${ '" + payload() + "' } b ${ {k: \"" + payload() + "\"}.k }`";
      default: return "/\\/\\/# sourceURL=re[/]x.js/gi";
    }
  }

  std::string code_without_comments() {
    std::string src;
    const int statements = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < statements; ++i) {
      switch (rng() % 4) {
        case 0: src += "var v" + std::to_string(i) + " = " + literal() + ";"; break;
        case 1: src += "f(" + literal() + ", a / b, (c) / 2);"; break;
        case 2: src += "x[0] = y / z + " + literal() + ";"; break;
        default: src += "if (q) { w(" + literal() + "); }"; break;
      }
      src += rng() % 2 ? "\n" : " ";
    }
    return src;
  }

  std::string value() {
    static const std::string chars = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._-/:";
    std::string v;
    const int n = 1 + static_cast<int>(rng() % 16);
    for (int i = 0; i < n; ++i) v.push_back(chars[rng() % chars.size()]);
    return v;
  }
};

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (true) {
    const auto nl = s.find('\n', start);
    lines.push_back(s.substr(start, nl == std::string::npos ? std::string::npos : nl - start));
    if (nl == std::string::npos) return lines;
    start = nl + 1;
  }
}

bool position_sound(const std::string& src, const PragmaScan& scan) {
  const auto lines = split_lines(src);
  for (const auto& d : scan.directives) {
    if (d.line < 1 || d.line > lines.size()) return false;
    const auto& line = lines[d.line - 1];
    if (line.find(std::string(to_string(d.kind)) + "=" + d.value) == std::string::npos &&
        line.find(std::string(to_string(d.kind)) + "= " + d.value) == std::string::npos) {
      return false;
    }
  }
  return true;
}

Outcome pragma_properties() {
  SourceGen gen;
  int string_safety = 0, last_wins = 0, idempotence = 0, position = 0, injection = 0;
  constexpr int kCases = 10000;
  for (int i = 0; i < kCases; ++i) {
    // String-safety: directive text only inside literals.
    const std::string plain = gen.code_without_comments();
    const auto plain_scan = scan_pragmas(plain);
    if (!plain_scan.directives.empty()) ++string_safety;

    // Last-wins over real directives interleaved with code.
    std::string src;
    std::optional<std::string> last_url, last_map;
    const int n = 1 + static_cast<int>(gen.rng() % 5);
    for (int k = 0; k < n; ++k) {
      src += gen.code_without_comments();
      const bool is_url = gen.rng() % 2;
      const std::string v = gen.value();
      const std::string keyword = is_url ? "sourceURL" : "sourceMappingURL";
      const std::string marker = gen.rng() % 2 ? "#" : "@";
      src += gen.rng() % 2 ? "\n//" + marker + " " + keyword + "=" + v + "\n"
                           : "/*" + marker + " " + keyword + "=" + v + " */\n";
      (is_url ? last_url : last_map) = v;
    }
    const auto scan = scan_pragmas(src);
    if (scan.effective_source_url != last_url || scan.effective_source_mapping_url != last_map ||
        static_cast<int>(scan.directives.size()) != n) {
      ++last_wins;
    }
    if (scan_pragmas(src) != scan || scan_pragmas(plain) != plain_scan) ++idempotence;
    if (!position_sound(src, scan)) ++position;

    // Injection: appending a directive to a closed source makes it effective.
    const std::string label = gen.value();
    if (scan_pragmas(plain + "\n//# sourceURL=" + label).effective_source_url != label) ++injection;
  }
  std::ostringstream d;
  d << kCases << " cases; failures: string-safety=" << string_safety << " last-wins=" << last_wins
    << " idempotence=" << idempotence << " position=" << position << " injection=" << injection;
  return {string_safety + last_wins + idempotence + position + injection == 0, d.str()};
}

// --- stack dialects ---------------------------------------------------------

Outcome stack_dialects() {
  const json pairs = json::parse(slurp(kData + "/stack_pairs.json"), nullptr, false);
  if (pairs.is_discarded()) return {false, "cannot read stack_pairs.json"};
  int agree = 0;
  for (const auto& p : pairs) {
    const auto markers = p["markers"].get<std::vector<std::string>>();
    const auto g = parse_stack(p["gecko"].get<std::string>(), StackDialect::kGecko);
    const auto v = parse_stack(p["v8"].get<std::string>(), StackDialect::kV8);
    if (g.frames.empty() || v.frames.empty()) continue;
    const auto gc = derive_call_context(g.frames, markers);
    const auto vc = derive_call_context(v.frames, markers);
    if (gc.script_location == vc.script_location && gc.func_name == vc.func_name &&
        gc.script_location.text() == p["expected"]["text"].get<std::string>()) {
      ++agree;
    }
  }

  std::mt19937 rng(99);
  static const std::vector<std::string> fragments = {
      "at ", "@", ":", "(", ")", " line 2 > eval", "eval at ", ", <anonymous>", "https://a.com/x.js",
      "dna.min.js", "12", "\n", " ", "\t", "Error: ", "(program)", "[native code]", "\r", "@@", "::"};
  int aborts = 0;
  constexpr int kFuzz = 100000;
  for (int i = 0; i < kFuzz; ++i) {
    std::string input;
    const int n = static_cast<int>(rng() % 24);
    for (int k = 0; k < n; ++k) {
      if (rng() % 4 == 0) {
        input.push_back(static_cast<char>(rng() % 256));
      } else {
        input += fragments[rng() % fragments.size()];
      }
    }
    try {
      for (auto d : {StackDialect::kGecko, StackDialect::kV8, StackDialect::kAuto}) {
        const auto parsed = parse_stack(input, d);
        if (!parsed.frames.empty()) derive_call_context(parsed.frames, std::vector<std::string>{"@@"});
        (void)classify_location(input);
      }
    } catch (...) {
      ++aborts;
    }
  }
  std::ostringstream d;
  d << agree << "/" << pairs.size() << " pairs agree; " << kFuzz << " fuzz inputs, " << aborts << " aborts";
  return {pairs.size() >= 20 && agree == static_cast<int>(pairs.size()) && aborts == 0, d.str()};
}

// --- determinism ------------------------------------------------------------

Outcome determinism() {
  const auto a = work_dir() / "run_a.json";
  const auto b = work_dir() / "run_b.json";
  const int ca = run_audit_cli("masked", a);
  const int cb = run_audit_cli("masked", b);
  const auto ra = slurp(a), rb = slurp(b);
  std::ostringstream d;
  d << "exit " << ca << "/" << cb << ", " << ra.size() << " bytes, identical=" << (ra == rb);
  return {!ra.empty() && ra == rb && ca == cb, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"masked-scenario end-to-end", masked_scenario},
      {"clean-scenario end-to-end", clean_scenario},
      {"font heuristic threshold sweep", font_boundary},
      {"join oracle equivalence", join_oracle},
      {"pragma scanner properties", pragma_properties},
      {"stack dialect agreement + fuzz", stack_dialects},
      {"audit determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << " :: " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  fs::remove_all(work_dir());
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
