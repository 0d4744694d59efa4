#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "provaudit/audit.hpp"
#include "provaudit/error.hpp"
#include "provaudit/pragma_scanner.hpp"
#include "provaudit/report.hpp"

#ifndef PROVAUDIT_FIXTURE_DIR
#define PROVAUDIT_FIXTURE_DIR "fixtures"
#endif

namespace provaudit::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kConfigEnv = "PROVENANCE_AUDIT_CONFIG";

struct CommonFlags {
  std::string heuristics_path;
  std::string dialect;
  std::vector<std::string> markers;
  bool markers_given = false;
  bool verbose = false;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App& cmd, CommonFlags& flags) {
  cmd.add_option("--heuristics", flags.heuristics_path, "JSON config file (heuristics and pipeline keys)")
      ->check(CLI::ExistingFile);
  cmd.add_option("--dialect", flags.dialect, "Stack dialect: gecko, v8 or auto");
  cmd.add_option("--markers", flags.markers, "Instrumentation marker substrings (comma separated)")
      ->delimiter(',');
  cmd.add_flag("--verbose", flags.verbose, "Keep uncorroborated findings in the report");
  cmd.add_option("--set", flags.overrides, "Config override, e.g. --set font_min_text_ops=60");
}

// env file < --heuristics file < flags
AuditOptions resolve_options(const CommonFlags& flags, bool markers_given) {
  AuditOptions opts = default_audit_options();
  if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') {
    apply_config_file(opts, env);
  }
  if (!flags.heuristics_path.empty()) apply_config_file(opts, flags.heuristics_path);

  json doc = json::object();
  for (const auto& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::kConfigError, "--set expects key=value, got " + kv);
    }
    const auto key = kv.substr(0, eq);
    const auto text = kv.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    doc[key] = value.is_discarded() ? json(text) : value;
  }
  if (!flags.dialect.empty()) doc["dialect"] = flags.dialect;
  if (markers_given) doc["markers"] = flags.markers;
  if (flags.verbose) doc["verbose"] = true;
  apply_config(opts, doc);
  return opts;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return in;
}

template <typename Record>
void check_error_rate(const LoadResult<Record>& loaded, const std::string& path, double max_ratio,
                      std::ostream& err) {
  for (const auto& e : loaded.errors) {
    err << path << ":" << e.line_number << ": " << e.reason << "\n";
  }
  if (loaded.total() == 0) return;
  const double ratio = static_cast<double>(loaded.errors.size()) / static_cast<double>(loaded.total());
  if (ratio > max_ratio) {
    std::ostringstream msg;
    msg << path << ": " << loaded.errors.size() << " of " << loaded.total()
        << " records malformed, above the " << max_ratio * 100.0 << "% limit";
    throw Error(ErrorCode::kTooManyMalformed, msg.str());
  }
}

AuditReport audit_files(const std::string& js_path, const std::string& requests_path,
                        const std::string& scripts_path, const AuditOptions& opts,
                        std::ostream& err) {
  auto js_in = open_input(js_path);
  auto req_in = open_input(requests_path);
  auto body_in = open_input(scripts_path);
  const auto events = load_js_events(js_in);
  const auto requests = load_requests(req_in);
  const auto bodies = load_script_bodies(body_in);
  check_error_rate(events, js_path, opts.max_malformed_ratio, err);
  check_error_rate(requests, requests_path, opts.max_malformed_ratio, err);
  check_error_rate(bodies, scripts_path, opts.max_malformed_ratio, err);

  AuditReport report = run_audit(events.records, requests.records, bodies.records, opts);
  report.diagnostics.js_record_errors = events.errors.size();
  report.diagnostics.request_record_errors = requests.errors.size();
  report.diagnostics.script_body_record_errors = bodies.errors.size();
  return report;
}

int exit_status(const AuditReport& report) {
  return report.count(JoinClassification::Kind::kOpaqueLabelSuspect) > 0 ? kExitObfuscation
                                                                         : kExitOk;
}

void write_scan(const std::vector<ScriptBody>& bodies, std::ostream& out) {
  for (const auto& body : bodies) {
    const PragmaScan scan = scan_pragmas(body.content);
    out << body.url << "\n";
    // The effective directive of each kind is the last one of that kind.
    std::size_t last_url = scan.directives.size();
    std::size_t last_map = scan.directives.size();
    for (std::size_t i = 0; i < scan.directives.size(); ++i) {
      (scan.directives[i].kind == Directive::Kind::kSourceUrl ? last_url : last_map) = i;
    }
    for (std::size_t i = 0; i < scan.directives.size(); ++i) {
      const Directive& d = scan.directives[i];
      out << "  line " << d.line << "\t" << to_string(d.kind) << "=" << d.value << "\t"
          << to_string(d.marker) << " " << to_string(d.comment_form);
      if (i == last_url || i == last_map) out << "\teffective";
      out << "\n";
    }
  }
}

void write_verdicts(const std::vector<FingerprintVerdict>& verdicts, std::ostream& out) {
  for (const auto& v : verdicts) {
    out << v.visit_id << "\t" << to_string(v.script_location.kind()) << "\t"
        << v.script_location.text() << "\t";
    bool first = true;
    for (const auto c : v.categories) {
      out << (first ? "" : ",") << to_string(c);
      first = false;
    }
    out << "\tfonts=" << v.evidence.distinct_fonts << " text_ops=" << v.evidence.small_text_ops
        << " readbacks=" << v.evidence.readback_calls << "\n";
  }
}

// Compares one bundled fixture directory against its expected.json.
bool verify_fixture(const fs::path& dir, std::ostream& out, std::ostream& err) {
  std::ifstream exp_in(dir / "expected.json");
  const json expected = json::parse(exp_in, nullptr, false);
  if (!exp_in || expected.is_discarded()) {
    out << "FAIL " << dir.filename().string() << ": unreadable expected.json\n";
    return false;
  }
  AuditOptions opts = default_audit_options();
  if (fs::exists(dir / "config.json")) apply_config_file(opts, (dir / "config.json").string());

  std::ostringstream sink;
  const AuditReport report =
      audit_files((dir / "js_events.jsonl").string(), (dir / "requests.jsonl").string(),
                  (dir / "script_bodies.jsonl").string(), opts, sink);
  std::vector<std::string> problems;
  if (const auto e = report.diagnostics; e.js_record_errors + e.request_record_errors +
                                             e.script_body_record_errors > 0) {
    problems.push_back("fixture files contain malformed records");
  }
  if (expected.contains("exit_code") && expected["exit_code"].get<int>() != exit_status(report)) {
    problems.push_back("exit code " + std::to_string(exit_status(report)));
  }
  if (expected.contains("counts")) {
    for (const auto kind : kAllJoinKinds) {
      const auto name = std::string(to_string(kind));
      const auto want = expected["counts"].value(name, std::int64_t{0});
      if (report.count(kind) != want) {
        problems.push_back(name + " count " + std::to_string(report.count(kind)));
      }
    }
  }
  if (expected.contains("findings")) {
    json actual = json::array();
    for (const auto& f : report.findings) {
      actual.push_back({{"visit_id", f.visit_id},
                        {"label", f.label},
                        {"corroboration", to_string(f.corroboration)},
                        {"candidate_true_origins", f.candidate_true_origins}});
    }
    if (actual != expected["findings"]) problems.push_back("findings differ: " + actual.dump());
  }
  const auto name = dir.filename().string();
  if (problems.empty()) {
    out << "PASS " << name << "\n";
    return true;
  }
  out << "FAIL " << name << "\n";
  for (const auto& p : problems) err << "  " << name << ": " << p << "\n";
  return false;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Detects sourceURL-masked script origins in instrumented crawl logs",
               std::string(kToolName)};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CommonFlags audit_flags;
  std::string js_path, requests_path, scripts_path, out_path, format = "json";
  auto* audit = app.add_subcommand("audit", "Join script origins to requests and unmask labels");
  audit->add_option("--js", js_path, "js_events.jsonl")->required()->check(CLI::ExistingFile);
  audit->add_option("--requests", requests_path, "requests.jsonl")->required()->check(CLI::ExistingFile);
  audit->add_option("--scripts", scripts_path, "script_bodies.jsonl")->required()->check(CLI::ExistingFile);
  audit->add_option("--out", out_path, "Report path (stdout when omitted)");
  audit->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  add_common(*audit, audit_flags);

  std::string scan_path;
  auto* scan = app.add_subcommand("scan", "List sourceURL/sourceMappingURL pragmas per script body");
  scan->add_option("--scripts,scripts", scan_path, "script_bodies.jsonl")
      ->required()
      ->check(CLI::ExistingFile);

  CommonFlags classify_flags;
  std::string classify_js;
  auto* classify = app.add_subcommand("classify", "Run the fingerprinting heuristics only");
  classify->add_option("--js,js", classify_js, "js_events.jsonl")->required()->check(CLI::ExistingFile);
  add_common(*classify, classify_flags);

  auto* fixtures = app.add_subcommand("fixtures", "Bundled fixture utilities");
  fixtures->require_subcommand(1);
  std::vector<std::string> fixture_dirs;
  auto* verify = fixtures->add_subcommand("verify", "Check bundled fixtures against expected.json");
  verify->add_option("dirs", fixture_dirs, "Fixture directories (default: all bundled sets)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (audit->parsed()) {
      const auto opts = resolve_options(audit_flags, audit->count("--markers") > 0);
      const AuditReport report = audit_files(js_path, requests_path, scripts_path, opts, err);
      const std::string body = format == "csv" ? report_to_csv(report) : report_to_json(report);
      if (out_path.empty()) {
        out << body;
      } else {
        std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
        file << body;
        if (!file) throw Error(ErrorCode::kIoError, "cannot write " + out_path);
      }
      return exit_status(report);
    }
    if (scan->parsed()) {
      auto in = open_input(scan_path);
      const auto bodies = load_script_bodies(in);
      for (const auto& e : bodies.errors) err << scan_path << ":" << e.line_number << ": " << e.reason << "\n";
      write_scan(bodies.records, out);
      return kExitOk;
    }
    if (classify->parsed()) {
      const auto opts = resolve_options(classify_flags, classify->count("--markers") > 0);
      auto in = open_input(classify_js);
      const auto events = load_js_events(in);
      check_error_rate(events, classify_js, opts.max_malformed_ratio, err);
      write_verdicts(classify_scripts(events.records, opts.heuristics, opts.attribution), out);
      return kExitOk;
    }
    if (verify->parsed()) {
      std::vector<fs::path> dirs(fixture_dirs.begin(), fixture_dirs.end());
      if (dirs.empty()) {
        for (const auto& entry : fs::directory_iterator(PROVAUDIT_FIXTURE_DIR)) {
          if (entry.is_directory() && fs::exists(entry.path() / "expected.json")) {
            dirs.push_back(entry.path());
          }
        }
        std::sort(dirs.begin(), dirs.end());
      }
      if (dirs.empty()) throw Error(ErrorCode::kIoError, "no fixture directories found");
      bool ok = true;
      for (const auto& d : dirs) ok = verify_fixture(d, out, err) && ok;
      return ok ? kExitOk : kExitError;
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace provaudit::cli
