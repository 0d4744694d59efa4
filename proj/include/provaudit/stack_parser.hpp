#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "provaudit/script_location.hpp"

namespace provaudit {

/// Error-stack text conventions. Gecko renders `func@location:line:col`;
/// V8 renders `    at func (location:line:col)` below an `Error: ...` header.
enum class StackDialect { kGecko, kV8, kAuto };

std::string_view to_string(StackDialect dialect);
std::optional<StackDialect> parse_dialect(std::string_view name);

struct StackFrame {
  std::string func_name;
  std::string location_raw;  // outermost concrete location, as written
  ScriptLocation location = ScriptLocation::inline_origin();
  std::optional<std::uint32_t> line;
  std::optional<std::uint32_t> column;
  std::uint32_t eval_depth = 0;
  std::string raw_line;

  friend bool operator==(const StackFrame&, const StackFrame&) = default;
};

struct StackDiagnostic {
  enum class Kind {
    kUnrecognized,   // kept as an OPAQUE_LABEL frame as well
    kHeaderSkipped,  // V8 `Error: message` line, no frame
  };
  Kind kind;
  std::size_t line_number;  // 1-based
  std::string text;
};

struct ParsedStack {
  StackDialect dialect = StackDialect::kGecko;  // never kAuto
  std::vector<StackFrame> frames;                // call site first
  std::vector<StackDiagnostic> diagnostics;
};

// Picks V8 if any line starts with `at ` after indentation, Gecko otherwise.
StackDialect detect_dialect(std::string_view raw);

/// Parses a captured stack. Total: malformed lines degrade to OPAQUE_LABEL
/// frames and a diagnostic, whitespace-only lines are dropped.
ParsedStack parse_stack(std::string_view raw, StackDialect dialect = StackDialect::kAuto,
                        const InternalTagSet& internal_tags = {});

struct CallContext {
  ScriptLocation script_location;
  std::string func_name;
  std::vector<StackFrame> full_stack;
  std::size_t frames_skipped = 0;
};

/// Attributes an instrumented call to the frame nearest the call site that is
/// not part of the instrumentation itself. A frame belongs to the
/// instrumentation when its location_raw contains any marker as a substring.
/// If every frame matches, the last frame is used.
///
/// Throws Error(kEmptyStack) on an empty frame list.
CallContext derive_call_context(std::span<const StackFrame> frames,
                                std::span<const std::string> instrumentation_markers);

}  // namespace provaudit
