#include "provaudit/error.hpp"

namespace provaudit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotAUrl:
      return "NOT_A_URL";
    case ErrorCode::kEmptyStack:
      return "EMPTY_STACK";
    case ErrorCode::kIoError:
      return "IO_ERROR";
    case ErrorCode::kConfigError:
      return "CONFIG_ERROR";
    case ErrorCode::kTooManyMalformed:
      return "TOO_MANY_MALFORMED";
  }
  return "UNKNOWN";
}

}  // namespace provaudit
