#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace beqh {

enum class ErrorCode {
  NoDeclarationFound,
  ToolchainMissing,
  StartupTimeout,
  CommandTimeout,
  SessionDead,
  ProtocolError,
  ContextClash,
  EmptyPool,
  LengthMismatch,
  EmptyInput,
  DomainError,
  MissingVerdicts,
  SchemaError,
  EndpointError,
  OfflineMode,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoDeclarationFound: return "NoDeclarationFound";
    case ErrorCode::ToolchainMissing: return "ToolchainMissing";
    case ErrorCode::StartupTimeout: return "StartupTimeout";
    case ErrorCode::CommandTimeout: return "CommandTimeout";
    case ErrorCode::SessionDead: return "SessionDead";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::ContextClash: return "ContextClash";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::MissingVerdicts: return "MissingVerdicts";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::EndpointError: return "EndpointError";
    case ErrorCode::OfflineMode: return "OfflineMode";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace beqh
