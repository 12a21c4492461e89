#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tbtele {

enum class ErrorKind {
  ZeroState,
  ModeCollision,
  CutoffExceeded,
  UncoveredMode,
  NonUnitary,
  EmptyKeepSet,
  BasisMismatch,
  DomainError,
  DegenerateFit,
  ConfigError,
  ParseError,
  UnknownKey,
  TypeMismatch,
};

std::string_view error_kind_name(ErrorKind kind);

// Every module error carries a kind so the CLI can map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tbtele
