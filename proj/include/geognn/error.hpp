#pragma once

#include <stdexcept>
#include <string>

namespace geognn {

/// Failure classes surfaced by the library. The CLI maps each to a
/// one-line diagnostic and a nonzero exit code.
enum class ErrorKind {
  invalid_mesh,
  invalid_chain,
  incompatible_graphs,
  vocabulary,
  degenerate_freestream,
  shape_mismatch,
  config,
  not_fitted,
  undefined_metric,
  parse,
  version_mismatch,
  io,
  non_finite_loss,
  empty_input,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace geognn
