#include "geognn/error.hpp"

namespace geognn {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_mesh: return "invalid mesh";
    case ErrorKind::invalid_chain: return "invalid chain";
    case ErrorKind::incompatible_graphs: return "incompatible graphs";
    case ErrorKind::vocabulary: return "unknown cell type";
    case ErrorKind::degenerate_freestream: return "degenerate freestream";
    case ErrorKind::shape_mismatch: return "shape mismatch";
    case ErrorKind::config: return "bad config";
    case ErrorKind::not_fitted: return "normalizer not fitted";
    case ErrorKind::undefined_metric: return "undefined metric";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::version_mismatch: return "version mismatch";
    case ErrorKind::io: return "i/o error";
    case ErrorKind::non_finite_loss: return "non-finite loss";
    case ErrorKind::empty_input: return "empty input";
  }
  return "error";
}

} // namespace geognn
