#pragma once

#include <stdexcept>
#include <string>

namespace gemesh {

// Failure categories. The CLI maps these to machine-readable JSON on stderr;
// library callers catch gemesh::Error and branch on code().
enum class Err {
  // mesh loading / validation
  ParseError,
  NonManifold,
  NonTriangular,
  NonOrientable,
  IsolatedVertex,
  DegenerateFace,
  // tangent geometry
  ZeroNormal,
  ZeroLog,
  AntipodalNormals,
  NotANeighbor,
  // feature types and sampling
  DimensionMismatch,
  NotRegularDecomposable,
  Undersampled,
  // tape
  ShapeMismatch,
  IndexOutOfRange,
  // model assembly
  ResidualTypeMismatch,
  UnknownFlavor,
  BadArchitecture,
  // simulation
  Diverged,
  CGNoConvergence,
  // harness
  WindowTooShort,
  NonFiniteLoss,
  NonFinitePrediction,
  // io / config
  BadConfig,
  BadCheckpoint,
  IoError,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& msg)
      : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] void fail(Err code, const std::string& msg);

inline void check(bool ok, Err code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

}  // namespace gemesh
