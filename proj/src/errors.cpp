#include "gemesh/errors.hpp"

namespace gemesh {

const char* err_name(Err e) {
  switch (e) {
    case Err::ParseError: return "ParseError";
    case Err::NonManifold: return "NonManifold";
    case Err::NonTriangular: return "NonTriangular";
    case Err::NonOrientable: return "NonOrientable";
    case Err::IsolatedVertex: return "IsolatedVertex";
    case Err::DegenerateFace: return "DegenerateFace";
    case Err::ZeroNormal: return "ZeroNormal";
    case Err::ZeroLog: return "ZeroLog";
    case Err::AntipodalNormals: return "AntipodalNormals";
    case Err::NotANeighbor: return "NotANeighbor";
    case Err::DimensionMismatch: return "DimensionMismatch";
    case Err::NotRegularDecomposable: return "NotRegularDecomposable";
    case Err::Undersampled: return "Undersampled";
    case Err::ShapeMismatch: return "ShapeMismatch";
    case Err::IndexOutOfRange: return "IndexOutOfRange";
    case Err::ResidualTypeMismatch: return "ResidualTypeMismatch";
    case Err::UnknownFlavor: return "UnknownFlavor";
    case Err::BadArchitecture: return "BadArchitecture";
    case Err::Diverged: return "Diverged";
    case Err::CGNoConvergence: return "CGNoConvergence";
    case Err::WindowTooShort: return "WindowTooShort";
    case Err::NonFiniteLoss: return "NonFiniteLoss";
    case Err::NonFinitePrediction: return "NonFinitePrediction";
    case Err::BadConfig: return "BadConfig";
    case Err::BadCheckpoint: return "BadCheckpoint";
    case Err::IoError: return "IoError";
  }
  return "Error";
}

void fail(Err code, const std::string& msg) { throw Error(code, msg); }

}  // namespace gemesh
