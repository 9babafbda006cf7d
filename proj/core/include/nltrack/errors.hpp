#pragma once

#include <stdexcept>
#include <string>

namespace nlt {

/// Base class of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A point or object lies behind (or on) the camera plane.
struct BehindCameraError : Error {
  using Error::Error;
};

/// A geometric construction has no unique answer (e.g. viewing from behind).
struct DegenerateError : Error {
  using Error::Error;
};

/// An argument is outside the domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

/// Malformed input text; the message carries file and line information.
struct ParseError : Error {
  using Error::Error;
};

/// Rendering produced no pixels.
struct EmptyRenderError : Error {
  using Error::Error;
};

/// A pixel lies outside the region of interest of a search-line field.
struct OutOfRoiError : Error {
  using Error::Error;
};

/// The Gauss-Newton normal equations could not be solved.
struct StepFailure : Error {
  using Error::Error;
};

}  // namespace nlt
