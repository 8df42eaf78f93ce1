#pragma once

#include <stdexcept>
#include <string>

namespace fracpath {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// mesh / FEM
class InvalidMesh : public Error { public: using Error::Error; };
class UnsupportedNorm : public Error { public: using Error::Error; };

// linear algebra kernels
class SingularMatrix : public Error { public: using Error::Error; };
class EigFailure : public Error { public: using Error::Error; };
class DegenerateKernel : public Error { public: using Error::Error; };

// fractional operator
class InvalidFraction : public Error { public: using Error::Error; };

// models
class WrongBc : public Error { public: using Error::Error; };
class InvalidParameter : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };

// continuation
class StartNotConverged : public Error { public: using Error::Error; };
class SingularJacobian : public Error { public: using Error::Error; };
class SwitchFailed : public Error { public: using Error::Error; };

// runner / io
class ParseError : public Error { public: using Error::Error; };
class ValidationError : public Error { public: using Error::Error; };
class EmptyBranch : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };

}  // namespace fracpath
