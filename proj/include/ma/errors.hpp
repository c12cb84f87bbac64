#pragma once

#include <stdexcept>
#include <string>

namespace ma {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// geometry
struct NonPositiveA : Error { using Error::Error; };
struct LambdaOutOfRange : Error { using Error::Error; };

// fields
struct ExteriorNode : Error { using Error::Error; };
struct OutsideDomain : Error { using Error::Error; };

// nonlinearity
struct NonFiniteResult : Error { using Error::Error; };

// solver
struct DidNotConverge : Error {
  DidNotConverge(int iters, double last_residual)
      : Error("Newton did not converge after " + std::to_string(iters) +
              " iterations (last residual " + std::to_string(last_residual) + ")"),
        iterations(iters),
        residual(last_residual) {}
  int iterations;
  double residual;
};
struct ConvexityLost : Error { using Error::Error; };
struct UnknownCase : Error { using Error::Error; };
struct SolveError : Error { using Error::Error; };

// moving planes / barrier
struct DomainError : Error { using Error::Error; };
struct NoEpsilonFound : Error { using Error::Error; };

// cli
struct ConfigError : Error { using Error::Error; };
struct IOError : Error { using Error::Error; };

}  // namespace ma
