#pragma once

#include <stdexcept>
#include <string>

namespace netcollapse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define NETCOLLAPSE_ERROR(Name)            \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

NETCOLLAPSE_ERROR(InvalidSpec);
NETCOLLAPSE_ERROR(ZeroTotalWeight);
NETCOLLAPSE_ERROR(MalformedFile);
NETCOLLAPSE_ERROR(EmptyNetwork);
NETCOLLAPSE_ERROR(SizeCapExceeded);
NETCOLLAPSE_ERROR(NonFiniteState);
NETCOLLAPSE_ERROR(SingularMatrix);
NETCOLLAPSE_ERROR(NonFiniteSample);
NETCOLLAPSE_ERROR(DegeneratePolynomial);
NETCOLLAPSE_ERROR(NoManifoldSolution);
NETCOLLAPSE_ERROR(ZeroDenominator);
NETCOLLAPSE_ERROR(IoError);

#undef NETCOLLAPSE_ERROR

}  // namespace netcollapse
