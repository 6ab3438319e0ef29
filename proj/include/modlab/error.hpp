#pragma once

#include <stdexcept>
#include <string>

namespace modlab {

// Base class for every error raised by the library. The CLI maps
// ConfigError to exit code 2 and everything else to 1.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class EllipticElement : public Error {
  public:
    using Error::Error;
};

class GrowthOverflow : public Error {
  public:
    using Error::Error;
};

class NotReduced : public Error {
  public:
    using Error::Error;
};

class ZeroNorm : public Error {
  public:
    using Error::Error;
};

class ChartOverflow : public Error {
  public:
    using Error::Error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw PreconditionError(what);
}

} // namespace modlab
