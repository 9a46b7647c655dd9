#pragma once

#include <stdexcept>
#include <string>

namespace aadt {

// Base for every error raised by the toolkit. The CLI maps the three
// subclasses onto exit codes 1 (usage), 2 (data) and 3 (numerical).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace aadt
