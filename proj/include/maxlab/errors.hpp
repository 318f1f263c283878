#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace maxlab {

// Base class for all domain errors.  Every error carries a stable name that
// the CLI reports verbatim, so callers can dispatch on it without parsing
// free-form text.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}

  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

#define MAXLAB_DEFINE_ERROR(NAME)                                   \
  class NAME : public Error {                                       \
   public:                                                          \
    explicit NAME(const std::string& what) : Error(#NAME, what) {}  \
  }

MAXLAB_DEFINE_ERROR(InputTooLarge);
MAXLAB_DEFINE_ERROR(BadIndex);
MAXLAB_DEFINE_ERROR(BadInput);
MAXLAB_DEFINE_ERROR(EmptyResult);
MAXLAB_DEFINE_ERROR(NotAProperty);
MAXLAB_DEFINE_ERROR(NotFiniteCharacter);
MAXLAB_DEFINE_ERROR(NoMaximalSubset);
MAXLAB_DEFINE_ERROR(BadSeed);
MAXLAB_DEFINE_ERROR(DegenerateMaximalFamily);
MAXLAB_DEFINE_ERROR(NotMaximal);
MAXLAB_DEFINE_ERROR(BadDenseOracle);
MAXLAB_DEFINE_ERROR(FiniteMaximalFamily);

#undef MAXLAB_DEFINE_ERROR

}  // namespace maxlab
