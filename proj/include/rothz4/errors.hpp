#pragma once

#include <stdexcept>
#include <string>

namespace rothz4 {

// Bad input, violated precondition, cap exceeded, malformed file. CLI exit code 1.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An inequality that a proof step guarantees did not hold on an exact computation.
// Reserved for "the proof is wrong or the artifact is"; CLI exit code 2.
class FalsificationError : public std::runtime_error {
 public:
  FalsificationError(const std::string& what, std::string dump)
      : std::runtime_error(what), dump_(std::move(dump)) {}
  explicit FalsificationError(const std::string& what) : std::runtime_error(what) {}

  const std::string& dump() const noexcept { return dump_; }

 private:
  std::string dump_;
};

}  // namespace rothz4
