#pragma once

#include <stdexcept>
#include <string>

namespace disclosure {

// Malformed or missing input data. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failures coming from a language-model scorer. The CLI maps this to exit code 2.
class ScorerError : public std::runtime_error {
 public:
  enum class Kind {
    Transport,          // connection refused, timeout, truncated reply
    CapabilityMissing,  // handle does not advertise the requested operation
    Backend,            // backend returned a structured error payload
    CacheMiss,          // content-addressed store has no record
    EmptyInput,
    Config,             // bad scorer configuration or incompatible scorers
  };

  ScorerError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

inline const char* to_string(ScorerError::Kind kind) {
  switch (kind) {
    case ScorerError::Kind::Transport: return "TRANSPORT";
    case ScorerError::Kind::CapabilityMissing: return "CAPABILITY_MISSING";
    case ScorerError::Kind::Backend: return "BACKEND";
    case ScorerError::Kind::CacheMiss: return "MISS";
    case ScorerError::Kind::EmptyInput: return "EMPTY_INPUT";
    case ScorerError::Kind::Config: return "CONFIG";
  }
  return "UNKNOWN";
}

}  // namespace disclosure
