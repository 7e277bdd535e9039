#pragma once

#include <stdexcept>
#include <string>

namespace calderon {

enum class ErrorKind {
  parameter,  // invalid argument or configuration value
  domain,     // input field outside its admissible set (e.g. gamma <= 0)
  io,         // unreadable or malformed file
  numerical,  // solver failure, ill-conditioning, non-convergence
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error parameter_error(const std::string& what) { return {ErrorKind::parameter, what}; }
inline Error domain_error(const std::string& what) { return {ErrorKind::domain, what}; }
inline Error io_error(const std::string& what) { return {ErrorKind::io, what}; }
inline Error numerical_error(const std::string& what) { return {ErrorKind::numerical, what}; }

}  // namespace calderon
