#pragma once

#include <stdexcept>
#include <string>

namespace gedecomp {

/// Parameter outside the admissible domain of a distribution family or
/// an input outside the domain of an inequality measure.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// E[X^theta] does not exist. Carries the open admissible interval.
class MomentError : public std::domain_error {
 public:
  MomentError(double theta, double lower, double upper);

  double theta() const noexcept { return theta_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

 private:
  double theta_;
  double lower_;
  double upper_;
};

/// Theil index of a GB2/SM law requires q > 1/a.
class TheilExistenceError : public MomentError {
 public:
  TheilExistenceError(double a, double q);
};

/// Malformed grouped sample, McmcConfig, hierarchy or benchmark problem.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fewer free cells than parameters.
class IdentificationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Benchmark problem with q = sum w^2/phi equal to zero, or raking with a
/// nonpositive Bayes estimate.
class BenchmarkError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Error raised while processing one node of a hierarchy; keeps the node id
/// and (when known) the file that node was read from.
class NodeError : public std::runtime_error {
 public:
  NodeError(std::string node, std::string file, const std::string& what);

  const std::string& node() const noexcept { return node_; }
  const std::string& file() const noexcept { return file_; }

 private:
  std::string node_;
  std::string file_;
};

/// File-format error. `path` names the offending file.
class IoError : public std::runtime_error {
 public:
  IoError(std::string path, const std::string& what);

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace gedecomp
