#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace graph_forest {

using NodeId = std::uint32_t;

/// Dense row-major matrix; rows are nodes, columns are feature or class dims.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kNoLabel = -1;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition on a caller-supplied value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A sampled subspace whose training nodes cover fewer than two classes.
class DegenerateSubspace : public Error {
 public:
  DegenerateSubspace(std::size_t model_index, const std::string& what)
      : Error("model " + std::to_string(model_index) + ": " + what), model_index_(model_index) {}
  std::size_t model_index() const noexcept { return model_index_; }

 private:
  std::size_t model_index_;
};

}  // namespace graph_forest
