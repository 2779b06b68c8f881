#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace videogem {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using MatrixXf = Matrix<float>;

using Index = Eigen::Index;

/// Added to row norms before dividing so zero rows stay finite.
inline constexpr double kNormEpsilon = 1e-8;

// Error taxonomy. The CLI maps ConfigError to exit code 1 and every other
// videogem::Error to exit code 2.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input rejected by a precondition check (bad shapes, bad ranges).
struct InvalidInput : Error {
  using Error::Error;
};

struct CorruptFixture : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

/// Malformed data file. `line` is 1-based, 0 when unknown.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line_no)
      : Error(line_no ? "line " + std::to_string(line_no) + ": " + what : what), line(line_no) {}
  std::size_t line;
};

/// Invalid run configuration; `field` names the offending key.
struct ConfigError : Error {
  ConfigError(const std::string& field_name, const std::string& what)
      : Error("config field '" + field_name + "': " + what), field(field_name) {}
  std::string field;
};

}  // namespace videogem
