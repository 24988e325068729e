#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kmd
{

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Thrown when an input violates an operation's precondition (shape, range,
/// malformed file contents).
class InputError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical step cannot produce a result at all.
class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

using Warnings = std::vector<std::string>;

} // namespace kmd
