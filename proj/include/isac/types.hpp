#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace isac {

using cd = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace isac
