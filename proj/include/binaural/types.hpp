// types.hpp
// Shared scalar/vector/matrix aliases and small enums used across the library.

#ifndef BINAURAL_TYPES_HPP
#define BINAURAL_TYPES_HPP

#include <complex>
#include <string>

#include <Eigen/Dense>

namespace binaural {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;  // multichannel signals: channels x samples
using Index = Eigen::Index;

inline constexpr double kSpeedOfSound = 343.0;  // m/s

enum class Side { Left, Right };

enum class Algorithm { Bmvdr, Blcmv, BmvdrN, BlcmvN };

const char* to_string(Algorithm algo);
Algorithm algorithm_from_string(const std::string& name);

}  // namespace binaural

#endif
