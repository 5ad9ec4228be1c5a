#ifndef WORMHOLE_TYPES_HPP_
#define WORMHOLE_TYPES_HPP_

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace wormhole {

using Complex = std::complex<double>;
using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXc = Matrix<Complex>;
using VectorXc = Vector<Complex>;
using MatrixXr = Matrix<double>;
using VectorXr = Vector<double>;

// Row-major view type used when a doubled-space vector of length d_s^2 is
// reshaped into a d_s x d_s matrix with the left index running slower.
using RowMajorMatrixXc =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Largest qubit count for which dense operator storage is permitted.
inline constexpr int kMaxDenseQubits = 14;

}  // namespace wormhole

#endif  // WORMHOLE_TYPES_HPP_
