#pragma once

// Data-parallel inner loops shared by the network, SMOTE, SVD and ALS.
//
// Each kernel exists twice: `serial::` is the straightforward reference kept
// for testing, and the unqualified version in `kernels::` is the OpenMP one
// used by the library. Both produce bitwise-identical results: the parallel
// versions split only over independent output rows and keep each row's
// reduction order the same as the serial loop.

#include <span>

#include "dcrec/matrix.hpp"

namespace dcrec::kernels {

/// C = A * B.
Matrix matmul(const Matrix& a, const Matrix& b);
/// C = A^T * B.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// C = A * B^T.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// 1-D convolution over the rows of `input` (L x C), kernels laid out as
/// F x (width * C) with row-major (tap, channel) order. `offset` is the
/// number of zero rows virtually prepended (0 = valid, (w-1)/2 = same).
/// Returns pre-activation outputs, out_len x F.
Matrix conv1d(const Matrix& input, const Matrix& kernels, std::span<const double> bias,
              std::size_t width, std::size_t offset, std::size_t out_len);

/// Gradient of conv1d w.r.t. kernels and bias, accumulated into the outputs.
void conv1d_backward_params(const Matrix& input, const Matrix& grad_out, std::size_t width,
                            std::size_t offset, Matrix& grad_kernels,
                            std::span<double> grad_bias);

/// Gradient of conv1d w.r.t. its input, accumulated into grad_input (L x C).
void conv1d_backward_input(const Matrix& kernels, const Matrix& grad_out, std::size_t width,
                           std::size_t offset, Matrix& grad_input);

/// D(i, j) = squared Euclidean distance between rows i and j of `points`.
Matrix pairwise_sq_dist(const Matrix& points);

namespace serial {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix conv1d(const Matrix& input, const Matrix& kernels, std::span<const double> bias,
              std::size_t width, std::size_t offset, std::size_t out_len);
void conv1d_backward_params(const Matrix& input, const Matrix& grad_out, std::size_t width,
                            std::size_t offset, Matrix& grad_kernels,
                            std::span<double> grad_bias);
void conv1d_backward_input(const Matrix& kernels, const Matrix& grad_out, std::size_t width,
                           std::size_t offset, Matrix& grad_input);
Matrix pairwise_sq_dist(const Matrix& points);
}  // namespace serial

}  // namespace dcrec::kernels
