#include "dcrec/kernels.hpp"

#include "dcrec/error.hpp"

namespace dcrec::kernels {

namespace {

constexpr std::size_t kParallelWork = 1u << 14;

void check_inner(const Matrix& a, std::size_t a_dim, const Matrix& b, std::size_t b_dim) {
  (void)a;
  (void)b;
  if (a_dim != b_dim) throw ShapeError("matmul: inner dimensions differ");
}

// One output row of A*B; shared by both variants so the reduction order is
// identical.
inline void matmul_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  auto out = c.row(i);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double aik = a(i, k);
    if (aik == 0.0) continue;
    auto brow = b.row(k);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += aik * brow[j];
  }
}

inline void matmul_tn_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  auto out = c.row(i);
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double aki = a(k, i);
    if (aki == 0.0) continue;
    auto brow = b.row(k);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += aki * brow[j];
  }
}

inline void matmul_nt_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  auto arow = a.row(i);
  for (std::size_t j = 0; j < b.rows(); ++j) {
    auto brow = b.row(j);
    double s = 0.0;
    for (std::size_t k = 0; k < arow.size(); ++k) s += arow[k] * brow[k];
    c(i, j) = s;
  }
}

inline void conv_row(const Matrix& in, const Matrix& k, std::span<const double> bias,
                     std::size_t width, std::size_t offset, Matrix& out, std::size_t t) {
  const std::size_t channels = in.cols();
  for (std::size_t f = 0; f < k.rows(); ++f) {
    double s = bias[f];
    auto kf = k.row(f);
    for (std::size_t j = 0; j < width; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + j) -
                                 static_cast<std::ptrdiff_t>(offset);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(in.rows())) continue;
      auto x = in.row(static_cast<std::size_t>(src));
      const double* kw = kf.data() + j * channels;
      for (std::size_t c = 0; c < channels; ++c) s += kw[c] * x[c];
    }
    out(t, f) = s;
  }
}

inline void conv_param_row(const Matrix& in, const Matrix& g, std::size_t width,
                           std::size_t offset, Matrix& gk, std::span<double> gb,
                           std::size_t f) {
  const std::size_t channels = in.cols();
  auto gkf = gk.row(f);
  for (std::size_t t = 0; t < g.rows(); ++t) {
    const double gtf = g(t, f);
    if (gtf == 0.0) continue;
    gb[f] += gtf;
    for (std::size_t j = 0; j < width; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + j) -
                                 static_cast<std::ptrdiff_t>(offset);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(in.rows())) continue;
      auto x = in.row(static_cast<std::size_t>(src));
      double* kw = gkf.data() + j * channels;
      for (std::size_t c = 0; c < channels; ++c) kw[c] += gtf * x[c];
    }
  }
}

inline void conv_input_row(const Matrix& k, const Matrix& g, std::size_t width,
                           std::size_t offset, Matrix& gi, std::size_t s) {
  const std::size_t channels = gi.cols();
  auto out = gi.row(s);
  for (std::size_t j = 0; j < width; ++j) {
    // s = t + j - offset  =>  t = s + offset - j
    const std::ptrdiff_t t = static_cast<std::ptrdiff_t>(s + offset) -
                             static_cast<std::ptrdiff_t>(j);
    if (t < 0 || t >= static_cast<std::ptrdiff_t>(g.rows())) continue;
    auto gt = g.row(static_cast<std::size_t>(t));
    for (std::size_t f = 0; f < k.rows(); ++f) {
      const double gtf = gt[f];
      if (gtf == 0.0) continue;
      const double* kw = k.row(f).data() + j * channels;
      for (std::size_t c = 0; c < channels; ++c) out[c] += gtf * kw[c];
    }
  }
}

inline void dist_row(const Matrix& p, Matrix& d, std::size_t i) {
  auto xi = p.row(i);
  for (std::size_t j = 0; j < p.rows(); ++j) {
    auto xj = p.row(j);
    double s = 0.0;
    for (std::size_t c = 0; c < xi.size(); ++c) {
      const double diff = xi[c] - xj[c];
      s += diff * diff;
    }
    d(i, j) = s;
  }
}

void check_conv(const Matrix& in, const Matrix& k, std::size_t width) {
  if (width == 0 || k.cols() != width * in.cols())
    throw ShapeError("conv1d: kernel shape does not match width x channels");
}

}  // namespace

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_inner(a, a.cols(), b, b.rows());
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) matmul_row(a, b, c, i);
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  check_inner(a, a.rows(), b, b.rows());
  Matrix c(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) matmul_tn_row(a, b, c, i);
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  check_inner(a, a.cols(), b, b.cols());
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) matmul_nt_row(a, b, c, i);
  return c;
}

Matrix conv1d(const Matrix& input, const Matrix& kernels, std::span<const double> bias,
              std::size_t width, std::size_t offset, std::size_t out_len) {
  check_conv(input, kernels, width);
  Matrix out(out_len, kernels.rows());
  for (std::size_t t = 0; t < out_len; ++t) conv_row(input, kernels, bias, width, offset, out, t);
  return out;
}

void conv1d_backward_params(const Matrix& input, const Matrix& grad_out, std::size_t width,
                            std::size_t offset, Matrix& grad_kernels,
                            std::span<double> grad_bias) {
  for (std::size_t f = 0; f < grad_out.cols(); ++f)
    conv_param_row(input, grad_out, width, offset, grad_kernels, grad_bias, f);
}

void conv1d_backward_input(const Matrix& kernels, const Matrix& grad_out, std::size_t width,
                           std::size_t offset, Matrix& grad_input) {
  for (std::size_t s = 0; s < grad_input.rows(); ++s)
    conv_input_row(kernels, grad_out, width, offset, grad_input, s);
}

Matrix pairwise_sq_dist(const Matrix& points) {
  Matrix d(points.rows(), points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) dist_row(points, d, i);
  return d;
}

}  // namespace serial

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_inner(a, a.cols(), b, b.rows());
  Matrix c(a.rows(), b.cols());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
  const bool par = a.rows() * a.cols() * b.cols() >= kParallelWork;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < n; ++i) matmul_row(a, b, c, static_cast<std::size_t>(i));
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  check_inner(a, a.rows(), b, b.rows());
  Matrix c(a.cols(), b.cols());
  const auto n = static_cast<std::ptrdiff_t>(a.cols());
  const bool par = a.rows() * a.cols() * b.cols() >= kParallelWork;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < n; ++i) matmul_tn_row(a, b, c, static_cast<std::size_t>(i));
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  check_inner(a, a.cols(), b, b.cols());
  Matrix c(a.rows(), b.rows());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
  const bool par = a.rows() * a.cols() * b.rows() >= kParallelWork;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < n; ++i) matmul_nt_row(a, b, c, static_cast<std::size_t>(i));
  return c;
}

Matrix conv1d(const Matrix& input, const Matrix& kernels, std::span<const double> bias,
              std::size_t width, std::size_t offset, std::size_t out_len) {
  check_conv(input, kernels, width);
  Matrix out(out_len, kernels.rows());
  const auto n = static_cast<std::ptrdiff_t>(out_len);
  const bool par = out_len * kernels.size() >= kParallelWork;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t t = 0; t < n; ++t)
    conv_row(input, kernels, bias, width, offset, out, static_cast<std::size_t>(t));
  return out;
}

void conv1d_backward_params(const Matrix& input, const Matrix& grad_out, std::size_t width,
                            std::size_t offset, Matrix& grad_kernels,
                            std::span<double> grad_bias) {
  const auto n = static_cast<std::ptrdiff_t>(grad_out.cols());
  const bool par = grad_out.rows() * grad_kernels.size() >= kParallelWork;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t f = 0; f < n; ++f)
    conv_param_row(input, grad_out, width, offset, grad_kernels, grad_bias,
                   static_cast<std::size_t>(f));
}

void conv1d_backward_input(const Matrix& kernels, const Matrix& grad_out, std::size_t width,
                           std::size_t offset, Matrix& grad_input) {
  const auto n = static_cast<std::ptrdiff_t>(grad_input.rows());
  const bool par = grad_out.rows() * kernels.size() >= kParallelWork;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t s = 0; s < n; ++s)
    conv_input_row(kernels, grad_out, width, offset, grad_input, static_cast<std::size_t>(s));
}

Matrix pairwise_sq_dist(const Matrix& points) {
  Matrix d(points.rows(), points.rows());
  const auto n = static_cast<std::ptrdiff_t>(points.rows());
  const bool par = points.rows() * points.size() >= kParallelWork;
#pragma omp parallel for schedule(dynamic, 8) if (par)
  for (std::ptrdiff_t i = 0; i < n; ++i) dist_row(points, d, static_cast<std::size_t>(i));
  return d;
}

}  // namespace dcrec::kernels
