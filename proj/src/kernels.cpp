#include "debias/kernels.hpp"

#include <algorithm>

namespace debias::kernels {

int conv_out_extent(int in_extent, int ksize, int stride, int pad) {
  return (in_extent + 2 * pad - ksize) / stride + 1;
}

namespace {

// Shared per-output-row bodies. Both backends call these, so the
// accumulation order of every output element is identical by construction.

inline void conv_fwd_row(const double* in, const double* w, const double* bias,
                         double* out, const ConvDims& d, int n, int oc, int oh) {
  const int K = d.ksize;
  double* orow = out + ((static_cast<size_t>(n) * d.out_c + oc) * d.out_h + oh) * d.out_w;
  for (int ow = 0; ow < d.out_w; ++ow) orow[ow] = bias[oc];
  for (int ic = 0; ic < d.in_c; ++ic) {
    for (int kh = 0; kh < K; ++kh) {
      const int ih = oh * d.stride - d.pad + kh;
      if (ih < 0 || ih >= d.in_h) continue;
      const double* irow =
          in + ((static_cast<size_t>(n) * d.in_c + ic) * d.in_h + ih) * d.in_w;
      const double* wrow = w + ((static_cast<size_t>(oc) * d.in_c + ic) * K + kh) * K;
      for (int kw = 0; kw < K; ++kw) {
        const double wv = wrow[kw];
        // valid ow range so that 0 <= ow*stride - pad + kw < in_w
        int lo = 0;
        while (lo * d.stride - d.pad + kw < 0) ++lo;
        int hi = d.out_w;
        while (hi > lo && (hi - 1) * d.stride - d.pad + kw >= d.in_w) --hi;
        const double* ibase = irow - d.pad + kw;
        for (int ow = lo; ow < hi; ++ow) {
          orow[ow] += wv * ibase[ow * d.stride];
        }
      }
    }
  }
}

// Scatter form over one (n, ic) input plane. A single caller owns the
// whole plane, so in-plane accumulation keeps a fixed order and stays
// deterministic under any parallel split across planes.
inline void conv_bwd_data_plane(const double* gout, const double* w, double* gin,
                                const ConvDims& d, int n, int ic) {
  const int K = d.ksize;
  double* plane = gin + (static_cast<size_t>(n) * d.in_c + ic) * d.in_h * d.in_w;
  std::fill(plane, plane + static_cast<size_t>(d.in_h) * d.in_w, 0.0);
  for (int oc = 0; oc < d.out_c; ++oc) {
    const double* gbase =
        gout + (static_cast<size_t>(n) * d.out_c + oc) * d.out_h * d.out_w;
    const double* wbase = w + (static_cast<size_t>(oc) * d.in_c + ic) * K * K;
    for (int kh = 0; kh < K; ++kh) {
      for (int kw = 0; kw < K; ++kw) {
        const double wv = wbase[kh * K + kw];
        for (int oh = 0; oh < d.out_h; ++oh) {
          const int ih = oh * d.stride - d.pad + kh;
          if (ih < 0 || ih >= d.in_h) continue;
          const double* grow = gbase + static_cast<size_t>(oh) * d.out_w;
          double* irow = plane + static_cast<size_t>(ih) * d.in_w - d.pad + kw;
          int lo = 0;
          while (lo * d.stride - d.pad + kw < 0) ++lo;
          int hi = d.out_w;
          while (hi > lo && (hi - 1) * d.stride - d.pad + kw >= d.in_w) --hi;
          for (int ow = lo; ow < hi; ++ow) {
            irow[ow * d.stride] += wv * grow[ow];
          }
        }
      }
    }
  }
}

inline void conv_bwd_filter_oc(const double* gout, const double* in, double* gw,
                               double* gb, const ConvDims& d, int oc) {
  const int K = d.ksize;
  double acc_b = 0.0;
  for (int n = 0; n < d.batch; ++n) {
    const double* gbase =
        gout + (static_cast<size_t>(n) * d.out_c + oc) * d.out_h * d.out_w;
    for (int i = 0; i < d.out_h * d.out_w; ++i) acc_b += gbase[i];
  }
  gb[oc] = acc_b;
  for (int ic = 0; ic < d.in_c; ++ic) {
    for (int kh = 0; kh < K; ++kh) {
      for (int kw = 0; kw < K; ++kw) {
        double acc = 0.0;
        for (int n = 0; n < d.batch; ++n) {
          const double* gbase =
              gout + (static_cast<size_t>(n) * d.out_c + oc) * d.out_h * d.out_w;
          const double* ibase =
              in + (static_cast<size_t>(n) * d.in_c + ic) * d.in_h * d.in_w;
          for (int oh = 0; oh < d.out_h; ++oh) {
            const int ih = oh * d.stride - d.pad + kh;
            if (ih < 0 || ih >= d.in_h) continue;
            const double* grow = gbase + static_cast<size_t>(oh) * d.out_w;
            const double* irow = ibase + static_cast<size_t>(ih) * d.in_w - d.pad + kw;
            int lo = 0;
            while (lo * d.stride - d.pad + kw < 0) ++lo;
            int hi = d.out_w;
            while (hi > lo && (hi - 1) * d.stride - d.pad + kw >= d.in_w) --hi;
            for (int ow = lo; ow < hi; ++ow) {
              acc += grow[ow] * irow[ow * d.stride];
            }
          }
        }
        gw[((static_cast<size_t>(oc) * d.in_c + ic) * K + kh) * K + kw] = acc;
      }
    }
  }
}

inline void linear_fwd_row(const double* in, const double* w, const double* bias,
                           double* out, int in_dim, int out_dim, int n) {
  const double* irow = in + static_cast<size_t>(n) * in_dim;
  double* orow = out + static_cast<size_t>(n) * out_dim;
  for (int j = 0; j < out_dim; ++j) orow[j] = bias[j];
  for (int k = 0; k < in_dim; ++k) {
    const double iv = irow[k];
    const double* wrow = w + static_cast<size_t>(k) * out_dim;
    for (int j = 0; j < out_dim; ++j) orow[j] += iv * wrow[j];
  }
}

inline void linear_bwd_data_row(const double* gout, const double* w, double* gin,
                                int in_dim, int out_dim, int n) {
  const double* grow = gout + static_cast<size_t>(n) * out_dim;
  double* girow = gin + static_cast<size_t>(n) * in_dim;
  for (int k = 0; k < in_dim; ++k) {
    double acc = 0.0;
    const double* wrow = w + static_cast<size_t>(k) * out_dim;
    for (int j = 0; j < out_dim; ++j) acc += grow[j] * wrow[j];
    girow[k] = acc;
  }
}

inline void linear_bwd_filter_k(const double* gout, const double* in, double* gw,
                                int batch, int in_dim, int out_dim, int k) {
  double* gwrow = gw + static_cast<size_t>(k) * out_dim;
  std::fill(gwrow, gwrow + out_dim, 0.0);
  for (int n = 0; n < batch; ++n) {
    const double iv = in[static_cast<size_t>(n) * in_dim + k];
    const double* grow = gout + static_cast<size_t>(n) * out_dim;
    for (int j = 0; j < out_dim; ++j) gwrow[j] += iv * grow[j];
  }
}

}  // namespace

namespace serial {

void conv2d_forward(const double* in, const double* w, const double* bias,
                    double* out, const ConvDims& d) {
  for (int n = 0; n < d.batch; ++n)
    for (int oc = 0; oc < d.out_c; ++oc)
      for (int oh = 0; oh < d.out_h; ++oh) conv_fwd_row(in, w, bias, out, d, n, oc, oh);
}

void conv2d_backward_data(const double* gout, const double* w, double* gin,
                          const ConvDims& d) {
  for (int n = 0; n < d.batch; ++n)
    for (int ic = 0; ic < d.in_c; ++ic) conv_bwd_data_plane(gout, w, gin, d, n, ic);
}

void conv2d_backward_filter(const double* gout, const double* in, double* gw,
                            double* gb, const ConvDims& d) {
  for (int oc = 0; oc < d.out_c; ++oc) conv_bwd_filter_oc(gout, in, gw, gb, d, oc);
}

void relu_forward(const double* in, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward(const double* gout, const double* in, double* gin, size_t n) {
  for (size_t i = 0; i < n; ++i) gin[i] = in[i] > 0.0 ? gout[i] : 0.0;
}

void global_avg_pool_forward(const double* in, double* out, int batch, int c, int hw) {
  for (int n = 0; n < batch; ++n) {
    for (int ch = 0; ch < c; ++ch) {
      const double* base = in + (static_cast<size_t>(n) * c + ch) * hw;
      double acc = 0.0;
      for (int i = 0; i < hw; ++i) acc += base[i];
      out[static_cast<size_t>(n) * c + ch] = acc / hw;
    }
  }
}

void global_avg_pool_backward(const double* gout, double* gin, int batch, int c, int hw) {
  for (int n = 0; n < batch; ++n) {
    for (int ch = 0; ch < c; ++ch) {
      const double g = gout[static_cast<size_t>(n) * c + ch] / hw;
      double* base = gin + (static_cast<size_t>(n) * c + ch) * hw;
      for (int i = 0; i < hw; ++i) base[i] = g;
    }
  }
}

void linear_forward(const double* in, const double* w, const double* bias,
                    double* out, int batch, int in_dim, int out_dim) {
  for (int n = 0; n < batch; ++n) linear_fwd_row(in, w, bias, out, in_dim, out_dim, n);
}

void linear_backward_data(const double* gout, const double* w, double* gin,
                          int batch, int in_dim, int out_dim) {
  for (int n = 0; n < batch; ++n) linear_bwd_data_row(gout, w, gin, in_dim, out_dim, n);
}

void linear_backward_filter(const double* gout, const double* in, double* gw,
                            double* gb, int batch, int in_dim, int out_dim) {
  for (int k = 0; k < in_dim; ++k)
    linear_bwd_filter_k(gout, in, gw, batch, in_dim, out_dim, k);
  for (int j = 0; j < out_dim; ++j) {
    double acc = 0.0;
    for (int n = 0; n < batch; ++n) acc += gout[static_cast<size_t>(n) * out_dim + j];
    gb[j] = acc;
  }
}

}  // namespace serial

namespace par {

void conv2d_forward(const double* in, const double* w, const double* bias,
                    double* out, const ConvDims& d) {
#pragma omp parallel for collapse(3) schedule(static)
  for (int n = 0; n < d.batch; ++n)
    for (int oc = 0; oc < d.out_c; ++oc)
      for (int oh = 0; oh < d.out_h; ++oh) conv_fwd_row(in, w, bias, out, d, n, oc, oh);
}

void conv2d_backward_data(const double* gout, const double* w, double* gin,
                          const ConvDims& d) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < d.batch; ++n)
    for (int ic = 0; ic < d.in_c; ++ic) conv_bwd_data_plane(gout, w, gin, d, n, ic);
}

void conv2d_backward_filter(const double* gout, const double* in, double* gw,
                            double* gb, const ConvDims& d) {
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < d.out_c; ++oc) conv_bwd_filter_oc(gout, in, gw, gb, d, oc);
}

void relu_forward(const double* in, double* out, size_t n) {
  const long ln = static_cast<long>(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < ln; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward(const double* gout, const double* in, double* gin, size_t n) {
  const long ln = static_cast<long>(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < ln; ++i) gin[i] = in[i] > 0.0 ? gout[i] : 0.0;
}

void global_avg_pool_forward(const double* in, double* out, int batch, int c, int hw) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < batch; ++n) {
    for (int ch = 0; ch < c; ++ch) {
      const double* base = in + (static_cast<size_t>(n) * c + ch) * hw;
      double acc = 0.0;
      for (int i = 0; i < hw; ++i) acc += base[i];
      out[static_cast<size_t>(n) * c + ch] = acc / hw;
    }
  }
}

void global_avg_pool_backward(const double* gout, double* gin, int batch, int c, int hw) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < batch; ++n) {
    for (int ch = 0; ch < c; ++ch) {
      const double g = gout[static_cast<size_t>(n) * c + ch] / hw;
      double* base = gin + (static_cast<size_t>(n) * c + ch) * hw;
      for (int i = 0; i < hw; ++i) base[i] = g;
    }
  }
}

void linear_forward(const double* in, const double* w, const double* bias,
                    double* out, int batch, int in_dim, int out_dim) {
#pragma omp parallel for schedule(static)
  for (int n = 0; n < batch; ++n) linear_fwd_row(in, w, bias, out, in_dim, out_dim, n);
}

void linear_backward_data(const double* gout, const double* w, double* gin,
                          int batch, int in_dim, int out_dim) {
#pragma omp parallel for schedule(static)
  for (int n = 0; n < batch; ++n) linear_bwd_data_row(gout, w, gin, in_dim, out_dim, n);
}

void linear_backward_filter(const double* gout, const double* in, double* gw,
                            double* gb, int batch, int in_dim, int out_dim) {
#pragma omp parallel for schedule(static)
  for (int k = 0; k < in_dim; ++k)
    linear_bwd_filter_k(gout, in, gw, batch, in_dim, out_dim, k);
  for (int j = 0; j < out_dim; ++j) {
    double acc = 0.0;
    for (int n = 0; n < batch; ++n) acc += gout[static_cast<size_t>(n) * out_dim + j];
    gb[j] = acc;
  }
}

}  // namespace par

namespace {
bool g_parallel = true;
}

void set_parallel(bool enabled) { g_parallel = enabled; }
bool parallel_enabled() { return g_parallel; }

void conv2d_forward(const double* in, const double* w, const double* bias,
                    double* out, const ConvDims& d) {
  g_parallel ? par::conv2d_forward(in, w, bias, out, d)
             : serial::conv2d_forward(in, w, bias, out, d);
}

void conv2d_backward_data(const double* gout, const double* w, double* gin,
                          const ConvDims& d) {
  g_parallel ? par::conv2d_backward_data(gout, w, gin, d)
             : serial::conv2d_backward_data(gout, w, gin, d);
}

void conv2d_backward_filter(const double* gout, const double* in, double* gw,
                            double* gb, const ConvDims& d) {
  g_parallel ? par::conv2d_backward_filter(gout, in, gw, gb, d)
             : serial::conv2d_backward_filter(gout, in, gw, gb, d);
}

void relu_forward(const double* in, double* out, size_t n) {
  g_parallel ? par::relu_forward(in, out, n) : serial::relu_forward(in, out, n);
}

void relu_backward(const double* gout, const double* in, double* gin, size_t n) {
  g_parallel ? par::relu_backward(gout, in, gin, n)
             : serial::relu_backward(gout, in, gin, n);
}

void global_avg_pool_forward(const double* in, double* out, int batch, int c, int hw) {
  g_parallel ? par::global_avg_pool_forward(in, out, batch, c, hw)
             : serial::global_avg_pool_forward(in, out, batch, c, hw);
}

void global_avg_pool_backward(const double* gout, double* gin, int batch, int c, int hw) {
  g_parallel ? par::global_avg_pool_backward(gout, gin, batch, c, hw)
             : serial::global_avg_pool_backward(gout, gin, batch, c, hw);
}

void linear_forward(const double* in, const double* w, const double* bias,
                    double* out, int batch, int in_dim, int out_dim) {
  g_parallel ? par::linear_forward(in, w, bias, out, batch, in_dim, out_dim)
             : serial::linear_forward(in, w, bias, out, batch, in_dim, out_dim);
}

void linear_backward_data(const double* gout, const double* w, double* gin,
                          int batch, int in_dim, int out_dim) {
  g_parallel ? par::linear_backward_data(gout, w, gin, batch, in_dim, out_dim)
             : serial::linear_backward_data(gout, w, gin, batch, in_dim, out_dim);
}

void linear_backward_filter(const double* gout, const double* in, double* gw,
                            double* gb, int batch, int in_dim, int out_dim) {
  g_parallel ? par::linear_backward_filter(gout, in, gw, gb, batch, in_dim, out_dim)
             : serial::linear_backward_filter(gout, in, gw, gb, batch, in_dim, out_dim);
}

}  // namespace debias::kernels
