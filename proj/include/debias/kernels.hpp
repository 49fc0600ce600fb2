#pragma once

#include <cstddef>

// Dense NCHW kernels for the conv stack. Every kernel exists twice:
// kernels::serial is the plain reference, kernels::par adds OpenMP over
// independent output elements. Both variants accumulate each output
// element in the same fixed order, so results are bit-identical to the
// serial path for any thread count. Tests assert that equality; the
// trainer relies on it for reproducibility.

namespace debias::kernels {

struct ConvDims {
  int batch;
  int in_c, in_h, in_w;
  int out_c, out_h, out_w;
  int ksize, stride, pad;
};

// out_h/out_w for a given input and conv geometry.
int conv_out_extent(int in_extent, int ksize, int stride, int pad);

namespace serial {

void conv2d_forward(const double* in, const double* w, const double* bias,
                    double* out, const ConvDims& d);
void conv2d_backward_data(const double* gout, const double* w, double* gin,
                          const ConvDims& d);
void conv2d_backward_filter(const double* gout, const double* in, double* gw,
                            double* gb, const ConvDims& d);

void relu_forward(const double* in, double* out, size_t n);
void relu_backward(const double* gout, const double* in, double* gin, size_t n);

// out[n][c] = mean over spatial h*w.
void global_avg_pool_forward(const double* in, double* out, int batch, int c, int hw);
void global_avg_pool_backward(const double* gout, double* gin, int batch, int c, int hw);

// w is [in_dim x out_dim], row-major by input index.
void linear_forward(const double* in, const double* w, const double* bias,
                    double* out, int batch, int in_dim, int out_dim);
void linear_backward_data(const double* gout, const double* w, double* gin,
                          int batch, int in_dim, int out_dim);
void linear_backward_filter(const double* gout, const double* in, double* gw,
                            double* gb, int batch, int in_dim, int out_dim);

}  // namespace serial

namespace par {

void conv2d_forward(const double* in, const double* w, const double* bias,
                    double* out, const ConvDims& d);
void conv2d_backward_data(const double* gout, const double* w, double* gin,
                          const ConvDims& d);
void conv2d_backward_filter(const double* gout, const double* in, double* gw,
                            double* gb, const ConvDims& d);

void relu_forward(const double* in, double* out, size_t n);
void relu_backward(const double* gout, const double* in, double* gin, size_t n);

void global_avg_pool_forward(const double* in, double* out, int batch, int c, int hw);
void global_avg_pool_backward(const double* gout, double* gin, int batch, int c, int hw);

void linear_forward(const double* in, const double* w, const double* bias,
                    double* out, int batch, int in_dim, int out_dim);
void linear_backward_data(const double* gout, const double* w, double* gin,
                          int batch, int in_dim, int out_dim);
void linear_backward_filter(const double* gout, const double* in, double* gw,
                            double* gb, int batch, int in_dim, int out_dim);

}  // namespace par

// Process-wide backend switch. The model dispatches through these; tests
// flip it to compare paths.
void set_parallel(bool enabled);
bool parallel_enabled();

void conv2d_forward(const double* in, const double* w, const double* bias,
                    double* out, const ConvDims& d);
void conv2d_backward_data(const double* gout, const double* w, double* gin,
                          const ConvDims& d);
void conv2d_backward_filter(const double* gout, const double* in, double* gw,
                            double* gb, const ConvDims& d);
void relu_forward(const double* in, double* out, size_t n);
void relu_backward(const double* gout, const double* in, double* gin, size_t n);
void global_avg_pool_forward(const double* in, double* out, int batch, int c, int hw);
void global_avg_pool_backward(const double* gout, double* gin, int batch, int c, int hw);
void linear_forward(const double* in, const double* w, const double* bias,
                    double* out, int batch, int in_dim, int out_dim);
void linear_backward_data(const double* gout, const double* w, double* gin,
                          int batch, int in_dim, int out_dim);
void linear_backward_filter(const double* gout, const double* in, double* gw,
                            double* gb, int batch, int in_dim, int out_dim);

}  // namespace debias::kernels
