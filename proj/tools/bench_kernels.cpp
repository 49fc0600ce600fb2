// Times the serial reference kernels against the OpenMP variants on the
// conv-stack shapes used by the default encoder, and checks that both
// produce identical bits.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <vector>

#include <omp.h>

#include "debias/kernels.hpp"
#include "debias/rng.hpp"

using namespace debias;
using kernels::ConvDims;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void fill_random(std::vector<double>& v, Rng& rng) {
  for (auto& x : v) x = rng.normal();
}

struct BenchResult {
  double serial_s;
  double par_s;
  bool bit_equal;
};

template <typename FSerial, typename FPar>
BenchResult run_pair(FSerial fs, FPar fp, std::vector<double>& out_serial,
                     std::vector<double>& out_par, int reps) {
  // warm up + correctness
  fs(out_serial.data());
  fp(out_par.data());
  bool equal = std::memcmp(out_serial.data(), out_par.data(),
                           out_serial.size() * sizeof(double)) == 0;
  double t0 = now_s();
  for (int r = 0; r < reps; ++r) fs(out_serial.data());
  double t1 = now_s();
  for (int r = 0; r < reps; ++r) fp(out_par.data());
  double t2 = now_s();
  return {(t1 - t0) / reps, (t2 - t1) / reps, equal};
}

void bench_conv(int batch, int in_c, int in_hw, int out_c, int reps) {
  ConvDims d;
  d.batch = batch;
  d.in_c = in_c;
  d.in_h = d.in_w = in_hw;
  d.out_c = out_c;
  d.ksize = 3;
  d.stride = 2;
  d.pad = 1;
  d.out_h = kernels::conv_out_extent(d.in_h, 3, 2, 1);
  d.out_w = d.out_h;

  Rng rng(12345);
  std::vector<double> in(static_cast<size_t>(batch) * in_c * in_hw * in_hw);
  std::vector<double> w(static_cast<size_t>(out_c) * in_c * 9);
  std::vector<double> bias(out_c);
  fill_random(in, rng);
  fill_random(w, rng);
  fill_random(bias, rng);

  const size_t out_n = static_cast<size_t>(batch) * out_c * d.out_h * d.out_w;
  std::vector<double> out_s(out_n), out_p(out_n);

  const double macs = static_cast<double>(batch) * out_c * d.out_h * d.out_w * in_c * 9;

  auto r_fwd = run_pair(
      [&](double* o) { kernels::serial::conv2d_forward(in.data(), w.data(), bias.data(), o, d); },
      [&](double* o) { kernels::par::conv2d_forward(in.data(), w.data(), bias.data(), o, d); },
      out_s, out_p, reps);
  std::printf("conv fwd  %3dx%3dx%3d->%3d  serial %8.2f ms  omp %8.2f ms  speedup %4.2fx  %6.2f GFLOP/s  %s\n",
              batch, in_c, in_hw, out_c, r_fwd.serial_s * 1e3, r_fwd.par_s * 1e3,
              r_fwd.serial_s / r_fwd.par_s, 2.0 * macs / r_fwd.par_s / 1e9,
              r_fwd.bit_equal ? "bit-equal" : "MISMATCH");

  std::vector<double> gout(out_n);
  fill_random(gout, rng);
  std::vector<double> gin_s(in.size()), gin_p(in.size());
  auto r_bwd_d = run_pair(
      [&](double* o) { kernels::serial::conv2d_backward_data(gout.data(), w.data(), o, d); },
      [&](double* o) { kernels::par::conv2d_backward_data(gout.data(), w.data(), o, d); },
      gin_s, gin_p, reps);
  std::printf("conv bwdD %3dx%3dx%3d->%3d  serial %8.2f ms  omp %8.2f ms  speedup %4.2fx  %6.2f GFLOP/s  %s\n",
              batch, in_c, in_hw, out_c, r_bwd_d.serial_s * 1e3, r_bwd_d.par_s * 1e3,
              r_bwd_d.serial_s / r_bwd_d.par_s, 2.0 * macs / r_bwd_d.par_s / 1e9,
              r_bwd_d.bit_equal ? "bit-equal" : "MISMATCH");

  std::vector<double> gw_s(w.size()), gw_p(w.size());
  std::vector<double> gb_s(out_c), gb_p(out_c);
  auto r_bwd_f = run_pair(
      [&](double* o) {
        kernels::serial::conv2d_backward_filter(gout.data(), in.data(), o, gb_s.data(), d);
      },
      [&](double* o) {
        kernels::par::conv2d_backward_filter(gout.data(), in.data(), o, gb_p.data(), d);
      },
      gw_s, gw_p, reps);
  std::printf("conv bwdF %3dx%3dx%3d->%3d  serial %8.2f ms  omp %8.2f ms  speedup %4.2fx  %6.2f GFLOP/s  %s\n",
              batch, in_c, in_hw, out_c, r_bwd_f.serial_s * 1e3, r_bwd_f.par_s * 1e3,
              r_bwd_f.serial_s / r_bwd_f.par_s, 2.0 * macs / r_bwd_f.par_s / 1e9,
              r_bwd_f.bit_equal ? "bit-equal" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 3;
  if (argc > 1) reps = std::atoi(argv[1]);
  std::printf("OpenMP max threads: %d\n", omp_get_max_threads());

  // Default encoder stack, batch 16.
  bench_conv(16, 1, 224, 4, reps);
  bench_conv(16, 4, 112, 8, reps);
  bench_conv(16, 8, 56, 16, reps);
  bench_conv(16, 16, 28, 32, reps);

  std::printf("\nwider stack, batch 16\n");
  bench_conv(16, 4, 112, 16, reps);
  bench_conv(16, 16, 56, 32, reps);
  return 0;
}
