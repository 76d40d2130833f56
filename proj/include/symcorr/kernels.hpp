#pragma once

// Dense kernels behind the tensor ops. Layout is channel-first row-major:
// x[c][y][x] at c*H*W + y*W + x, conv weights w[o][c][ky][kx].
//
// Every kernel has an OpenMP variant (default path) and a plain serial
// reference in kernels::ref with identical per-element arithmetic order.
// Parallel loops only split independent output elements and reductions
// stay serial inside one iteration, so results are bit-identical to the
// reference for any thread count.

#include <cstdint>

namespace symcorr::kernels {

// y[o,h,w] = b[o] + sum_{c,ky,kx} x[c, h+ky-KH/2, w+kx-KW/2] * w[o,c,ky,kx]
// Zero padding, stride 1, odd KH/KW; output H x W matches input.
void conv2d_forward(const double* x, int C, int H, int W,
                    const double* w, int O, int KH, int KW,
                    const double* bias, double* y);

// gx += correlation of gy with the flipped kernel (accumulates).
void conv2d_backward_input(const double* gy, const double* w,
                           int O, int C, int KH, int KW, int H, int W,
                           double* gx);

// gw[o,c,ky,kx] += sum_{h,w} gy[o,h,w] * x[c, h+ky-KH/2, w+kx-KW/2]
// gb[o] += sum_{h,w} gy[o,h,w]   (both accumulate)
void conv2d_backward_weights(const double* gy, const double* x,
                             int O, int C, int KH, int KW, int H, int W,
                             double* gw, double* gb);

// out[h,w] = sum_c (vol[c,h,w] - vec[c])^2
void sqdist_field_forward(const double* vol, int C, int H, int W,
                          const double* vec, double* out);

// gvol[c,h,w] += 2*(vol[c,h,w] - vec[c]) * gout[h,w]
// gvec[c]     += sum_{h,w} -2*(vol[c,h,w] - vec[c]) * gout[h,w]
void sqdist_field_backward(const double* vol, int C, int H, int W,
                           const double* vec, const double* gout,
                           double* gvol, double* gvec);

namespace ref {
void conv2d_forward(const double* x, int C, int H, int W,
                    const double* w, int O, int KH, int KW,
                    const double* bias, double* y);
void conv2d_backward_input(const double* gy, const double* w,
                           int O, int C, int KH, int KW, int H, int W,
                           double* gx);
void conv2d_backward_weights(const double* gy, const double* x,
                             int O, int C, int KH, int KW, int H, int W,
                             double* gw, double* gb);
void sqdist_field_forward(const double* vol, int C, int H, int W,
                          const double* vec, double* out);
void sqdist_field_backward(const double* vol, int C, int H, int W,
                           const double* vec, const double* gout,
                           double* gvol, double* gvec);
}  // namespace ref

}  // namespace symcorr::kernels
