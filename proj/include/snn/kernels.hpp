#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace snn::kernels {

// c = a * b, a is MxK, b is KxN, all row-major
template <typename T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
    std::fill(c, c + m * n, T(0));
    for (std::size_t i = 0; i < m; ++i) {
        const T* arow = a + i * k;
        T* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const T av = arow[p];
            if (av == T(0)) continue;  // spike inputs are mostly zero
            const T* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// c += a * b, a is MxK, b is KxN
template <typename T>
void matmul_acc(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const T* arow = a + i * k;
        T* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const T av = arow[p];
            if (av == T(0)) continue;
            const T* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// c += a * b^T, a is MxK, b is NxK
template <typename T>
void matmul_nt_acc(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const T* arow = a + i * k;
        T* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const T* brow = b + j * k;
            T acc = 0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] += acc;
        }
    }
}

// c += a^T * b, a is KxM, b is KxN, result MxN
template <typename T>
void matmul_tn_acc(const T* a, const T* b, T* c, std::size_t k, std::size_t m, std::size_t n) {
    for (std::size_t p = 0; p < k; ++p) {
        const T* arow = a + p * m;
        const T* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const T av = arow[i];
            if (av == T(0)) continue;
            T* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

inline std::size_t conv_out_dim(std::size_t in, std::size_t k, std::size_t stride,
                                std::size_t pad) {
    return (in + 2 * pad - k) / stride + 1;
}

// Cross-correlation with zero padding.
// x: [B, Cin, H, W], w: [Cout, Cin, kh, kw], y: [B, Cout, Ho, Wo], bias: [Cout] or null
template <typename T>
void conv2d_forward(const T* x, const T* w, const T* bias, T* y, std::size_t batch,
                    std::size_t cin, std::size_t h, std::size_t wd, std::size_t cout,
                    std::size_t kk, std::size_t stride, std::size_t pad, std::size_t ho,
                    std::size_t wo) {
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t oc = 0; oc < cout; ++oc) {
            const T bv = bias ? bias[oc] : T(0);
            for (std::size_t oy = 0; oy < ho; ++oy) {
                for (std::size_t ox = 0; ox < wo; ++ox) {
                    T acc = bv;
                    for (std::size_t ic = 0; ic < cin; ++ic) {
                        const T* xp = x + ((b * cin + ic) * h) * wd;
                        const T* wp = w + ((oc * cin + ic) * kk) * kk;
                        for (std::size_t ky = 0; ky < kk; ++ky) {
                            const std::ptrdiff_t iy =
                                static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                static_cast<std::ptrdiff_t>(pad);
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                            for (std::size_t kx = 0; kx < kk; ++kx) {
                                const std::ptrdiff_t ix =
                                    static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                    static_cast<std::ptrdiff_t>(pad);
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(wd)) continue;
                                acc += xp[iy * wd + ix] * wp[ky * kk + kx];
                            }
                        }
                    }
                    y[((b * cout + oc) * ho + oy) * wo + ox] = acc;
                }
            }
        }
    }
}

// Gradients of conv2d_forward. Any of dx/dw/dbias may be null; accumulates.
template <typename T>
void conv2d_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* dbias,
                     std::size_t batch, std::size_t cin, std::size_t h, std::size_t wd,
                     std::size_t cout, std::size_t kk, std::size_t stride, std::size_t pad,
                     std::size_t ho, std::size_t wo) {
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t oc = 0; oc < cout; ++oc) {
            for (std::size_t oy = 0; oy < ho; ++oy) {
                for (std::size_t ox = 0; ox < wo; ++ox) {
                    const T g = dy[((b * cout + oc) * ho + oy) * wo + ox];
                    if (g == T(0)) continue;
                    if (dbias) dbias[oc] += g;
                    for (std::size_t ic = 0; ic < cin; ++ic) {
                        const T* xp = x + ((b * cin + ic) * h) * wd;
                        const T* wp = w + ((oc * cin + ic) * kk) * kk;
                        T* dxp = dx ? dx + ((b * cin + ic) * h) * wd : nullptr;
                        T* dwp = dw ? dw + ((oc * cin + ic) * kk) * kk : nullptr;
                        for (std::size_t ky = 0; ky < kk; ++ky) {
                            const std::ptrdiff_t iy =
                                static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                static_cast<std::ptrdiff_t>(pad);
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                            for (std::size_t kx = 0; kx < kk; ++kx) {
                                const std::ptrdiff_t ix =
                                    static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                    static_cast<std::ptrdiff_t>(pad);
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(wd)) continue;
                                if (dxp) dxp[iy * wd + ix] += g * wp[ky * kk + kx];
                                if (dwp) dwp[ky * kk + kx] += g * xp[iy * wd + ix];
                            }
                        }
                    }
                }
            }
        }
    }
}

// Truncating-window max pooling over [B, C, H, W]; records the flat input
// index of the window maximum (first index wins ties).
template <typename T>
void maxpool2d_forward(const T* x, T* y, std::size_t* argmax, std::size_t batch, std::size_t c,
                       std::size_t h, std::size_t w, std::size_t k, std::size_t stride,
                       std::size_t ho, std::size_t wo) {
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const T* xp = x + ((b * c + ch) * h) * w;
            const std::size_t plane_base = ((b * c + ch) * h) * w;
            for (std::size_t oy = 0; oy < ho; ++oy) {
                for (std::size_t ox = 0; ox < wo; ++ox) {
                    std::size_t best = oy * stride * w + ox * stride;
                    T bv = xp[best];
                    for (std::size_t ky = 0; ky < k; ++ky) {
                        for (std::size_t kx = 0; kx < k; ++kx) {
                            const std::size_t idx = (oy * stride + ky) * w + (ox * stride + kx);
                            if (xp[idx] > bv) {
                                bv = xp[idx];
                                best = idx;
                            }
                        }
                    }
                    const std::size_t o = ((b * c + ch) * ho + oy) * wo + ox;
                    y[o] = bv;
                    argmax[o] = plane_base + best;
                }
            }
        }
    }
}

}  // namespace snn::kernels
