#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "orddiff/tensor.hpp"

namespace orddiff {

namespace detail {

// C[M,N] (+)= A[M,K] * B[K,N], row-major. i-k-j order: the j loop is a
// contiguous axpy the compiler vectorizes, and each C element accumulates
// in a fixed k order, so results are bit-stable.
template <class T>
inline void gemm_nn(const T *a, const T *b, T *c, size_t M, size_t K, size_t N,
                    bool accumulate) {
    if (!accumulate) std::fill(c, c + M * N, T(0));
    for (size_t i = 0; i < M; ++i) {
        const T *arow = a + i * K;
        T *crow = c + i * N;
        for (size_t k = 0; k < K; ++k) {
            const T av = arow[k];
            const T *brow = b + k * N;
            for (size_t j = 0; j < N; ++j) crow[j] += av * brow[j];
        }
    }
}

// C[M,N] (+)= A[M,K] * B[N,K]^T. Dot products over K with 8 explicit lanes
// (fixed reduction order, vectorizable without -ffast-math).
template <class T>
inline void gemm_nt(const T *a, const T *b, T *c, size_t M, size_t K, size_t N,
                    bool accumulate) {
    constexpr size_t L = 8;
    for (size_t i = 0; i < M; ++i) {
        const T *arow = a + i * K;
        T *crow = c + i * N;
        for (size_t j = 0; j < N; ++j) {
            const T *brow = b + j * K;
            T lane[L] = {};
            size_t k = 0;
            for (; k + L <= K; k += L)
                for (size_t l = 0; l < L; ++l) lane[l] += arow[k + l] * brow[k + l];
            T tail = T(0);
            for (; k < K; ++k) tail += arow[k] * brow[k];
            T s01 = (lane[0] + lane[1]) + (lane[2] + lane[3]);
            T s23 = (lane[4] + lane[5]) + (lane[6] + lane[7]);
            T dotv = (s01 + s23) + tail;
            if (accumulate)
                crow[j] += dotv;
            else
                crow[j] = dotv;
        }
    }
}

// C[M,N] (+)= A[K,M]^T * B[K,N]. k-i-j order keeps the j loop contiguous
// and the per-element k order fixed.
template <class T>
inline void gemm_tn(const T *a, const T *b, T *c, size_t M, size_t K, size_t N,
                    bool accumulate) {
    if (!accumulate) std::fill(c, c + M * N, T(0));
    for (size_t k = 0; k < K; ++k) {
        const T *arow = a + k * M;
        const T *brow = b + k * N;
        for (size_t i = 0; i < M; ++i) {
            const T av = arow[i];
            T *crow = c + i * N;
            for (size_t j = 0; j < N; ++j) crow[j] += av * brow[j];
        }
    }
}

template <class T, class... Ts>
inline bool any_requires_grad(const Tensor<T> &t, const Ts &...rest) {
    if constexpr (sizeof...(rest) == 0)
        return t.requires_grad();
    else
        return t.requires_grad() || any_requires_grad(rest...);
}

template <class T, class... Ins>
inline Tensor<T> make_out(Shape shape, const Ins &...ins) {
    bool rg = Tape<T>::instance().recording() && any_requires_grad(ins...);
    return Tensor<T>::zeros(std::move(shape), rg);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> add(const Tensor<T> &a, const Tensor<T> &b) {
    check_dim(a.shape() == b.shape(), "add: shape mismatch " + shape_str(a.shape()) + " vs " +
                                          shape_str(b.shape()));
    Tensor<T> out = detail::make_out<T>(a.shape(), a, b);
    const size_t n = a.size();
    for (size_t i = 0; i < n; ++i) out.val()[i] = a.val()[i] + b.val()[i];
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), bn = b.node(), on = out.node()]() {
            if (on->grad.empty()) return;
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] += on->grad[i];
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> sub(const Tensor<T> &a, const Tensor<T> &b) {
    check_dim(a.shape() == b.shape(), "sub: shape mismatch");
    Tensor<T> out = detail::make_out<T>(a.shape(), a, b);
    for (size_t i = 0; i < a.size(); ++i) out.val()[i] = a.val()[i] - b.val()[i];
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), bn = b.node(), on = out.node()]() {
            if (on->grad.empty()) return;
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] -= on->grad[i];
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> mul(const Tensor<T> &a, const Tensor<T> &b) {
    check_dim(a.shape() == b.shape(), "mul: shape mismatch");
    Tensor<T> out = detail::make_out<T>(a.shape(), a, b);
    for (size_t i = 0; i < a.size(); ++i) out.val()[i] = a.val()[i] * b.val()[i];
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), bn = b.node(), on = out.node()]() {
            if (on->grad.empty()) return;
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i)
                    an->grad[i] += on->grad[i] * bn->val[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i)
                    bn->grad[i] += on->grad[i] * an->val[i];
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> scale(const Tensor<T> &a, T c) {
    Tensor<T> out = detail::make_out<T>(a.shape(), a);
    for (size_t i = 0; i < a.size(); ++i) out.val()[i] = a.val()[i] * c;
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), on = out.node(), c]() {
            if (on->grad.empty()) return;
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += c * on->grad[i];
            }
        });
    }
    return out;
}

// a + c*b
template <class T>
Tensor<T> add_scaled(const Tensor<T> &a, const Tensor<T> &b, T c) {
    check_dim(a.shape() == b.shape(), "add_scaled: shape mismatch");
    Tensor<T> out = detail::make_out<T>(a.shape(), a, b);
    for (size_t i = 0; i < a.size(); ++i) out.val()[i] = a.val()[i] + c * b.val()[i];
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), bn = b.node(), on = out.node(), c]() {
            if (on->grad.empty()) return;
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] += c * on->grad[i];
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// linear algebra
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> matmul(const Tensor<T> &a, const Tensor<T> &b) {
    check_dim(a.rank() == 2 && b.rank() == 2, "matmul: operands must be 2-d");
    check_dim(a.dim(1) == b.dim(0), "matmul: inner dims disagree " + shape_str(a.shape()) +
                                        " vs " + shape_str(b.shape()));
    const size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor<T> out = detail::make_out<T>({m, n}, a, b);
    detail::gemm_nn(a.val().data(), b.val().data(), out.val().data(), m, k, n, false);
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), bn = b.node(), on = out.node(), m, k, n]() {
            if (on->grad.empty()) return;
            if (an->requires_grad) {
                an->ensure_grad();
                // dA += dC * B^T
                detail::gemm_nt(on->grad.data(), bn->val.data(), an->grad.data(), m, n, k, true);
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                // dB += A^T * dC
                detail::gemm_tn(an->val.data(), on->grad.data(), bn->grad.data(), k, m, n, true);
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> transpose(const Tensor<T> &a) {
    check_dim(a.rank() == 2, "transpose: operand must be 2-d");
    const size_t r = a.dim(0), c = a.dim(1);
    Tensor<T> out = detail::make_out<T>({c, r}, a);
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < c; ++j) out.val()[j * r + i] = a.val()[i * c + j];
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), on = out.node(), r, c]() {
            if (on->grad.empty()) return;
            if (!an->requires_grad) return;
            an->ensure_grad();
            for (size_t i = 0; i < r; ++i)
                for (size_t j = 0; j < c; ++j) an->grad[i * c + j] += on->grad[j * r + i];
        });
    }
    return out;
}

template <class T>
Tensor<T> reshape(const Tensor<T> &a, Shape shape) {
    check_dim(numel_of(shape) == a.size(), "reshape: element count mismatch");
    Tensor<T> out = detail::make_out<T>(std::move(shape), a);
    out.val() = a.val();
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), on = out.node()]() {
            if (on->grad.empty()) return;
            if (!an->requires_grad) return;
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
        });
    }
    return out;
}

template <class T>
Tensor<T> slice_rows(const Tensor<T> &a, size_t r0, size_t r1) {
    check_dim(a.rank() == 2 && r0 < r1 && r1 <= a.dim(0), "slice_rows: bad range");
    const size_t c = a.dim(1);
    Tensor<T> out = detail::make_out<T>({r1 - r0, c}, a);
    std::copy(a.val().begin() + r0 * c, a.val().begin() + r1 * c, out.val().begin());
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), on = out.node(), r0, c]() {
            if (on->grad.empty()) return;
            if (!an->requires_grad) return;
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) an->grad[r0 * c + i] += on->grad[i];
        });
    }
    return out;
}

template <class T>
Tensor<T> slice_cols(const Tensor<T> &a, size_t c0, size_t c1) {
    check_dim(a.rank() == 2 && c0 < c1 && c1 <= a.dim(1), "slice_cols: bad range");
    const size_t r = a.dim(0), c = a.dim(1), w = c1 - c0;
    Tensor<T> out = detail::make_out<T>({r, w}, a);
    for (size_t i = 0; i < r; ++i)
        std::copy(a.val().begin() + i * c + c0, a.val().begin() + i * c + c1,
                  out.val().begin() + i * w);
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), on = out.node(), r, c, c0, w]() {
            if (on->grad.empty()) return;
            if (!an->requires_grad) return;
            an->ensure_grad();
            for (size_t i = 0; i < r; ++i)
                for (size_t j = 0; j < w; ++j) an->grad[i * c + c0 + j] += on->grad[i * w + j];
        });
    }
    return out;
}

template <class T>
Tensor<T> concat_cols(const std::vector<Tensor<T>> &parts) {
    check_dim(!parts.empty(), "concat_cols: empty input");
    const size_t r = parts[0].dim(0);
    size_t ctot = 0;
    bool rg = false;
    for (const auto &p : parts) {
        check_dim(p.rank() == 2 && p.dim(0) == r, "concat_cols: row mismatch");
        ctot += p.dim(1);
        rg = rg || p.requires_grad();
    }
    rg = rg && Tape<T>::instance().recording();
    Tensor<T> out = Tensor<T>::zeros({r, ctot}, rg);
    size_t off = 0;
    for (const auto &p : parts) {
        const size_t w = p.dim(1);
        for (size_t i = 0; i < r; ++i)
            std::copy(p.val().begin() + i * w, p.val().begin() + (i + 1) * w,
                      out.val().begin() + i * ctot + off);
        off += w;
    }
    if (rg) {
        std::vector<NodePtr<T>> nodes;
        std::vector<size_t> widths;
        for (const auto &p : parts) {
            nodes.push_back(p.node());
            widths.push_back(p.dim(1));
        }
        Tape<T>::instance().record([nodes, widths, on = out.node(), r, ctot]() {
            if (on->grad.empty()) return;
            size_t off = 0;
            for (size_t pi = 0; pi < nodes.size(); ++pi) {
                const size_t w = widths[pi];
                if (nodes[pi]->requires_grad) {
                    nodes[pi]->ensure_grad();
                    for (size_t i = 0; i < r; ++i)
                        for (size_t j = 0; j < w; ++j)
                            nodes[pi]->grad[i * w + j] += on->grad[i * ctot + off + j];
                }
                off += w;
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// nonlinearities and normalization
// ---------------------------------------------------------------------------

// Numerically stable softmax along `axis` (max subtraction per line).
template <class T>
Tensor<T> softmax(const Tensor<T> &a, size_t axis) {
    check_dim(axis < a.rank(), "softmax: axis out of range");
    const size_t len = a.dim(axis);
    size_t outer = 1, inner = 1;
    for (size_t i = 0; i < axis; ++i) outer *= a.dim(i);
    for (size_t i = axis + 1; i < a.rank(); ++i) inner *= a.dim(i);
    Tensor<T> out = detail::make_out<T>(a.shape(), a);
    for (size_t o = 0; o < outer; ++o) {
        for (size_t in = 0; in < inner; ++in) {
            const size_t base = o * len * inner + in;
            T mx = a.val()[base];
            for (size_t k = 1; k < len; ++k) mx = std::max(mx, a.val()[base + k * inner]);
            T sum = T(0);
            for (size_t k = 0; k < len; ++k) {
                T e = std::exp(a.val()[base + k * inner] - mx);
                out.val()[base + k * inner] = e;
                sum += e;
            }
            const T invs = T(1) / sum;
            for (size_t k = 0; k < len; ++k) out.val()[base + k * inner] *= invs;
        }
    }
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), on = out.node(), outer, inner, len]() {
            if (on->grad.empty()) return;
            if (!an->requires_grad) return;
            an->ensure_grad();
            for (size_t o = 0; o < outer; ++o) {
                for (size_t in = 0; in < inner; ++in) {
                    const size_t base = o * len * inner + in;
                    T dot = T(0);
                    for (size_t k = 0; k < len; ++k)
                        dot += on->val[base + k * inner] * on->grad[base + k * inner];
                    for (size_t k = 0; k < len; ++k) {
                        const size_t idx = base + k * inner;
                        an->grad[idx] += on->val[idx] * (on->grad[idx] - dot);
                    }
                }
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> softmax_rows(const Tensor<T> &a) {
    return softmax(a, a.rank() - 1);
}

// Zero mean / unit variance over the last axis, no affine part.
template <class T>
Tensor<T> normalize_rows(const Tensor<T> &a, T eps = T(1e-5)) {
    check_dim(a.rank() >= 1 && a.dim(a.rank() - 1) >= 1, "normalize_rows: empty feature axis");
    const size_t d = a.dim(a.rank() - 1);
    const size_t rows = a.size() / d;
    Tensor<T> out = detail::make_out<T>(a.shape(), a);
    std::vector<T> inv_sigma(rows);
    for (size_t r = 0; r < rows; ++r) {
        const T *x = a.val().data() + r * d;
        T *y = out.val().data() + r * d;
        T mean = T(0);
        for (size_t j = 0; j < d; ++j) mean += x[j];
        mean /= T(d);
        T var = T(0);
        for (size_t j = 0; j < d; ++j) {
            const T t = x[j] - mean;
            var += t * t;
        }
        var /= T(d);
        const T is = T(1) / std::sqrt(var + eps);
        inv_sigma[r] = is;
        for (size_t j = 0; j < d; ++j) y[j] = (x[j] - mean) * is;
    }
    if (out.requires_grad()) {
        Tape<T>::instance().record(
            [an = a.node(), on = out.node(), inv_sigma = std::move(inv_sigma), rows, d]() {
                if (on->grad.empty()) return;
                if (!an->requires_grad) return;
                an->ensure_grad();
                for (size_t r = 0; r < rows; ++r) {
                    const T *xhat = on->val.data() + r * d;
                    const T *dy = on->grad.data() + r * d;
                    T *dx = an->grad.data() + r * d;
                    T mean_dy = T(0), mean_dyx = T(0);
                    for (size_t j = 0; j < d; ++j) {
                        mean_dy += dy[j];
                        mean_dyx += dy[j] * xhat[j];
                    }
                    mean_dy /= T(d);
                    mean_dyx /= T(d);
                    const T is = inv_sigma[r];
                    for (size_t j = 0; j < d; ++j)
                        dx[j] += is * (dy[j] - mean_dy - xhat[j] * mean_dyx);
                }
            });
    }
    return out;
}

template <class T>
Tensor<T> gelu(const Tensor<T> &a) {
    // tanh approximation with the usual 0.044715 cubic coefficient
    constexpr double kC = 0.7978845608028653558;  // sqrt(2/pi)
    constexpr double kA = 0.044715;
    Tensor<T> out = detail::make_out<T>(a.shape(), a);
    for (size_t i = 0; i < a.size(); ++i) {
        const T x = a.val()[i];
        const T u = T(kC) * (x + T(kA) * x * x * x);
        out.val()[i] = T(0.5) * x * (T(1) + std::tanh(u));
    }
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), on = out.node()]() {
            if (on->grad.empty()) return;
            if (!an->requires_grad) return;
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) {
                const T x = an->val[i];
                const T u = T(kC) * (x + T(kA) * x * x * x);
                const T t = std::tanh(u);
                const T du = T(kC) * (T(1) + T(3) * T(kA) * x * x);
                const T dydx = T(0.5) * (T(1) + t) + T(0.5) * x * (T(1) - t * t) * du;
                an->grad[i] += on->grad[i] * dydx;
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> sigmoid(const Tensor<T> &a) {
    Tensor<T> out = detail::make_out<T>(a.shape(), a);
    for (size_t i = 0; i < a.size(); ++i) {
        T x = a.val()[i];
        x = std::clamp(x, T(-30), T(30));  // clamp the exponent, keeps (0,1) open
        out.val()[i] = T(1) / (T(1) + std::exp(-x));
    }
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), on = out.node()]() {
            if (on->grad.empty()) return;
            if (!an->requires_grad) return;
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) {
                const T s = on->val[i];
                an->grad[i] += on->grad[i] * s * (T(1) - s);
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// broadcast helpers over 2-d tensors
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> add_rowvec(const Tensor<T> &a, const Tensor<T> &v) {
    check_dim(a.rank() >= 1 && v.rank() == 1 && a.dim(a.rank() - 1) == v.dim(0),
              "add_rowvec: width mismatch");
    const size_t d = v.dim(0), rows = a.size() / d;
    Tensor<T> out = detail::make_out<T>(a.shape(), a, v);
    for (size_t r = 0; r < rows; ++r)
        for (size_t j = 0; j < d; ++j) out.val()[r * d + j] = a.val()[r * d + j] + v.val()[j];
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), vn = v.node(), on = out.node(), rows, d]() {
            if (on->grad.empty()) return;
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
            }
            if (vn->requires_grad) {
                vn->ensure_grad();
                for (size_t r = 0; r < rows; ++r)
                    for (size_t j = 0; j < d; ++j) vn->grad[j] += on->grad[r * d + j];
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> mul_rowvec(const Tensor<T> &a, const Tensor<T> &v) {
    check_dim(a.rank() >= 1 && v.rank() == 1 && a.dim(a.rank() - 1) == v.dim(0),
              "mul_rowvec: width mismatch");
    const size_t d = v.dim(0), rows = a.size() / d;
    Tensor<T> out = detail::make_out<T>(a.shape(), a, v);
    for (size_t r = 0; r < rows; ++r)
        for (size_t j = 0; j < d; ++j) out.val()[r * d + j] = a.val()[r * d + j] * v.val()[j];
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), vn = v.node(), on = out.node(), rows, d]() {
            if (on->grad.empty()) return;
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t r = 0; r < rows; ++r)
                    for (size_t j = 0; j < d; ++j)
                        an->grad[r * d + j] += on->grad[r * d + j] * vn->val[j];
            }
            if (vn->requires_grad) {
                vn->ensure_grad();
                for (size_t r = 0; r < rows; ++r)
                    for (size_t j = 0; j < d; ++j)
                        vn->grad[j] += on->grad[r * d + j] * an->val[r * d + j];
            }
        });
    }
    return out;
}

// LayerNorm over the last axis with learnable gain/bias.
template <class T>
Tensor<T> layernorm(const Tensor<T> &x, const Tensor<T> &gain, const Tensor<T> &bias,
                    T eps = T(1e-5)) {
    return add_rowvec(mul_rowvec(normalize_rows(x, eps), gain), bias);
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> sum_all(const Tensor<T> &a) {
    Tensor<T> out = detail::make_out<T>({1}, a);
    T s = T(0);
    for (size_t i = 0; i < a.size(); ++i) s += a.val()[i];
    out.val()[0] = s;
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), on = out.node()]() {
            if (on->grad.empty()) return;
            if (!an->requires_grad) return;
            an->ensure_grad();
            const T g = on->grad[0];
            for (size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += g;
        });
    }
    return out;
}

template <class T>
Tensor<T> mean_all(const Tensor<T> &a) {
    return scale(sum_all(a), T(1) / T(a.size()));
}

// Mean squared error over all elements.
template <class T>
Tensor<T> mse(const Tensor<T> &a, const Tensor<T> &b) {
    check_dim(a.shape() == b.shape(), "mse: shape mismatch");
    Tensor<T> out = detail::make_out<T>({1}, a, b);
    T s = T(0);
    for (size_t i = 0; i < a.size(); ++i) {
        const T d = a.val()[i] - b.val()[i];
        s += d * d;
    }
    out.val()[0] = s / T(a.size());
    if (out.requires_grad()) {
        Tape<T>::instance().record([an = a.node(), bn = b.node(), on = out.node()]() {
            if (on->grad.empty()) return;
            const T g = on->grad[0] * T(2) / T(an->val.size());
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < an->val.size(); ++i)
                    an->grad[i] += g * (an->val[i] - bn->val[i]);
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (size_t i = 0; i < bn->val.size(); ++i)
                    bn->grad[i] -= g * (an->val[i] - bn->val[i]);
            }
        });
    }
    return out;
}

}  // namespace orddiff
