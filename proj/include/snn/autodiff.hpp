#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "snn/kernels.hpp"
#include "snn/tensor.hpp"

namespace snn {

struct SurrogateParams {
    double beta = 3.0;  // steepness of the logistic used in the backward pass
};

struct AutodiffError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename T>
class Tape;

// Lightweight handle to a tape node.
template <typename T>
struct Var {
    Tape<T>* tape = nullptr;
    std::size_t id = 0;

    const Tensor<T>& value() const { return tape->value(id); }
    const Tensor<T>& grad() const { return tape->grad(id); }
};

// Reverse-mode tape. Nodes are appended in execution order, which is a valid
// topological order, so backward() is a single reverse sweep. The graph is
// rebuilt every forward pass; spike trains unroll over a variable number of
// steps so a static graph would not fit.
template <typename T>
class Tape {
public:
    using Adjoints = std::vector<Tensor<T>>;
    using BackFn = std::function<void(Tape&, Adjoints&)>;

    struct Node {
        Tensor<T> value;
        Tensor<T> grad;  // accumulated by backward(); reset by zero_grad()
        BackFn back;     // empty for leaves
    };

    Var<T> leaf(Tensor<T> v) { return push(std::move(v), BackFn{}); }

    Var<T> push(Tensor<T> v, BackFn back) {
        Node n;
        n.grad = Tensor<T>::zeros(v.shape);
        n.value = std::move(v);
        n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return Var<T>{this, nodes_.size() - 1};
    }

    // Id the next pushed node will receive; backward closures capture this.
    std::size_t next_id() const { return nodes_.size(); }

    std::size_t size() const { return nodes_.size(); }
    const Tensor<T>& value(std::size_t id) const { return nodes_[id].value; }
    const Tensor<T>& grad(std::size_t id) const { return nodes_[id].grad; }

    // Adjoint accessor used by backward rules; materializes zeros on demand.
    Tensor<T>& adj(Adjoints& adjoints, std::size_t id) {
        if (adjoints[id].empty()) adjoints[id] = Tensor<T>::zeros(nodes_[id].value.shape);
        return adjoints[id];
    }

    // Accumulates d(root)/d(node.value) into every reachable node's grad.
    // Each call runs an independent sweep, so two calls without zero_grad()
    // leave exactly twice the gradients of one call.
    void backward(Var<T> root) {
        if (root.tape != this) throw AutodiffError("backward: root from a different tape");
        if (!nodes_[root.id].value.is_scalar())
            throw AutodiffError("backward: root is not a scalar, shape " +
                                shape_str(nodes_[root.id].value.shape));
        Adjoints adjoints(root.id + 1);
        adjoints[root.id] = Tensor<T>::full(nodes_[root.id].value.shape, T(1));
        for (std::size_t i = root.id + 1; i-- > 0;) {
            if (adjoints[i].empty()) continue;
            if (nodes_[i].back) nodes_[i].back(*this, adjoints);
            Tensor<T>& g = nodes_[i].grad;
            const Tensor<T>& a = adjoints[i];
            for (std::size_t j = 0; j < g.size(); ++j) g[j] += a[j];
            adjoints[i] = Tensor<T>{};  // free as the sweep passes
        }
    }

    void zero_grad() {
        for (Node& n : nodes_) std::fill(n.grad.data.begin(), n.grad.data.end(), T(0));
    }

private:
    std::vector<Node> nodes_;
};

namespace detail {

template <typename T>
void check_same_tape(Var<T> a, Var<T> b, const char* op) {
    if (a.tape != b.tape) throw AutodiffError(std::string(op) + ": operands on different tapes");
}

template <typename T>
T logistic_scalar(T x) {
    // evaluated through exp of a non-positive argument so large |x| cannot overflow
    if (x >= T(0)) {
        const T e = std::exp(-x);
        return T(1) / (T(1) + e);
    }
    const T e = std::exp(x);
    return e / (T(1) + e);
}

// Interprets a tensor as [B, C, H, W], accepting 3-d input as batch of one.
inline void as_batched_image(const Shape& s, std::size_t& b, std::size_t& c, std::size_t& h,
                             std::size_t& w, const char* op) {
    if (s.size() == 4) {
        b = s[0], c = s[1], h = s[2], w = s[3];
    } else if (s.size() == 3) {
        b = 1, c = s[0], h = s[1], w = s[2];
    } else {
        throw ShapeError(std::string(op) + ": expected 3-d or 4-d input, got " + shape_str(s));
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise ops
// ---------------------------------------------------------------------------

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
    detail::check_same_tape(a, b, "add");
    Tape<T>& tape = *a.tape;
    require_same_shape(tape.value(a.id), tape.value(b.id), "add");
    Tensor<T> out = tape.value(a.id);
    const Tensor<T>& bv = tape.value(b.id);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    const std::size_t ia = a.id, ib = b.id, io = tape.next_id();
    return tape.push(std::move(out), [ia, ib, io](Tape<T>& t, typename Tape<T>::Adjoints& adj) {
        const Tensor<T>& g = adj[io];
        Tensor<T>& ga = t.adj(adj, ia);
        Tensor<T>& gb = t.adj(adj, ib);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i];
            gb[i] += g[i];
        }
    });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
    detail::check_same_tape(a, b, "sub");
    Tape<T>& tape = *a.tape;
    require_same_shape(tape.value(a.id), tape.value(b.id), "sub");
    Tensor<T> out = tape.value(a.id);
    const Tensor<T>& bv = tape.value(b.id);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
    const std::size_t ia = a.id, ib = b.id, io = tape.next_id();
    return tape.push(std::move(out), [ia, ib, io](Tape<T>& t, typename Tape<T>::Adjoints& adj) {
        const Tensor<T>& g = adj[io];
        Tensor<T>& ga = t.adj(adj, ia);
        Tensor<T>& gb = t.adj(adj, ib);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i];
            gb[i] -= g[i];
        }
    });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
    detail::check_same_tape(a, b, "mul");
    Tape<T>& tape = *a.tape;
    require_same_shape(tape.value(a.id), tape.value(b.id), "mul");
    Tensor<T> out = tape.value(a.id);
    const Tensor<T>& bv = tape.value(b.id);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
    const std::size_t ia = a.id, ib = b.id, io = tape.next_id();
    return tape.push(std::move(out), [ia, ib, io](Tape<T>& t, typename Tape<T>::Adjoints& adj) {
        const Tensor<T>& g = adj[io];
        const Tensor<T>& av = t.value(ia);
        const Tensor<T>& bvv = t.value(ib);
        Tensor<T>& ga = t.adj(adj, ia);
        Tensor<T>& gb = t.adj(adj, ib);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i] * bvv[i];
            gb[i] += g[i] * av[i];
        }
    });
}

// scale * x + shift, elementwise with scalar constants
template <typename T>
Var<T> affine(Var<T> x, T scale, T shift) {
    Tape<T>& tape = *x.tape;
    Tensor<T> out = tape.value(x.id);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * out[i] + shift;
    const std::size_t ix = x.id, io = tape.next_id();
    return tape.push(std::move(out), [ix, io, scale](Tape<T>& t, typename Tape<T>::Adjoints& adj) {
        const Tensor<T>& g = adj[io];
        Tensor<T>& gx = t.adj(adj, ix);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += scale * g[i];
    });
}

// Forward: Heaviside step H(x) with H(x) = 1 iff x >= 0 (spikes are binary;
// the half-spike at exactly threshold is rejected on purpose).
// Backward: incoming gradient times beta * sigma(beta x) * (1 - sigma(beta x)),
// with the logistic saved at forward time.
template <typename T>
Var<T> hard_soft(Var<T> x, const SurrogateParams& params) {
    if (!(params.beta > 0)) throw AutodiffError("hard_soft: beta must be positive");
    Tape<T>& tape = *x.tape;
    const Tensor<T>& xv = tape.value(x.id);
    const T beta = static_cast<T>(params.beta);
    Tensor<T> out = Tensor<T>::zeros(xv.shape);
    Tensor<T> sig = Tensor<T>::zeros(xv.shape);
    for (std::size_t i = 0; i < xv.size(); ++i) {
        out[i] = xv[i] >= T(0) ? T(1) : T(0);
        sig[i] = detail::logistic_scalar(beta * xv[i]);
    }
    const std::size_t ix = x.id, io = tape.next_id();
    return tape.push(std::move(out), [ix, io, beta, sig = std::move(sig)](
                                         Tape<T>& t, typename Tape<T>::Adjoints& adj) {
        const Tensor<T>& g = adj[io];
        Tensor<T>& gx = t.adj(adj, ix);
        for (std::size_t i = 0; i < g.size(); ++i)
            gx[i] += g[i] * beta * sig[i] * (T(1) - sig[i]);
    });
}

// sigma(beta x): the smooth relaxation of hard_soft, used by the
// finite-difference oracles and the sigmoid benchmark path.
template <typename T>
Var<T> logistic(Var<T> x, T beta) {
    Tape<T>& tape = *x.tape;
    Tensor<T> out = tape.value(x.id);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = detail::logistic_scalar(beta * out[i]);
    const std::size_t ix = x.id, io = tape.next_id();
    return tape.push(std::move(out), [ix, io, beta](Tape<T>& t, typename Tape<T>::Adjoints& adj) {
        const Tensor<T>& g = adj[io];
        const Tensor<T>& y = t.value(io);
        Tensor<T>& gx = t.adj(adj, ix);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * beta * y[i] * (T(1) - y[i]);
    });
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
    detail::check_same_tape(a, b, "matmul");
    Tape<T>& tape = *a.tape;
    const Tensor<T>& av = tape.value(a.id);
    const Tensor<T>& bv = tape.value(b.id);
    if (av.shape.size() != 2 || bv.shape.size() != 2 || av.shape[1] != bv.shape[0])
        throw ShapeError("matmul: incompatible shapes " + shape_str(av.shape) + " and " +
                         shape_str(bv.shape));
    const std::size_t m = av.shape[0], k = av.shape[1], n = bv.shape[1];
    Tensor<T> out = Tensor<T>::zeros({m, n});
    kernels::matmul(av.data.data(), bv.data.data(), out.data.data(), m, k, n);
    const std::size_t ia = a.id, ib = b.id, io = tape.next_id();
    return tape.push(std::move(out),
                     [ia, ib, io, m, k, n](Tape<T>& t, typename Tape<T>::Adjoints& adj) {
                         const Tensor<T>& g = adj[io];
                         // dA += G * B^T ; dB += A^T * G
                         kernels::matmul_nt_acc(g.data.data(), t.value(ib).data.data(),
                                                t.adj(adj, ia).data.data(), m, n, k);
                         kernels::matmul_tn_acc(t.value(ia).data.data(), g.data.data(),
                                                t.adj(adj, ib).data.data(), m, k, n);
                     });
}

// y = x * w^T (+ bias), the dense-layer primitive. x: [B, in], w: [out, in],
// bias: [out]. Keeping the transpose fused avoids materializing w^T each step.
template <typename T>
Var<T> linear(Var<T> x, Var<T> w, const Var<T>* bias = nullptr) {
    detail::check_same_tape(x, w, "linear");
    Tape<T>& tape = *x.tape;
    const Tensor<T>& xv = tape.value(x.id);
    const Tensor<T>& wv = tape.value(w.id);
    if (xv.shape.size() != 2 || wv.shape.size() != 2 || xv.shape[1] != wv.shape[1])
        throw ShapeError("linear: incompatible shapes " + shape_str(xv.shape) + " and " +
                         shape_str(wv.shape));
    const std::size_t bsz = xv.shape[0], in = xv.shape[1], out_n = wv.shape[0];
    Tensor<T> out = Tensor<T>::zeros({bsz, out_n});
    kernels::matmul_nt_acc(xv.data.data(), wv.data.data(), out.data.data(), bsz, in, out_n);
    const bool has_bias = bias != nullptr;
    const std::size_t ibias = has_bias ? bias->id : 0;
    if (has_bias) {
        const Tensor<T>& bv = tape.value(ibias);
        if (bv.size() != out_n)
            throw ShapeError("linear: bias shape " + shape_str(bv.shape) + " does not match " +
                             std::to_string(out_n) + " outputs");
        for (std::size_t r = 0; r < bsz; ++r)
            for (std::size_t c = 0; c < out_n; ++c) out.at2(r, c) += bv[c];
    }
    const std::size_t ix = x.id, iw = w.id, io = tape.next_id();
    return tape.push(std::move(out), [ix, iw, io, ibias, has_bias, bsz, in, out_n](
                                         Tape<T>& t, typename Tape<T>::Adjoints& adj) {
        const Tensor<T>& g = adj[io];
        // dX += G * W ; dW += G^T * X ; db += column sums of G
        kernels::matmul_acc(g.data.data(), t.value(iw).data.data(), t.adj(adj, ix).data.data(),
                            bsz, out_n, in);
        kernels::matmul_tn_acc(g.data.data(), t.value(ix).data.data(),
                               t.adj(adj, iw).data.data(), bsz, out_n, in);
        if (has_bias) {
            Tensor<T>& gb = t.adj(adj, ibias);
            for (std::size_t r = 0; r < bsz; ++r)
                for (std::size_t c = 0; c < out_n; ++c) gb[c] += g.at2(r, c);
        }
    });
}

// ---------------------------------------------------------------------------
// Convolution and pooling
// ---------------------------------------------------------------------------

// Cross-correlation (no kernel flip) with zero padding. x: [B, Cin, H, W] or
// [Cin, H, W]; w: [Cout, Cin, k, k]; optional bias [Cout].
template <typename T>
Var<T> conv2d(Var<T> x, Var<T> w, const Var<T>* bias, std::size_t stride, std::size_t pad) {
    detail::check_same_tape(x, w, "conv2d");
    Tape<T>& tape = *x.tape;
    const Tensor<T>& xv = tape.value(x.id);
    const Tensor<T>& wv = tape.value(w.id);
    if (stride == 0) throw AutodiffError("conv2d: stride must be positive");
    std::size_t b, cin, h, wd;
    detail::as_batched_image(xv.shape, b, cin, h, wd, "conv2d");
    if (wv.shape.size() != 4 || wv.shape[2] != wv.shape[3])
        throw ShapeError("conv2d: kernel must be [Cout, Cin, k, k], got " + shape_str(wv.shape));
    if (wv.shape[1] != cin)
        throw ShapeError("conv2d: kernel channels " + shape_str(wv.shape) +
                         " do not match input " + shape_str(xv.shape));
    const std::size_t cout = wv.shape[0], k = wv.shape[2];
    if (k > h + 2 * pad || k > wd + 2 * pad)
        throw AutodiffError("conv2d: kernel size " + std::to_string(k) +
                            " exceeds padded input " + std::to_string(h + 2 * pad) + "x" +
                            std::to_string(wd + 2 * pad));
    const std::size_t ho = kernels::conv_out_dim(h, k, stride, pad);
    const std::size_t wo = kernels::conv_out_dim(wd, k, stride, pad);
    const bool batched = xv.shape.size() == 4;
    Tensor<T> out = Tensor<T>::zeros(batched ? Shape{b, cout, ho, wo} : Shape{cout, ho, wo});
    const bool has_bias = bias != nullptr;
    const std::size_t ibias = has_bias ? bias->id : 0;
    kernels::conv2d_forward(xv.data.data(), wv.data.data(),
                            has_bias ? tape.value(ibias).data.data() : nullptr, out.data.data(),
                            b, cin, h, wd, cout, k, stride, pad, ho, wo);
    const std::size_t ix = x.id, iw = w.id, io = tape.next_id();
    return tape.push(std::move(out),
                     [ix, iw, io, ibias, has_bias, b, cin, h, wd, cout, k, stride, pad, ho,
                      wo](Tape<T>& t, typename Tape<T>::Adjoints& adj) {
                         const Tensor<T>& g = adj[io];
                         kernels::conv2d_backward(
                             t.value(ix).data.data(), t.value(iw).data.data(), g.data.data(),
                             t.adj(adj, ix).data.data(), t.adj(adj, iw).data.data(),
                             has_bias ? t.adj(adj, ibias).data.data() : nullptr, b, cin, h, wd,
                             cout, k, stride, pad, ho, wo);
                     });
}

template <typename T>
Var<T> conv2d(Var<T> x, Var<T> w, std::size_t stride, std::size_t pad) {
    return conv2d<T>(x, w, nullptr, stride, pad);
}

// Truncating-window max pooling; backward routes the gradient to the window
// argmax (first index on ties).
template <typename T>
Var<T> maxpool2d(Var<T> x, std::size_t k, std::size_t stride) {
    Tape<T>& tape = *x.tape;
    const Tensor<T>& xv = tape.value(x.id);
    if (stride == 0) throw AutodiffError("maxpool2d: stride must be positive");
    std::size_t b, c, h, w;
    detail::as_batched_image(xv.shape, b, c, h, w, "maxpool2d");
    if (k > h || k > w)
        throw AutodiffError("maxpool2d: window " + std::to_string(k) + " exceeds input " +
                            std::to_string(h) + "x" + std::to_string(w));
    const std::size_t ho = (h - k) / stride + 1;
    const std::size_t wo = (w - k) / stride + 1;
    const bool batched = xv.shape.size() == 4;
    Tensor<T> out = Tensor<T>::zeros(batched ? Shape{b, c, ho, wo} : Shape{c, ho, wo});
    std::vector<std::size_t> argmax(out.size());
    kernels::maxpool2d_forward(xv.data.data(), out.data.data(), argmax.data(), b, c, h, w, k,
                               stride, ho, wo);
    const std::size_t ix = x.id, io = tape.next_id();
    return tape.push(std::move(out), [ix, io, argmax = std::move(argmax)](
                                         Tape<T>& t, typename Tape<T>::Adjoints& adj) {
        const Tensor<T>& g = adj[io];
        Tensor<T>& gx = t.adj(adj, ix);
        for (std::size_t i = 0; i < g.size(); ++i) gx[argmax[i]] += g[i];
    });
}

// ---------------------------------------------------------------------------
// Reductions, reshapes and losses
// ---------------------------------------------------------------------------

template <typename T>
Var<T> sum(Var<T> x) {
    Tape<T>& tape = *x.tape;
    const Tensor<T>& xv = tape.value(x.id);
    T total = 0;
    for (T v : xv.data) total += v;
    const std::size_t ix = x.id, io = tape.next_id();
    return tape.push(Tensor<T>::scalar(total),
                     [ix, io](Tape<T>& t, typename Tape<T>::Adjoints& adj) {
                         const T g = adj[io][0];
                         Tensor<T>& gx = t.adj(adj, ix);
                         for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
                     });
}

template <typename T>
Var<T> reshape(Var<T> x, Shape s) {
    Tape<T>& tape = *x.tape;
    Tensor<T> out = tape.value(x.id).reshaped(std::move(s));
    const std::size_t ix = x.id, io = tape.next_id();
    return tape.push(std::move(out), [ix, io](Tape<T>& t, typename Tape<T>::Adjoints& adj) {
        const Tensor<T>& g = adj[io];
        Tensor<T>& gx = t.adj(adj, ix);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
}

// sum((pred - target)^2) / normalizer. With the default normalizer this is
// the mean squared error; batch shards pass the global element count so the
// shard losses sum to the full-batch mean.
template <typename T>
Var<T> mse_against(Var<T> pred, const Tensor<T>& target, T normalizer = T(0)) {
    Tape<T>& tape = *pred.tape;
    const Tensor<T>& pv = tape.value(pred.id);
    require_same_shape(pv, target, "mse_against");
    const T norm = normalizer > T(0) ? normalizer : static_cast<T>(pv.size());
    T acc = 0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        const T d = pv[i] - target[i];
        acc += d * d;
    }
    const std::size_t ip = pred.id, io = tape.next_id();
    return tape.push(Tensor<T>::scalar(acc / norm),
                     [ip, io, norm, target](Tape<T>& t, typename Tape<T>::Adjoints& adj) {
                         const T g = adj[io][0];
                         const Tensor<T>& pv = t.value(ip);
                         Tensor<T>& gp = t.adj(adj, ip);
                         for (std::size_t i = 0; i < pv.size(); ++i)
                             gp[i] += g * T(2) * (pv[i] - target[i]) / norm;
                     });
}

// Softmax cross-entropy over rows of logits [B, N] against integer labels,
// summed and divided by normalizer (defaults to B).
template <typename T>
Var<T> softmax_cross_entropy(Var<T> logits, const std::vector<std::size_t>& labels,
                             T normalizer = T(0)) {
    Tape<T>& tape = *logits.tape;
    const Tensor<T>& zv = tape.value(logits.id);
    if (zv.shape.size() != 2 || zv.shape[0] != labels.size())
        throw ShapeError("softmax_cross_entropy: logits " + shape_str(zv.shape) + " vs " +
                         std::to_string(labels.size()) + " labels");
    const std::size_t bsz = zv.shape[0], n = zv.shape[1];
    for (std::size_t lab : labels)
        if (lab >= n) throw AutodiffError("softmax_cross_entropy: label out of range");
    const T norm = normalizer > T(0) ? normalizer : static_cast<T>(bsz);
    T acc = 0;
    for (std::size_t r = 0; r < bsz; ++r) {
        T mx = zv.at2(r, 0);
        for (std::size_t c = 1; c < n; ++c) mx = std::max(mx, zv.at2(r, c));
        T lse = 0;
        for (std::size_t c = 0; c < n; ++c) lse += std::exp(zv.at2(r, c) - mx);
        acc += mx + std::log(lse) - zv.at2(r, labels[r]);
    }
    const std::size_t iz = logits.id, io = tape.next_id();
    return tape.push(Tensor<T>::scalar(acc / norm),
                     [iz, io, norm, labels](Tape<T>& t, typename Tape<T>::Adjoints& adj) {
                         const T g = adj[io][0];
                         const Tensor<T>& zv = t.value(iz);
                         const std::size_t bsz = zv.shape[0], n = zv.shape[1];
                         Tensor<T>& gz = t.adj(adj, iz);
                         for (std::size_t r = 0; r < bsz; ++r) {
                             T mx = zv.at2(r, 0);
                             for (std::size_t c = 1; c < n; ++c) mx = std::max(mx, zv.at2(r, c));
                             T lse = 0;
                             for (std::size_t c = 0; c < n; ++c)
                                 lse += std::exp(zv.at2(r, c) - mx);
                             for (std::size_t c = 0; c < n; ++c) {
                                 const T p = std::exp(zv.at2(r, c) - mx) / lse;
                                 gz.at2(r, c) +=
                                     g * (p - (c == labels[r] ? T(1) : T(0))) / norm;
                             }
                         }
                     });
}

// Negative log likelihood of the taken action for a two-action spiking
// policy: y = sigma(alpha * (n_s - half)), p(action) = y_a / (y_0 + y_1).
// counts: [B, 2]; actions[i] in {0, 1}.
template <typename T>
Var<T> two_action_nll(Var<T> counts, const std::vector<int>& actions, T alpha, T half,
                      T normalizer = T(0)) {
    Tape<T>& tape = *counts.tape;
    const Tensor<T>& cv = tape.value(counts.id);
    if (cv.shape.size() != 2 || cv.shape[1] != 2 || cv.shape[0] != actions.size())
        throw ShapeError("two_action_nll: counts " + shape_str(cv.shape) + " vs " +
                         std::to_string(actions.size()) + " actions");
    const std::size_t bsz = cv.shape[0];
    const T norm = normalizer > T(0) ? normalizer : static_cast<T>(bsz);
    T acc = 0;
    for (std::size_t r = 0; r < bsz; ++r) {
        const T y0 = detail::logistic_scalar(alpha * (cv.at2(r, 0) - half));
        const T y1 = detail::logistic_scalar(alpha * (cv.at2(r, 1) - half));
        const T ya = actions[r] == 0 ? y0 : y1;
        acc += std::log(y0 + y1) - std::log(ya);
    }
    const std::size_t ic = counts.id, io = tape.next_id();
    return tape.push(
        Tensor<T>::scalar(acc / norm),
        [ic, io, alpha, half, norm, actions](Tape<T>& t, typename Tape<T>::Adjoints& adj) {
            const T g = adj[io][0];
            const Tensor<T>& cv = t.value(ic);
            Tensor<T>& gc = t.adj(adj, ic);
            for (std::size_t r = 0; r < cv.shape[0]; ++r) {
                const T y[2] = {detail::logistic_scalar(alpha * (cv.at2(r, 0) - half)),
                                detail::logistic_scalar(alpha * (cv.at2(r, 1) - half))};
                const T denom = y[0] + y[1];
                for (int a = 0; a < 2; ++a) {
                    const T dy = alpha * y[a] * (T(1) - y[a]);
                    T dl = dy / denom;
                    if (a == actions[r]) dl -= dy / y[a];
                    gc.at2(r, a) += g * dl / norm;
                }
            }
        });
}

}  // namespace snn
