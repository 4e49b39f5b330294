#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "snn/autodiff.hpp"
#include "snn/spike_train.hpp"
#include "snn/tensor.hpp"

namespace snn {

// The three coarse-scale LIF cell variants. They share the no-fire update
//   v(n) = a v(n-1) + (1-a) xi(n),   a = exp(-tau_r/tau)
// and differ in how the interval after a spike is treated:
//   I   - refractory exit uniformly distributed inside the interval
//   II  - fires at interval end, next interval fully clamped
//   III - resets the potential but stays receptive to drive
enum class CoarseModel { I, II, III };

inline const char* coarse_model_name(CoarseModel m) {
    switch (m) {
        case CoarseModel::I: return "I";
        case CoarseModel::II: return "II";
        default: return "III";
    }
}

struct CoarseLifError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mean decay factor seen by a spike arriving at a uniformly distributed time
// inside one interval: (tau/dt) * (1 - exp(-dt/tau)) with ratio = tau/dt.
inline double spike_arrival_factor(double ratio) {
    if (!(ratio > 0)) throw CoarseLifError("spike_arrival_factor: ratio must be positive");
    return ratio * (1.0 - std::exp(-1.0 / ratio));
}

struct CoarseCellParams {
    double ratio = 2.0;  // tau / tau_r
    double v0 = 1.0;     // firing threshold
    CoarseModel model = CoarseModel::I;
    SurrogateParams surrogate{};

    double decay() const { return std::exp(-1.0 / ratio); }
    double gain_nofire() const { return 1.0 - decay(); }
    // Post-spike drive gain of Model I; always in (0, gain_nofire).
    double gain_fire() const { return 1.0 - ratio * (1.0 - decay()); }

    void validate() const {
        if (!(ratio > 0)) throw CoarseLifError("coarse cell: ratio must be positive");
        if (!(surrogate.beta > 0)) throw CoarseLifError("coarse cell: beta must be positive");
    }
};

template <typename T>
struct CellState {
    std::vector<T> v;  // membrane potential at step n
    std::vector<T> s;  // binary spikes at step n

    static CellState zeros(std::size_t n) { return CellState{std::vector<T>(n, T(0)),
                                                             std::vector<T>(n, T(0))}; }
};

// One plain (non-tape) step; state is updated in place.
template <typename T>
void step_cell(const CoarseCellParams& p, CellState<T>& state, const T* xi, std::size_t n) {
    const T a = static_cast<T>(p.decay());
    const T gn = static_cast<T>(p.gain_nofire());
    const T gf = static_cast<T>(p.gain_fire());
    const T v0 = static_cast<T>(p.v0);
    for (std::size_t i = 0; i < n; ++i) {
        const T sp = state.s[i];
        const T vp = state.v[i];
        T v;
        switch (p.model) {
            case CoarseModel::I:
                v = (T(1) - sp) * (a * vp + gn * xi[i]) + sp * gf * xi[i];
                break;
            case CoarseModel::II:
                v = (T(1) - sp) * (a * vp + gn * xi[i]);
                break;
            default:  // III
                v = (T(1) - sp) * a * vp + gn * xi[i];
                break;
        }
        state.v[i] = v;
        state.s[i] = v - v0 >= T(0) ? T(1) : T(0);
    }
}

// Plain unroll of one cell over a [T x N] drive sequence.
template <typename T>
struct UnrollResult {
    SpikeTrain spikes;
    std::vector<std::vector<T>> v;  // per step
};

template <typename T>
UnrollResult<T> unroll(const CoarseCellParams& p, const Tensor<T>& xi_seq,
                       CellState<T> state = {}) {
    p.validate();
    if (xi_seq.shape.size() != 2 || xi_seq.shape[0] == 0)
        throw CoarseLifError("unroll: drive sequence must be a non-empty [T x N] tensor");
    const std::size_t steps = xi_seq.shape[0], n = xi_seq.shape[1];
    if (state.v.empty()) state = CellState<T>::zeros(n);
    UnrollResult<T> out;
    out.spikes = SpikeTrain(steps, n);
    out.v.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        step_cell(p, state, xi_seq.data.data() + t * n, n);
        for (std::size_t i = 0; i < n; ++i) out.spikes.at(t, i) = state.s[i] != T(0);
        out.v.push_back(state.v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tape (differentiable) path
// ---------------------------------------------------------------------------

template <typename T>
struct CellVars {
    Var<T> v;
    Var<T> s;
};

// One cell step on the tape. The reset gates (1 - s) and s reuse the
// hard-forward/soft-backward spike values, so gradients flow through reset.
// With `relaxed` the spike is the logistic itself, which makes the whole
// unroll smooth; the finite-difference oracles check against that version.
template <typename T>
CellVars<T> step_cell_tape(const CoarseCellParams& p, CellVars<T> prev, Var<T> xi,
                           bool relaxed = false) {
    const T a = static_cast<T>(p.decay());
    const T gn = static_cast<T>(p.gain_nofire());
    const T gf = static_cast<T>(p.gain_fire());
    const T v0 = static_cast<T>(p.v0);
    const T beta = static_cast<T>(p.surrogate.beta);
    Var<T> gate = affine(prev.s, T(-1), T(1));  // 1 - s(n-1)
    Var<T> leaked = add(affine(prev.v, a, T(0)), affine(xi, gn, T(0)));
    Var<T> v{};
    switch (p.model) {
        case CoarseModel::I:
            v = add(mul(gate, leaked), mul(prev.s, affine(xi, gf, T(0))));
            break;
        case CoarseModel::II:
            v = mul(gate, leaked);
            break;
        default:  // III
            v = add(mul(gate, affine(prev.v, a, T(0))), affine(xi, gn, T(0)));
            break;
    }
    Var<T> centered = affine(v, T(1), -v0);
    Var<T> s = relaxed ? logistic(centered, beta) : hard_soft(centered, p.surrogate);
    return {v, s};
}

template <typename T>
CellVars<T> cell_init_tape(Tape<T>& tape, const Shape& shape) {
    return {tape.leaf(Tensor<T>::zeros(shape)), tape.leaf(Tensor<T>::zeros(shape))};
}

// Tape unroll over an externally supplied drive sequence; records all steps
// so backward() implements backpropagation through the full spike train.
template <typename T>
std::vector<CellVars<T>> unroll_tape(Tape<T>& tape, const CoarseCellParams& p,
                                     const std::vector<Var<T>>& xi_seq, bool relaxed = false) {
    p.validate();
    if (xi_seq.empty()) throw CoarseLifError("unroll_tape: empty drive sequence");
    CellVars<T> state = cell_init_tape(tape, xi_seq[0].value().shape);
    std::vector<CellVars<T>> out;
    out.reserve(xi_seq.size());
    for (Var<T> xi : xi_seq) {
        state = step_cell_tape(p, state, xi, relaxed);
        out.push_back(state);
    }
    return out;
}

}  // namespace snn
