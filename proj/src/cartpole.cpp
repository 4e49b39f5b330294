#include "snn/cartpole.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "snn/network_forward.hpp"
#include "snn/optimizer.hpp"

namespace snn {

void CartpoleEnv::reset(std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0xca47ull));
    state.x = rng.uniform(-0.05, 0.05);
    state.x_dot = rng.uniform(-0.05, 0.05);
    state.theta = rng.uniform(-0.05, 0.05);
    state.theta_dot = rng.uniform(-0.05, 0.05);
    steps = 0;
    done = false;
}

void CartpoleEnv::step(int action) {
    if (done) throw CartpoleError("step: episode already finished");
    if (action != 0 && action != 1) throw CartpoleError("step: action must be 0 or 1");
    const double force = action == 1 ? kForce : -kForce;
    const double cos_t = std::cos(state.theta);
    const double sin_t = std::sin(state.theta);
    const double total_mass = kMassCart + kMassPole;
    const double pole_ml = kMassPole * kHalfLength;
    const double temp =
        (force + pole_ml * state.theta_dot * state.theta_dot * sin_t) / total_mass;
    const double theta_acc =
        (kGravity * sin_t - cos_t * temp) /
        (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / total_mass));
    const double x_acc = temp - pole_ml * theta_acc * cos_t / total_mass;
    state.x += kDt * state.x_dot;
    state.x_dot += kDt * x_acc;
    state.theta += kDt * state.theta_dot;
    state.theta_dot += kDt * theta_acc;
    ++steps;
    done = std::abs(state.x) > kXLimit || std::abs(state.theta) > kThetaLimit ||
           steps >= kMaxSteps;
}

NetworkSpec build_policy_spec(const PolicyConfig& cfg) {
    NetworkSpec spec;
    spec.preset = "cartpole-policy";
    spec.input_shape = {4};
    spec.n_steps = cfg.n_steps;
    spec.cell.model = cfg.model;
    spec.cell.ratio = cfg.ratio;
    spec.cell.surrogate.beta = cfg.beta;
    spec.layers = {DenseSpec{4, cfg.hidden, true}, SpikeLayerSpec{},
                   DenseSpec{cfg.hidden, 2, true}, SpikeLayerSpec{}};
    spec.validate();
    return spec;
}

namespace {

// scale components to roughly [-1, 1] before the input layer
Tensor<float> normalize_states(const std::vector<CartpoleState>& states) {
    Tensor<float> out = Tensor<float>::zeros({states.size(), 4});
    for (std::size_t i = 0; i < states.size(); ++i) {
        out.at2(i, 0) = static_cast<float>(states[i].x / CartpoleEnv::kXLimit);
        out.at2(i, 1) = static_cast<float>(states[i].x_dot / 3.0);
        out.at2(i, 2) = static_cast<float>(states[i].theta / CartpoleEnv::kThetaLimit);
        out.at2(i, 3) = static_cast<float>(states[i].theta_dot / 3.0);
    }
    return out;
}

double logistic(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

double policy_output_map(double spike_count, double alpha, std::size_t n_sp) {
    return logistic(alpha * (spike_count - static_cast<double>(n_sp) / 2.0));
}

Decision policy_decision(const NetworkSpec& spec, const NetworkParams& params,
                         const PolicyConfig& cfg, const CartpoleState& state, Rng& rng) {
    for (double v : {state.x, state.x_dot, state.theta, state.theta_dot})
        if (!std::isfinite(v)) throw CartpoleError("policy: non-finite state");
    EncodedBatch<float> input;
    input.n_steps = cfg.n_steps;
    input.analog = normalize_states({state});
    const ForwardResult<float> fwd = forward_eval(spec, params, input);
    Decision d;
    d.spike_counts = {fwd.activity[0], fwd.activity[1]};
    const double y0 = policy_output_map(d.spike_counts[0], cfg.alpha, cfg.n_steps);
    const double y1 = policy_output_map(d.spike_counts[1], cfg.alpha, cfg.n_steps);
    d.prob_right = y1 / (y0 + y1);
    d.action = rng.uniform() < d.prob_right ? 1 : 0;
    return d;
}

std::vector<std::size_t> elite_indices(const std::vector<double>& rewards,
                                       double elite_fraction) {
    if (rewards.empty()) return {};
    std::vector<double> sorted = rewards;
    std::sort(sorted.begin(), sorted.end());
    // reward >= the (1 - fraction) percentile, ties included
    const double q = 1.0 - elite_fraction;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    const double threshold =
        lo + 1 < sorted.size() ? sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]) : sorted[lo];
    std::vector<std::size_t> elite;
    for (std::size_t i = 0; i < rewards.size(); ++i)
        if (rewards[i] >= threshold) elite.push_back(i);
    return elite;
}

CemResult cem_train(const CemConfig& cfg) {
    const NetworkSpec spec = build_policy_spec(cfg.policy);
    NetworkParams params = init_params(spec, cfg.seed);
    Optimizer opt(OptimizerKind::Adam, cfg.lr, params);

    CemResult result;
    std::vector<double> recent;  // last 100 episode rewards
    std::uint64_t episode_counter = 0;

    for (std::size_t batch = 1; batch <= cfg.max_batches; ++batch) {
        std::vector<std::vector<CartpoleState>> states(cfg.batch_episodes);
        std::vector<std::vector<int>> actions(cfg.batch_episodes);
        std::vector<double> rewards(cfg.batch_episodes);

        for (std::size_t e = 0; e < cfg.batch_episodes; ++e) {
            const std::uint64_t ep_seed = mix_seed(cfg.seed, 0xe915ull, episode_counter);
            ++episode_counter;
            CartpoleEnv env;
            env.reset(ep_seed);
            Rng policy_rng(mix_seed(ep_seed, 0xac710ull));
            while (!env.done) {
                const Decision d =
                    policy_decision(spec, params, cfg.policy, env.state, policy_rng);
                states[e].push_back(env.state);
                actions[e].push_back(d.action);
                env.step(d.action);
            }
            rewards[e] = static_cast<double>(env.steps);
            recent.push_back(rewards[e]);
            if (recent.size() > 100) recent.erase(recent.begin());
        }

        BatchStats stats;
        stats.batch = batch;
        for (double r : rewards) stats.mean_reward += r;
        stats.mean_reward /= static_cast<double>(cfg.batch_episodes);
        {
            std::vector<double> sorted = rewards;
            std::sort(sorted.begin(), sorted.end());
            const double pos = 0.7 * static_cast<double>(sorted.size() - 1);
            const std::size_t lo = static_cast<std::size_t>(pos);
            stats.p70_reward = lo + 1 < sorted.size()
                                   ? sorted[lo] + (pos - lo) * (sorted[lo + 1] - sorted[lo])
                                   : sorted[lo];
        }
        double avg = 0;
        for (double r : recent) avg += r;
        stats.moving_avg_100 = avg / static_cast<double>(recent.size());
        result.curve.push_back(stats);
        result.batches_used = batch;
        if (cfg.log) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "batch %zu  mean %.1f  p70 %.1f  avg100 %.1f",
                          batch, stats.mean_reward, stats.p70_reward, stats.moving_avg_100);
            cfg.log(buf);
        }
        if (recent.size() >= 100 && stats.moving_avg_100 >= cfg.target_reward) {
            result.solved = true;
            break;
        }

        // imitate the elite episodes
        const std::vector<std::size_t> elite = elite_indices(rewards, cfg.elite_fraction);
        std::vector<CartpoleState> elite_states;
        std::vector<int> elite_actions;
        for (std::size_t e : elite) {
            elite_states.insert(elite_states.end(), states[e].begin(), states[e].end());
            elite_actions.insert(elite_actions.end(), actions[e].begin(), actions[e].end());
        }
        if (elite_states.empty()) continue;

        Rng order_rng(mix_seed(cfg.seed, 0x03d3ull, batch));
        std::vector<std::size_t> order(elite_states.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        const double half = static_cast<double>(cfg.policy.n_steps) / 2.0;
        for (std::size_t pass = 0; pass < cfg.train_epochs; ++pass) {
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[order_rng.below(i)]);
            for (std::size_t start = 0; start < order.size(); start += cfg.train_batch) {
                const std::size_t bsz = std::min(cfg.train_batch, order.size() - start);
                std::vector<CartpoleState> batch_states(bsz);
                std::vector<int> batch_actions(bsz);
                for (std::size_t i = 0; i < bsz; ++i) {
                    batch_states[i] = elite_states[order[start + i]];
                    batch_actions[i] = elite_actions[order[start + i]];
                }
                Tape<float> tape;
                std::vector<Var<float>> param_vars;
                for (const auto& t : params.tensors) param_vars.push_back(tape.leaf(t));
                EncodedBatch<float> input;
                input.n_steps = cfg.policy.n_steps;
                input.analog = normalize_states(batch_states);
                Var<float> counts = forward_tape(tape, spec, param_vars, input);
                Var<float> loss =
                    two_action_nll(counts, batch_actions, static_cast<float>(cfg.policy.alpha),
                                   static_cast<float>(half));
                if (!std::isfinite(loss.value()[0]))
                    throw CartpoleError("cem_train diverged: non-finite loss");
                tape.backward(loss);
                std::vector<Tensor<float>> grads;
                for (const Var<float>& pv : param_vars) grads.push_back(pv.grad());
                opt.step(params, grads);
            }
        }
    }
    result.params = std::move(params);
    return result;
}

}  // namespace snn
