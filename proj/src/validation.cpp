#include "snn/validation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "snn/rng.hpp"

namespace snn {

void RandomNetSpec::validate() const {
    if (n_neurons < 2) throw ValidationError("random net: need at least 2 neurons");
    if (!(density > 0.0 && density <= 1.0) && density != 0.0)
        throw ValidationError("random net: density must be in [0, 1]");
    if (!(ratio > 0)) throw ValidationError("random net: ratio must be positive");
    if (!(duration > 0)) throw ValidationError("random net: duration must be positive");
}

RandomNet generate_random_net(const RandomNetSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n_neurons;
    const double v0 = 1.0;
    const double sigma_w = spec.weight_std > 0.0
                               ? spec.weight_std
                               : v0 / std::sqrt(std::max(1.0, spec.density * double(n)));
    const double sigma_u = spec.input_std >= 0.0 ? spec.input_std : 0.2 * spec.input_mean;

    RandomNet net;
    net.fine.params = NeuronParams{spec.ratio, 1.0, v0, 0.0};  // tau_r = 1 time unit
    net.fine.n_neurons = n;
    net.fine.synapses.assign(n, {});
    net.weights = Tensor<double>::zeros({n, n});

    Rng wiring(mix_seed(spec.seed, 0x11adull));
    Rng delays(mix_seed(spec.seed, 0xde1a7ull));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (!wiring.bernoulli(spec.density)) continue;
            const double w = wiring.normal(0.0, sigma_w);
            // delay uniform in (0, tau_r]: matches the coarse model's
            // homogeneous spike-arrival assumption
            const double delay = spec.zero_delay ? 0.0 : 1.0 - delays.uniform();
            net.fine.synapses[i].push_back(
                {static_cast<std::uint32_t>(j), w, delay});
            net.weights.at2(j, i) = w;  // row = postsynaptic target
        }

    Rng inputs(mix_seed(spec.seed, 0x1e57ull));
    net.u_ext.resize(n);
    for (std::size_t i = 0; i < n; ++i) net.u_ext[i] = inputs.normal(spec.input_mean, sigma_u);
    net.fine.u_ext = net.u_ext;
    return net;
}

std::vector<double> measure_rates_fine(const RandomNet& net, const RandomNetSpec& spec) {
    EventDrivenSim sim(net.fine);
    const std::vector<SpikeEvent>& spikes = sim.run(spec.duration);
    const double warmup = 0.2 * spec.duration;
    const double window = spec.duration - warmup;
    std::vector<double> rates(net.fine.n_neurons, 0.0);
    for (const SpikeEvent& ev : spikes)
        if (ev.time > warmup) rates[ev.neuron] += 1.0;
    for (double& r : rates) r /= window;
    return rates;
}

std::vector<double> measure_rates_coarse(const RandomNet& net, const RandomNetSpec& spec,
                                         CoarseModel model) {
    const std::size_t n = net.u_ext.size();
    const std::size_t steps = static_cast<std::size_t>(std::llround(spec.duration));
    const std::size_t warmup = steps / 5;
    CoarseCellParams cell;
    cell.ratio = spec.ratio;
    cell.v0 = net.fine.params.v0;
    cell.model = model;

    CellState<double> state = CellState<double>::zeros(n);
    std::vector<double> xi(n);
    std::vector<double> counts(n, 0.0);
    const double tau = spec.ratio;  // tau_r = 1
    for (std::size_t t = 0; t < steps; ++t) {
        // xi(n) = tau u_ext + (tau/tau_r) W s(n-1): recurrent drive lags one step
        for (std::size_t i = 0; i < n; ++i) xi[i] = tau * net.u_ext[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (state.s[j] == 0.0) continue;
            for (const Synapse& syn : net.fine.synapses[j])
                xi[syn.target] += spec.ratio * syn.weight;
        }
        step_cell(cell, state, xi.data(), n);
        if (t >= warmup)
            for (std::size_t i = 0; i < n; ++i) counts[i] += state.s[i];
    }
    const double window = static_cast<double>(steps - warmup);  // tau_r = 1 per step
    for (double& c : counts) c /= window;
    return counts;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ValidationError("pearson: need two equal-length vectors of size >= 2");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw ValidationError("pearson: zero variance input (degenerate)");
    return sxy / std::sqrt(sxx * syy);
}

std::vector<CorrelationRow> correlation_experiment(const CorrelationExperimentSpec& spec) {
    std::vector<double> drives = spec.drive_means;
    if (drives.empty()) drives = {0.7, 0.9, 1.1, 1.4};

    struct Job {
        double ratio;
        double mean;  // u_ext mean = drive / tau
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (double ratio : spec.ratios)
        for (double drive : drives) {
            const double mean = drive / ratio;
            for (std::size_t k = 0; k < spec.nets_per_point; ++k)
                jobs.push_back({ratio, mean,
                                mix_seed(spec.seed, std::llround(ratio * 16),
                                         std::llround(drive * 1024), k)});
        }

    std::vector<CorrelationRow> rows(jobs.size());
    const std::size_t threads = std::max<std::size_t>(1, spec.threads);
    auto work = [&](std::size_t tid) {
        for (std::size_t j = tid; j < jobs.size(); j += threads) {
            RandomNetSpec net_spec;
            net_spec.n_neurons = spec.n_neurons;
            net_spec.density = spec.density;
            net_spec.input_mean = jobs[j].mean;
            net_spec.ratio = jobs[j].ratio;
            net_spec.duration = spec.duration;
            net_spec.seed = jobs[j].seed;
            const RandomNet net = generate_random_net(net_spec);
            const std::vector<double> fine = measure_rates_fine(net, net_spec);

            CorrelationRow row;
            row.seed = net_spec.seed;
            row.ratio = jobs[j].ratio;
            row.input_mean = jobs[j].mean;
            double total = 0;
            for (double r : fine) total += r;
            row.mean_activity = total / static_cast<double>(fine.size());  // spikes per tau_r
            try {
                row.r_model_i = pearson(fine, measure_rates_coarse(net, net_spec, CoarseModel::I));
                row.r_model_ii =
                    pearson(fine, measure_rates_coarse(net, net_spec, CoarseModel::II));
                row.r_model_iii =
                    pearson(fine, measure_rates_coarse(net, net_spec, CoarseModel::III));
            } catch (const ValidationError&) {
                row.degenerate = true;
            }
            rows[j] = row;
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    return rows;
}

std::string correlation_csv(const std::vector<CorrelationRow>& rows) {
    std::ostringstream os;
    os << "seed,ratio,input_mean,mean_activity,r_I,r_II,r_III,degenerate\n";
    os.precision(10);
    for (const CorrelationRow& r : rows)
        os << r.seed << "," << r.ratio << "," << r.input_mean << "," << r.mean_activity << ","
           << r.r_model_i << "," << r.r_model_ii << "," << r.r_model_iii << ","
           << (r.degenerate ? 1 : 0) << "\n";
    return os.str();
}

}  // namespace snn
