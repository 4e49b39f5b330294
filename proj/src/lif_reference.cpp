#include "snn/lif_reference.hpp"

#include <cmath>
#include <sstream>

namespace snn {

double evolve_free(double v, double u_ext, double dt, const NeuronParams& p) {
    if (dt < 0) throw LifError("evolve_free: negative dt");
    const double decay = std::exp(-dt / p.tau);
    return v * decay + p.tau * u_ext * (1.0 - decay);
}

double crossing_time(double v, double u_ext, const NeuronParams& p) {
    const double drive = p.tau * u_ext;
    if (v >= p.v0) return 0.0;
    if (drive <= p.v0) return std::numeric_limits<double>::infinity();
    return p.tau * std::log((drive - v) / (drive - p.v0));
}

EventDrivenSim::EventDrivenSim(const RecurrentLifNet& net) : net_(net) {
    net_.params.validate();
    if (net_.u_ext.size() != net_.n_neurons)
        throw LifError("EventDrivenSim: u_ext size does not match neuron count");
    v_.assign(net_.n_neurons, net_.params.v_reset);
    last_.assign(net_.n_neurons, 0.0);
    refractory_until_.assign(net_.n_neurons, -std::numeric_limits<double>::infinity());
    epoch_.assign(net_.n_neurons, 0);
    for (std::uint32_t i = 0; i < net_.n_neurons; ++i) refresh_crossing(i, 0.0);
}

void EventDrivenSim::push(Event e) {
    e.seq = seq_++;
    queue_.push(e);
}

void EventDrivenSim::schedule(double time, std::uint32_t neuron, double weight) {
    if (neuron >= net_.n_neurons)
        throw LifError("schedule: unknown neuron index " + std::to_string(neuron));
    if (time < now_) throw LifError("schedule: event in the past");
    push(Event{time, 0, Event::Delivery, neuron, weight, 0});
}

// Brings neuron i to time t. During the refractory window the potential is
// clamped to the reset value; free evolution resumes from the window's end.
void EventDrivenSim::advance(std::uint32_t i, double t) {
    if (t <= last_[i]) return;
    double from = last_[i];
    if (refractory_until_[i] > from) {
        if (t <= refractory_until_[i]) {
            v_[i] = net_.params.v_reset;
            last_[i] = t;
            return;
        }
        v_[i] = net_.params.v_reset;
        from = refractory_until_[i];
    }
    v_[i] = evolve_free(v_[i], net_.u_ext[i], t - from, net_.params);
    last_[i] = t;
}

void EventDrivenSim::emit_spike(std::uint32_t i, double t) {
    record_.push_back(SpikeEvent{i, t});
    v_[i] = net_.params.v_reset;
    last_[i] = t;
    refractory_until_[i] = t + net_.params.tau_r;
    ++epoch_[i];
    if (!net_.synapses.empty())
        for (const Synapse& syn : net_.synapses[i])
            push(Event{t + syn.delay, 0, Event::Delivery, syn.target, syn.weight, 0});
    // next self-crossing starts from reset once the refractory window ends
    const double tc = crossing_time(net_.params.v_reset, net_.u_ext[i], net_.params);
    if (std::isfinite(tc))
        push(Event{t + net_.params.tau_r + tc, 0, Event::Crossing, i, 0.0, epoch_[i]});
}

void EventDrivenSim::refresh_crossing(std::uint32_t i, double t) {
    ++epoch_[i];
    const double start = std::max(t, refractory_until_[i]);
    const double v_at_start = t >= refractory_until_[i] ? v_[i] : net_.params.v_reset;
    const double tc = crossing_time(v_at_start, net_.u_ext[i], net_.params);
    if (std::isfinite(tc)) push(Event{start + tc, 0, Event::Crossing, i, 0.0, epoch_[i]});
}

bool EventDrivenSim::deliver(std::uint32_t neuron, double weight, double time) {
    if (neuron >= net_.n_neurons)
        throw LifError("deliver: unknown neuron index " + std::to_string(neuron));
    if (time < refractory_until_[neuron]) return false;  // clamped, delivery discarded
    advance(neuron, time);
    v_[neuron] += weight;
    if (v_[neuron] >= net_.params.v0) {
        emit_spike(neuron, time);
        return true;
    }
    refresh_crossing(neuron, time);
    return false;
}

double EventDrivenSim::potential(std::uint32_t neuron, double at_time) {
    advance(neuron, at_time);
    return v_[neuron];
}

const std::vector<SpikeEvent>& EventDrivenSim::run(double duration) {
    while (!queue_.empty() && queue_.top().time <= duration) {
        const Event ev = queue_.top();
        queue_.pop();
        now_ = ev.time;
        if (ev.kind == Event::Delivery) {
            deliver(ev.target, ev.weight, ev.time);
        } else {
            if (ev.stamp != epoch_[ev.target]) continue;  // stale prediction
            advance(ev.target, ev.time);
            v_[ev.target] = net_.params.v0;  // analytic crossing, exact by construction
            emit_spike(ev.target, ev.time);
        }
    }
    now_ = duration;
    return record_;
}

std::vector<SpikeEvent> run_network(const RecurrentLifNet& net,
                                    const std::vector<SpikeEvent>& input_spikes,
                                    const std::vector<double>& input_weights, double duration) {
    if (!(duration > 0)) throw LifError("run_network: duration must be positive");
    EventDrivenSim sim(net);
    for (const SpikeEvent& ev : input_spikes) {
        const double w = input_weights.size() == 1 ? input_weights[0]
                                                   : input_weights.at(ev.neuron);
        sim.schedule(ev.time, ev.neuron, w);
    }
    return sim.run(duration);
}

std::string spikes_to_csv(const std::vector<SpikeEvent>& spikes) {
    std::ostringstream os;
    os << "neuron_id,time\n";
    os.precision(12);
    for (const SpikeEvent& ev : spikes) os << ev.neuron << "," << ev.time << "\n";
    return os.str();
}

}  // namespace snn
