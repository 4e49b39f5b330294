#pragma once

#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace snn {

struct LifError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Physical constants shared by the fine and coarse models. Spikes are Dirac
// impulses: a delivery of weight w jumps the potential by w.
struct NeuronParams {
    double tau = 2.0;      // membrane leak time constant
    double tau_r = 1.0;    // absolute refractory period
    double v0 = 1.0;       // firing threshold
    double v_reset = 0.0;  // reset potential

    void validate() const {
        if (!(tau > 0)) throw LifError("NeuronParams: tau must be positive");
        if (!(tau_r > 0)) throw LifError("NeuronParams: tau_r must be positive");
        if (!(v0 > v_reset)) throw LifError("NeuronParams: v0 must exceed v_reset");
    }
};

// Exact free evolution under constant external current over dt:
// v e^{-dt/tau} + tau u (1 - e^{-dt/tau}). No ODE stepping anywhere.
double evolve_free(double v, double u_ext, double dt, const NeuronParams& p);

// Time until v crosses v0 under constant drive, or +inf when unreachable
// (tau u <= v0). Closed form: tau ln((tau u - v)/(tau u - v0)).
double crossing_time(double v, double u_ext, const NeuronParams& p);

struct SpikeEvent {
    std::uint32_t neuron;
    double time;
};

struct Synapse {
    std::uint32_t target;
    double weight;
    double delay;  // validation networks draw this uniformly in (0, tau_r]
};

struct RecurrentLifNet {
    NeuronParams params;
    std::size_t n_neurons = 0;
    std::vector<std::vector<Synapse>> synapses;  // outgoing, per neuron
    std::vector<double> u_ext;                   // constant external currents
};

// Event-driven simulator: analytic integration between events, spike
// deliveries processed in time order (ties by insertion order), threshold
// crossings from constant drive predicted in closed form and invalidated by
// any state change. A single run is strictly sequential; independent runs
// share nothing.
class EventDrivenSim {
public:
    explicit EventDrivenSim(const RecurrentLifNet& net);

    // Schedules an external spike delivery; scheduling into the past of the
    // simulation clock is an error.
    void schedule(double time, std::uint32_t neuron, double weight);

    // Processes events up to `duration`; appends emitted spikes to the record
    // and returns them. May be called repeatedly with increasing horizons.
    const std::vector<SpikeEvent>& run(double duration);

    // Delivers one spike immediately at `time` (exposed for the unit tests of
    // the delivery rule). Returns true when the neuron fired.
    bool deliver(std::uint32_t neuron, double weight, double time);

    double potential(std::uint32_t neuron, double at_time);
    double now() const { return now_; }
    const std::vector<SpikeEvent>& spikes() const { return record_; }

private:
    struct Event {
        double time;
        std::uint64_t seq;
        enum Kind : std::uint8_t { Delivery, Crossing } kind;
        std::uint32_t target;
        double weight;     // Delivery only
        std::uint64_t stamp;  // Crossing only
        bool operator>(const Event& o) const {
            if (time != o.time) return time > o.time;
            return seq > o.seq;
        }
    };

    void advance(std::uint32_t i, double t);
    void emit_spike(std::uint32_t i, double t);
    void refresh_crossing(std::uint32_t i, double t);
    void push(Event e);

    const RecurrentLifNet& net_;
    std::vector<double> v_;
    std::vector<double> last_;
    std::vector<double> refractory_until_;
    std::vector<std::uint64_t> epoch_;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
    std::uint64_t seq_ = 0;
    double now_ = 0.0;
    std::vector<SpikeEvent> record_;
};

// Convenience wrapper: run a network with optional pre-scheduled input
// deliveries for `duration` time units.
std::vector<SpikeEvent> run_network(const RecurrentLifNet& net,
                                    const std::vector<SpikeEvent>& input_spikes,
                                    const std::vector<double>& input_weights, double duration);

// Spike record export, one "neuron_id,time" row per spike.
std::string spikes_to_csv(const std::vector<SpikeEvent>& spikes);

}  // namespace snn
