#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cyclecirc/chain.hpp"
#include "cyclecirc/derived.hpp"
#include "cyclecirc/rng.hpp"

namespace cyclecirc {

// A realized path. For a CTMC, states[k] is occupied on [jump_times[k],
// jump_times[k+1]) and the final holding interval is truncated at the horizon.
struct Trajectory {
    ChainKind kind = ChainKind::dtmc;
    std::vector<int> states;
    std::vector<double> jump_times; // CTMC only; jump_times[0] == 0
    double horizon = 0.0;           // n steps (DTMC) or t_max (CTMC)
};

Trajectory simulate_dtmc(const DtmcSpec& chain, int start, long long n_steps, Philox& rng);
Trajectory simulate_ctmc(const CtmcSpec& chain, int start, double t_max, Philox& rng);

struct TimedEvent {
    double time; // step index (DTMC) or jump time (CTMC)
    Cycle cycle;
};

struct EventLog {
    std::vector<TimedEvent> events;
    double horizon = 0.0;
};

// Pops cycles from the (embedded) state sequence; keeps events whose cycle is
// in `watched`, or every event when `watched` is empty.
EventLog extract_events(const Trajectory& traj, const std::vector<Cycle>& watched);

// Counts of each requested cycle and of its conjugate up to time t, plus the
// derived empirical circulations J = N/t and net circulations K = J - J(conj).
struct CirculationSample {
    double t = 0.0;
    std::vector<long long> counts;           // N^c_t per requested cycle
    std::vector<long long> conjugate_counts; // N^{c-}_t per requested cycle

    double circulation(int k) const { return static_cast<double>(counts[static_cast<std::size_t>(k)]) / t; }
    double net_circulation(int k) const {
        return static_cast<double>(counts[static_cast<std::size_t>(k)] -
                                   conjugate_counts[static_cast<std::size_t>(k)]) / t;
    }
};

CirculationSample circulations(const EventLog& log, const std::vector<Cycle>& cycles, double t);

// Streaming simulation: generates the chain and feeds the derived chain one
// state at a time, invoking on_event(time, cycle) for every popped cycle.
// Returns the number of transitions taken. Never stores the path.
long long stream_events(const ChainSpec& chain, int start, double horizon, Philox& rng,
                        const std::function<void(double, const Cycle&)>& on_event);

// Runs the chain until the first cycle of `watched` is popped.
struct FirstEvent {
    int which = -1;   // index into `watched`
    double time = 0;  // step (DTMC) or jump time (CTMC)
};
std::optional<FirstEvent> sample_first_event(const ChainSpec& chain, const std::vector<Cycle>& watched,
                                             int start, Philox& rng, long long max_steps);

struct BatchOptions {
    long long replicas = 1;
    std::uint64_t seed = 0;
    int workers = 0;          // 0: CYCLECIRC_THREADS env or hardware concurrency
    bool keep_events = false; // retain per-replica event logs (for CSV export)
};

struct BatchResult {
    std::vector<CirculationSample> samples; // indexed by replica
    std::vector<EventLog> event_logs;       // empty unless keep_events
};

// Embarrassingly parallel replicas; replica k draws from Philox(seed, k), so
// the result is identical for any worker count. Conjugates of `cycles` are
// tracked automatically so net circulations are always available.
BatchResult batch_sample(const ChainSpec& chain, int start, double horizon,
                         const std::vector<Cycle>& cycles, const BatchOptions& options);

// Worker count actually used for `requested` (0 = auto), capped by the
// CYCLECIRC_THREADS environment variable.
int resolve_workers(int requested);

} // namespace cyclecirc
