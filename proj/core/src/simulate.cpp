#include "cyclecirc/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <map>
#include <thread>

namespace cyclecirc {

namespace {

void check_start(const StateSpace& states, int start) {
    if (!states.contains(start))
        raise("UnknownState", "start state " + std::to_string(start) + " out of range");
}

int sample_row(const SquareMatrix& m, int row, Philox& rng, double total) {
    return rng.next_index([&](int j) { return m(row, j); }, m.size(), total);
}

} // namespace

Trajectory simulate_dtmc(const DtmcSpec& chain, int start, long long n_steps, Philox& rng) {
    check_start(chain.states, start);
    Trajectory traj;
    traj.kind = ChainKind::dtmc;
    traj.horizon = static_cast<double>(n_steps);
    traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
    traj.states.push_back(start);
    int current = start;
    for (long long n = 0; n < n_steps; ++n) {
        current = sample_row(chain.P, current, rng, 1.0);
        traj.states.push_back(current);
    }
    return traj;
}

Trajectory simulate_ctmc(const CtmcSpec& chain, int start, double t_max, Philox& rng) {
    check_start(chain.states, start);
    if (t_max <= 0.0) raise("BadHorizon", "t_max must be positive");
    Trajectory traj;
    traj.kind = ChainKind::ctmc;
    traj.horizon = t_max;
    traj.states.push_back(start);
    traj.jump_times.push_back(0.0);
    int current = start;
    double now = 0.0;
    for (;;) {
        double qi = chain.exit_rate(current);
        if (qi <= 0.0) raise("AbsorbingState", "state " + std::to_string(current) + " has no exit rate");
        double hold = rng.next_exponential(qi);
        if (now + hold > t_max) break; // final partial holding interval is kept
        now += hold;
        current = rng.next_index([&](int j) { return j == current ? 0.0 : chain.Q(current, j); },
                                 chain.Q.size(), qi);
        traj.states.push_back(current);
        traj.jump_times.push_back(now);
    }
    return traj;
}

EventLog extract_events(const Trajectory& traj, const std::vector<Cycle>& watched) {
    EventLog log;
    log.horizon = traj.horizon;
    if (traj.states.empty()) return log;
    int num_states = 1 + *std::max_element(traj.states.begin(), traj.states.end());
    DerivedState y(num_states, traj.states.front());
    for (std::size_t n = 1; n < traj.states.size(); ++n) {
        auto popped = y.advance(traj.states[n]);
        if (!popped) continue;
        if (!watched.empty() && std::find(watched.begin(), watched.end(), *popped) == watched.end())
            continue;
        double time = traj.kind == ChainKind::ctmc ? traj.jump_times[n] : static_cast<double>(n);
        log.events.push_back({time, std::move(*popped)});
    }
    return log;
}

CirculationSample circulations(const EventLog& log, const std::vector<Cycle>& cycles, double t) {
    if (t <= 0.0) raise("BadHorizon", "t must be positive");
    if (t > log.horizon + 1e-12) raise("HorizonExceeded", "t exceeds the log horizon");
    CirculationSample sample;
    sample.t = t;
    sample.counts.assign(cycles.size(), 0);
    sample.conjugate_counts.assign(cycles.size(), 0);
    for (const auto& ev : log.events) {
        if (ev.time > t) continue;
        for (std::size_t k = 0; k < cycles.size(); ++k) {
            if (ev.cycle == cycles[k]) ++sample.counts[k];
            if (ev.cycle == cycles[k].reversed()) ++sample.conjugate_counts[k];
        }
    }
    return sample;
}

long long stream_events(const ChainSpec& chain, int start, double horizon, Philox& rng,
                        const std::function<void(double, const Cycle&)>& on_event) {
    check_start(chain.states(), start);
    DerivedState y(chain.size(), start);
    long long transitions = 0;
    if (chain.kind() == ChainKind::dtmc) {
        const auto& P = chain.dtmc().P;
        long long n_steps = static_cast<long long>(horizon);
        int current = start;
        for (long long n = 1; n <= n_steps; ++n) {
            current = sample_row(P, current, rng, 1.0);
            ++transitions;
            if (auto popped = y.advance(current)) on_event(static_cast<double>(n), *popped);
        }
        return transitions;
    }
    const auto& spec = chain.ctmc();
    int current = start;
    double now = 0.0;
    for (;;) {
        double qi = spec.exit_rate(current);
        if (qi <= 0.0) raise("AbsorbingState", "state " + std::to_string(current) + " has no exit rate");
        double hold = rng.next_exponential(qi);
        if (now + hold > horizon) break;
        now += hold;
        int next = rng.next_index([&](int j) { return j == current ? 0.0 : spec.Q(current, j); },
                                  spec.Q.size(), qi);
        current = next;
        ++transitions;
        if (auto popped = y.advance(current)) on_event(now, *popped);
    }
    return transitions;
}

std::optional<FirstEvent> sample_first_event(const ChainSpec& chain, const std::vector<Cycle>& watched,
                                             int start, Philox& rng, long long max_steps) {
    check_start(chain.states(), start);
    DerivedState y(chain.size(), start);
    int current = start;
    double now = 0.0;
    bool continuous = chain.kind() == ChainKind::ctmc;
    const DtmcSpec emb = chain.embedded();
    for (long long n = 1; n <= max_steps; ++n) {
        if (continuous) {
            double qi = chain.ctmc().exit_rate(current);
            now += rng.next_exponential(qi);
        }
        current = sample_row(emb.P, current, rng, 1.0);
        auto popped = y.advance(current);
        if (!popped) continue;
        auto it = std::find(watched.begin(), watched.end(), *popped);
        if (it == watched.end()) continue;
        return FirstEvent{static_cast<int>(it - watched.begin()),
                          continuous ? now : static_cast<double>(n)};
    }
    return std::nullopt;
}

int resolve_workers(int requested) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    int workers = requested > 0 ? requested : hw;
    if (const char* env = std::getenv("CYCLECIRC_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0) workers = std::min(workers, cap);
    }
    return std::max(1, workers);
}

BatchResult batch_sample(const ChainSpec& chain, int start, double horizon,
                         const std::vector<Cycle>& cycles, const BatchOptions& options) {
    if (options.replicas < 1) raise("BadReplicas", "need at least one replica");
    // Track requested cycles plus conjugates so K is always well-defined.
    std::vector<Cycle> watched = cycles;
    for (const auto& c : cycles) {
        Cycle rev = c.reversed();
        if (std::find(watched.begin(), watched.end(), rev) == watched.end()) watched.push_back(rev);
    }

    BatchResult result;
    result.samples.resize(static_cast<std::size_t>(options.replicas));
    if (options.keep_events) result.event_logs.resize(static_cast<std::size_t>(options.replicas));

    auto run_replica = [&](long long r) {
        Philox rng(options.seed, static_cast<std::uint64_t>(r));
        CirculationSample sample;
        sample.t = horizon;
        sample.counts.assign(cycles.size(), 0);
        sample.conjugate_counts.assign(cycles.size(), 0);
        EventLog* log = options.keep_events ? &result.event_logs[static_cast<std::size_t>(r)] : nullptr;
        if (log) log->horizon = horizon;
        stream_events(chain, start, horizon, rng, [&](double time, const Cycle& c) {
            bool keep = watched.empty();
            for (std::size_t k = 0; k < cycles.size(); ++k) {
                if (c == cycles[k]) {
                    ++sample.counts[k];
                    keep = true;
                }
                if (c == cycles[k].reversed()) {
                    ++sample.conjugate_counts[k];
                    keep = true;
                }
            }
            if (log && (cycles.empty() || keep)) log->events.push_back({time, c});
        });
        result.samples[static_cast<std::size_t>(r)] = std::move(sample);
    };

    int workers = std::min<long long>(resolve_workers(options.workers), options.replicas);
    if (workers <= 1) {
        for (long long r = 0; r < options.replicas; ++r) run_replica(r);
        return result;
    }
    std::atomic<long long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                long long r = next.fetch_add(1);
                if (r >= options.replicas) return;
                run_replica(r);
            }
        });
    for (auto& th : pool) th.join();
    return result;
}

} // namespace cyclecirc
