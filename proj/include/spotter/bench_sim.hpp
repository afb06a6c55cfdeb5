#pragma once

// Discrete-event simulation of an overseer/worker agent benchmark.
//
// Overseers tick every request_interval and ask a worker for a small, medium or
// large task. A worker refuses a request when the work units it accepted within
// the trailing overload_window already exceed overload_threshold. An overseer may
// instead send `delegate`, after which the worker issues requests of its own for
// three request intervals. Latency is one microsecond on every message.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "spotter/trace.hpp"

namespace spotter {

class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

enum class TargetPolicy { Random, RoundRobin };

struct TaskSizes {
    std::int64_t small = 1;
    std::int64_t medium = 5;
    std::int64_t large = 20;
};

struct SimConfig {
    std::uint64_t seed = 1;
    int overseers = 2;
    int workers = 3;
    Duration duration{1'000'000};
    TaskSizes task_sizes;
    Duration work_unit_cost{100};
    std::int64_t overload_threshold = 10;
    Duration overload_window{2'000};
    double delegation_probability = 0.05;
    Duration request_interval{1'000};
    /// Overseer i first ticks at i * phase_shift.
    Duration phase_shift{0};
    TargetPolicy target_policy = TargetPolicy::Random;
    /// Logged by an agent each time it issues a request; 0 disables.
    Duration planning_cost{0};
    CaptureDate capture_date{2009, 5, 12, 14, 0, 0, false};
};

inline constexpr Duration kMessageLatency{1};
inline constexpr int kDelegatedIntervals = 3;

inline std::string overseer_name(int i) { return "master" + std::to_string(i + 1); }

inline std::string worker_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "agent%03d", i + 1);
    return buf;
}

inline void validate_config(const SimConfig& c) {
    auto fail = [](const std::string& what) { throw ConfigError("invalid simulation config: " + what); };
    if (c.overseers < 1) fail("overseers must be >= 1");
    if (c.workers < 1) fail("workers must be >= 1");
    if (c.duration.micros < 1) fail("duration must be >= 1");
    if (c.request_interval.micros < 1) fail("request_interval must be >= 1");
    if (c.work_unit_cost.micros < 0) fail("work_unit_cost must be >= 0");
    if (c.task_sizes.small < 1 || c.task_sizes.medium < 1 || c.task_sizes.large < 1) fail("task sizes must be >= 1");
    if (c.overload_threshold < 0) fail("overload_threshold must be >= 0");
    if (c.overload_window.micros < 0) fail("overload_window must be >= 0");
    if (!(c.delegation_probability >= 0.0 && c.delegation_probability <= 1.0)) {
        fail("delegation_probability must be in [0, 1]");
    }
    if (c.phase_shift.micros < 0) fail("phase_shift must be >= 0");
    if (c.planning_cost.micros < 0) fail("planning_cost must be >= 0");
}

namespace detail {

class Simulation {
  public:
    explicit Simulation(const SimConfig& c) : cfg_(c), rng_(c.seed), workers_(static_cast<std::size_t>(c.workers)) {}

    Snapshot run() {
        snap_.header = SessionHeader{"bench-" + std::to_string(cfg_.seed), cfg_.capture_date, cfg_.duration};
        for (int i = 0; i < cfg_.overseers; ++i) snap_.agents.push_back({next_seq_++, overseer_name(i)});
        for (int i = 0; i < cfg_.workers; ++i) snap_.agents.push_back({next_seq_++, worker_name(i)});
        round_robin_.assign(static_cast<std::size_t>(cfg_.overseers), 0);

        for (int i = 0; i < cfg_.overseers; ++i) {
            const auto t = static_cast<std::int64_t>(i) * cfg_.phase_shift.micros;
            if (t <= cfg_.duration.micros) schedule(t, Kind::OverseerTick, i);
        }
        while (!queue_.empty()) {
            const Event e = queue_.top();
            queue_.pop();
            switch (e.kind) {
                case Kind::OverseerTick: overseer_tick(e); break;
                case Kind::DelegateTick: delegate_tick(e); break;
                case Kind::Deliver: deliver(e); break;
            }
        }
        return normalize(std::move(snap_));
    }

  private:
    enum class Kind { OverseerTick, DelegateTick, Deliver };

    struct Event {
        std::int64_t time;
        std::uint64_t order;
        Kind kind;
        int index;
        friend bool operator>(const Event& a, const Event& b) {
            return a.time != b.time ? a.time > b.time : a.order > b.order;
        }
    };

    struct Pending {
        MessageRecord record;
        std::int64_t units = 0;
    };

    struct Accepted {
        std::int64_t time;
        std::int64_t units;
    };

    struct WorkerState {
        std::deque<Accepted> history;
        std::int64_t delegated_until = -1;
        bool delegate_ticking = false;
    };

    void schedule(std::int64_t t, Kind k, int index) { queue_.push(Event{t, next_order_++, k, index}); }

    // Raw engine output mapped by hand so the stream is identical across standard libraries.
    std::uint64_t below(std::uint64_t n) { return rng_() % n; }
    bool chance(double p) { return static_cast<double>(rng_() >> 11) * 0x1.0p-53 < p; }

    std::int64_t pick_units() {
        switch (below(3)) {
            case 0: return cfg_.task_sizes.small;
            case 1: return cfg_.task_sizes.medium;
            default: return cfg_.task_sizes.large;
        }
    }

    void log_activity(const AgentId& agent, std::int64_t t, Duration d, std::string description) {
        snap_.activities.push_back(ActivityRecord{next_seq_++, agent, Timestamp{t}, d, std::move(description)});
    }

    void send(const AgentId& from, const AgentId& to, std::int64_t t, std::string performative, std::string content,
              std::int64_t units) {
        const auto arrival = t + kMessageLatency.micros;
        if (arrival > cfg_.duration.micros) return;
        Pending p;
        p.record.msg_id = next_msg_id_++;
        p.record.sender = from;
        p.record.receiver = to;
        p.record.sent_ts = Timestamp{t};
        p.record.recv_ts = Timestamp{arrival};
        p.record.performative = std::move(performative);
        p.record.content = std::move(content);
        p.units = units;
        pending_.push_back(std::move(p));
        schedule(arrival, Kind::Deliver, static_cast<int>(pending_.size() - 1));
    }

    void send_request(const AgentId& from, int worker, std::int64_t t) {
        const auto units = pick_units();
        send(from, worker_name(worker), t, "request", "pleaseDoThing(" + std::to_string(units) + ")", units);
    }

    int choose_worker(int overseer) {
        if (cfg_.target_policy == TargetPolicy::RoundRobin) {
            auto& next = round_robin_[static_cast<std::size_t>(overseer)];
            const int w = next;
            next = (next + 1) % cfg_.workers;
            return w;
        }
        return static_cast<int>(below(static_cast<std::uint64_t>(cfg_.workers)));
    }

    void overseer_tick(const Event& e) {
        const auto name = overseer_name(e.index);
        if (cfg_.planning_cost.micros > 0) log_activity(name, e.time, cfg_.planning_cost, "plan");
        const int w = choose_worker(e.index);
        if (cfg_.delegation_probability > 0.0 && chance(cfg_.delegation_probability)) {
            const auto period = kDelegatedIntervals * cfg_.request_interval.micros;
            send(name, worker_name(w), e.time, "delegate", "overseeFor(" + std::to_string(period) + ")", 0);
        } else {
            send_request(name, w, e.time);
        }
        const auto next = e.time + cfg_.request_interval.micros;
        if (next <= cfg_.duration.micros) schedule(next, Kind::OverseerTick, e.index);
    }

    void delegate_tick(const Event& e) {
        auto& st = workers_[static_cast<std::size_t>(e.index)];
        if (e.time > st.delegated_until) {
            st.delegate_ticking = false;
            return;
        }
        const auto name = worker_name(e.index);
        if (cfg_.workers > 1) {
            if (cfg_.planning_cost.micros > 0) log_activity(name, e.time, cfg_.planning_cost, "plan");
            auto target = static_cast<int>(below(static_cast<std::uint64_t>(cfg_.workers - 1)));
            if (target >= e.index) ++target;
            send_request(name, target, e.time);
        }
        const auto next = e.time + cfg_.request_interval.micros;
        if (next <= st.delegated_until && next <= cfg_.duration.micros) {
            schedule(next, Kind::DelegateTick, e.index);
        } else {
            st.delegate_ticking = false;
        }
    }

    void deliver(const Event& e) {
        auto& p = pending_[static_cast<std::size_t>(e.index)];
        p.record.seq = next_seq_++;
        const auto receiver = p.record.receiver;
        const auto perf = p.record.performative;
        snap_.messages.push_back(p.record);

        const int w = worker_index(receiver);
        if (w < 0) return;
        auto& st = workers_[static_cast<std::size_t>(w)];
        if (perf == "request") {
            while (!st.history.empty() && st.history.front().time <= e.time - cfg_.overload_window.micros) {
                st.history.pop_front();
            }
            std::int64_t recent = 0;
            for (const auto& a : st.history) recent += a.units;
            if (recent > cfg_.overload_threshold) return;
            st.history.push_back({e.time, p.units});
            log_activity(receiver, e.time, Duration{p.units * cfg_.work_unit_cost.micros},
                         "doThing(" + std::to_string(p.units) + ")");
        } else if (perf == "delegate") {
            const auto until = e.time + kDelegatedIntervals * cfg_.request_interval.micros;
            st.delegated_until = std::max(st.delegated_until, until);
            if (!st.delegate_ticking) {
                st.delegate_ticking = true;
                const auto first = e.time + cfg_.request_interval.micros;
                if (first <= cfg_.duration.micros) {
                    schedule(first, Kind::DelegateTick, w);
                } else {
                    st.delegate_ticking = false;
                }
            }
        }
    }

    int worker_index(const AgentId& name) const {
        for (int i = 0; i < cfg_.workers; ++i) {
            if (worker_name(i) == name) return i;
        }
        return -1;
    }

    SimConfig cfg_;
    std::mt19937_64 rng_;
    std::vector<WorkerState> workers_;
    std::vector<int> round_robin_;
    std::vector<Pending> pending_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    Snapshot snap_;
    SeqNo next_seq_ = 0;
    MessageId next_msg_id_ = 1;
    std::uint64_t next_order_ = 0;
};

}  // namespace detail

inline Snapshot simulate(const SimConfig& config) {
    validate_config(config);
    return detail::Simulation(config).run();
}

/// Two overseers on a shared round-robin schedule, master2 one microsecond behind
/// master1, so master2's requests tend to land on a worker master1 just loaded.
inline SimConfig scenario_paper(std::uint64_t seed) {
    SimConfig c;
    c.seed = seed;
    c.overseers = 2;
    c.workers = 3;
    c.duration = Duration{3'000'000};
    c.request_interval = Duration{10'000};
    c.phase_shift = Duration{1};
    c.work_unit_cost = Duration{250};
    c.overload_threshold = 10;
    c.overload_window = Duration{5'000};
    c.delegation_probability = 0.02;
    c.target_policy = TargetPolicy::RoundRobin;
    c.planning_cost = Duration{20};
    return c;
}

}  // namespace spotter
