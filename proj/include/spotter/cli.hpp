#pragma once

// spotter command line: simulate | analyze | flat | search | serve.
// Data goes to `out`, diagnostics to `err`. Exit 0 on success, 1 on data or I/O
// errors, 2 on usage errors.

#include <csignal>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>

#include "spotter/api.hpp"
#include "spotter/bench_sim.hpp"
#include "spotter/callgraph.hpp"
#include "spotter/export.hpp"
#include "spotter/flat_profile.hpp"
#include "spotter/impact.hpp"
#include "spotter/server.hpp"
#include "spotter/trace.hpp"

namespace spotter {

/// Two-space indentation per level; one line per node.
inline void render_text_tree(std::ostream& out, const CallGraphTree& tree, int max_depth = 4) {
    auto walk = [&](auto&& self, const CallGraphNode& n, int depth) -> void {
        out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << n.label << "  total=" << n.total.micros
            << "us  parent=" << n.pct_parent_text << "%  session=" << n.pct_session_text << "%\n";
        if (depth >= max_depth) return;
        for (const auto& c : n.children) self(self, c, depth + 1);
    };
    walk(walk, tree.root, 0);
}

inline std::string node_path(const CallGraphTree& tree, NodeId id) {
    std::string out;
    for (const auto* n : tree.path_to(id)) {
        if (!out.empty()) out += " > ";
        out += n->label;
    }
    return out;
}

namespace detail {

struct SimOverrides {
    std::string scenario = "imbalance";
    std::optional<std::uint64_t> seed;
    std::optional<int> overseers, workers;
    std::optional<std::int64_t> duration, request_interval, work_unit_cost, overload_threshold, overload_window,
        phase_shift, planning_cost;
    std::optional<double> delegation_probability;
    std::optional<std::string> target;

    SimConfig resolve() const {
        SimConfig c = scenario == "imbalance" ? scenario_paper(seed.value_or(1)) : SimConfig{};
        if (seed) c.seed = *seed;
        if (overseers) c.overseers = *overseers;
        if (workers) c.workers = *workers;
        if (duration) c.duration = Duration{*duration};
        if (request_interval) c.request_interval = Duration{*request_interval};
        if (work_unit_cost) c.work_unit_cost = Duration{*work_unit_cost};
        if (overload_threshold) c.overload_threshold = *overload_threshold;
        if (overload_window) c.overload_window = Duration{*overload_window};
        if (phase_shift) c.phase_shift = Duration{*phase_shift};
        if (planning_cost) c.planning_cost = Duration{*planning_cost};
        if (delegation_probability) c.delegation_probability = *delegation_probability;
        if (target) c.target_policy = *target == "round-robin" ? TargetPolicy::RoundRobin : TargetPolicy::Random;
        return c;
    }
};

inline int serve_blocking(const ProfileService& service, const std::string& host, int port,
                          const std::optional<std::string>& ui_dir, std::ostream& out, std::ostream& err) {
    if (ui_dir && !std::filesystem::is_directory(*ui_dir)) {
        err << "error: UI directory '" << *ui_dir << "' does not exist\n";
        return 1;
    }
    auto server = make_server(service, ui_dir);
    int bound = port;
    if (port == 0) {
        bound = server->bind_to_any_port(host);
        if (bound < 0) {
            err << "error: cannot bind " << host << "\n";
            return 1;
        }
    } else if (!server->bind_to_port(host, port)) {
        err << "error: cannot bind " << host << ":" << port << " (port busy?)\n";
        return 1;
    }

    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    sigset_t previous;
    pthread_sigmask(SIG_BLOCK, &set, &previous);

    std::thread worker([&] { server->listen_after_bind(); });
    server->wait_until_ready();
    out << "listening on http://" << host << ":" << bound << "/" << std::endl;

    bool interrupted = false;
    while (server->is_running()) {
        timespec wait{0, 200'000'000};
        const int sig = sigtimedwait(&set, nullptr, &wait);
        if (sig == SIGINT || sig == SIGTERM) {
            interrupted = true;
            break;
        }
    }
    server->stop();
    worker.join();
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    if (interrupted) out << "shutting down" << std::endl;
    return interrupted ? 0 : 1;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Message-impact profiler for multi-agent execution traces", "spotter"};
    app.require_subcommand(1);

    detail::SimOverrides sim;
    std::string out_path;
    auto* simulate_cmd = app.add_subcommand("simulate", "Run the overseer/worker benchmark and write a snapshot");
    simulate_cmd->add_option("--seed", sim.seed, "RNG seed");
    simulate_cmd->add_option("--out", out_path, "Snapshot file to write")->required();
    simulate_cmd->add_option("--scenario", sim.scenario, "Base configuration")
        ->check(CLI::IsMember({"imbalance", "basic"}))
        ->capture_default_str();
    simulate_cmd->add_option("--overseers", sim.overseers);
    simulate_cmd->add_option("--workers", sim.workers);
    simulate_cmd->add_option("--duration", sim.duration, "Session length in microseconds");
    simulate_cmd->add_option("--request-interval", sim.request_interval, "Microseconds between overseer ticks");
    simulate_cmd->add_option("--work-unit-cost", sim.work_unit_cost, "Microseconds per work unit");
    simulate_cmd->add_option("--overload-threshold", sim.overload_threshold, "Work units");
    simulate_cmd->add_option("--overload-window", sim.overload_window, "Microseconds");
    simulate_cmd->add_option("--delegation-probability", sim.delegation_probability);
    simulate_cmd->add_option("--phase-shift", sim.phase_shift, "Microseconds between overseer schedules");
    simulate_cmd->add_option("--planning-cost", sim.planning_cost, "Microseconds logged per request issued");
    simulate_cmd->add_option("--target", sim.target, "Worker selection")
        ->check(CLI::IsMember({"random", "round-robin"}));

    std::string snapshot_path;
    std::string order_text = "emitter,receiver,content";
    std::string format = "text";
    int depth = 4;
    auto add_snapshot = [&](CLI::App* cmd) {
        cmd->add_option("snapshot", snapshot_path, "Snapshot file")->envname("SPOTTER_SNAPSHOT")->required();
    };

    auto* analyze_cmd = app.add_subcommand("analyze", "Print the call-graph tree");
    add_snapshot(analyze_cmd);
    analyze_cmd->add_option("--order", order_text, "Middle level order, e.g. receiver,emitter,content")
        ->capture_default_str();
    analyze_cmd->add_option("--format", format, "text, structured or table")
        ->check(CLI::IsMember({"text", "structured", "table"}))
        ->capture_default_str();
    analyze_cmd->add_option("--depth", depth, "Deepest level printed in text format")
        ->check(CLI::Range(0, 4))
        ->capture_default_str();

    auto* flat_cmd = app.add_subcommand("flat", "Print the per-agent flat profile");
    add_snapshot(flat_cmd);

    std::string keyword;
    auto* search_cmd = app.add_subcommand("search", "Find call-graph nodes whose label contains a keyword");
    search_cmd->add_option("keyword", keyword, "Case-insensitive keyword")->required();
    add_snapshot(search_cmd);
    search_cmd->add_option("--order", order_text)->capture_default_str();

    int port = 8080;
    std::string host = "127.0.0.1";
    std::optional<std::string> ui_dir;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API and explorer UI");
    add_snapshot(serve_cmd);
    serve_cmd->add_option("--port", port, "TCP port, 0 picks a free one")->capture_default_str();
    serve_cmd->add_option("--host", host)->capture_default_str();
    serve_cmd->add_option("--ui-dir", ui_dir, "Directory with the explorer UI's static assets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        if (simulate_cmd->parsed()) {
            const auto snap = simulate(sim.resolve());
            write_snapshot(snap, out_path);
            out << "wrote " << out_path << ": " << snap.agents.size() << " agents, " << snap.messages.size()
                << " messages, " << snap.activities.size() << " activities\n";
            return 0;
        }
        if (analyze_cmd->parsed()) {
            const auto order = LevelOrder::parse(order_text);
            const auto snap = read_snapshot(snapshot_path);
            const auto tree = build_tree(snap, compute_impact_table(snap), order);
            if (format == "structured") {
                out << export_tree(tree, ExportFormat::Structured);
            } else if (format == "table") {
                out << export_tree(tree, ExportFormat::Tabular);
            } else {
                render_text_tree(out, tree, depth);
            }
            return 0;
        }
        if (flat_cmd->parsed()) {
            const auto snap = read_snapshot(snapshot_path);
            write_flat_table(out, flat_profile(snap, compute_impact_table(snap)));
            return 0;
        }
        if (search_cmd->parsed()) {
            if (keyword.empty()) {
                err << "usage error: keyword must not be empty\n";
                return 2;
            }
            const auto order = LevelOrder::parse(order_text);
            const auto snap = read_snapshot(snapshot_path);
            const auto tree = build_tree(snap, compute_impact_table(snap), order);
            const auto r = search(tree, keyword);
            out << r.count << (r.count == 1 ? " match" : " matches") << "\n";
            for (auto id : r.node_ids) out << "[" << id << "] " << node_path(tree, id) << "\n";
            return 0;
        }
        if (serve_cmd->parsed()) {
            ProfileService service(read_snapshot(snapshot_path));
            return detail::serve_blocking(service, host, port, ui_dir, out, err);
        }
    } catch (const OrderError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace spotter
