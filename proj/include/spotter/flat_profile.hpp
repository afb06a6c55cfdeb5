#pragma once

#include <algorithm>
#include <iomanip>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "spotter/impact.hpp"
#include "spotter/rational.hpp"

namespace spotter {

struct FlatProfileRow {
    AgentId agent;
    std::int64_t msgs_sent = 0;
    std::int64_t msgs_received = 0;
    std::int64_t activity_count = 0;
    Duration total_activity;
    Duration impact_caused;
    Rational pct_session_activity;
    friend bool operator==(const FlatProfileRow&, const FlatProfileRow&) = default;
};

/// One row per registered agent, busiest first (ties by name).
inline std::vector<FlatProfileRow> flat_profile(const Snapshot& s, const ImpactTable& table) {
    std::map<AgentId, FlatProfileRow> rows;
    for (const auto& a : s.agents) rows[a.name].agent = a.name;
    for (const auto& m : s.messages) {
        ++rows.at(m.sender).msgs_sent;
        ++rows.at(m.receiver).msgs_received;
    }
    for (const auto& a : s.activities) {
        auto& r = rows.at(a.agent);
        ++r.activity_count;
        r.total_activity += a.duration;
    }
    for (const auto& e : table.per_emitter) {
        if (auto it = rows.find(e.emitter); it != rows.end()) it->second.impact_caused = e.total;
    }
    std::vector<FlatProfileRow> out;
    out.reserve(rows.size());
    for (auto& [name, r] : rows) {
        r.pct_session_activity = percent(r.total_activity.micros, table.session.total_activity.micros);
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(), [](const FlatProfileRow& a, const FlatProfileRow& b) {
        return a.total_activity > b.total_activity;
    });
    return out;
}

/// Aligned text table with a totals line.
inline void write_flat_table(std::ostream& out, const std::vector<FlatProfileRow>& rows) {
    std::size_t name_w = 5;
    for (const auto& r : rows) name_w = std::max(name_w, r.agent.size());
    auto line = [&](const std::string& agent, const std::string& sent, const std::string& recv,
                    const std::string& acts, const std::string& activity, const std::string& impact,
                    const std::string& pct) {
        out << std::left << std::setw(static_cast<int>(name_w)) << agent << std::right << "  " << std::setw(8) << sent
            << "  " << std::setw(8) << recv << "  " << std::setw(10) << acts << "  " << std::setw(14) << activity
            << "  " << std::setw(14) << impact << "  " << std::setw(8) << pct << '\n';
    };
    line("agent", "sent", "received", "activities", "activity_us", "impact_us", "%act");
    std::int64_t sent = 0, recv = 0, acts = 0, activity = 0, impact = 0;
    std::vector<Rational> shares;
    for (const auto& r : rows) shares.push_back(r.pct_session_activity);
    const auto tenths = apportion_tenths(shares);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        line(r.agent, std::to_string(r.msgs_sent), std::to_string(r.msgs_received), std::to_string(r.activity_count),
             std::to_string(r.total_activity.micros), std::to_string(r.impact_caused.micros), format_tenths(tenths[i]));
        sent += r.msgs_sent;
        recv += r.msgs_received;
        acts += r.activity_count;
        activity += r.total_activity.micros;
        impact += r.impact_caused.micros;
    }
    if (!rows.empty()) {
        line("total", std::to_string(sent), std::to_string(recv), std::to_string(acts), std::to_string(activity),
             std::to_string(impact), activity > 0 ? "100.0" : "0.0");
    }
}

}  // namespace spotter
