#pragma once

// Read-only query surface over one loaded snapshot. Every tree for every level
// order is built at construction, so queries never mutate shared state.

#include <charconv>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "spotter/callgraph.hpp"
#include "spotter/export.hpp"
#include "spotter/flat_profile.hpp"
#include "spotter/impact.hpp"
#include "spotter/trace.hpp"

namespace spotter {

struct ApiResponse {
    int status = 200;
    nlohmann::ordered_json body;
};

namespace detail {

inline ApiResponse api_error(int status, const std::string& message) {
    return ApiResponse{status, {{"error", message}}};
}

inline nlohmann::ordered_json flat_node_json(const CallGraphNode& n, std::optional<NodeId> parent, int depth,
                                             const std::vector<LeafRecord>& leaves) {
    nlohmann::ordered_json j;
    j["node_id"] = n.node_id;
    j["parent_id"] = parent ? nlohmann::ordered_json(*parent) : nlohmann::ordered_json(nullptr);
    j["depth"] = depth;
    j["level"] = std::string(to_string(n.level));
    j["label"] = n.label;
    j["key"] = n.key;
    j["total_micros"] = n.total.micros;
    j["pct_parent"] = rational_json(n.pct_parent, n.pct_parent_text);
    j["pct_session"] = rational_json(n.pct_session, n.pct_session_text);
    j["child_count"] = n.children.size();
    if (n.msg_id) {
        j["msg_id"] = *n.msg_id;
        auto it = std::lower_bound(leaves.begin(), leaves.end(), *n.msg_id,
                                   [](const LeafRecord& l, MessageId id) { return l.msg_id < id; });
        if (it != leaves.end() && it->msg_id == *n.msg_id) {
            j["emitter"] = it->emitter;
            j["receiver"] = it->receiver;
            j["performative"] = it->performative;
            j["content"] = it->content;
            j["sent_micros"] = it->sent.micros;
            j["recv_micros"] = it->recv.micros;
        }
    }
    return j;
}

}  // namespace detail

/// Flattened preorder node list with parent ids.
inline nlohmann::ordered_json tree_payload(const CallGraphTree& tree) {
    auto nodes = nlohmann::ordered_json::array();
    auto walk = [&](auto&& self, const CallGraphNode& n, std::optional<NodeId> parent, int depth) -> void {
        nodes.push_back(detail::flat_node_json(n, parent, depth, tree.leaves));
        for (const auto& c : n.children) self(self, c, n.node_id, depth + 1);
    };
    walk(walk, tree.root, std::nullopt, 0);
    return {{"order", tree.order.to_string()}, {"nodes", std::move(nodes)}};
}

/// Inverse of tree_payload.
inline CallGraphTree tree_from_payload(const nlohmann::json& payload) {
    const auto& nodes = payload.at("nodes");
    if (nodes.empty()) throw std::invalid_argument("tree payload has no nodes");
    // Preorder with parent ids: rebuild nested children from the flat list.
    nlohmann::json nested = nlohmann::json::array();
    std::map<NodeId, nlohmann::json> by_id;
    std::vector<NodeId> order;
    for (const auto& n : nodes) {
        nlohmann::json copy = n;
        copy["children"] = nlohmann::json::array();
        by_id[n.at("node_id").get<NodeId>()] = std::move(copy);
        order.push_back(n.at("node_id").get<NodeId>());
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        auto& n = by_id.at(*it);
        if (n.at("parent_id").is_null()) continue;
        auto& parent = by_id.at(n.at("parent_id").get<NodeId>());
        parent["children"].insert(parent["children"].begin(), n);
    }
    nlohmann::json doc{{"order", payload.at("order")}, {"root", by_id.at(order.front())}};
    return tree_from_json(doc);
}

class ProfileService {
  public:
    explicit ProfileService(Snapshot snapshot)
        : snapshot_(std::make_shared<const Snapshot>(std::move(snapshot))),
          table_(compute_impact_table(*snapshot_)) {
        const auto base = build_tree(*snapshot_, table_);
        for (const auto& order : LevelOrder::all()) trees_.emplace(order.to_string(), pivot(base, order));
    }

    const Snapshot& snapshot() const { return *snapshot_; }
    const ImpactTable& table() const { return table_; }

    /// Throws OrderError for malformed order text.
    const CallGraphTree& tree(std::string_view order_text) const {
        const auto order = order_text.empty() ? LevelOrder{} : LevelOrder::parse(order_text);
        return trees_.at(order.to_string());
    }

    ApiResponse get_session() const {
        const auto& s = *snapshot_;
        std::vector<std::string> names;
        for (const auto& a : s.agents) names.push_back(a.name);
        std::sort(names.begin(), names.end());
        nlohmann::ordered_json j;
        j["session_id"] = s.header.session_id;
        j["capture_date"] = s.header.capture_date.to_string();
        j["duration_micros"] = s.header.duration.micros;
        j["label"] = session_label(s.header);
        j["agents"] = names;
        j["counts"] = {{"agents", s.agents.size()},
                       {"messages", s.messages.size()},
                       {"activities", s.activities.size()}};
        j["total_impact_micros"] = table_.session.total_impact.micros;
        j["total_activity_micros"] = table_.session.total_activity.micros;
        j["pre_message_activity_micros"] = table_.session.pre_message_activity.micros;
        return {200, std::move(j)};
    }

    ApiResponse get_tree(std::string_view order_text) const {
        try {
            return {200, tree_payload(tree(order_text))};
        } catch (const OrderError& e) {
            return detail::api_error(400, e.what());
        }
    }

    ApiResponse get_search(std::string_view q, std::string_view order_text) const {
        if (q.empty()) return detail::api_error(400, "query parameter 'q' must not be empty");
        try {
            const auto r = search(tree(order_text), q);
            return {200, {{"query", std::string(q)}, {"count", r.count}, {"node_ids", r.node_ids}}};
        } catch (const OrderError& e) {
            return detail::api_error(400, e.what());
        }
    }

    ApiResponse get_visible(std::string_view selected_text, std::string_view order_text) const {
        const auto id = parse_id(selected_text);
        if (!id) return detail::api_error(400, "invalid node id '" + std::string(selected_text) + "'");
        try {
            const auto v = visible_set(tree(order_text), *id);
            return {200, {{"selected", *id}, {"node_ids", std::vector<NodeId>(v.begin(), v.end())}}};
        } catch (const OrderError& e) {
            return detail::api_error(400, e.what());
        } catch (const NodeError& e) {
            return detail::api_error(404, e.what());
        }
    }

    ApiResponse get_node(std::string_view id_text, std::string_view order_text) const {
        const auto id = parse_id(id_text);
        if (!id) return detail::api_error(400, "invalid node id '" + std::string(id_text) + "'");
        const CallGraphTree* t = nullptr;
        try {
            t = &tree(order_text);
        } catch (const OrderError& e) {
            return detail::api_error(400, e.what());
        }
        const auto path = t->path_to(*id);
        if (path.empty()) return detail::api_error(404, "unknown node id " + std::to_string(*id));
        const auto& n = *path.back();
        std::optional<NodeId> parent;
        if (path.size() > 1) parent = path[path.size() - 2]->node_id;
        auto j = detail::flat_node_json(n, parent, static_cast<int>(path.size() - 1), t->leaves);
        std::vector<NodeId> ancestry, children;
        for (const auto* p : path) ancestry.push_back(p->node_id);
        for (const auto& c : n.children) children.push_back(c.node_id);
        j["path"] = ancestry;
        j["children"] = children;
        if (n.level == Level::Session) {
            j["session"] = get_session().body;
        }
        if (n.msg_id) {
            auto it = std::find_if(snapshot_->messages.begin(), snapshot_->messages.end(),
                                   [&](const MessageRecord& m) { return m.msg_id == *n.msg_id; });
            if (it != snapshot_->messages.end()) {
                j["message"] = {{"msg_id", it->msg_id},       {"seq", it->seq},
                                {"sender", it->sender},       {"receiver", it->receiver},
                                {"performative", it->performative}, {"content", it->content},
                                {"sent_micros", it->sent_ts.micros}, {"recv_micros", it->recv_ts.micros}};
            }
            if (const auto* mi = table_.find_message(*n.msg_id)) {
                j["window"] = {{"start_micros", mi->window_start.micros},
                               {"end_micros", mi->window_end.micros},
                               {"open_ended", mi->open_ended},
                               {"activity_count", mi->activity_count}};
            }
        }
        return {200, std::move(j)};
    }

    ApiResponse get_flat() const {
        auto rows = nlohmann::ordered_json::array();
        for (const auto& r : flat_profile(*snapshot_, table_)) {
            rows.push_back({{"agent", r.agent},
                            {"msgs_sent", r.msgs_sent},
                            {"msgs_received", r.msgs_received},
                            {"activity_count", r.activity_count},
                            {"total_activity_micros", r.total_activity.micros},
                            {"impact_caused_micros", r.impact_caused.micros},
                            {"pct_session_activity",
                             detail::rational_json(r.pct_session_activity, format_percent(r.pct_session_activity))}});
        }
        return {200, {{"rows", std::move(rows)}}};
    }

  private:
    static std::optional<NodeId> parse_id(std::string_view text) {
        NodeId v = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (text.empty() || ec != std::errc{} || p != text.data() + text.size()) return std::nullopt;
        return v;
    }

    std::shared_ptr<const Snapshot> snapshot_;
    ImpactTable table_;
    std::map<std::string, CallGraphTree> trees_;
};

}  // namespace spotter
