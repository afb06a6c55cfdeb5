#pragma once

#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "spotter/callgraph.hpp"

namespace spotter {

enum class ExportFormat { Structured, Tabular };

namespace detail {

inline nlohmann::ordered_json rational_json(const Rational& r, const std::string& text) {
    return {{"num", r.num}, {"den", r.den}, {"text", text}};
}

inline nlohmann::ordered_json node_json(const CallGraphNode& n, const std::vector<LeafRecord>& leaves) {
    nlohmann::ordered_json j;
    j["node_id"] = n.node_id;
    j["level"] = std::string(to_string(n.level));
    j["label"] = n.label;
    j["key"] = n.key;
    j["total_micros"] = n.total.micros;
    j["pct_parent"] = rational_json(n.pct_parent, n.pct_parent_text);
    j["pct_session"] = rational_json(n.pct_session, n.pct_session_text);
    if (n.msg_id) {
        auto it = std::lower_bound(leaves.begin(), leaves.end(), *n.msg_id,
                                   [](const LeafRecord& l, MessageId id) { return l.msg_id < id; });
        j["msg_id"] = *n.msg_id;
        if (it != leaves.end() && it->msg_id == *n.msg_id) {
            j["emitter"] = it->emitter;
            j["receiver"] = it->receiver;
            j["performative"] = it->performative;
            j["content"] = it->content;
            j["sent_micros"] = it->sent.micros;
            j["recv_micros"] = it->recv.micros;
        }
    }
    auto children = nlohmann::ordered_json::array();
    for (const auto& c : n.children) children.push_back(node_json(c, leaves));
    j["children"] = std::move(children);
    return j;
}

inline CallGraphNode node_from_json(const nlohmann::json& j, std::vector<LeafRecord>& leaves) {
    CallGraphNode n;
    n.node_id = j.at("node_id").get<NodeId>();
    auto level = parse_level(j.at("level").get<std::string>());
    if (!level) throw std::invalid_argument("unknown level in tree document");
    n.level = *level;
    n.label = j.at("label").get<std::string>();
    n.key = j.at("key").get<std::string>();
    n.total = Duration{j.at("total_micros").get<std::int64_t>()};
    const auto& pp = j.at("pct_parent");
    n.pct_parent = Rational{pp.at("num").get<std::int64_t>(), pp.at("den").get<std::int64_t>()};
    n.pct_parent_text = pp.at("text").get<std::string>();
    const auto& ps = j.at("pct_session");
    n.pct_session = Rational{ps.at("num").get<std::int64_t>(), ps.at("den").get<std::int64_t>()};
    n.pct_session_text = ps.at("text").get<std::string>();
    if (j.contains("msg_id")) {
        n.msg_id = j.at("msg_id").get<MessageId>();
        leaves.push_back(LeafRecord{*n.msg_id, j.at("emitter").get<std::string>(), j.at("receiver").get<std::string>(),
                                    j.at("performative").get<std::string>(), j.at("content").get<std::string>(),
                                    Timestamp{j.at("sent_micros").get<std::int64_t>()},
                                    Timestamp{j.at("recv_micros").get<std::int64_t>()}, n.total});
    }
    for (const auto& c : j.at("children")) n.children.push_back(node_from_json(c, leaves));
    return n;
}

}  // namespace detail

inline nlohmann::ordered_json tree_to_json(const CallGraphTree& tree) {
    nlohmann::ordered_json j;
    j["order"] = tree.order.to_string();
    j["root"] = detail::node_json(tree.root, tree.leaves);
    return j;
}

inline CallGraphTree tree_from_json(const nlohmann::json& j) {
    CallGraphTree tree;
    tree.order = LevelOrder::parse(j.at("order").get<std::string>());
    tree.root = detail::node_from_json(j.at("root"), tree.leaves);
    std::sort(tree.leaves.begin(), tree.leaves.end(),
              [](const LeafRecord& a, const LeafRecord& b) { return a.msg_id < b.msg_id; });
    return tree;
}

/// One row per node in preorder; parent_id -1 marks the root.
inline void write_tree_table(std::ostream& out, const CallGraphTree& tree) {
    out << "node_id\tparent_id\tdepth\tlevel\tkey\ttotal_micros\tpct_parent\tpct_parent_text\tpct_session\t"
           "pct_session_text\tlabel\n";
    auto walk = [&](auto&& self, const CallGraphNode& n, NodeId parent, int depth) -> void {
        out << n.node_id << '\t' << parent << '\t' << depth << '\t' << to_string(n.level) << '\t' << n.key << '\t'
            << n.total.micros << '\t' << n.pct_parent.num << '/' << n.pct_parent.den << '\t' << n.pct_parent_text
            << '\t' << n.pct_session.num << '/' << n.pct_session.den << '\t' << n.pct_session_text << '\t' << n.label
            << '\n';
        for (const auto& c : n.children) self(self, c, n.node_id, depth + 1);
    };
    walk(walk, tree.root, -1, 0);
}

inline std::string export_tree(const CallGraphTree& tree, ExportFormat format) {
    if (format == ExportFormat::Structured) return tree_to_json(tree).dump(2) + "\n";
    std::ostringstream out;
    write_tree_table(out, tree);
    return out.str();
}

inline CallGraphTree parse_tree(std::string_view structured) {
    return tree_from_json(nlohmann::json::parse(structured));
}

}  // namespace spotter
