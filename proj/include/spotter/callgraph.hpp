#pragma once

// Fixed-depth call-graph tree:
//   session -> three pivotable middle levels -> message leaves
// The default middle order is emitter, receiver, content.

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spotter/impact.hpp"
#include "spotter/rational.hpp"
#include "spotter/trace.hpp"

namespace spotter {

enum class Level { Session, Emitter, Receiver, Content, Message };

inline std::string_view to_string(Level l) {
    switch (l) {
        case Level::Session: return "session";
        case Level::Emitter: return "emitter";
        case Level::Receiver: return "receiver";
        case Level::Content: return "content";
        case Level::Message: return "message";
    }
    return "?";
}

inline std::optional<Level> parse_level(std::string_view s) {
    for (auto l : {Level::Session, Level::Emitter, Level::Receiver, Level::Content, Level::Message}) {
        if (to_string(l) == s) return l;
    }
    return std::nullopt;
}

class OrderError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A permutation of the three middle levels.
class LevelOrder {
  public:
    LevelOrder() = default;

    explicit LevelOrder(std::array<Level, 3> levels) : levels_(levels) {
        std::set<Level> seen(levels.begin(), levels.end());
        const bool middle_only = std::all_of(levels.begin(), levels.end(), [](Level l) {
            return l == Level::Emitter || l == Level::Receiver || l == Level::Content;
        });
        if (seen.size() != 3 || !middle_only) {
            throw OrderError("level order must be a permutation of emitter, receiver, content");
        }
    }

    /// Parses "receiver,emitter,content".
    static LevelOrder parse(std::string_view text) {
        std::array<Level, 3> out{};
        std::size_t n = 0;
        while (true) {
            auto comma = text.find(',');
            auto part = text.substr(0, comma);
            auto level = parse_level(part);
            if (!level || *level == Level::Session || *level == Level::Message) {
                throw OrderError("unknown level '" + std::string(part) + "' in order");
            }
            if (n == 3) throw OrderError("level order has more than three levels");
            out[n++] = *level;
            if (comma == std::string_view::npos) break;
            text.remove_prefix(comma + 1);
        }
        if (n != 3) throw OrderError("level order needs exactly three levels");
        return LevelOrder(out);
    }

    static std::vector<LevelOrder> all() {
        std::array<Level, 3> l{Level::Emitter, Level::Receiver, Level::Content};
        std::sort(l.begin(), l.end());
        std::vector<LevelOrder> out;
        do {
            out.emplace_back(l);
        } while (std::next_permutation(l.begin(), l.end()));
        return out;
    }

    Level operator[](std::size_t i) const { return levels_.at(i); }
    const std::array<Level, 3>& levels() const { return levels_; }

    /// Depth of a middle level in the tree (1..3).
    std::size_t depth_of(Level l) const {
        for (std::size_t i = 0; i < 3; ++i) {
            if (levels_[i] == l) return i + 1;
        }
        return l == Level::Session ? 0 : 4;
    }

    std::string to_string() const {
        std::string out;
        for (std::size_t i = 0; i < 3; ++i) {
            if (i) out += ',';
            out += spotter::to_string(levels_[i]);
        }
        return out;
    }

    friend bool operator==(const LevelOrder&, const LevelOrder&) = default;

  private:
    std::array<Level, 3> levels_{Level::Emitter, Level::Receiver, Level::Content};
};

/// What a leaf needs to be regrouped under any order.
struct LeafRecord {
    MessageId msg_id = 0;
    AgentId emitter;
    AgentId receiver;
    std::string performative;
    std::string content;
    Timestamp sent;
    Timestamp recv;
    Duration impact;

    std::string content_key() const { return performative + ": " + content; }
    friend bool operator==(const LeafRecord&, const LeafRecord&) = default;
};

using NodeId = std::int64_t;

struct CallGraphNode {
    NodeId node_id = 0;
    Level level = Level::Session;
    std::string label;
    /// Grouping key: agent name, content key, or msg_id for leaves.
    std::string key;
    Duration total;
    Rational pct_parent;
    Rational pct_session;
    std::string pct_parent_text;
    std::string pct_session_text;
    std::optional<MessageId> msg_id;
    std::vector<CallGraphNode> children;

    friend bool operator==(const CallGraphNode&, const CallGraphNode&) = default;
};

struct CallGraphTree {
    CallGraphNode root;
    LevelOrder order;
    /// Leaves sorted by msg_id; retained so the tree can be pivoted on its own.
    std::vector<LeafRecord> leaves;

    friend bool operator==(const CallGraphTree&, const CallGraphTree&) = default;

    /// Preorder ids make children's ids ascending, so lookup walks one path.
    const CallGraphNode* find(NodeId id) const {
        const CallGraphNode* n = &root;
        while (n->node_id != id) {
            if (n->children.empty() || id < n->node_id) return nullptr;
            auto it = std::upper_bound(n->children.begin(), n->children.end(), id,
                                       [](NodeId v, const CallGraphNode& c) { return v < c.node_id; });
            if (it == n->children.begin()) return nullptr;
            n = &*std::prev(it);
        }
        return n;
    }

    /// Root-to-node chain, empty when the id is unknown.
    std::vector<const CallGraphNode*> path_to(NodeId id) const {
        std::vector<const CallGraphNode*> path;
        if (!find(id)) return path;
        const CallGraphNode* n = &root;
        path.push_back(n);
        while (n->node_id != id) {
            auto it = std::upper_bound(n->children.begin(), n->children.end(), id,
                                       [](NodeId v, const CallGraphNode& c) { return v < c.node_id; });
            n = &*std::prev(it);
            path.push_back(n);
        }
        return path;
    }

    std::size_t node_count() const {
        std::size_t count = 0;
        auto walk = [&](auto&& self, const CallGraphNode& n) -> void {
            ++count;
            for (const auto& c : n.children) self(self, c);
        };
        walk(walk, root);
        return count;
    }
};

class NodeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

inline std::string session_label(const SessionHeader& h) {
    return h.capture_date.to_string() + " - " + std::to_string(h.duration.micros);
}

inline std::string message_label(Timestamp sent, Timestamp recv) {
    return "sent: " + std::to_string(sent.micros) + " rec: " + std::to_string(recv.micros);
}

namespace detail {

inline const std::string& group_key(const LeafRecord& leaf, Level l, std::string& scratch) {
    switch (l) {
        case Level::Emitter: return leaf.emitter;
        case Level::Receiver: return leaf.receiver;
        default: scratch = leaf.content_key(); return scratch;
    }
}

inline std::string group_label(Level l, const std::string& key) {
    switch (l) {
        case Level::Emitter: return "from: " + key;
        case Level::Receiver: return "to: " + key;
        default: return key;
    }
}

inline void sort_children(CallGraphNode& n) {
    std::sort(n.children.begin(), n.children.end(), [](const CallGraphNode& a, const CallGraphNode& b) {
        if (a.total != b.total) return a.total > b.total;
        if (a.label != b.label) return a.label < b.label;
        if (a.msg_id && b.msg_id) return *a.msg_id < *b.msg_id;
        return a.key < b.key;
    });
}

inline void group(CallGraphNode& node, const std::vector<const LeafRecord*>& leaves, const LevelOrder& order,
                  std::size_t depth) {
    if (depth == 3) {
        for (const auto* leaf : leaves) {
            CallGraphNode c;
            c.level = Level::Message;
            c.label = message_label(leaf->sent, leaf->recv);
            c.key = std::to_string(leaf->msg_id);
            c.total = leaf->impact;
            c.msg_id = leaf->msg_id;
            node.children.push_back(std::move(c));
        }
    } else {
        const Level level = order[depth];
        std::map<std::string, std::vector<const LeafRecord*>> buckets;
        std::string scratch;
        for (const auto* leaf : leaves) buckets[group_key(*leaf, level, scratch)].push_back(leaf);
        for (auto& [key, members] : buckets) {
            CallGraphNode c;
            c.level = level;
            c.key = key;
            c.label = group_label(level, key);
            group(c, members, order, depth + 1);
            node.children.push_back(std::move(c));
        }
    }
    for (const auto& c : node.children) node.total += c.total;
    sort_children(node);
}

inline void number(CallGraphNode& n, NodeId& next) {
    n.node_id = next++;
    for (auto& c : n.children) number(c, next);
}

inline void annotate(CallGraphNode& root) {
    const auto session_total = root.total.micros;
    std::vector<std::vector<CallGraphNode*>> by_depth(5);
    auto walk = [&](auto&& self, CallGraphNode& n, std::size_t depth) -> void {
        by_depth[depth].push_back(&n);
        std::vector<Rational> shares;
        for (auto& c : n.children) {
            c.pct_parent = percent(c.total.micros, n.total.micros);
            shares.push_back(c.pct_parent);
        }
        const auto tenths = apportion_tenths(shares);
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            n.children[i].pct_parent_text = format_tenths(tenths[i]);
            self(self, n.children[i], depth + 1);
        }
    };
    root.pct_parent = Rational{100, 1};
    root.pct_parent_text = "100.0";
    walk(walk, root, 0);

    root.pct_session = Rational{100, 1};
    root.pct_session_text = "100.0";
    for (std::size_t d = 1; d < by_depth.size(); ++d) {
        std::vector<Rational> shares;
        for (auto* n : by_depth[d]) {
            n->pct_session = percent(n->total.micros, session_total);
            shares.push_back(n->pct_session);
        }
        const auto tenths = apportion_tenths(shares);
        for (std::size_t i = 0; i < by_depth[d].size(); ++i) by_depth[d][i]->pct_session_text = format_tenths(tenths[i]);
    }
}

}  // namespace detail

/// Builds a tree straight from leaf records. `leaves` is canonicalized by msg_id.
inline CallGraphTree build_tree_from_leaves(std::string root_label, std::vector<LeafRecord> leaves,
                                            const LevelOrder& order) {
    std::sort(leaves.begin(), leaves.end(),
              [](const LeafRecord& a, const LeafRecord& b) { return a.msg_id < b.msg_id; });
    CallGraphTree tree;
    tree.order = order;
    tree.root.level = Level::Session;
    tree.root.label = std::move(root_label);
    std::vector<const LeafRecord*> all;
    all.reserve(leaves.size());
    for (const auto& l : leaves) all.push_back(&l);
    detail::group(tree.root, all, order, 0);
    NodeId next = 0;
    detail::number(tree.root, next);
    detail::annotate(tree.root);
    tree.leaves = std::move(leaves);
    return tree;
}

inline CallGraphTree build_tree(const Snapshot& s, const ImpactTable& table, const LevelOrder& order = {}) {
    std::unordered_map<MessageId, const MessageRecord*> by_id;
    for (const auto& m : s.messages) by_id.emplace(m.msg_id, &m);
    std::vector<LeafRecord> leaves;
    leaves.reserve(table.per_message.size());
    for (const auto& mi : table.per_message) {
        auto it = by_id.find(mi.msg_id);
        if (it == by_id.end()) throw LookupError("impact table references unknown msg_id " + std::to_string(mi.msg_id));
        const auto& m = *it->second;
        leaves.push_back(LeafRecord{m.msg_id, m.sender, m.receiver, m.performative, m.content, m.sent_ts, m.recv_ts,
                                    mi.impact});
    }
    return build_tree_from_leaves(session_label(s.header), std::move(leaves), order);
}

inline CallGraphTree pivot(const CallGraphTree& tree, const LevelOrder& order) {
    if (order == tree.order) return tree;
    return build_tree_from_leaves(tree.root.label, tree.leaves, order);
}

struct SearchResult {
    std::size_t count = 0;
    std::vector<NodeId> node_ids;
};

/// Case-insensitive substring search over all labels, preorder.
inline SearchResult search(const CallGraphTree& tree, std::string_view keyword) {
    if (keyword.empty()) throw std::invalid_argument("search keyword must not be empty");
    auto lower = [](std::string_view s) {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return out;
    };
    const std::string needle = lower(keyword);
    SearchResult r;
    auto walk = [&](auto&& self, const CallGraphNode& n) -> void {
        if (lower(n.label).find(needle) != std::string::npos) r.node_ids.push_back(n.node_id);
        for (const auto& c : n.children) self(self, c);
    };
    walk(walk, tree.root);
    r.count = r.node_ids.size();
    return r;
}

/// Nodes shown when `selected` is the current selection: the path from the root
/// with every path node's children, plus the selection's grandchildren.
inline std::set<NodeId> visible_set(const CallGraphTree& tree, NodeId selected) {
    const auto path = tree.path_to(selected);
    if (path.empty()) throw NodeError("unknown node id " + std::to_string(selected));
    std::set<NodeId> out;
    for (const auto* n : path) {
        out.insert(n->node_id);
        for (const auto& c : n->children) out.insert(c.node_id);
    }
    for (const auto& c : path.back()->children) {
        for (const auto& g : c.children) out.insert(g.node_id);
    }
    return out;
}

}  // namespace spotter
