#include "causal/graph.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <stdexcept>

namespace causal {

std::string role_name(NodeRole role) {
    switch (role) {
        case NodeRole::W: return "W";
        case NodeRole::X: return "X";
        case NodeRole::Y: return "Y";
        case NodeRole::Z: return "Z";
        case NodeRole::U: return "U";
    }
    throw std::logic_error("unreachable role");
}

NodeRole role_from_name(const std::string& name) {
    if (name == "W") return NodeRole::W;
    if (name == "X") return NodeRole::X;
    if (name == "Y") return NodeRole::Y;
    if (name == "Z") return NodeRole::Z;
    if (name == "U") return NodeRole::U;
    throw std::invalid_argument("unknown node role: " + name);
}

GraphSpec::GraphSpec(std::vector<NodeSpec> nodes,
                     std::vector<std::pair<std::string, std::string>> edges,
                     bool treatment_active)
    : nodes_(std::move(nodes)), treatment_active_(treatment_active) {
    const int n = static_cast<int>(nodes_.size());
    for (int i = 0; i < n; ++i) {
        auto& nd = nodes_[i];
        if (nd.block.empty()) nd.block = nd.id;
        if (!index_.emplace(nd.id, i).second)
            throw std::invalid_argument("duplicate node id: " + nd.id);
        switch (nd.role) {
            case NodeRole::X:
                if (x_ >= 0) throw std::invalid_argument("more than one X node");
                x_ = i;
                break;
            case NodeRole::Y:
                if (y_ >= 0) throw std::invalid_argument("more than one Y node");
                y_ = i;
                break;
            case NodeRole::W:
                if (w_ >= 0) throw std::invalid_argument("more than one W node");
                w_ = i;
                break;
            default: break;
        }
    }
    if (x_ < 0) throw std::invalid_argument("graph has no X node");
    if (y_ < 0) throw std::invalid_argument("graph has no Y node");

    parents_.resize(n);
    children_.resize(n);
    edges_.reserve(edges.size());
    for (const auto& [p, c] : edges) {
        const int pi = index_of(p), ci = index_of(c);
        if (pi == ci) throw std::invalid_argument("self-loop on node " + p);
        edges_.emplace_back(pi, ci);
        parents_[ci].push_back(pi);
        children_[pi].push_back(ci);
    }

    for (int i = 0; i < n; ++i)
        if (nodes_[i].role == NodeRole::U && !parents_[i].empty())
            throw std::invalid_argument("U node must be exogenous: " + nodes_[i].id);

    // Kahn with a min-index frontier for a stable canonical order.
    std::vector<int> indeg(n);
    for (int i = 0; i < n; ++i) indeg[i] = static_cast<int>(parents_[i].size());
    std::vector<int> frontier;
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) frontier.push_back(i);
    topo_.reserve(n);
    while (!frontier.empty()) {
        auto it = std::min_element(frontier.begin(), frontier.end());
        const int v = *it;
        frontier.erase(it);
        topo_.push_back(v);
        for (int c : children_[v])
            if (--indeg[c] == 0) frontier.push_back(c);
    }
    if (static_cast<int>(topo_.size()) != n)
        throw std::invalid_argument("edge relation has a cycle");

    if (treatment_active_ && !has_edge(x_, y_))
        throw std::invalid_argument("treatment-active graph requires edge X->Y");
}

bool GraphSpec::has_node(const std::string& id) const { return index_.count(id) > 0; }

int GraphSpec::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::invalid_argument("unknown node id: " + id);
    return it->second;
}

bool GraphSpec::has_edge(int parent, int child) const {
    const auto& ch = children_.at(parent);
    return std::find(ch.begin(), ch.end(), child) != ch.end();
}

std::vector<int> GraphSpec::nodes_with_role(NodeRole role) const {
    std::vector<int> out;
    for (int i = 0; i < num_nodes(); ++i)
        if (nodes_[i].role == role) out.push_back(i);
    return out;
}

std::vector<int> GraphSpec::nodes_in_block(const std::string& block) const {
    std::vector<int> out;
    for (int i = 0; i < num_nodes(); ++i)
        if (nodes_[i].block == block) out.push_back(i);
    return out;
}

std::vector<int> GraphSpec::descendants(int i) const {
    std::vector<char> seen(num_nodes(), 0);
    std::deque<int> queue(children_.at(i).begin(), children_.at(i).end());
    std::vector<int> out;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        if (seen[v]) continue;
        seen[v] = 1;
        out.push_back(v);
        for (int c : children_[v]) queue.push_back(c);
    }
    return out;
}

bool GraphSpec::operator==(const GraphSpec& other) const {
    if (num_nodes() != other.num_nodes() || edges_ != other.edges_ ||
        treatment_active_ != other.treatment_active_)
        return false;
    for (int i = 0; i < num_nodes(); ++i) {
        const auto& a = nodes_[i];
        const auto& b = other.nodes_[i];
        if (a.id != b.id || a.role != b.role || a.block != b.block) return false;
    }
    return true;
}

namespace {

// Reachability under d-connection rules ("Bayes ball"). States are
// (node, direction of arrival); a node conditioned on bounces trails
// arriving from a parent back up, an unconditioned node passes through.
bool d_connected_impl(const GraphSpec& g, int a, int b, const std::vector<char>& in_s) {
    const int n = g.num_nodes();

    // ancestors of the conditioning set (including the set itself)
    std::vector<char> anc(n, 0);
    std::deque<int> queue;
    for (int i = 0; i < n; ++i)
        if (in_s[i]) {
            anc[i] = 1;
            queue.push_back(i);
        }
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int p : g.parents(v))
            if (!anc[p]) {
                anc[p] = 1;
                queue.push_back(p);
            }
    }

    // visited[v][0]: arrived from a child (moving up); [1]: from a parent.
    std::vector<std::array<char, 2>> visited(n, {0, 0});
    std::deque<std::pair<int, int>> frontier;
    frontier.emplace_back(a, 0);
    while (!frontier.empty()) {
        const auto [v, dir] = frontier.front();
        frontier.pop_front();
        if (visited[v][dir]) continue;
        visited[v][dir] = 1;
        if (v == b && !in_s[v]) return true;
        if (dir == 0) {
            if (!in_s[v]) {
                for (int p : g.parents(v)) frontier.emplace_back(p, 0);
                for (int c : g.children(v)) frontier.emplace_back(c, 1);
            }
        } else {
            if (!in_s[v])
                for (int c : g.children(v)) frontier.emplace_back(c, 1);
            if (anc[v])  // collider (or its ancestorhood of S) opens the path
                for (int p : g.parents(v)) frontier.emplace_back(p, 0);
        }
    }
    return false;
}

std::vector<char> make_membership(const GraphSpec& g, const std::vector<int>& s) {
    std::vector<char> in_s(g.num_nodes(), 0);
    for (int i : s) {
        if (i < 0 || i >= g.num_nodes()) throw std::invalid_argument("node index out of range");
        in_s[i] = 1;
    }
    return in_s;
}

}  // namespace

bool d_separated(const GraphSpec& g, int a, int b, const std::vector<int>& s) {
    if (a == b) throw std::invalid_argument("d_separated: endpoints must differ");
    if (a < 0 || a >= g.num_nodes() || b < 0 || b >= g.num_nodes())
        throw std::invalid_argument("d_separated: node index out of range");
    const auto in_s = make_membership(g, s);
    if (in_s[a] || in_s[b])
        throw std::invalid_argument("d_separated: endpoint inside conditioning set");
    return !d_connected_impl(g, a, b, in_s);
}

bool d_separated(const GraphSpec& g, const std::string& a, const std::string& b,
                 const std::vector<std::string>& s) {
    std::vector<int> si;
    si.reserve(s.size());
    for (const auto& id : s) si.push_back(g.index_of(id));
    return d_separated(g, g.index_of(a), g.index_of(b), si);
}

bool is_valid_backdoor_set(const GraphSpec& g, const std::vector<std::string>& zstar) {
    std::vector<int> zi;
    zi.reserve(zstar.size());
    for (const auto& id : zstar) {
        const int i = g.index_of(id);
        if (g.node(i).role != NodeRole::Z)
            throw std::invalid_argument("backdoor set may contain only Z nodes, got " + id);
        zi.push_back(i);
    }

    const int x = g.x_index(), y = g.y_index();
    const auto desc_x = g.descendants(x);
    for (int z : zi)
        if (std::find(desc_x.begin(), desc_x.end(), z) != desc_x.end()) return false;

    // same graph minus the treatment edge
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& [p, c] : g.edges()) {
        if (p == x && c == y) continue;
        edges.emplace_back(g.node(p).id, g.node(c).id);
    }
    std::vector<NodeSpec> nodes = g.nodes();
    GraphSpec pruned(std::move(nodes), std::move(edges), /*treatment_active=*/false);
    std::vector<int> s;
    for (int z : zi) s.push_back(z);
    return d_separated(pruned, x, y, s);
}

bool entner_pair_holds(const GraphSpec& g, const std::string& w,
                       const std::vector<std::string>& zstar) {
    const int wi = g.index_of(w);
    if (g.node(wi).role != NodeRole::W)
        throw std::invalid_argument("entner_pair_holds: node is not role W: " + w);
    std::vector<int> s;
    for (const auto& id : zstar) {
        const int i = g.index_of(id);
        if (g.node(i).role != NodeRole::Z)
            throw std::invalid_argument("candidate set may contain only Z nodes, got " + id);
        s.push_back(i);
    }
    const int y = g.y_index();
    std::vector<int> s_with_x = s;
    s_with_x.push_back(g.x_index());
    return d_separated(g, wi, y, s_with_x) && !d_separated(g, wi, y, s);
}

}  // namespace causal
