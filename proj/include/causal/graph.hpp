#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace causal {

enum class NodeRole { W, X, Y, Z, U };

std::string role_name(NodeRole role);
NodeRole role_from_name(const std::string& name);

struct NodeSpec {
    std::string id;
    NodeRole role = NodeRole::Z;
    std::string block;  // grouping label (e.g. "Z2"); defaults to id
};

/// Labelled DAG with node roles. Immutable after construction; validation
/// happens in the constructor:
///  - edge relation acyclic
///  - exactly one X and one Y, at most one W
///  - U nodes are exogenous (no incoming edges)
///  - when treatment_active, the edge X->Y must be present
class GraphSpec {
public:
    GraphSpec(std::vector<NodeSpec> nodes,
              std::vector<std::pair<std::string, std::string>> edges,
              bool treatment_active = true);

    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const std::vector<NodeSpec>& nodes() const { return nodes_; }
    const NodeSpec& node(int i) const { return nodes_.at(i); }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    bool has_node(const std::string& id) const;
    int index_of(const std::string& id) const;  // throws on unknown id

    const std::vector<int>& parents(int i) const { return parents_.at(i); }
    const std::vector<int>& children(int i) const { return children_.at(i); }
    bool has_edge(int parent, int child) const;

    int x_index() const { return x_; }
    int y_index() const { return y_; }
    int w_index() const { return w_; }  // -1 when absent
    bool treatment_active() const { return treatment_active_; }

    /// Kahn order with stable tie-break by node index; cached.
    const std::vector<int>& topological_order() const { return topo_; }

    std::vector<int> nodes_with_role(NodeRole role) const;
    std::vector<int> nodes_in_block(const std::string& block) const;

    /// All descendants of i, not including i itself.
    std::vector<int> descendants(int i) const;

    bool operator==(const GraphSpec& other) const;

private:
    std::vector<NodeSpec> nodes_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> parents_, children_;
    std::unordered_map<std::string, int> index_;
    std::vector<int> topo_;
    int x_ = -1, y_ = -1, w_ = -1;
    bool treatment_active_ = true;
};

/// True iff a and b are d-separated given s. Bayes-ball style reachability,
/// linear in the number of edges.
bool d_separated(const GraphSpec& g, int a, int b, const std::vector<int>& s);
bool d_separated(const GraphSpec& g, const std::string& a, const std::string& b,
                 const std::vector<std::string>& s);

/// Backdoor criterion for the single treatment edge: no member of zstar is a
/// descendant of X, and zstar d-separates X from Y once the edge X->Y is
/// removed. zstar may contain only role-Z nodes.
bool is_valid_backdoor_set(const GraphSpec& g, const std::vector<std::string>& zstar);

/// Graphical version of the auxiliary-variable certificate:
/// W _||_ Y | zstar u {X} holds and W _||_ Y | zstar fails.
bool entner_pair_holds(const GraphSpec& g, const std::string& w,
                       const std::vector<std::string>& zstar);

}  // namespace causal
