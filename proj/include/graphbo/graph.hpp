#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace graphbo {

/// Directed acyclic graph with string node labels. Immutable after
/// construction; validate() must hold for every instance handed to the
/// kernel or search machinery.
struct LabeledDigraph {
  std::vector<std::string> node_labels;
  std::vector<std::pair<int, int>> edges;
  std::string source;

  int num_nodes() const { return static_cast<int>(node_labels.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
};

/// Bounds and label alphabet of a cell search space.
struct SearchSpaceSpec {
  int min_nodes = 2;
  int max_nodes = 7;
  int max_edges = 9;
  std::set<std::string> allowed_labels;
  std::string input_label = "input";
  std::string output_label = "output";
  bool require_single_io = true;

  void validate() const;
};

/// Order-dependent serialization: label sequence plus upper-triangular
/// adjacency bits under the stored node order. Not isomorphism-invariant.
struct CanonicalKey {
  std::string key;
  bool operator==(const CanonicalKey&) const = default;
  auto operator<=>(const CanonicalKey&) const = default;
};

/// Edge-labelled cell as found in DARTS-style spaces; converted to a
/// node-labelled graph before any kernel work.
struct EdgeLabeledGraph {
  int n_nodes = 0;
  struct Edge {
    int from = 0;
    int to = 0;
    std::string op;
  };
  std::vector<Edge> edges;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws GraphError on self-loops, duplicate edges, out-of-range
// endpoints or cycles.
void validate_graph(const LabeledDigraph& g);

// Topological order of node indices; throws GraphError on cycles.
std::vector<int> topological_order(const LabeledDigraph& g);

// Structural + label validity against a search space.
bool validates_against(const LabeledDigraph& g, const SearchSpaceSpec& spec);

// Parses either the node-labelled or the edge-labelled JSON schema.
// Edge-labelled documents are run through edge_to_node_transform.
LabeledDigraph parse_graph(const std::string& text);

std::string serialize_graph(const LabeledDigraph& g);

// Every labelled edge (u,v,op) becomes a fresh node labelled op wired
// u -> op -> v. "zeroize" edges are dropped. Structural nodes get
// neutral labels: first node "input", last "output", the rest "add".
LabeledDigraph edge_to_node_transform(const EdgeLabeledGraph& g);

// Removes nodes not on any input->output path. nullopt when no such
// path exists (invalid architecture).
std::optional<LabeledDigraph> prune_disconnected(const LabeledDigraph& g,
                                                 const SearchSpaceSpec& spec);

CanonicalKey canonical_key(const LabeledDigraph& g);

}  // namespace graphbo
