#include "graphbo/graph.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace graphbo {

using nlohmann::json;

void SearchSpaceSpec::validate() const {
  if (!allowed_labels.count(input_label) || !allowed_labels.count(output_label))
    throw GraphError("search space: allowed_labels must contain input and output labels");
  if (min_nodes < 2 || max_nodes < min_nodes)
    throw GraphError("search space: need max_nodes >= min_nodes >= 2");
  if (max_edges < max_nodes - 1)
    throw GraphError("search space: max_edges < max_nodes - 1 leaves no connected graph");
}

void validate_graph(const LabeledDigraph& g) {
  const int n = g.num_nodes();
  std::set<std::pair<int, int>> seen;
  for (const auto& [u, v] : g.edges) {
    if (u < 0 || u >= n || v < 0 || v >= n) {
      std::ostringstream os;
      os << "edge (" << u << "," << v << ") out of range for " << n << " nodes";
      throw GraphError(os.str());
    }
    if (u == v) {
      std::ostringstream os;
      os << "self-loop at node " << u;
      throw GraphError(os.str());
    }
    if (!seen.insert({u, v}).second) {
      std::ostringstream os;
      os << "duplicate edge (" << u << "," << v << ")";
      throw GraphError(os.str());
    }
  }
  topological_order(g);  // throws on cycles
}

std::vector<int> topological_order(const LabeledDigraph& g) {
  const int n = g.num_nodes();
  std::vector<int> indeg(n, 0);
  std::vector<std::vector<int>> out(n);
  for (const auto& [u, v] : g.edges) {
    out[u].push_back(v);
    ++indeg[v];
  }
  std::vector<int> order;
  order.reserve(n);
  // min-index first keeps the order deterministic
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.push(i);
  while (!ready.empty()) {
    int u = ready.top();
    ready.pop();
    order.push_back(u);
    for (int v : out[u])
      if (--indeg[v] == 0) ready.push(v);
  }
  if (static_cast<int>(order.size()) != n)
    throw GraphError("edge set contains a cycle");
  return order;
}

bool validates_against(const LabeledDigraph& g, const SearchSpaceSpec& spec) {
  const int n = g.num_nodes();
  if (n < spec.min_nodes || n > spec.max_nodes) return false;
  if (g.num_edges() > spec.max_edges) return false;
  int n_in = 0, n_out = 0;
  for (const auto& l : g.node_labels) {
    if (!spec.allowed_labels.count(l)) return false;
    if (l == spec.input_label) ++n_in;
    if (l == spec.output_label) ++n_out;
  }
  if (spec.require_single_io && (n_in != 1 || n_out != 1)) return false;
  if (n_in < 1 || n_out < 1) return false;
  try {
    validate_graph(g);
  } catch (const GraphError&) {
    return false;
  }
  return true;
}

LabeledDigraph parse_graph(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw GraphError(std::string("malformed graph document: ") + e.what());
  }
  if (doc.contains("n_nodes")) {
    EdgeLabeledGraph eg;
    eg.n_nodes = doc.at("n_nodes").get<int>();
    for (const auto& e : doc.at("edges")) {
      eg.edges.push_back(
          {e.at("from").get<int>(), e.at("to").get<int>(), e.at("op").get<std::string>()});
    }
    return edge_to_node_transform(eg);
  }
  if (!doc.contains("nodes") || !doc.contains("edges"))
    throw GraphError("graph document missing \"nodes\" or \"edges\"");
  LabeledDigraph g;
  g.node_labels = doc.at("nodes").get<std::vector<std::string>>();
  for (const auto& e : doc.at("edges")) {
    if (!e.is_array() || e.size() != 2)
      throw GraphError("edge entries must be [from,to] pairs");
    g.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  validate_graph(g);
  return g;
}

std::string serialize_graph(const LabeledDigraph& g) {
  json doc;
  doc["nodes"] = g.node_labels;
  auto& edges = doc["edges"] = json::array();
  for (const auto& [u, v] : g.edges) edges.push_back({u, v});
  return doc.dump();
}

LabeledDigraph edge_to_node_transform(const EdgeLabeledGraph& eg) {
  LabeledDigraph structural;
  structural.node_labels.assign(eg.n_nodes, "add");
  if (eg.n_nodes > 0) {
    structural.node_labels.front() = "input";
    structural.node_labels.back() = "output";
  }
  for (const auto& e : eg.edges) structural.edges.emplace_back(e.from, e.to);
  validate_graph(structural);

  LabeledDigraph g;
  g.node_labels = structural.node_labels;
  for (const auto& e : eg.edges) {
    if (e.op == "zeroize" || e.op == "none") continue;  // no information flow
    int op_node = g.num_nodes();
    g.node_labels.push_back(e.op);
    g.edges.emplace_back(e.from, op_node);
    g.edges.emplace_back(op_node, e.to);
  }
  validate_graph(g);
  return g;
}

std::optional<LabeledDigraph> prune_disconnected(const LabeledDigraph& g,
                                                 const SearchSpaceSpec& spec) {
  const int n = g.num_nodes();
  std::vector<std::vector<int>> out(n), in(n);
  for (const auto& [u, v] : g.edges) {
    out[u].push_back(v);
    in[v].push_back(u);
  }
  auto reach = [&](const std::vector<std::vector<int>>& adj,
                   const std::string& label) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack;
    for (int i = 0; i < n; ++i)
      if (g.node_labels[i] == label) {
        seen[i] = 1;
        stack.push_back(i);
      }
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : adj[u])
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
    }
    return seen;
  };
  auto from_input = reach(out, spec.input_label);
  auto to_output = reach(in, spec.output_label);

  std::vector<int> remap(n, -1);
  LabeledDigraph pruned;
  pruned.source = g.source;
  for (int i = 0; i < n; ++i)
    if (from_input[i] && to_output[i]) {
      remap[i] = pruned.num_nodes();
      pruned.node_labels.push_back(g.node_labels[i]);
    }
  bool has_input = false, has_output = false;
  for (const auto& l : pruned.node_labels) {
    has_input |= l == spec.input_label;
    has_output |= l == spec.output_label;
  }
  if (!has_input || !has_output) return std::nullopt;
  for (const auto& [u, v] : g.edges)
    if (remap[u] >= 0 && remap[v] >= 0) pruned.edges.emplace_back(remap[u], remap[v]);
  return pruned;
}

CanonicalKey canonical_key(const LabeledDigraph& g) {
  std::ostringstream os;
  // '~' keeps keys free of commas so they can sit in CSV fields
  for (size_t i = 0; i < g.node_labels.size(); ++i) {
    if (i) os << '~';
    os << g.node_labels[i];
  }
  os << '|';
  auto edges = g.edges;
  std::sort(edges.begin(), edges.end());
  for (size_t i = 0; i < edges.size(); ++i) {
    if (i) os << ';';
    os << edges[i].first << '>' << edges[i].second;
  }
  return {os.str()};
}

}  // namespace graphbo
