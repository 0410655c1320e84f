#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rtbert/corpus.hpp"
#include "rtbert/error.hpp"

namespace rtbert {

using NodeId = std::uint32_t;

struct Neighbor {
  NodeId node;
  std::int64_t weight;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Weighted directed retweet graph. Nodes are indexed in user_id order; every
/// adjacency list is sorted by neighbor index. An edge u -> v means u
/// retweeted v. The undirected view merges both directions and sums weights.
class RetweetGraph {
 public:
  RetweetGraph() = default;

  std::size_t node_count() const { return names_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::int64_t min_weight() const { return min_weight_; }

  std::span<const std::string> nodes() const { return names_; }
  const std::string& name(NodeId u) const { return names_.at(u); }

  std::optional<NodeId> find(std::string_view user_id) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), user_id,
                               [](const std::string& a, std::string_view b) { return a < b; });
    if (it == names_.end() || *it != user_id) return std::nullopt;
    return static_cast<NodeId>(it - names_.begin());
  }

  NodeId id_of(std::string_view user_id) const {
    if (auto id = find(user_id)) return *id;
    throw LookupError("unknown user '" + std::string(user_id) + "'");
  }

  std::span<const Neighbor> out(NodeId u) const { return out_.at(u); }
  std::span<const Neighbor> in(NodeId u) const { return in_.at(u); }
  std::span<const Neighbor> undirected(NodeId u) const { return und_.at(u); }

  std::optional<std::int64_t> weight(NodeId u, NodeId v) const { return lookup(out_.at(u), v); }
  std::optional<std::int64_t> undirected_weight(NodeId u, NodeId v) const { return lookup(und_.at(u), v); }

  /// Each undirected edge once, as (smaller id, larger id), in lexicographic order.
  std::vector<std::pair<NodeId, NodeId>> undirected_edges() const {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId u = 0; u < und_.size(); ++u) {
      for (const auto& nb : und_[u]) {
        if (u < nb.node) pairs.emplace_back(u, nb.node);
      }
    }
    return pairs;
  }

  friend RetweetGraph build_graph(std::span<const RawEdge>, std::int64_t, std::span<const std::string>);

 private:
  static std::optional<std::int64_t> lookup(const std::vector<Neighbor>& list, NodeId v) {
    auto it = std::lower_bound(list.begin(), list.end(), v, [](const Neighbor& a, NodeId b) { return a.node < b; });
    if (it == list.end() || it->node != v) return std::nullopt;
    return it->weight;
  }

  std::vector<std::string> names_;
  std::vector<std::vector<Neighbor>> out_, in_, und_;
  std::size_t edge_count_ = 0;
  std::int64_t min_weight_ = 1;
};

/// Builds the graph from raw rows. Duplicate (src,dst) rows are summed first;
/// only pairs whose total reaches `min_weight` become edges. Every endpoint
/// mentioned by a row, plus every id in `extra_nodes`, is a node, so
/// sub-threshold endpoints and isolated users stay in the node set.
inline RetweetGraph build_graph(std::span<const RawEdge> edges, std::int64_t min_weight = 2,
                                std::span<const std::string> extra_nodes = {}) {
  if (min_weight < 1) throw InputError("min_weight must be >= 1");
  std::vector<std::string> names(extra_nodes.begin(), extra_nodes.end());
  for (const auto& e : edges) {
    names.push_back(e.src);
    names.push_back(e.dst);
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());

  RetweetGraph g;
  g.names_ = std::move(names);
  g.min_weight_ = min_weight;
  const auto n = g.names_.size();
  g.out_.assign(n, {});
  g.in_.assign(n, {});
  g.und_.assign(n, {});

  std::map<std::pair<NodeId, NodeId>, std::int64_t> merged;
  for (const auto& e : edges) {
    if (e.src == e.dst) continue;
    merged[{*g.find(e.src), *g.find(e.dst)}] += e.count;
  }
  std::map<std::pair<NodeId, NodeId>, std::int64_t> und;
  for (const auto& [key, w] : merged) {
    if (w < min_weight) continue;
    const auto [u, v] = key;
    g.out_[u].push_back({v, w});
    g.in_[v].push_back({u, w});
    und[{std::min(u, v), std::max(u, v)}] += w;
    ++g.edge_count_;
  }
  for (const auto& [key, w] : und) {
    g.und_[key.first].push_back({key.second, w});
    g.und_[key.second].push_back({key.first, w});
  }
  auto by_node = [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; };
  for (auto* lists : {&g.out_, &g.in_, &g.und_}) {
    for (auto& l : *lists) std::sort(l.begin(), l.end(), by_node);
  }
  return g;
}

/// {v : u->v or v->u}, sorted by user_id.
inline std::vector<std::string> undirected_neighbors(const RetweetGraph& g, std::string_view user_id) {
  std::vector<std::string> out;
  for (const auto& nb : g.undirected(g.id_of(user_id))) out.push_back(g.name(nb.node));
  return out;
}

struct DegreeStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  double mean_total_degree = 0.0;
};

inline DegreeStats degree_stats(const RetweetGraph& g) {
  DegreeStats s;
  s.node_count = g.node_count();
  s.edge_count = g.edge_count();
  if (s.node_count > 0) s.mean_total_degree = 2.0 * static_cast<double>(s.edge_count) / static_cast<double>(s.node_count);
  return s;
}

/// Writes the post-threshold edge list in the edges.csv format.
inline void save_graph_csv(const std::filesystem::path& path, const RetweetGraph& g) {
  csv::Writer w(path, {"src", "dst", "count"});
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (const auto& nb : g.out(u)) w.row({g.name(u), g.name(nb.node), std::to_string(nb.weight)});
  }
  w.close();
}

/// Inverse of save_graph_csv. `nodes` restores isolated users, which the edge list cannot carry.
inline RetweetGraph load_graph_csv(const std::filesystem::path& path, std::int64_t min_weight = 1,
                                   std::span<const std::string> nodes = {}) {
  const auto edges = load_edges(path);
  return build_graph(edges, min_weight, nodes);
}

}  // namespace rtbert
