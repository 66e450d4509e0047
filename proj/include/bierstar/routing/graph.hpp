#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <vector>

#include "bierstar/error.hpp"
#include "bierstar/geogrid.hpp"
#include "bierstar/orbit.hpp"

namespace bierstar {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Links or satellites that are down for the current epoch.
struct Failures {
  LinkSet links;
  NodeSet nodes;

  bool node_up(NodeId n) const { return nodes.count(n) == 0; }
  bool link_up(NodeId a, NodeId b) const { return node_up(a) && node_up(b) && links.count(edge_key(a, b)) == 0; }
  bool empty() const { return links.empty() && nodes.empty(); }
};

struct Spt {
  NodeId src = -1;
  std::vector<double> dist;
  std::vector<NodeId> parent;  // -1 for src and unreachable nodes

  bool reachable(NodeId n) const { return dist[static_cast<std::size_t>(n)] < kInf; }
};

// Dijkstra on chord-length weights. Equal-cost predecessors resolve to the
// lower node id.
inline Spt shortest_path_tree(const Snapshot& snap, NodeId src, const Failures* failures = nullptr) {
  const std::size_t n = snap.sats.size();
  if (src < 0 || static_cast<std::size_t>(src) >= n) fail(ErrorKind::InvalidArgument, "source not in snapshot");
  Spt t;
  t.src = src;
  t.dist.assign(n, kInf);
  t.parent.assign(n, -1);
  if (failures && !failures->node_up(src)) {
    t.dist[static_cast<std::size_t>(src)] = 0;
    return t;
  }
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  std::vector<char> done(n, 0);
  t.dist[static_cast<std::size_t>(src)] = 0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (done[static_cast<std::size_t>(u)]) continue;
    done[static_cast<std::size_t>(u)] = 1;
    for (const Link& l : snap.adj[static_cast<std::size_t>(u)]) {
      if (failures && !failures->link_up(u, l.to)) continue;
      const std::size_t v = static_cast<std::size_t>(l.to);
      if (done[v]) continue;
      const double nd = d + l.km;
      if (nd < t.dist[v]) {
        t.dist[v] = nd;
        t.parent[v] = u;
        pq.push({nd, l.to});
      } else if (nd == t.dist[v] && u < t.parent[v]) {
        t.parent[v] = u;
      }
    }
  }
  return t;
}

inline std::vector<NodeId> reconstruct_path(const Spt& t, NodeId dst) {
  if (dst < 0 || static_cast<std::size_t>(dst) >= t.dist.size() || !t.reachable(dst))
    fail(ErrorKind::Unreachable, "destination " + std::to_string(dst) + " unreachable");
  std::vector<NodeId> path{dst};
  while (path.back() != t.src) path.push_back(t.parent[static_cast<std::size_t>(path.back())]);
  return {path.rbegin(), path.rend()};
}

// Unweighted hop distance to the nearest of `targets`, over live links.
inline std::vector<int> hop_distance_to(const Snapshot& snap, const std::vector<NodeId>& targets, const Failures& f) {
  std::vector<int> dist(snap.sats.size(), -1);
  std::queue<NodeId> q;
  for (NodeId t : targets) {
    if (!f.node_up(t) || dist[static_cast<std::size_t>(t)] == 0) continue;
    dist[static_cast<std::size_t>(t)] = 0;
    q.push(t);
  }
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    for (const Link& l : snap.adj[static_cast<std::size_t>(u)]) {
      if (!f.link_up(u, l.to) || dist[static_cast<std::size_t>(l.to)] >= 0) continue;
      dist[static_cast<std::size_t>(l.to)] = dist[static_cast<std::size_t>(u)] + 1;
      q.push(l.to);
    }
  }
  return dist;
}

// Sub-satellite cells of every satellite, computed once per resolution.
class CellMap {
 public:
  explicit CellMap(const Snapshot& snap) : snap_(&snap) {}

  const CellId& cell(NodeId n, int r) const {
    auto& v = by_res_[static_cast<std::size_t>(r)];
    if (v.empty()) {
      v.reserve(snap_->sats.size());
      for (const auto& s : snap_->sats) v.push_back(cell_index_fast(s.sub, r));
    }
    return v[static_cast<std::size_t>(n)];
  }

  std::vector<NodeId> sats_in(const CellId& c) const {
    std::vector<NodeId> out;
    for (NodeId n = 0; n < snap_->size(); ++n)
      if (cell(n, c.resolution) == c) out.push_back(n);
    return out;
  }

  const Snapshot& snapshot() const { return *snap_; }

 private:
  const Snapshot* snap_;
  mutable std::vector<CellId> by_res_[kMaxHexRes + 1];
};

}  // namespace bierstar
