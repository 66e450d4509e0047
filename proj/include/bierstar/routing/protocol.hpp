#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "bierstar/header.hpp"
#include "bierstar/routing/graph.hpp"

namespace bierstar {

// ---------------------------------------------------------------------------
// Encoding

// Folds the SPT paths to `dests` into a cell tree rooted at the source's cell.
// Each cell appears once. A path follows existing child edges and resumes at
// an ancestor it re-enters; a cell already owned by another branch is skipped (forwarding makes
// geographic progress toward the next listed cell anyway), unless it is the
// destination's own cell, which is then flagged where it stands.
inline CellTree build_cell_tree(const Spt& spt, const std::vector<NodeId>& dests, const CellMap& cells, int r) {
  CellTree tree(cells.cell(spt.src, r));
  std::vector<int> up{-1};  // parent of each node
  auto is_ancestor = [&](int a, int k) {
    for (; k >= 0; k = up[static_cast<std::size_t>(k)])
      if (k == a) return true;
    return false;
  };
  for (NodeId d : dests) {
    const std::vector<NodeId> path = reconstruct_path(spt, d);
    int cur = 0;
    for (std::size_t k = 1; k < path.size(); ++k) {
      const CellId& c = cells.cell(path[k], r);
      if (c == tree.node(cur).cell) continue;
      const int existing = tree.find(c);
      if (existing < 0) {
        const int parent_node = cur;
        cur = tree.add_child(cur, c);
        up.push_back(parent_node);
      } else if (up[static_cast<std::size_t>(existing)] == cur || is_ancestor(existing, cur) || k + 1 == path.size()) {
        cur = existing;
      }
    }
    tree.set_dest(cur);
  }
  return tree.canonical();
}

inline Header encode(const Snapshot& snap, NodeId src, const std::set<NodeId>& dests, int r, std::uint32_t group_id,
                     const CellMap* cell_map = nullptr) {
  if (dests.empty()) fail(ErrorKind::InvalidArgument, "destination set is empty");
  detail::check_hex_res(r);
  const Spt spt = shortest_path_tree(snap, src);
  std::string missing;
  for (NodeId d : dests) {
    if (d < 0 || d >= snap.size() || !spt.reachable(d)) missing += (missing.empty() ? "" : ",") + std::to_string(d);
  }
  if (!missing.empty()) fail(ErrorKind::Unreachable, "unreachable destinations: " + missing);
  const CellMap local(snap);
  const CellMap& cm = cell_map ? *cell_map : local;
  ShellTree st{snap.sat_id(src).shell, r, build_cell_tree(spt, {dests.begin(), dests.end()}, cm, r)};
  check_tree(st);
  return {kHeaderVersion, group_id, {std::move(st)}};
}

// ---------------------------------------------------------------------------
// Target-cell tables

struct TableEntry {
  NodeId primary = -1;
  std::vector<NodeId> backups;  // at most two, best first

  friend bool operator==(const TableEntry&, const TableEntry&) = default;
};

inline constexpr std::size_t kMaxBackups = 2;

// Neighbors strictly closer to the cell center than `sat`, best first.
inline std::optional<TableEntry> table_entry(const Snapshot& snap, NodeId sat, const CellId& target, const CellMap& cells) {
  if (cells.cell(sat, target.resolution) == target) return std::nullopt;
  const GeoPoint center = cell_center(target);
  const double own = central_angle(snap.sats[static_cast<std::size_t>(sat)].sub, center);
  std::vector<std::pair<double, NodeId>> progress;
  for (const Link& l : snap.adj[static_cast<std::size_t>(sat)]) {
    const double d = central_angle(snap.sats[static_cast<std::size_t>(l.to)].sub, center);
    if (d < own) progress.emplace_back(d, l.to);
  }
  if (progress.empty()) return std::nullopt;
  std::sort(progress.begin(), progress.end());
  TableEntry e;
  e.primary = progress.front().second;
  for (std::size_t k = 1; k < progress.size() && e.backups.size() < kMaxBackups; ++k) e.backups.push_back(progress[k].second);
  return e;
}

struct TargetCellTable {
  NodeId owner = -1;
  double epoch_s = 0;
  std::map<CellId, TableEntry> entries;
};

inline TargetCellTable build_target_cell_table(const Snapshot& snap, NodeId sat, const std::vector<CellId>& header_cells,
                                               const CellMap& cells) {
  TargetCellTable t{sat, snap.time_s, {}};
  for (const CellId& c : header_cells)
    if (auto e = table_entry(snap, sat, c, cells)) t.entries.emplace(c, *e);
  return t;
}

// ---------------------------------------------------------------------------
// Forwarding

inline constexpr int kDefaultTtl = 64;

// Transit: heading for the subtree root via the target-cell table.
// Parent: heading for the root's coarser parent cell.
// Recovery: descending hop distance to the root cell over live links.
// Disseminate: spreading inside the root cell from the entry satellite.
enum class Phase { Transit = 0, Parent = 1, Recovery = 2, Disseminate = 3 };

struct Packet {
  Header header;  // one shell; its tree is rooted at the current target cell
  std::size_t payload_len = 0;
  int hop_count = 0;
  Phase phase = Phase::Transit;
  NodeId entry = -1;  // Disseminate only

  const ShellTree& shell() const { return header.shells.front(); }
  const CellId& target() const { return shell().tree.root().cell; }

  friend bool operator==(const Packet&, const Packet&) = default;
};

struct ForwardResult {
  bool delivered = false;
  std::vector<std::pair<NodeId, Packet>> out;
  std::vector<CellId> unroutable;
  int ttl_drops = 0;

  friend bool operator==(const ForwardResult&, const ForwardResult&) = default;
};

// Everything forward() may consult. The caches only memoize pure functions of
// the snapshot and the failure set.
class ForwardContext {
 public:
  ForwardContext(const Snapshot& snap, const Failures& failures, const std::set<NodeId>& member_sats, int ttl = kDefaultTtl)
      : snap_(snap), failures_(failures), members_(member_sats), ttl_(ttl), cells_(snap) {}

  const Snapshot& snap() const { return snap_; }
  const Failures& failures() const { return failures_; }
  const CellMap& cells() const { return cells_; }
  int ttl() const { return ttl_; }
  bool has_members(NodeId n) const { return members_.count(n) != 0; }

  const std::optional<TableEntry>& entry(NodeId sat, const CellId& c) const {
    auto key = std::make_pair(sat, c);
    auto it = tables_.find(key);
    if (it == tables_.end()) it = tables_.emplace(key, table_entry(snap_, sat, c, cells_)).first;
    return it->second;
  }

  const std::vector<int>& recovery_distance(const CellId& c) const {
    auto it = recovery_.find(c);
    if (it == recovery_.end()) it = recovery_.emplace(c, hop_distance_to(snap_, cells_.sats_in(c), failures_)).first;
    return it->second;
  }

  // Children of each node in the live shortest-path tree from `entry`, pruned
  // to branches that contain a satellite of cell c.
  const std::vector<std::vector<NodeId>>& dissemination(NodeId entry, const CellId& c) const {
    auto key = std::make_pair(entry, c);
    auto it = dissem_.find(key);
    if (it != dissem_.end()) return it->second;
    const Spt spt = shortest_path_tree(snap_, entry, &failures_);
    std::vector<char> keep(snap_.sats.size(), 0);
    for (NodeId n : cells_.sats_in(c)) {
      if (!spt.reachable(n)) continue;
      for (NodeId v = n; v != -1 && !keep[static_cast<std::size_t>(v)]; v = spt.parent[static_cast<std::size_t>(v)])
        keep[static_cast<std::size_t>(v)] = 1;
    }
    std::vector<std::vector<NodeId>> kids(snap_.sats.size());
    for (NodeId v = 0; v < snap_.size(); ++v) {
      const NodeId p = spt.parent[static_cast<std::size_t>(v)];
      if (keep[static_cast<std::size_t>(v)] && p >= 0) kids[static_cast<std::size_t>(p)].push_back(v);
    }
    return dissem_.emplace(key, std::move(kids)).first->second;
  }

 private:
  const Snapshot& snap_;
  const Failures& failures_;
  const std::set<NodeId>& members_;
  int ttl_;
  CellMap cells_;
  mutable std::map<std::pair<NodeId, CellId>, std::optional<TableEntry>> tables_;
  mutable std::map<CellId, std::vector<int>> recovery_;
  mutable std::map<std::pair<NodeId, CellId>, std::vector<std::vector<NodeId>>> dissem_;
};

namespace detail {

inline void emit(const ForwardContext& ctx, ForwardResult& res, NodeId next, Packet p) {
  p.hop_count += 1;
  if (p.hop_count > ctx.ttl()) {
    ++res.ttl_drops;
    return;
  }
  res.out.emplace_back(next, std::move(p));
}

inline std::optional<NodeId> live_hop(const ForwardContext& ctx, NodeId sat, const std::optional<TableEntry>& e) {
  if (!e) return std::nullopt;
  if (ctx.failures().link_up(sat, e->primary)) return e->primary;
  for (NodeId b : e->backups)
    if (ctx.failures().link_up(sat, b)) return b;
  return std::nullopt;
}

inline void route_toward_root(NodeId sat, Packet p, const ForwardContext& ctx, ForwardResult& res) {
  const CellId target = p.target();
  if (p.phase == Phase::Transit) {
    if (auto hop = live_hop(ctx, sat, ctx.entry(sat, target))) return emit(ctx, res, *hop, std::move(p));
    p.phase = Phase::Parent;
  }
  if (p.phase == Phase::Parent) {
    if (target.resolution > 0) {
      const CellId coarse = parent(target, target.resolution - 1);
      if (auto hop = live_hop(ctx, sat, ctx.entry(sat, coarse))) return emit(ctx, res, *hop, std::move(p));
    }
    p.phase = Phase::Recovery;
  }
  const std::vector<int>& dist = ctx.recovery_distance(target);
  const int here = dist[static_cast<std::size_t>(sat)];
  if (here > 0) {
    for (const Link& l : ctx.snap().adj[static_cast<std::size_t>(sat)]) {
      if (ctx.failures().link_up(sat, l.to) && dist[static_cast<std::size_t>(l.to)] == here - 1)
        return emit(ctx, res, l.to, std::move(p));
    }
  }
  res.unroutable.push_back(target);
}

inline Packet with_subtree(const Packet& p, int child) {
  Packet q = p;
  q.header.shells.front().tree = p.shell().tree.subtree(child);
  q.phase = Phase::Transit;
  q.entry = -1;
  return q;
}

}  // namespace detail

inline ForwardResult forward(NodeId sat, const Packet& packet, const ForwardContext& ctx) {
  ForwardResult res;
  if (!ctx.failures().node_up(sat)) return res;
  const ShellTree& shell = packet.shell();
  const CellId& target = packet.target();
  const bool in_target = ctx.cells().cell(sat, shell.resolution) == target;

  if (packet.phase == Phase::Disseminate) {
    if (in_target && ctx.has_members(sat)) res.delivered = true;
    for (NodeId next : ctx.dissemination(packet.entry, target)[static_cast<std::size_t>(sat)]) detail::emit(ctx, res, next, packet);
    return res;
  }
  if (!in_target) {
    detail::route_toward_root(sat, packet, ctx, res);
    return res;
  }
  // At the target cell: deliver inside it, then branch to each child cell.
  if (shell.tree.root().dest) {
    Packet d = packet;
    d.header.shells.front().tree = CellTree(target);
    d.phase = Phase::Disseminate;
    d.entry = sat;
    ForwardResult inner = forward(sat, d, ctx);
    res.delivered = inner.delivered;
    res.ttl_drops += inner.ttl_drops;
    for (auto& o : inner.out) res.out.push_back(std::move(o));
  }
  for (int child : shell.tree.root().children) detail::route_toward_root(sat, detail::with_subtree(packet, child), ctx, res);
  return res;
}

// ---------------------------------------------------------------------------
// Hop-by-hop driver

struct VisitKey {
  NodeId sat;
  CellId root;
  Phase phase;

  friend auto operator<=>(const VisitKey&, const VisitKey&) = default;
};

struct DeliveryReport {
  std::set<NodeId> delivered;
  std::map<NodeId, int> hops;  // first delivery
  int replications = 0;        // copies beyond the first, summed over forwarding steps
  int transmissions = 0;
  int ttl_drops = 0;
  int loop_drops = 0;
  std::vector<CellId> unroutable;
  std::vector<VisitKey> trace;
};

inline DeliveryReport run_multicast(const Snapshot& snap, const Header& header, NodeId src, const std::set<NodeId>& member_sats,
                                    const Failures& failures = {}, int ttl = kDefaultTtl) {
  DeliveryReport rep;
  const int shell_id = snap.sat_id(src).shell;
  const auto it = std::find_if(header.shells.begin(), header.shells.end(), [&](const ShellTree& s) { return s.shell_id == shell_id; });
  if (it == header.shells.end()) return rep;

  ForwardContext ctx(snap, failures, member_sats, ttl);
  Packet first;
  first.header = {header.version, header.group_id, {*it}};

  std::set<VisitKey> seen;
  std::deque<std::pair<NodeId, Packet>> queue;
  queue.emplace_back(src, std::move(first));
  while (!queue.empty()) {
    auto [sat, pkt] = std::move(queue.front());
    queue.pop_front();
    const VisitKey key{sat, pkt.target(), pkt.phase};
    if (!seen.insert(key).second) {
      ++rep.loop_drops;
      continue;
    }
    rep.trace.push_back(key);
    ForwardResult res = forward(sat, pkt, ctx);
    if (res.delivered && rep.delivered.insert(sat).second) rep.hops[sat] = pkt.hop_count;
    rep.ttl_drops += res.ttl_drops;
    rep.transmissions += static_cast<int>(res.out.size());
    if (res.out.size() > 1) rep.replications += static_cast<int>(res.out.size()) - 1;
    for (auto& c : res.unroutable) rep.unroutable.push_back(c);
    for (auto& o : res.out) queue.push_back(std::move(o));
  }
  return rep;
}

inline double reach_rate(const std::set<NodeId>& delivered, const std::set<NodeId>& dests) {
  if (dests.empty()) fail(ErrorKind::InvalidArgument, "reach rate of an empty destination set");
  std::size_t hit = 0;
  for (NodeId d : dests) hit += delivered.count(d);
  return static_cast<double>(hit) / static_cast<double>(dests.size());
}

}  // namespace bierstar
