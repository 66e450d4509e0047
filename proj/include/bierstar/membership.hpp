#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bierstar/error.hpp"
#include "bierstar/geo.hpp"
#include "bierstar/orbit.hpp"

namespace bierstar {

using GroupId = std::uint32_t;

enum class ServingPolicy { Nearest };

// Closest covering satellite by slant range; ties go to the lower node.
inline std::optional<NodeId> find_serving_satellite(const GeoPoint& where, const Snapshot& snap, double mask_deg,
                                                    ServingPolicy policy = ServingPolicy::Nearest) {
  (void)policy;
  const Vec3 g = to_ecef(where, kEarthRadiusKm);
  std::optional<NodeId> best;
  double best_range = 0;
  for (NodeId n = 0; n < snap.size(); ++n) {
    const SatState& s = snap.sats[static_cast<std::size_t>(n)];
    // cheap reject: satellites below the local horizon
    if (mask_deg >= 0 && dot(s.ecef, g) < kEarthRadiusKm * kEarthRadiusKm * (1 - 1e-12)) continue;
    if (!covers(s, where, mask_deg)) continue;
    const double range = distance(s.ecef, g);
    if (!best || range < best_range) {
      best = n;
      best_range = range;
    }
  }
  return best;
}

inline NodeId assign_serving_satellite(const GeoPoint& where, const Snapshot& snap, double mask_deg,
                                       ServingPolicy policy = ServingPolicy::Nearest) {
  const auto n = find_serving_satellite(where, snap, mask_deg, policy);
  if (!n) fail(ErrorKind::NoCoverage, "no satellite above the elevation mask");
  return *n;
}

struct MembershipRecord {
  std::string terminal_id;
  GroupId group_id = 0;
  SatId serving_sat;
  double last_refresh_s = 0;

  friend bool operator==(const MembershipRecord&, const MembershipRecord&) = default;
};

enum class EventType { Join, Leave, Handover, Refresh };

struct MembershipEvent {
  EventType type = EventType::Join;
  GroupId group_id = 0;
  std::string terminal_id;
  SatId sat;  // ignored by Leave and Refresh
};

class IngressRegistry {
 public:
  double refresh_interval_s = 30.0;
  double timeout_s = 90.0;

  void add_group(GroupId g) { groups_.try_emplace(g); }
  bool has_group(GroupId g) const { return groups_.count(g) != 0; }

  void process(const MembershipEvent& ev, double now) {
    auto git = groups_.find(ev.group_id);
    if (git == groups_.end()) fail(ErrorKind::InvalidArgument, "event for unknown group " + std::to_string(ev.group_id));
    auto& recs = git->second;
    auto it = recs.find(ev.terminal_id);
    switch (ev.type) {
      case EventType::Join:
      case EventType::Handover:
        recs[ev.terminal_id] = {ev.terminal_id, ev.group_id, ev.sat, now};
        break;
      case EventType::Leave:
        if (it == recs.end()) {
          ++warnings_;
        } else {
          recs.erase(it);
        }
        break;
      case EventType::Refresh:
        if (it == recs.end()) {
          ++warnings_;
        } else {
          it->second.last_refresh_s = now;
        }
        break;
    }
  }

  bool expired(const MembershipRecord& r, double now) const { return now - r.last_refresh_s >= timeout_s; }

  // Drops expired records; returns how many were removed.
  std::size_t prune(double now) {
    std::size_t removed = 0;
    for (auto& [g, recs] : groups_) {
      for (auto it = recs.begin(); it != recs.end();) {
        if (expired(it->second, now)) {
          it = recs.erase(it);
          ++removed;
        } else {
          ++it;
        }
      }
    }
    return removed;
  }

  std::set<SatId> active_destination_sats(GroupId g, double now) const {
    std::set<SatId> out;
    const auto git = groups_.find(g);
    if (git == groups_.end()) return out;
    for (const auto& [id, r] : git->second)
      if (!expired(r, now)) out.insert(r.serving_sat);
    return out;
  }

  const MembershipRecord* find(GroupId g, const std::string& terminal) const {
    const auto git = groups_.find(g);
    if (git == groups_.end()) return nullptr;
    const auto it = git->second.find(terminal);
    return it == git->second.end() ? nullptr : &it->second;
  }

  std::vector<MembershipRecord> records(GroupId g) const {
    std::vector<MembershipRecord> out;
    const auto git = groups_.find(g);
    if (git == groups_.end()) return out;
    for (const auto& [id, r] : git->second) out.push_back(r);
    return out;
  }

  std::size_t member_count(GroupId g) const {
    const auto git = groups_.find(g);
    return git == groups_.end() ? 0 : git->second.size();
  }

  std::size_t warnings() const { return warnings_; }

 private:
  std::map<GroupId, std::map<std::string, MembershipRecord>> groups_;
  std::size_t warnings_ = 0;
};

// Satellites holding at least one unexpired member of the group, as nodes.
inline std::set<NodeId> member_nodes(const IngressRegistry& reg, GroupId g, double now, const Constellation& c) {
  std::set<NodeId> out;
  for (const SatId& s : reg.active_destination_sats(g, now)) out.insert(c.node_of(s));
  return out;
}

}  // namespace bierstar
