#pragma once

#include <string>
#include <utility>
#include <vector>

namespace medge {

enum class NodeRole { Site, RegionServer, Terminal, Relay };

/// Input for build_topology. Sites are the tree of access routers / edge
/// clouds; region servers and terminals are attached as leaves.
struct TopologySpec {
  int site_count = 20;
  /// Used to generate a complete k-ary tree when `edges` is empty.
  int branching = 3;
  /// Explicit site tree; overrides `branching` when non-empty.
  std::vector<std::pair<int, int>> edges;
  /// Sites that host VMs for this service.
  std::vector<int> active_sites = {1, 2, 3, 5, 8, 11};
  double per_hop_ms = 2.0;
  /// One region per entry; a region covers the subtree below its root.
  /// Sites outside every subtree fall into the first region.
  std::vector<int> region_roots = {1, 2, 3};
  /// Hops between a region server and the site it hangs off.
  int region_server_hops = 1;

  bool operator==(const TopologySpec&) const = default;
};

struct MobilityProfile {
  int origin = 0;
  std::vector<std::pair<int, double>> destinations;

  [[nodiscard]] double total_probability() const;

  bool operator==(const MobilityProfile&) const = default;
};

class NetworkTopology {
 public:
  [[nodiscard]] int node_count() const { return static_cast<int>(role_.size()); }
  [[nodiscard]] NodeRole role(int node) const;
  [[nodiscard]] int site_count() const { return site_count_; }
  [[nodiscard]] const std::vector<int>& active_ecs() const { return active_; }
  [[nodiscard]] bool is_active_ec(int node) const;
  [[nodiscard]] const std::vector<int>& terminals() const { return terminals_; }
  /// Site a terminal or region server hangs off (identity for sites).
  [[nodiscard]] int access_site(int node) const;

  [[nodiscard]] int hops(int i, int j) const;
  [[nodiscard]] double hop_delay(int i, int j) const;
  [[nodiscard]] double per_hop_ms() const { return per_hop_ms_; }

  [[nodiscard]] int region_count() const { return static_cast<int>(region_server_.size()); }
  [[nodiscard]] int region_of(int node) const;
  [[nodiscard]] int region_server(int region) const;

  /// Tree-adjacent sites.
  [[nodiscard]] std::vector<int> neighbor_sites(int site) const;
  [[nodiscard]] const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  /// One "i j" pair per line.
  [[nodiscard]] std::string edge_list() const;

 private:
  friend NetworkTopology build_topology(const TopologySpec&, const std::vector<int>&);
  void check(int node) const;

  int site_count_ = 0;
  double per_hop_ms_ = 0.0;
  std::vector<NodeRole> role_;
  std::vector<int> active_;
  std::vector<int> terminals_;
  std::vector<int> access_;
  std::vector<int> region_;
  std::vector<int> region_server_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<int> hops_;  // row-major node_count x node_count
};

/// Builds sites, then one region server per region root, then one terminal
/// per entry of `terminal_sites` (in order). Throws std::invalid_argument
/// for non-tree edge lists or bad ids.
NetworkTopology build_topology(const TopologySpec& spec, const std::vector<int>& terminal_sites);

/// Uniform split of `total` over the tree-adjacent sites of `origin`.
MobilityProfile uniform_mobility(const NetworkTopology& topology, int origin, double total);

}  // namespace medge
