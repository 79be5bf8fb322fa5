#include "medge/topology.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace medge {

double MobilityProfile::total_probability() const {
  double total = 0.0;
  for (const auto& [node, u] : destinations) total += u;
  return total;
}

void NetworkTopology::check(int node) const {
  if (node < 0 || node >= node_count()) {
    throw std::out_of_range("unknown node " + std::to_string(node));
  }
}

NodeRole NetworkTopology::role(int node) const {
  check(node);
  return role_[node];
}

bool NetworkTopology::is_active_ec(int node) const {
  return std::find(active_.begin(), active_.end(), node) != active_.end();
}

int NetworkTopology::access_site(int node) const {
  check(node);
  return access_[node];
}

int NetworkTopology::hops(int i, int j) const {
  check(i);
  check(j);
  return hops_[static_cast<std::size_t>(i) * role_.size() + j];
}

double NetworkTopology::hop_delay(int i, int j) const { return hops(i, j) * per_hop_ms_; }

int NetworkTopology::region_of(int node) const {
  check(node);
  return region_[node];
}

int NetworkTopology::region_server(int region) const {
  if (region < 0 || region >= region_count()) {
    throw std::out_of_range("unknown region " + std::to_string(region));
  }
  return region_server_[region];
}

std::vector<int> NetworkTopology::neighbor_sites(int site) const {
  check(site);
  std::vector<int> out;
  for (int v : adjacency_[site]) {
    if (role_[v] == NodeRole::Site) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string NetworkTopology::edge_list() const {
  std::ostringstream out;
  for (const auto& [a, b] : edges_) out << a << ' ' << b << '\n';
  return out.str();
}

NetworkTopology build_topology(const TopologySpec& spec, const std::vector<int>& terminal_sites) {
  if (spec.site_count < 1) throw std::invalid_argument("topology needs at least one site");
  if (!(spec.per_hop_ms > 0.0)) throw std::invalid_argument("per-hop latency must be positive");
  if (spec.active_sites.empty()) throw std::invalid_argument("at least one active EC is required");
  if (spec.region_server_hops < 1) throw std::invalid_argument("region server distance must be >= 1 hop");
  const int n_sites = spec.site_count;
  auto site_ok = [&](int s) { return s >= 0 && s < n_sites; };

  std::vector<std::pair<int, int>> site_edges = spec.edges;
  if (site_edges.empty()) {
    if (spec.branching < 1) throw std::invalid_argument("branching must be >= 1");
    for (int v = 1; v < n_sites; ++v) site_edges.emplace_back((v - 1) / spec.branching, v);
  }
  if (static_cast<int>(site_edges.size()) != n_sites - 1) {
    throw std::invalid_argument("site edges do not form a tree: expected " +
                                std::to_string(n_sites - 1) + " edges");
  }
  // Union-find rejects cycles; with n-1 edges that also proves connectivity.
  std::vector<int> parent(n_sites);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& [a, b] : site_edges) {
    if (!site_ok(a) || !site_ok(b) || a == b) throw std::invalid_argument("bad site edge");
    const int ra = find(a), rb = find(b);
    if (ra == rb) throw std::invalid_argument("site edges contain a cycle");
    parent[ra] = rb;
  }

  NetworkTopology t;
  t.site_count_ = n_sites;
  t.per_hop_ms_ = spec.per_hop_ms;
  t.role_.assign(n_sites, NodeRole::Site);
  t.edges_ = site_edges;
  for (int s : spec.active_sites) {
    if (!site_ok(s)) throw std::invalid_argument("active EC " + std::to_string(s) + " is not a site");
    if (t.is_active_ec(s)) throw std::invalid_argument("duplicate active EC");
    t.active_.push_back(s);
  }

  auto add_node = [&](NodeRole role, int attach, int length) {
    int prev = attach;
    for (int k = 0; k < length; ++k) {
      const int v = static_cast<int>(t.role_.size());
      t.role_.push_back(k + 1 == length ? role : NodeRole::Relay);
      t.edges_.emplace_back(prev, v);
      prev = v;
    }
    return prev;
  };

  const std::vector<int> roots = spec.region_roots.empty() ? std::vector<int>{0} : spec.region_roots;
  for (int root : roots) {
    if (!site_ok(root)) throw std::invalid_argument("region root is not a site");
    const int server = add_node(NodeRole::RegionServer, root, spec.region_server_hops);
    t.region_server_.push_back(server);
  }
  for (int site : terminal_sites) {
    if (!site_ok(site)) throw std::invalid_argument("terminal attached to unknown site");
    t.terminals_.push_back(add_node(NodeRole::Terminal, site, 1));
  }

  const int n = t.node_count();
  t.adjacency_.assign(n, {});
  for (const auto& [a, b] : t.edges_) {
    t.adjacency_[a].push_back(b);
    t.adjacency_[b].push_back(a);
  }

  t.hops_.assign(static_cast<std::size_t>(n) * n, -1);
  for (int src = 0; src < n; ++src) {
    int* row = &t.hops_[static_cast<std::size_t>(src) * n];
    std::deque<int> queue{src};
    row[src] = 0;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int w : t.adjacency_[v]) {
        if (row[w] < 0) {
          row[w] = row[v] + 1;
          queue.push_back(w);
        }
      }
    }
  }

  // Region of a site: the root whose subtree contains it, found by walking
  // towards site 0. Later roots win when subtrees nest.
  t.region_.assign(n, 0);
  for (int v = 0; v < n_sites; ++v) {
    int region = 0;
    for (int k = 0; k < static_cast<int>(roots.size()); ++k) {
      // v is below roots[k] when the path v -> 0 passes through it.
      if (t.hops(v, 0) == t.hops(v, roots[k]) + t.hops(roots[k], 0)) region = k;
    }
    t.region_[v] = region;
  }
  t.access_.assign(n, 0);
  for (int v = 0; v < n_sites; ++v) t.access_[v] = v;
  // Attached chains: each non-site node inherits from its attachment point.
  for (int e = n_sites - 1; e < static_cast<int>(t.edges_.size()); ++e) {
    const auto [a, b] = t.edges_[e];
    t.access_[b] = t.access_[a];
    t.region_[b] = t.region_[a];
  }
  for (int k = 0; k < static_cast<int>(roots.size()); ++k) t.region_[t.region_server_[k]] = k;
  return t;
}

MobilityProfile uniform_mobility(const NetworkTopology& topology, int origin, double total) {
  if (total < 0.0 || total > 1.0) throw std::invalid_argument("mobility probability outside [0,1]");
  MobilityProfile profile;
  profile.origin = origin;
  const std::vector<int> next = topology.neighbor_sites(origin);
  if (next.empty() || total == 0.0) return profile;
  const double share = total / static_cast<double>(next.size());
  for (int k : next) profile.destinations.emplace_back(k, share);
  return profile;
}

}  // namespace medge
