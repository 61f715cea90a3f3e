#include "drought/net/tree.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>

#include "drought/errors.hpp"

namespace drought::net {

namespace {

constexpr std::size_t kMaxChildren = 2;
constexpr double kRangeEps = 1e-9;

constexpr std::uint64_t kSearchBudget = 5'000'000;

RoutingTree from_parents(const std::vector<std::optional<std::size_t>>& parent) {
  const std::size_t n = parent.size();
  RoutingTree tree;
  tree.parent = parent;
  tree.children.assign(n, {});
  tree.depth.assign(n, 0);
  for (std::size_t v = 1; v < n; ++v) tree.children[*parent[v]].push_back(v);
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t c : tree.children[u]) {
      tree.depth[c] = tree.depth[u] + 1;
      queue.push_back(c);
    }
  }
  return tree;
}

// Backtracking over parent choices, nodes taken in hop order from the sink
// and candidate parents nearest first. Empty when no binary tree exists or
// the budget runs out first.
std::optional<RoutingTree> exhaustive_binary_tree(const std::vector<GeoPoint>& positions, double link_range_km) {
  const std::size_t n = positions.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b && distance_km(positions[a], positions[b]) <= link_range_km + kRangeEps) adj[a].push_back(b);
    }
    std::sort(adj[a].begin(), adj[a].end(), [&](std::size_t x, std::size_t y) {
      const double dx = distance_km(positions[a], positions[x]);
      const double dy = distance_km(positions[a], positions[y]);
      return dx != dy ? dx < dy : x < y;
    });
  }
  std::vector<std::size_t> order;
  std::vector<bool> queued(n, false);
  std::deque<std::size_t> queue{0};
  queued[0] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    if (u != 0) order.push_back(u);
    for (std::size_t v : adj[u]) {
      if (!queued[v]) {
        queued[v] = true;
        queue.push_back(v);
      }
    }
  }
  if (order.size() + 1 != n) return std::nullopt;

  std::vector<std::optional<std::size_t>> parent(n);
  std::vector<std::size_t> kids(n, 0);
  std::uint64_t steps = 0;
  const auto acyclic_from = [&](std::size_t v) {
    for (std::size_t hops = 0; hops <= n; ++hops) {
      if (v == 0 || !parent[v]) return true;
      v = *parent[v];
    }
    return false;
  };
  const std::function<bool(std::size_t)> assign = [&](std::size_t i) -> bool {
    if (i == order.size()) return true;
    const std::size_t v = order[i];
    for (std::size_t p : adj[v]) {
      if (++steps > kSearchBudget) return false;
      if (kids[p] >= kMaxChildren) continue;
      parent[v] = p;
      ++kids[p];
      if (acyclic_from(v) && assign(i + 1)) return true;
      --kids[p];
      parent[v].reset();
    }
    return false;
  };
  if (!assign(0)) return std::nullopt;
  return from_parents(parent);
}

}  // namespace

RoutingTree build_binary_tree(const std::vector<GeoPoint>& positions, double link_range_km) {
  const std::size_t n = positions.size();
  RoutingTree tree;
  tree.parent.assign(n, std::nullopt);
  tree.children.assign(n, {});
  tree.depth.assign(n, 0);
  if (n == 0) return tree;

  std::vector<bool> assigned(n, false);
  assigned[0] = true;
  auto attach = [&](std::size_t child, std::size_t parent) {
    tree.parent[child] = parent;
    tree.children[parent].push_back(child);
    tree.depth[child] = tree.depth[parent] + 1;
    assigned[child] = true;
  };
  auto in_range = [&](std::size_t a, std::size_t b) {
    return distance_km(positions[a], positions[b]) <= link_range_km + kRangeEps;
  };
  auto nearer = [&](std::size_t from) {
    return [&, from](std::size_t a, std::size_t b) {
      const double da = distance_km(positions[from], positions[a]);
      const double db = distance_km(positions[from], positions[b]);
      return da != db ? da < db : a < b;
    };
  };

  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    std::vector<std::size_t> candidates;
    for (std::size_t v = 0; v < n; ++v) {
      if (!assigned[v] && in_range(u, v)) candidates.push_back(v);
    }
    std::sort(candidates.begin(), candidates.end(), nearer(u));
    for (std::size_t k = 0; k < candidates.size() && k < kMaxChildren; ++k) {
      attach(candidates[k], u);
      queue.push_back(candidates[k]);
    }
  }

  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t v = 0; v < n; ++v) {
      if (assigned[v]) continue;
      std::vector<std::size_t> hosts;
      for (std::size_t u = 0; u < n; ++u) {
        if (assigned[u] && tree.children[u].size() < kMaxChildren && in_range(u, v)) hosts.push_back(u);
      }
      if (hosts.empty()) continue;
      std::sort(hosts.begin(), hosts.end(), nearer(v));
      attach(v, hosts.front());
      progress = true;
    }
  }

  if (std::find(assigned.begin(), assigned.end(), false) != assigned.end()) {
    // The greedy pass painted itself into a corner; fall back to a search.
    if (auto exact = exhaustive_binary_tree(positions, link_range_km)) return *exact;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!assigned[v]) {
      throw OrphanNode("node index " + std::to_string(v) +
                       " cannot join the binary tree (no in-range parent with a free slot)");
    }
  }
  return tree;
}

std::optional<std::string> tree_violation(const RoutingTree& tree, const std::vector<GeoPoint>& positions,
                                          double link_range_km) {
  const std::size_t n = tree.size();
  if (n != positions.size()) return "tree size differs from placement size";
  if (n == 0) return std::nullopt;
  if (tree.parent[0]) return "sink has a parent";
  for (std::size_t v = 0; v < n; ++v) {
    if (tree.children[v].size() > kMaxChildren) return "node " + std::to_string(v) + " has > 2 children";
    if (v == 0) continue;
    if (!tree.parent[v]) return "node " + std::to_string(v) + " has no parent";
    const std::size_t p = *tree.parent[v];
    if (distance_km(positions[v], positions[p]) > link_range_km + kRangeEps) {
      return "node " + std::to_string(v) + " is out of range of its parent";
    }
    // Walk to the root; more than n steps means a cycle.
    std::size_t cur = v;
    std::size_t steps = 0;
    while (tree.parent[cur]) {
      cur = *tree.parent[cur];
      if (++steps > n) return "node " + std::to_string(v) + " is on a cycle";
    }
    if (cur != 0) return "node " + std::to_string(v) + " does not reach the sink";
  }
  return std::nullopt;
}

}  // namespace drought::net
