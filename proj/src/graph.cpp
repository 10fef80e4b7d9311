#include "tgn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

#include "tgn/errors.hpp"

namespace tgn {

PartitionStrategy partition_strategy_from(const std::string& name) {
  if (name == "uniform") return PartitionStrategy::uniform;
  if (name == "distance") return PartitionStrategy::distance;
  if (name == "spatial") return PartitionStrategy::spatial;
  throw ConfigError("unknown partition strategy '" + name + "'");
}

std::string to_string(PartitionStrategy s) {
  switch (s) {
    case PartitionStrategy::uniform: return "uniform";
    case PartitionStrategy::distance: return "distance";
    case PartitionStrategy::spatial: return "spatial";
  }
  return "?";
}

void validate_graph(const GraphSpec& g) {
  if (g.num_nodes == 0) throw ConfigError("graph '" + g.name + "': no nodes");
  const int v_n = static_cast<int>(g.num_nodes);
  for (const auto& [a, b] : g.edges) {
    if (a < 0 || a >= v_n || b < 0 || b >= v_n) {
      std::ostringstream msg;
      msg << "graph '" << g.name << "': edge (" << a << ", " << b
          << ") out of range for " << v_n << " nodes";
      throw ConfigError(msg.str());
    }
    if (a == b)
      throw ConfigError("graph '" + g.name + "': self loop at node " +
                        std::to_string(a));
  }
  if (g.center < 0 || g.center >= v_n)
    throw ConfigError("graph '" + g.name + "': center " +
                      std::to_string(g.center) + " out of range");
}

std::vector<int> hop_distances(const GraphSpec& g, int source) {
  validate_graph(g);
  require(source >= 0 && static_cast<std::size_t>(source) < g.num_nodes,
          "hop_distances: source out of range");
  std::vector<std::vector<int>> adj(g.num_nodes);
  for (const auto& [a, b] : g.edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  std::vector<int> dist(g.num_nodes, -1);
  std::queue<int> q;
  dist[static_cast<std::size_t>(source)] = 0;
  q.push(source);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int w : adj[static_cast<std::size_t>(u)])
      if (dist[static_cast<std::size_t>(w)] == -1) {
        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
        q.push(w);
      }
  }
  return dist;
}

bool is_connected(const GraphSpec& g) {
  const auto dist = hop_distances(g, 0);
  return std::none_of(dist.begin(), dist.end(),
                      [](int d) { return d == -1; });
}

AdjacencyStack build_adjacency(const GraphSpec& g, PartitionStrategy strategy) {
  validate_graph(g);
  const std::size_t v_n = g.num_nodes;

  // A + I as a dense 0/1 matrix; duplicate edge listings collapse.
  std::vector<double> hood(v_n * v_n, 0.0);
  for (std::size_t v = 0; v < v_n; ++v) hood[v * v_n + v] = 1.0;
  for (const auto& [a, b] : g.edges) {
    hood[static_cast<std::size_t>(a) * v_n + static_cast<std::size_t>(b)] = 1.0;
    hood[static_cast<std::size_t>(b) * v_n + static_cast<std::size_t>(a)] = 1.0;
  }

  std::vector<double> inv_sqrt_deg(v_n);
  for (std::size_t v = 0; v < v_n; ++v) {
    double deg = 0.0;
    for (std::size_t j = 0; j < v_n; ++j) deg += hood[v * v_n + j];
    inv_sqrt_deg[v] = 1.0 / std::sqrt(deg);  // >= 1 via the self loop
  }

  // partition_of(v, j) over the support of A + I.
  std::vector<int> dist;
  std::size_t k_n = 0;
  switch (strategy) {
    case PartitionStrategy::uniform: k_n = 1; break;
    case PartitionStrategy::distance: k_n = 2; break;
    case PartitionStrategy::spatial: {
      k_n = 3;
      dist = hop_distances(g, g.center);
      std::vector<std::size_t> orphans;
      for (std::size_t v = 0; v < v_n; ++v)
        if (dist[v] == -1) orphans.push_back(v);
      if (!orphans.empty()) {
        std::ostringstream msg;
        msg << "graph '" << g.name
            << "': spatial partitioning needs every node reachable from the "
               "center; unreachable nodes:";
        for (std::size_t v : orphans) msg << " " << v;
        throw ConfigError(msg.str());
      }
      break;
    }
  }

  AdjacencyStack stack;
  stack.graph = g;
  stack.strategy = strategy;
  for (std::size_t p = 0; p < k_n; ++p)
    stack.partitions.emplace_back(std::vector<std::size_t>{v_n, v_n}, 0.0);

  for (std::size_t v = 0; v < v_n; ++v)
    for (std::size_t j = 0; j < v_n; ++j) {
      if (hood[v * v_n + j] == 0.0) continue;
      std::size_t p = 0;
      switch (strategy) {
        case PartitionStrategy::uniform:
          p = 0;
          break;
        case PartitionStrategy::distance:
          p = (v == j) ? 0 : 1;
          break;
        case PartitionStrategy::spatial:
          if (dist[j] == dist[v])
            p = 0;  // same ring as the receiver: root
          else if (dist[j] < dist[v])
            p = 1;  // source closer to center: centripetal
          else
            p = 2;  // source farther: centrifugal
          break;
      }
      stack.partitions[p].data[v * v_n + j] =
          inv_sqrt_deg[v] * inv_sqrt_deg[j];
    }
  return stack;
}

void validate_scale(const ScaleDefinition& scale, const SkeletonLayout& lay) {
  if (scale.nodes.empty())
    throw ConfigError("scale '" + scale.name + "': empty joint subset");
  const int v_n = static_cast<int>(lay.num_joints);
  std::set<int> members;
  for (int v : scale.nodes) {
    if (v < 0 || v >= v_n)
      throw ConfigError("scale '" + scale.name + "': joint " +
                        std::to_string(v) + " out of range for layout " +
                        lay.id);
    if (!members.insert(v).second)
      throw ConfigError("scale '" + scale.name + "': duplicate joint " +
                        std::to_string(v));
  }
  for (const auto& [a, b] : scale.edges) {
    if (!members.count(a) || !members.count(b))
      throw ConfigError("scale '" + scale.name + "': edge (" +
                        std::to_string(a) + ", " + std::to_string(b) +
                        ") references a joint outside the subset");
    if (a == b)
      throw ConfigError("scale '" + scale.name + "': self loop at joint " +
                        std::to_string(a));
  }
  if (!members.count(scale.center))
    throw ConfigError("scale '" + scale.name + "': center " +
                      std::to_string(scale.center) + " not in the subset");
}

GraphSpec scale_graph(const ScaleDefinition& scale, const SkeletonLayout& lay) {
  validate_scale(scale, lay);
  std::vector<int> local(lay.num_joints, -1);
  for (std::size_t i = 0; i < scale.nodes.size(); ++i)
    local[static_cast<std::size_t>(scale.nodes[i])] = static_cast<int>(i);
  GraphSpec g;
  g.name = lay.id + ":" + scale.name;
  g.num_nodes = scale.nodes.size();
  for (const auto& [a, b] : scale.edges)
    g.edges.emplace_back(local[static_cast<std::size_t>(a)],
                         local[static_cast<std::size_t>(b)]);
  g.center = local[static_cast<std::size_t>(scale.center)];
  validate_graph(g);
  return g;
}

std::vector<ScaleDefinition> default_scales(const SkeletonLayout& lay) {
  ScaleDefinition full;
  full.name = "full";
  for (std::size_t v = 0; v < lay.num_joints; ++v)
    full.nodes.push_back(static_cast<int>(v));
  full.edges = lay.edges;
  full.center = lay.center_joint;

  ScaleDefinition part, core;
  part.name = "part";
  core.name = "core";
  if (lay.id == "ntu25") {
    // spine base, spine shoulder, head, elbows, wrists, knees, ankles
    part.nodes = {0, 20, 3, 5, 6, 9, 10, 13, 14, 17, 18};
    part.edges = {{0, 20}, {20, 3}, {20, 5},  {5, 6},   {20, 9},
                  {9, 10}, {0, 13}, {13, 14}, {0, 17},  {17, 18}};
    part.center = 20;
    // trunk, head, wrists, ankles; lateral cross links at wrists and ankles
    core.nodes = {0, 20, 3, 6, 10, 14, 18};
    core.edges = {{0, 20}, {20, 3}, {20, 6}, {20, 10},
                  {0, 14}, {0, 18}, {6, 10}, {14, 18}};
    core.center = 20;
  } else if (lay.id == "openpose18") {
    // neck, hips, elbows, wrists, knees, ankles
    part.nodes = {1, 8, 11, 3, 4, 6, 7, 9, 10, 12, 13};
    part.edges = {{1, 8},  {1, 11},  {8, 11}, {1, 3},   {3, 4},  {1, 6},
                  {6, 7},  {8, 9},   {9, 10}, {11, 12}, {12, 13}};
    part.center = 1;
    // neck, hips, wrists, ankles; lateral cross links at wrists and ankles
    core.nodes = {1, 8, 11, 4, 7, 10, 13};
    core.edges = {{1, 8},  {1, 11}, {1, 4},   {1, 7},
                  {8, 10}, {11, 13}, {4, 7},  {10, 13}};
    core.center = 1;
  } else {
    throw ConfigError("no default scales for layout '" + lay.id + "'");
  }

  for (const auto* s : {&full, &part, &core}) validate_scale(*s, lay);
  return {full, part, core};
}

}  // namespace tgn
