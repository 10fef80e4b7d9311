#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tgn/skeleton.hpp"
#include "tgn/tensor.hpp"

namespace tgn {

enum class PartitionStrategy { uniform, distance, spatial };

PartitionStrategy partition_strategy_from(const std::string& name);
std::string to_string(PartitionStrategy s);

/// Undirected graph over a joint set. Node indices are local and 0-based.
struct GraphSpec {
  std::string name;
  std::size_t num_nodes = 0;
  std::vector<std::pair<int, int>> edges;  // undirected, no self loops
  int center = 0;
};

void validate_graph(const GraphSpec& g);

/// BFS hop distances from `source` over the undirected edge set;
/// unreachable nodes get -1.
std::vector<int> hop_distances(const GraphSpec& g, int source);

/// Partitioned, symmetrically normalized adjacency. Each partition holds
/// D^(-1/2) A_p D^(-1/2) where the unnormalized parts sum to A + I exactly
/// and the degrees come from A + I (shared across partitions).
///   uniform:  1 partition, A + I whole
///   distance: 2 partitions, self loops | neighbors
///   spatial:  3 partitions by hop distance to the center joint:
///             root (equal), centripetal (closer), centrifugal (farther)
struct AdjacencyStack {
  GraphSpec graph;
  PartitionStrategy strategy = PartitionStrategy::spatial;
  std::vector<Tensor<double>> partitions;  // each [V, V]

  std::size_t size() const { return partitions.size(); }
  std::size_t nodes() const { return graph.num_nodes; }
};

/// The spatial strategy requires every node reachable from the center; the
/// error names the orphaned nodes. Zero-degree is impossible (self loops).
AdjacencyStack build_adjacency(const GraphSpec& g, PartitionStrategy strategy);

/// A coarser observation scale: a joint subset of a full layout with its own
/// edge set. Indices in `nodes` and `edges` refer to full-layout joints.
struct ScaleDefinition {
  std::string name;
  std::vector<int> nodes;                  // full-layout ids, distinct
  std::vector<std::pair<int, int>> edges;  // full-layout ids, both in nodes
  int center = 0;                          // full-layout id, in nodes
};

/// Remaps a scale to local contiguous indices (order of `nodes` preserved).
GraphSpec scale_graph(const ScaleDefinition& scale, const SkeletonLayout& lay);

void validate_scale(const ScaleDefinition& scale, const SkeletonLayout& lay);

/// Shipped three-scale stack for a layout: "full" (every joint), "part"
/// (11 torso-anchored limb joints), "core" (7 joints with left-right
/// wrist and ankle cross links so lateral symmetry stays visible).
std::vector<ScaleDefinition> default_scales(const SkeletonLayout& lay);

bool is_connected(const GraphSpec& g);

}  // namespace tgn
