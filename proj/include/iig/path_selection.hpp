#pragma once

#include <vector>

#include "iig/planner.hpp"

namespace iig {

struct Path {
  std::vector<int> node_ids;  // root first, leaf last
  double cost = 0.0;
  double info = 0.0;

  int length() const { return static_cast<int>(node_ids.size()); }
  int leaf() const { return node_ids.back(); }
};

struct SelectionParams {
  double kappa = 0.4;    // minimum path length as a fraction of the longest
  double s_ratio = 0.6;  // similarity ratio above which paths compete
};

/// One path per leaf, in preorder-DFS leaf order (children visited in
/// ascending id order).
std::vector<Path> enumerate_paths(const Tree& tree);

/// Number of node ids the two paths share.
int similar_nodes(const Path& a, const Path& b);

/// Length-filter and similarity-vote over all root-to-leaf paths; returns
/// the max-vote, max-info path (ties broken by lowest leaf id).
Path select_path(const Tree& tree, const SelectionParams& params);

}  // namespace iig
