#include "iig/path_selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace iig {

namespace {

Path path_to_root(const Tree& tree, int leaf) {
  Path path;
  for (int id = leaf; id >= 0; id = tree.nodes[id].parent) path.node_ids.push_back(id);
  std::reverse(path.node_ids.begin(), path.node_ids.end());
  path.cost = tree.nodes[leaf].cost;
  path.info = tree.nodes[leaf].info;
  return path;
}

}  // namespace

std::vector<Path> enumerate_paths(const Tree& tree) {
  if (tree.nodes.empty()) throw std::invalid_argument("enumerate_paths: empty tree");
  std::vector<std::vector<int>> children(tree.nodes.size());
  for (const NodeRecord& node : tree.nodes)
    if (node.parent >= 0) children[node.parent].push_back(node.id);
  // Insertion order is id order, so each child list is already ascending.
  std::vector<int> leaves;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (children[id].empty()) {
      leaves.push_back(id);
      continue;
    }
    for (auto it = children[id].rbegin(); it != children[id].rend(); ++it) stack.push_back(*it);
  }
  std::vector<Path> paths;
  paths.reserve(leaves.size());
  for (int leaf : leaves) paths.push_back(path_to_root(tree, leaf));
  return paths;
}

int similar_nodes(const Path& a, const Path& b) {
  const std::unordered_set<int> ids(a.node_ids.begin(), a.node_ids.end());
  int count = 0;
  for (int id : b.node_ids) count += ids.count(id) ? 1 : 0;
  return count;
}

Path select_path(const Tree& tree, const SelectionParams& params) {
  std::vector<Path> paths = enumerate_paths(tree);
  int l_max = 0;
  for (const Path& p : paths) l_max = std::max(l_max, p.length());
  const int l_min = static_cast<int>(std::ceil(params.kappa * l_max));
  std::vector<Path> kept;
  for (Path& p : paths)
    if (p.length() > l_min) kept.push_back(std::move(p));
  if (kept.empty()) {
    // Degenerate tiny tree: fall back to the single longest path.
    Path best = paths.front();
    for (const Path& p : paths)
      if (p.length() > best.length()) best = p;
    return best;
  }

  const int n = static_cast<int>(kept.size());
  std::vector<int> vote(n, 0);
  for (int i = 0; i < n - 1; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int li = kept[i].length();
      const int lj = kept[j].length();
      const double ratio =
          static_cast<double>(similar_nodes(kept[i], kept[j])) / std::min(li, lj);
      if (ratio > params.s_ratio) {
        int winner, loser;
        if (li != lj) {
          winner = li > lj ? i : j;
        } else {
          // Equal lengths: the path with the higher leaf id takes the
          // positive vote so the outcome stays deterministic.
          winner = kept[i].leaf() > kept[j].leaf() ? i : j;
        }
        loser = winner == i ? j : i;
        vote[winner] += 1;
        vote[loser] -= 1;
      } else {
        vote[i] += 1;
        vote[j] += 1;
      }
    }
  }

  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (vote[i] > vote[best]) {
      best = i;
    } else if (vote[i] == vote[best]) {
      if (kept[i].info > kept[best].info ||
          (kept[i].info == kept[best].info && kept[i].leaf() < kept[best].leaf()))
        best = i;
    }
  }
  return kept[best];
}

}  // namespace iig
