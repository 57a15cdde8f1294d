#pragma once

// Random AND/OR formula generator shared by the property and acceptance
// suites.

#include <string>
#include <vector>

#include "vfac/policy.hpp"
#include "vfac/rng.hpp"

namespace vfac::testing {

// Builds a formula whose leaves are exactly `leaves` (in order), with gate
// nesting at most `max_depth` deep.
inline PolicyNode random_policy(std::vector<std::string> leaves, int max_depth, Rng& rng) {
  if (leaves.size() == 1) return PolicyNode::leaf(leaves.front());
  const bool is_and = rng.uniform(2) == 0;
  std::vector<PolicyNode> children;
  if (max_depth <= 1) {
    for (auto& l : leaves) children.push_back(PolicyNode::leaf(std::move(l)));
  } else {
    // Split into 2..size contiguous groups.
    std::size_t groups = 2 + rng.uniform(leaves.size() - 1);
    std::vector<std::size_t> cuts;
    std::vector<bool> is_cut(leaves.size(), false);
    for (std::size_t placed = 1; placed < groups;) {
      std::size_t c = 1 + rng.uniform(leaves.size() - 1);
      if (!is_cut[c]) {
        is_cut[c] = true;
        ++placed;
      }
    }
    std::vector<std::string> group;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (is_cut[i]) {
        children.push_back(random_policy(std::move(group), max_depth - 1, rng));
        group.clear();
      }
      group.push_back(std::move(leaves[i]));
    }
    children.push_back(random_policy(std::move(group), max_depth - 1, rng));
  }
  return is_and ? PolicyNode::all_of(std::move(children)) : PolicyNode::any_of(std::move(children));
}

inline int depth(const PolicyNode& node) {
  if (node.kind == PolicyNode::Kind::kLeaf) return 0;
  int d = 0;
  for (const auto& c : node.children) d = std::max(d, depth(c));
  return d + 1;
}

}  // namespace vfac::testing
