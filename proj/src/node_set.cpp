#include "glt/node_set.hpp"

#include "glt/error.hpp"

#include <algorithm>
#include <bit>
#include <iterator>

namespace glt {

NodeSet::NodeSet(std::initializer_list<NodeId> nodes) : NodeSet(std::vector<NodeId>(nodes)) {}

NodeSet::NodeSet(std::vector<NodeId> nodes) : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
}

NodeSet NodeSet::from_strict(std::vector<NodeId> nodes) {
  const auto before = nodes.size();
  NodeSet out(std::move(nodes));
  if (out.size() != before) {
    throw Error(ErrorKind::InvalidArgument, "node set contains duplicate entries");
  }
  return out;
}

bool NodeSet::contains(NodeId v) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), v);
}

NodeSet NodeSet::united(const NodeSet& other) const {
  NodeSet out;
  std::set_union(begin(), end(), other.begin(), other.end(), std::back_inserter(out.nodes_));
  return out;
}

NodeSet NodeSet::intersected(const NodeSet& other) const {
  NodeSet out;
  std::set_intersection(begin(), end(), other.begin(), other.end(),
                        std::back_inserter(out.nodes_));
  return out;
}

NodeSet NodeSet::minus(const NodeSet& other) const {
  NodeSet out;
  std::set_difference(begin(), end(), other.begin(), other.end(), std::back_inserter(out.nodes_));
  return out;
}

bool NodeSet::intersects(const NodeSet& other) const {
  auto a = begin();
  auto b = other.begin();
  while (a != end() && b != other.end()) {
    if (*a == *b) return true;
    if (*a < *b) ++a; else ++b;
  }
  return false;
}

bool NodeSet::is_subset_of(const NodeSet& other) const {
  return std::includes(other.begin(), other.end(), begin(), end());
}

NodeSet NodeSet::with(NodeId v) const {
  NodeSet out = *this;
  auto it = std::lower_bound(out.nodes_.begin(), out.nodes_.end(), v);
  if (it == out.nodes_.end() || *it != v) out.nodes_.insert(it, v);
  return out;
}

NodeMask to_mask(const NodeSet& set) {
  NodeMask mask = 0;
  for (NodeId v : set) {
    if (v < 0 || v >= 64) {
      throw Error(ErrorKind::InvalidArgument, "bitmask algorithms support at most 64 nodes");
    }
    mask |= NodeMask{1} << v;
  }
  return mask;
}

NodeSet from_mask(NodeMask mask) {
  std::vector<NodeId> nodes;
  nodes.reserve(static_cast<std::size_t>(std::popcount(mask)));
  while (mask != 0) {
    nodes.push_back(static_cast<NodeId>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return NodeSet(std::move(nodes));
}

}  // namespace glt
