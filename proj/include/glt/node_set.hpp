#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace glt {

using NodeId = std::int32_t;

// Sorted, duplicate-free set of node indices.
class NodeSet {
 public:
  using const_iterator = std::vector<NodeId>::const_iterator;

  NodeSet() = default;
  NodeSet(std::initializer_list<NodeId> nodes);
  // Sorts and removes duplicates.
  explicit NodeSet(std::vector<NodeId> nodes);

  // Throws InvalidArgument on duplicates instead of silently merging them.
  static NodeSet from_strict(std::vector<NodeId> nodes);

  bool contains(NodeId v) const;
  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }
  const_iterator begin() const noexcept { return nodes_.begin(); }
  const_iterator end() const noexcept { return nodes_.end(); }
  NodeId operator[](std::size_t i) const { return nodes_[i]; }
  const std::vector<NodeId>& values() const noexcept { return nodes_; }

  NodeSet united(const NodeSet& other) const;
  NodeSet intersected(const NodeSet& other) const;
  NodeSet minus(const NodeSet& other) const;
  bool intersects(const NodeSet& other) const;
  bool is_subset_of(const NodeSet& other) const;
  NodeSet with(NodeId v) const;

  friend bool operator==(const NodeSet&, const NodeSet&) = default;
  friend auto operator<=>(const NodeSet&, const NodeSet&) = default;

 private:
  std::vector<NodeId> nodes_;
};

// Bitmask helpers for the exhaustive algorithms (graphs of at most 64 nodes).
using NodeMask = std::uint64_t;
NodeMask to_mask(const NodeSet& set);
NodeSet from_mask(NodeMask mask);

}  // namespace glt
