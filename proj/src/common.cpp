#include "vds/common.hpp"

#include <algorithm>
#include <iterator>

namespace vds {

IndexSet::IndexSet(std::initializer_list<std::size_t> ids) : IndexSet(std::vector<std::size_t>(ids)) {}

IndexSet::IndexSet(std::vector<std::size_t> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

IndexSet IndexSet::range(std::size_t first, std::size_t last) {
  IndexSet s;
  for (std::size_t i = first; i < last; ++i) s.ids_.push_back(i);
  return s;
}

bool IndexSet::contains(std::size_t i) const { return std::binary_search(ids_.begin(), ids_.end(), i); }

std::size_t IndexSet::max_index() const {
  if (ids_.empty()) throw ArgumentError("max_index of an empty index set");
  return ids_.back();
}

IndexSet IndexSet::with(std::size_t i) const {
  IndexSet s = *this;
  auto it = std::lower_bound(s.ids_.begin(), s.ids_.end(), i);
  if (it == s.ids_.end() || *it != i) s.ids_.insert(it, i);
  return s;
}

IndexSet IndexSet::complement(std::size_t n) const {
  IndexSet s;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k < ids_.size() && ids_[k] < i) ++k;
    if (k < ids_.size() && ids_[k] == i) continue;
    s.ids_.push_back(i);
  }
  return s;
}

IndexSet IndexSet::intersect(const IndexSet& other) const {
  IndexSet s;
  std::set_intersection(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(), std::back_inserter(s.ids_));
  return s;
}

IndexSet IndexSet::unite(const IndexSet& other) const {
  IndexSet s;
  std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(), std::back_inserter(s.ids_));
  return s;
}

}  // namespace vds
