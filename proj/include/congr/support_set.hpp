#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace congr {

// Sorted set of response indices that pass through a node or edge.
class SupportSet {
 public:
  SupportSet() = default;
  SupportSet(std::initializer_list<std::size_t> items) {
    for (auto i : items) insert(i);
  }

  static SupportSet all(std::size_t m) {
    SupportSet s;
    s.items_.resize(m);
    for (std::size_t i = 0; i < m; ++i) s.items_[i] = i;
    return s;
  }

  void insert(std::size_t index) {
    auto it = std::lower_bound(items_.begin(), items_.end(), index);
    if (it == items_.end() || *it != index) items_.insert(it, index);
  }

  void merge(const SupportSet& other) {
    for (auto i : other.items_) insert(i);
  }

  bool contains(std::size_t index) const {
    return std::binary_search(items_.begin(), items_.end(), index);
  }

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  std::size_t front() const { return items_.front(); }

  const std::vector<std::size_t>& items() const noexcept { return items_; }
  auto begin() const noexcept { return items_.begin(); }
  auto end() const noexcept { return items_.end(); }

  bool operator==(const SupportSet&) const = default;

 private:
  std::vector<std::size_t> items_;
};

}  // namespace congr
