// pdmskit -- disjoint-set union for sparsity components of kernel windows.
#ifndef PDMSKIT_UNION_FIND_HPP
#define PDMSKIT_UNION_FIND_HPP

#include <cstddef>
#include <numeric>
#include <vector>

namespace pdmskit {

// Union-find with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1), count_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];  // path halving
      x = parent_[x];
    }
    return x;
  }

  // Merges the sets containing a and b; returns true when they were distinct.
  bool merge(std::size_t a, std::size_t b) {
    std::size_t ra = find(a);
    std::size_t rb = find(b);
    if (ra == rb) return false;
    if (size_[ra] < size_[rb]) std::swap(ra, rb);
    parent_[rb] = ra;
    size_[ra] += size_[rb];
    --count_;
    return true;
  }

  bool connected(std::size_t a, std::size_t b) { return find(a) == find(b); }

  std::size_t count() const { return count_; }

  // Components as sorted index lists, ordered by smallest contained index.
  std::vector<std::vector<std::size_t>> components() {
    const std::size_t n = parent_.size();
    std::vector<std::vector<std::size_t>> by_root(n);
    for (std::size_t i = 0; i < n; ++i) by_root[find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> result;
    result.reserve(count_);
    for (std::size_t i = 0; i < n; ++i) {
      if (!by_root[i].empty()) result.push_back(std::move(by_root[i]));
    }
    return result;  // roots visited in ascending order => smallest-first
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
  std::size_t count_;
};

}  // namespace pdmskit

#endif  // PDMSKIT_UNION_FIND_HPP
