#pragma once

#include "hairrec/core.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace hairrec {

// Exact nearest-neighbor tree over 3D points. Supports a candidate predicate
// (applied per point); pruning stays valid because filtering only shrinks the
// admissible set. Deterministic: equal distances resolve to the lower index.
class KdTree3 {
 public:
  KdTree3() = default;

  explicit KdTree3(std::vector<Vec3> points) : pts_(std::move(points)) {
    order_.resize(pts_.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!pts_.empty()) build(0, static_cast<int>(pts_.size()));
  }

  size_t size() const { return pts_.size(); }
  const Vec3& point(int i) const { return pts_[i]; }

  template <typename Pred>
  int nearest(const Vec3& q, Pred&& pred, double* dist_out = nullptr) const {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    if (!pts_.empty()) search(0, static_cast<int>(pts_.size()), 0, q, pred, best, best_d2);
    if (dist_out) *dist_out = best < 0 ? best_d2 : std::sqrt(best_d2);
    return best;
  }

  int nearest(const Vec3& q, double* dist_out = nullptr) const {
    return nearest(q, [](int) { return true; }, dist_out);
  }

  // Indices of the k closest points, ordered by (distance, index).
  std::vector<int> k_nearest(const Vec3& q, int k) const {
    std::vector<std::pair<double, int>> heap;  // sorted ascending, size <= k
    if (k > 0 && !pts_.empty()) search_k(0, static_cast<int>(pts_.size()), q, k, heap);
    std::vector<int> out;
    out.reserve(heap.size());
    for (const auto& [d2, idx] : heap) out.push_back(idx);
    return out;
  }

 private:
  static constexpr int kLeaf = 16;
  std::vector<Vec3> pts_;
  std::vector<int> order_;   // permutation; subranges form subtrees
  std::vector<int8_t> axis_; // split axis per subrange midpoint

  void build(int begin, int end) {
    if (axis_.empty()) axis_.assign(pts_.size(), -1);
    if (end - begin <= kLeaf) return;
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (int i = begin; i < end; ++i) {
      lo = lo.cwiseMin(pts_[order_[i]]);
      hi = hi.cwiseMax(pts_[order_[i]]);
    }
    int ax = 0;
    (hi - lo).maxCoeff(&ax);
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                       const double ca = pts_[a][ax], cb = pts_[b][ax];
                       return ca != cb ? ca < cb : a < b;
                     });
    axis_[mid] = static_cast<int8_t>(ax);
    build(begin, mid);
    build(mid + 1, end);
  }

  template <typename Pred>
  void search(int begin, int end, int, const Vec3& q, Pred& pred, int& best,
              double& best_d2) const {
    if (end - begin <= kLeaf) {
      for (int i = begin; i < end; ++i) {
        const int idx = order_[i];
        if (!pred(idx)) continue;
        const double d2 = (pts_[idx] - q).squaredNorm();
        if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
          best_d2 = d2;
          best = idx;
        }
      }
      return;
    }
    const int mid = (begin + end) / 2;
    const int ax = axis_[mid];
    const int pivot = order_[mid];
    // The pivot itself belongs to no child; test it here.
    if (pred(pivot)) {
      const double d2 = (pts_[pivot] - q).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && pivot < best)) {
        best_d2 = d2;
        best = pivot;
      }
    }
    const double delta = q[ax] - pts_[pivot][ax];
    const int near_b = delta <= 0.0 ? begin : mid + 1;
    const int near_e = delta <= 0.0 ? mid : end;
    const int far_b = delta <= 0.0 ? mid + 1 : begin;
    const int far_e = delta <= 0.0 ? end : mid;
    search(near_b, near_e, 0, q, pred, best, best_d2);
    if (delta * delta <= best_d2) search(far_b, far_e, 0, q, pred, best, best_d2);
  }

  void offer_k(const Vec3& q, int idx, int k, std::vector<std::pair<double, int>>& heap) const {
    const std::pair<double, int> cand{(pts_[idx] - q).squaredNorm(), idx};
    if (static_cast<int>(heap.size()) == k && !(cand < heap.back())) return;
    heap.insert(std::lower_bound(heap.begin(), heap.end(), cand), cand);
    if (static_cast<int>(heap.size()) > k) heap.pop_back();
  }

  void search_k(int begin, int end, const Vec3& q, int k,
                std::vector<std::pair<double, int>>& heap) const {
    if (end - begin <= kLeaf) {
      for (int i = begin; i < end; ++i) offer_k(q, order_[i], k, heap);
      return;
    }
    const int mid = (begin + end) / 2;
    const int ax = axis_[mid];
    offer_k(q, order_[mid], k, heap);
    const double delta = q[ax] - pts_[order_[mid]][ax];
    const int near_b = delta <= 0.0 ? begin : mid + 1;
    const int near_e = delta <= 0.0 ? mid : end;
    const int far_b = delta <= 0.0 ? mid + 1 : begin;
    const int far_e = delta <= 0.0 ? end : mid;
    search_k(near_b, near_e, q, k, heap);
    if (static_cast<int>(heap.size()) < k || delta * delta <= heap.back().first)
      search_k(far_b, far_e, q, k, heap);
  }
};

}  // namespace hairrec
