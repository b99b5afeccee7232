#include "hairrec/strands3d.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace hairrec {

LiftResult lift_strands(const std::vector<Strand2D>& strands2d, const CameraFrame& frame) {
  LiftResult result;
  for (const auto& s2 : strands2d) {
    bool lifted_any = false;
    Strand current;
    auto flush = [&] {
      if (current.vertices.size() >= 2) {
        current.recompute_tangents();
        result.strands.push_back(std::move(current));
        lifted_any = true;
      }
      current = Strand{};
    };
    for (const auto& p : s2.points) {
      const int px = nearest_px(p.x()), py = nearest_px(p.y());
      const float d = frame.depth.contains(px, py) ? frame.depth.at(px, py) : 0.0f;
      if (d <= 0.0f) {
        flush();
        continue;
      }
      const Vec3 v = frame.camera.unproject(p, d);
      if (!current.vertices.empty() && (v - current.vertices.back()).norm() == 0.0) continue;
      current.vertices.push_back(v);
    }
    flush();
    if (!lifted_any) ++result.dropped;
  }
  return result;
}

std::vector<Strand> remove_peaks(const Strand& strand, double threshold) {
  std::vector<Strand> segments;
  Strand current;
  auto flush = [&] {
    if (current.vertices.size() >= 2) {
      current.recompute_tangents();
      segments.push_back(std::move(current));
    }
    current = Strand{};
  };

  const auto& v = strand.vertices;
  size_t i = 0;
  while (i < v.size()) {
    if (current.vertices.empty()) {
      current.vertices.push_back(v[i]);
      ++i;
      continue;
    }
    const Vec3& last = current.vertices.back();
    if ((v[i] - last).norm() <= threshold) {
      if ((v[i] - last).norm() > 0.0) current.vertices.push_back(v[i]);
      ++i;
      continue;
    }
    // Out of range: a spike if the next vertex is back within range of the
    // last kept one, otherwise a genuine gap.
    if (i + 1 < v.size() && (v[i + 1] - last).norm() <= threshold) {
      ++i;  // drop the spike
      continue;
    }
    flush();  // gap: restart a segment at the offending vertex
  }
  flush();
  return segments;
}

namespace {

struct Overlap {
  int len = 0;            // run length in vertices of A
  int a0 = 0, a1 = -1;    // inclusive run bounds on A
  int b0 = 0, b1 = -1;    // matched index extremes on B
  double mean_dot = 0.0;
  bool qualifies = false;
};

Aabb strand_bounds(const Strand& s) {
  Aabb b;
  for (const auto& v : s.vertices) b.expand(v);
  return b;
}

bool boxes_within(const Aabb& a, const Aabb& b, double margin) {
  for (int k = 0; k < 3; ++k) {
    if (a.min[k] > b.max[k] + margin || b.min[k] > a.max[k] + margin) return false;
  }
  return true;
}

// Longest run of A-vertices whose nearest B-vertex is within delta; the pair
// qualifies when the run spans >= 2 vertices with positive mean tangent dot.
Overlap overlap_score(const Strand& a, const Strand& b, double delta) {
  Overlap best;
  const int na = static_cast<int>(a.vertices.size());
  const int nb = static_cast<int>(b.vertices.size());

  int run_start = -1;
  double run_dot = 0.0;
  int run_bmin = 0, run_bmax = 0;
  auto close_run = [&](int end) {
    if (run_start < 0) return;
    const int len = end - run_start;
    if (len >= 2 && len > best.len) {
      best.len = len;
      best.a0 = run_start;
      best.a1 = end - 1;
      best.b0 = run_bmin;
      best.b1 = run_bmax;
      best.mean_dot = run_dot / len;
    }
    run_start = -1;
  };

  for (int i = 0; i < na; ++i) {
    int jbest = -1;
    double dbest = delta;
    for (int j = 0; j < nb; ++j) {
      const double d = (a.vertices[i] - b.vertices[j]).norm();
      if (d < dbest) {
        dbest = d;
        jbest = j;
      }
    }
    if (jbest < 0) {
      close_run(i);
      continue;
    }
    if (run_start < 0) {
      run_start = i;
      run_dot = 0.0;
      run_bmin = run_bmax = jbest;
    }
    run_dot += a.tangents[i].dot(b.tangents[jbest]);
    run_bmin = std::min(run_bmin, jbest);
    run_bmax = std::max(run_bmax, jbest);
  }
  close_run(na);
  best.qualifies = best.len >= 2 && best.mean_dot > 0.0;
  return best;
}

// Closest B-vertex to p (unconditional; used to average the overlap).
const Vec3& closest_vertex(const Strand& b, const Vec3& p) {
  int jbest = 0;
  double dbest = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < b.vertices.size(); ++j) {
    const double d = (p - b.vertices[j]).squaredNorm();
    if (d < dbest) {
      dbest = d;
      jbest = static_cast<int>(j);
    }
  }
  return b.vertices[jbest];
}

Strand merge_pair(const Strand& base, const Strand& other, const Overlap& ov) {
  Strand merged;
  const int n = static_cast<int>(base.vertices.size());

  if (ov.a0 == 0) {  // run touches the base's root: take the other's head tail
    for (int j = 0; j < ov.b0; ++j) merged.vertices.push_back(other.vertices[j]);
  }
  for (int i = 0; i < ov.a0; ++i) merged.vertices.push_back(base.vertices[i]);
  for (int i = ov.a0; i <= ov.a1; ++i)
    merged.vertices.push_back(0.5 * (base.vertices[i] + closest_vertex(other, base.vertices[i])));
  for (int i = ov.a1 + 1; i < n; ++i) merged.vertices.push_back(base.vertices[i]);
  if (ov.a1 == n - 1) {
    for (size_t j = ov.b1 + 1; j < other.vertices.size(); ++j)
      merged.vertices.push_back(other.vertices[j]);
  }

  // Averaging can collapse neighbors; keep consecutive vertices distinct.
  std::vector<Vec3> dedup;
  dedup.reserve(merged.vertices.size());
  for (const auto& v : merged.vertices) {
    if (dedup.empty() || (v - dedup.back()).norm() > 0.0) dedup.push_back(v);
  }
  merged.vertices = std::move(dedup);
  merged.recompute_tangents();
  return merged;
}

}  // namespace

QueryStrands merge_strands(std::vector<Strand> all, std::vector<int> source_frame,
                           int target, const SceneConfig& cfg) {
  if (all.empty()) throw Error(ErrorKind::Argument, "merge_strands: no strands");
  if (target < 1) throw Error(ErrorKind::Argument, "merge_strands: target must be >= 1");
  if (source_frame.empty()) source_frame.assign(all.size(), -1);
  if (source_frame.size() != all.size())
    throw Error(ErrorKind::Argument, "merge_strands: source tag count mismatch");

  const double delta = cfg.merge_distance;
  const size_t n = all.size();
  std::vector<uint8_t> alive(n, 1);
  std::vector<Aabb> boxes(n);
  std::vector<double> lengths(n);
  for (size_t i = 0; i < n; ++i) {
    boxes[i] = strand_bounds(all[i]);
    lengths[i] = all[i].length();
  }

  // Pair scores keyed (i, j) with i < j; direction of the overlap follows the
  // longer strand so the merge has a stable base.
  std::map<std::pair<int, int>, Overlap> scores;
  auto rescore = [&](int i, int j) {
    if (i > j) std::swap(i, j);
    const int base = lengths[i] >= lengths[j] ? i : j;
    const int other = base == i ? j : i;
    if (!boxes_within(boxes[i], boxes[j], delta)) {
      scores.erase({i, j});
      return;
    }
    const Overlap ov = overlap_score(all[base], all[other], delta);
    if (ov.qualifies)
      scores[{i, j}] = ov;
    else
      scores.erase({i, j});
  };

  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) rescore(static_cast<int>(i), static_cast<int>(j));

  size_t count = n;
  const size_t stop_count = static_cast<size_t>(std::floor(1.5 * target));
  while (count > stop_count && !scores.empty()) {
    // Longest overlap first; map order breaks ties by the smaller id pair.
    auto pick = scores.begin();
    for (auto it = scores.begin(); it != scores.end(); ++it) {
      if (it->second.len > pick->second.len) pick = it;
    }
    const auto [i, j] = pick->first;
    const Overlap ov = pick->second;
    const int base = lengths[i] >= lengths[j] ? i : j;
    const int other = base == i ? j : i;

    all[i] = merge_pair(all[base], all[other], ov);
    source_frame[i] = source_frame[base];
    alive[j] = 0;
    boxes[i] = strand_bounds(all[i]);
    lengths[i] = all[i].length();
    --count;

    for (auto it = scores.begin(); it != scores.end();) {
      if (it->first.first == i || it->first.second == i || it->first.first == j ||
          it->first.second == j)
        it = scores.erase(it);
      else
        ++it;
    }
    for (size_t k = 0; k < n; ++k) {
      if (alive[k] && static_cast<int>(k) != i) rescore(i, static_cast<int>(k));
    }
  }

  std::vector<int> keep;
  for (size_t i = 0; i < n; ++i)
    if (alive[i]) keep.push_back(static_cast<int>(i));
  if (count > stop_count) {
    std::sort(keep.begin(), keep.end(), [&](int a, int b) {
      return lengths[a] != lengths[b] ? lengths[a] > lengths[b] : a < b;
    });
    keep.resize(std::min(keep.size(), static_cast<size_t>(target)));
    std::sort(keep.begin(), keep.end());
  }

  QueryStrands q;
  q.set.source_tag = "query";
  for (int idx : keep) {
    q.set.strands.push_back(std::move(all[idx]));
    q.source_frame.push_back(source_frame[idx]);
  }
  return q;
}

}  // namespace hairrec
