#include "hairrec/strand.hpp"

#include <algorithm>
#include <cmath>

namespace hairrec {

void validate_strand(const Strand& s, const std::string& context) {
  const std::string where = context.empty() ? std::string("strand") : context;
  if (s.vertices.size() < 2)
    throw Error(ErrorKind::Validation, where + ": fewer than 2 vertices");
  if (s.tangents.size() != s.vertices.size())
    throw Error(ErrorKind::Validation, where + ": tangent count mismatch");
  if (!s.colors.empty() && s.colors.size() != s.vertices.size())
    throw Error(ErrorKind::Validation, where + ": color count mismatch");
  for (size_t i = 0; i + 1 < s.vertices.size(); ++i) {
    if ((s.vertices[i + 1] - s.vertices[i]).norm() == 0.0)
      throw Error(ErrorKind::Validation, where + ": repeated consecutive vertex");
  }
  for (const auto& t : s.tangents) {
    if (std::abs(t.norm() - 1.0) > 1e-6)
      throw Error(ErrorKind::Validation, where + ": non-unit tangent");
  }
}

Strand resample_strand(const Strand& s, int n) {
  if (n < 2) throw Error(ErrorKind::Argument, "resample_strand: n must be >= 2");
  if (s.vertices.size() < 2)
    throw Error(ErrorKind::Validation, "resample_strand: input has fewer than 2 vertices");

  const size_t m = s.vertices.size();
  std::vector<double> cum(m, 0.0);
  for (size_t i = 1; i < m; ++i) cum[i] = cum[i - 1] + (s.vertices[i] - s.vertices[i - 1]).norm();
  const double total = cum.back();
  if (total == 0.0)
    throw Error(ErrorKind::DegenerateGeometry, "resample_strand: zero-length strand");

  Strand out;
  out.vertices.resize(static_cast<size_t>(n));
  const bool with_colors = s.has_colors();
  if (with_colors) out.colors.resize(static_cast<size_t>(n));

  out.vertices.front() = s.vertices.front();
  out.vertices.back() = s.vertices.back();
  if (with_colors) {
    out.colors.front() = s.colors.front();
    out.colors.back() = s.colors.back();
  }

  size_t seg = 0;
  for (int k = 1; k + 1 < n; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 2 < m && cum[seg + 1] < target) ++seg;
    const double seg_len = cum[seg + 1] - cum[seg];
    const double u = seg_len > 0.0 ? (target - cum[seg]) / seg_len : 0.0;
    out.vertices[static_cast<size_t>(k)] =
        (1.0 - u) * s.vertices[seg] + u * s.vertices[seg + 1];
    if (with_colors)
      out.colors[static_cast<size_t>(k)] = (1.0 - u) * s.colors[seg] + u * s.colors[seg + 1];
  }
  out.recompute_tangents();
  return out;
}

Strand decimate_strand(const Strand& s, double spacing) {
  if (spacing <= 0.0) throw Error(ErrorKind::Argument, "decimate_strand: spacing must be > 0");
  Strand out;
  if (s.vertices.empty()) return out;
  const bool with_colors = s.has_colors();
  double since_last = 0.0;
  out.vertices.push_back(s.vertices.front());
  out.tangents.push_back(s.tangents.empty() ? Vec3::UnitX().eval() : s.tangents.front());
  if (with_colors) out.colors.push_back(s.colors.front());
  for (size_t i = 1; i < s.vertices.size(); ++i) {
    since_last += (s.vertices[i] - s.vertices[i - 1]).norm();
    if (since_last >= spacing) {
      out.vertices.push_back(s.vertices[i]);
      out.tangents.push_back(i < s.tangents.size() ? s.tangents[i] : out.tangents.back());
      if (with_colors) out.colors.push_back(s.colors[i]);
      since_last = 0.0;
    }
  }
  return out;
}

}  // namespace hairrec
