#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pcsim/error.hpp"
#include "pcsim/geom.hpp"

namespace pcsim {

struct CellIndex {
  int i = 0;  // along x
  int j = 0;  // along z
  friend constexpr bool operator==(const CellIndex&, const CellIndex&) = default;
};

enum class BoundaryPolicy { ClampToEdge, FixedFloor };
enum class Interpolation { Nearest, Bilinear };

struct Contact {
  std::uint32_t pointIndex = 0;
  Vec3 worldPos;
  double penetration = 0.0;
};

/// Terrain as a look-up table. A world point (x, z) maps to cell
/// (floor((x - origin.x) * scale), floor((z - origin.z) * scale)); the cell's
/// stored value plus origin.y is the terrain height there.
class HeightField {
 public:
  HeightField(int rows, int cols, double scale, std::vector<double> heights, Vec3 origin = {})
      : rows_(rows), cols_(cols), scale_(scale), origin_(origin), heights_(std::move(heights)) {
    if (rows <= 0 || cols <= 0)
      throw SimError(ErrorCode::InvalidDimension, "height field needs at least one cell");
    if (!(scale > 0) || !std::isfinite(scale))
      throw SimError(ErrorCode::InvalidDimension, "height field scale must be positive");
    if (heights_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
      throw SimError(ErrorCode::InvalidDimension, "height count does not match rows*cols");
    if (!isFinite(origin_))
      throw SimError(ErrorCode::InvalidDimension, "non-finite height field origin");
    for (double h : heights_)
      if (!std::isfinite(h)) throw SimError(ErrorCode::InvalidDimension, "non-finite height");
  }

  static HeightField flat(int rows, int cols, double scale, double height = 0.0,
                          Vec3 origin = {}) {
    return HeightField(rows, cols, scale,
                       std::vector<double>(static_cast<std::size_t>(rows) * cols, height), origin);
  }

  /// Flat square field of side `extent` meters centered on the world origin.
  static HeightField flatCentered(double extent, double scale = 10.0) {
    const int n = static_cast<int>(std::ceil(extent * scale));
    return flat(n, n, scale, 0.0, {-0.5 * n / scale, 0.0, -0.5 * n / scale});
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double scale() const { return scale_; }
  Vec3 origin() const { return origin_; }
  std::span<const double> heights() const { return heights_; }
  double cell(int i, int j) const { return heights_[static_cast<std::size_t>(i) * cols_ + j]; }

  void setBoundary(BoundaryPolicy policy, double floorHeight = 0.0) {
    boundary_ = policy;
    floorHeight_ = floorHeight;
  }
  BoundaryPolicy boundary() const { return boundary_; }
  void setInterpolation(Interpolation mode) { interpolation_ = mode; }
  Interpolation interpolation() const { return interpolation_; }

  /// Unclamped cell coordinates (saturated to the int range).
  std::pair<long, long> rawIndexOf(double x, double z) const {
    return {toIndex((x - origin_.x) * scale_), toIndex((z - origin_.z) * scale_)};
  }

  CellIndex indexOf(double x, double z) const {
    const auto [i, j] = rawIndexOf(x, z);
    return {static_cast<int>(std::clamp<long>(i, 0, rows_ - 1)),
            static_cast<int>(std::clamp<long>(j, 0, cols_ - 1))};
  }

  double heightAt(double x, double z) const {
    if (interpolation_ == Interpolation::Bilinear) return bilinear(x, z);
    const auto [i, j] = rawIndexOf(x, z);
    if (boundary_ == BoundaryPolicy::FixedFloor && !inside(i, j)) return floorHeight_;
    const auto c = indexOf(x, z);
    return cell(c.i, c.j) + origin_.y;
  }

  /// One contact per colliding point at or below the terrain surface.
  /// `collides` may be empty (all points collide).
  void findContacts(std::span<const Vec3> points, std::span<const std::uint8_t> collides,
                    std::vector<Contact>& out) const {
    out.clear();
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (!collides.empty() && !collides[k]) continue;
      const Vec3& p = points[k];
      const double h = heightAt(p.x, p.z);
      if (p.y <= h) out.push_back({static_cast<std::uint32_t>(k), p, h - p.y});
    }
  }

  std::vector<Contact> findContacts(std::span<const Vec3> points,
                                    std::span<const std::uint8_t> collides = {}) const {
    std::vector<Contact> out;
    findContacts(points, collides, out);
    return out;
  }

  /// Distance from `start` towards `end` to the first terrain crossing, or
  /// nullopt when the segment stays above ground. Marches in steps of half a
  /// cell, then bisects the bracketing interval to 1e-4 m.
  std::optional<double> castRay(const Vec3& start, const Vec3& end) const {
    const Vec3 delta = end - start;
    const double length = norm(delta);
    if (!(length > 0)) return std::nullopt;
    const Vec3 dir = delta / length;
    auto below = [&](double t) {
      const Vec3 p = start + dir * t;
      return p.y <= heightAt(p.x, p.z);
    };
    if (below(0.0)) return 0.0;
    const double step = 0.5 / scale_;
    double lo = 0.0;
    for (;;) {
      const double hi = std::min(lo + step, length);
      if (below(hi)) {
        double a = lo, b = hi;
        while (b - a > 1e-4) {
          const double mid = 0.5 * (a + b);
          (below(mid) ? b : a) = mid;
        }
        return 0.5 * (a + b);
      }
      if (hi >= length) return std::nullopt;
      lo = hi;
    }
  }

 private:
  static long toIndex(double v) {
    const double f = std::floor(v);
    if (!(f > -1e9)) return -1000000000L;
    if (f > 1e9) return 1000000000L;
    return static_cast<long>(f);
  }

  bool inside(long i, long j) const { return i >= 0 && j >= 0 && i < rows_ && j < cols_; }

  double sampleOrFloor(long i, long j) const {
    if (boundary_ == BoundaryPolicy::FixedFloor && !inside(i, j)) return floorHeight_;
    return cell(static_cast<int>(std::clamp<long>(i, 0, rows_ - 1)),
                static_cast<int>(std::clamp<long>(j, 0, cols_ - 1))) +
           origin_.y;
  }

  // Samples sit at cell corners i/scale; blends the four surrounding samples.
  double bilinear(double x, double z) const {
    const double u = (x - origin_.x) * scale_, v = (z - origin_.z) * scale_;
    const long i = toIndex(u), j = toIndex(v);
    const double fu = std::clamp(u - static_cast<double>(i), 0.0, 1.0);
    const double fv = std::clamp(v - static_cast<double>(j), 0.0, 1.0);
    const double h00 = sampleOrFloor(i, j), h10 = sampleOrFloor(i + 1, j);
    const double h01 = sampleOrFloor(i, j + 1), h11 = sampleOrFloor(i + 1, j + 1);
    return (h00 * (1 - fu) + h10 * fu) * (1 - fv) + (h01 * (1 - fu) + h11 * fu) * fv;
  }

  int rows_;
  int cols_;
  double scale_;
  Vec3 origin_;
  std::vector<double> heights_;
  BoundaryPolicy boundary_ = BoundaryPolicy::ClampToEdge;
  double floorHeight_ = 0.0;
  Interpolation interpolation_ = Interpolation::Nearest;
};

}  // namespace pcsim
