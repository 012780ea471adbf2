#include "vhc/chart.hpp"

#include "vhc/error.hpp"

namespace vhc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Chart Chart::euclidean(std::size_t n) {
  return Chart{n, std::vector<bool>(n, false), std::vector<double>(n, -kInf), std::vector<double>(n, kInf)};
}

Chart Chart::cylinder(std::vector<bool> periodic) {
  Chart c = euclidean(periodic.size());
  for (std::size_t i = 0; i < c.dim; ++i) {
    if (periodic[i]) {
      c.lo[i] = 0.0;
      c.hi[i] = kTwoPi;
    }
  }
  c.periodic = std::move(periodic);
  return c;
}

Chart Chart::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.size() != hi.size()) throw DimensionError("Chart::box: bound sizes differ");
  Chart c = euclidean(lo.size());
  c.lo = std::move(lo);
  c.hi = std::move(hi);
  return c;
}

bool Chart::contains(std::span<const double> x) const {
  if (x.size() != dim) return false;
  for (std::size_t i = 0; i < dim; ++i) {
    if (!std::isfinite(x[i])) return false;
    if (periodic[i]) continue;
    if (!(x[i] > lo[i] && x[i] < hi[i])) return false;
  }
  return true;
}

bool Chart::any_periodic() const {
  for (bool p : periodic)
    if (p) return true;
  return false;
}

std::vector<double> Chart::wrap(std::span<const double> x) const {
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t i = 0; i < dim && i < out.size(); ++i) {
    if (!periodic[i]) continue;
    double r = std::fmod(out[i] - lo[i], kTwoPi);
    if (r < 0.0) r += kTwoPi;
    out[i] = lo[i] + r;
  }
  return out;
}

std::vector<std::vector<double>> Chart::grid(std::size_t per_dim, double margin) const {
  if (per_dim == 0) throw DimensionError("Chart::grid: need at least one point per coordinate");
  std::vector<std::vector<double>> axes(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    double a = lo[i];
    double b = hi[i];
    if (periodic[i]) {
      for (std::size_t k = 0; k < per_dim; ++k) axes[i].push_back(a + kTwoPi * static_cast<double>(k) / per_dim);
      continue;
    }
    a = std::isfinite(a) ? a + margin : -window;
    b = std::isfinite(b) ? b - margin : window;
    if (per_dim == 1) {
      axes[i].push_back(0.5 * (a + b));
      continue;
    }
    for (std::size_t k = 0; k < per_dim; ++k)
      axes[i].push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(per_dim - 1));
  }
  std::vector<std::vector<double>> pts{{}};
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<std::vector<double>> next;
    next.reserve(pts.size() * axes[i].size());
    for (const auto& p : pts)
      for (double v : axes[i]) {
        auto q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    pts = std::move(next);
  }
  return pts;
}

}  // namespace vhc
