#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

// The domain constant
//   kappa(D) = inf over (x,y) in D and 0 < rho < diam D of
//              meas(D cap B((x,y); rho)) / rho^2,
// estimated by grid search: disk-intersection areas by subgrid counting,
// all radii for one center in a single pass over the cells via a distance
// histogram.  Grid search over a double infimum yields an UPPER bound of
// kappa; callers compare against a finer-resolution run to gauge the gap.

namespace qgergo {

struct Vec2 {
    double x = 0;
    double y = 0;
};

/// Closed simple polygon with positive area.
class PolygonDomain {
public:
    explicit PolygonDomain(std::vector<Vec2> vertices) : v_(std::move(vertices)) {
        if (v_.size() < 3)
            throw std::invalid_argument("PolygonDomain: need at least 3 vertices");
        for (const Vec2& p : v_)
            if (!std::isfinite(p.x) || !std::isfinite(p.y))
                throw std::invalid_argument("PolygonDomain: non-finite vertex");
        if (!(std::abs(signed_area()) > 0.0))
            throw std::invalid_argument("PolygonDomain: degenerate (zero area)");
        if (self_intersects())
            throw std::invalid_argument("PolygonDomain: edges self-intersect");
        min_ = max_ = v_.front();
        for (const Vec2& p : v_) {
            min_.x = std::min(min_.x, p.x);
            min_.y = std::min(min_.y, p.y);
            max_.x = std::max(max_.x, p.x);
            max_.y = std::max(max_.y, p.y);
        }
    }

    static PolygonDomain unit_square() {
        return PolygonDomain({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    }

    /// Regular n-gon, handy as a polygonal stand-in for a disk.
    static PolygonDomain regular_ngon(int sides, double radius, Vec2 center) {
        if (sides < 3 || !(radius > 0))
            throw std::invalid_argument("regular_ngon: need >= 3 sides and radius > 0");
        std::vector<Vec2> v(static_cast<std::size_t>(sides));
        for (int i = 0; i < sides; ++i) {
            const double a = 2.0 * kPi_ * i / sides;
            v[static_cast<std::size_t>(i)] = {center.x + radius * std::cos(a),
                                              center.y + radius * std::sin(a)};
        }
        return PolygonDomain(std::move(v));
    }

    const std::vector<Vec2>& vertices() const { return v_; }
    Vec2 bbox_min() const { return min_; }
    Vec2 bbox_max() const { return max_; }

    double area() const { return std::abs(signed_area()); }

    /// Largest pairwise distance; attained at vertices for a polygon.
    double diameter() const {
        double d2 = 0.0;
        for (std::size_t i = 0; i < v_.size(); ++i)
            for (std::size_t j = i + 1; j < v_.size(); ++j) {
                const double dx = v_[i].x - v_[j].x, dy = v_[i].y - v_[j].y;
                d2 = std::max(d2, dx * dx + dy * dy);
            }
        return std::sqrt(d2);
    }

    /// Even-odd ray-casting point test.
    bool contains(double x, double y) const {
        bool in = false;
        for (std::size_t i = 0, j = v_.size() - 1; i < v_.size(); j = i++) {
            if ((v_[i].y > y) != (v_[j].y > y)) {
                const double cross =
                    (v_[j].x - v_[i].x) * (y - v_[i].y) / (v_[j].y - v_[i].y) + v_[i].x;
                if (x < cross) in = !in;
            }
        }
        return in;
    }

private:
    static constexpr double kPi_ = 3.14159265358979323846;

    double signed_area() const {
        double a = 0.0;
        for (std::size_t i = 0, j = v_.size() - 1; i < v_.size(); j = i++)
            a += v_[j].x * v_[i].y - v_[i].x * v_[j].y;
        return 0.5 * a;
    }

    static double orient(Vec2 a, Vec2 b, Vec2 c) {
        return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    }

    static bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
        const double d1 = orient(c, d, a), d2 = orient(c, d, b);
        const double d3 = orient(a, b, c), d4 = orient(a, b, d);
        return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
    }

    bool self_intersects() const {
        const std::size_t n = v_.size();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                // skip adjacent edges (they share an endpoint)
                if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
                if (segments_cross(v_[i], v_[(i + 1) % n], v_[j], v_[(j + 1) % n])) return true;
            }
        }
        return false;
    }

    std::vector<Vec2> v_;
    Vec2 min_, max_;
};

/// meas(D cap B((cx,cy); rho)) / rho^2 by subgrid counting over the disk's
/// bounding box.
inline double coverage_ratio(const PolygonDomain& domain, double cx, double cy, double rho,
                             int resolution) {
    if (!(rho > 0.0)) throw std::invalid_argument("coverage_ratio: rho must be > 0");
    if (resolution < 8) throw std::invalid_argument("coverage_ratio: resolution too small");
    const double h = 2.0 * rho / resolution;
    const double r2 = rho * rho;
    std::size_t count = 0;
    for (int j = 0; j < resolution; ++j) {
        const double y = cy - rho + (j + 0.5) * h;
        const double dy2 = (y - cy) * (y - cy);
        for (int i = 0; i < resolution; ++i) {
            const double x = cx - rho + (i + 0.5) * h;
            const double d2 = (x - cx) * (x - cx) + dy2;
            if (d2 < r2 && domain.contains(x, y)) ++count;
        }
    }
    return static_cast<double>(count) * h * h / r2;
}

struct KappaEstimate {
    double kappa = 0; ///< smallest ratio found (an upper bound of the true inf)
    double arg_x = 0, arg_y = 0, arg_rho = 0;
};

/// Grid-search estimate of kappa(D).  Cells of an axis-aligned subgrid at
/// the given resolution supply both the candidate centers (a coarser
/// subsample) and the area quadrature; for each center the distance
/// histogram over cells yields every radius at once.  Radii below a few
/// cells are excluded: the subgrid cannot measure them, and for a polygon
/// the small-rho limit is the corner-angle ratio already probed by the
/// smallest admitted radii.
inline KappaEstimate kappa_estimate(const PolygonDomain& domain, int resolution,
                                    unsigned threads = 0) {
    if (resolution < 64) throw std::invalid_argument("kappa_estimate: resolution must be >= 64");

    const Vec2 lo = domain.bbox_min(), hi = domain.bbox_max();
    const double hx = (hi.x - lo.x) / resolution;
    const double hy = (hi.y - lo.y) / resolution;
    const double cell_area = hx * hy;

    std::vector<double> xs, ys; // inside-cell centers
    std::vector<Vec2> centers;  // coarse subsample of them
    const int stride = std::max(1, resolution / 128);
    for (int j = 0; j < resolution; ++j) {
        const double y = lo.y + (j + 0.5) * hy;
        for (int i = 0; i < resolution; ++i) {
            const double x = lo.x + (i + 0.5) * hx;
            if (!domain.contains(x, y)) continue;
            xs.push_back(x);
            ys.push_back(y);
            if (i % stride == 0 && j % stride == 0) centers.push_back({x, y});
        }
    }
    if (xs.empty()) throw std::invalid_argument("kappa_estimate: no interior cells found");

    const double diam = domain.diameter();
    const int rbins = std::max(16, resolution / 4);
    const double drho = diam / rbins;
    const double inv_drho = 1.0 / drho;
    const double rho_min = 4.0 * std::hypot(hx, hy);

    const unsigned nthreads = [&] {
        if (threads > 0) return threads;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? hw : 1u;
    }();

    std::vector<KappaEstimate> best(nthreads);
    const auto scan = [&](unsigned tid) {
        KappaEstimate b;
        b.kappa = std::numeric_limits<double>::infinity();
        std::vector<std::size_t> hist(static_cast<std::size_t>(rbins), 0);
        for (std::size_t c = tid; c < centers.size(); c += nthreads) {
            const double cx = centers[c].x, cy = centers[c].y;
            std::fill(hist.begin(), hist.end(), 0);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const double dx = xs[i] - cx, dy = ys[i] - cy;
                auto bin = static_cast<long long>(std::sqrt(dx * dx + dy * dy) * inv_drho);
                if (bin >= rbins) bin = rbins - 1;
                ++hist[static_cast<std::size_t>(bin)];
            }
            std::size_t cum = 0;
            for (int r = 0; r < rbins; ++r) {
                cum += hist[static_cast<std::size_t>(r)];
                const double rho = (r + 1) * drho;
                if (rho < rho_min) continue;
                const double ratio = static_cast<double>(cum) * cell_area / (rho * rho);
                if (ratio < b.kappa) b = {ratio, cx, cy, rho};
            }
        }
        best[tid] = b;
    };

    std::vector<std::thread> pool;
    for (unsigned w = 1; w < nthreads; ++w) pool.emplace_back(scan, w);
    scan(0);
    for (auto& th : pool) th.join();

    KappaEstimate out = best[0];
    for (const KappaEstimate& b : best)
        if (b.kappa < out.kappa) out = b;
    return out;
}

} // namespace qgergo
