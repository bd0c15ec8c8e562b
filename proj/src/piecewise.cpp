#include "melab/piecewise.hpp"

#include <cmath>

#include "melab/errors.hpp"

namespace melab::model {

namespace {
// Fixed line parameters for the constructed victims; chosen to differ from
// the ind slope and from each other so recovery is well-posed.
constexpr double kSlopes[4] = {-1.5, 2.5, -0.8, 3.0};
constexpr double kIntercepts[4] = {35.0, -20.0, 150.0, -180.0};
}  // namespace

PiecewiseBoundarySpec build_piecewise_victim(int k, double alpha) {
    if (k < 0 || k > 2) throw InputError("piecewise: k must be 0, 1 or 2");
    PiecewiseBoundarySpec spec;
    spec.ind_slope = alpha;
    if (k == 0) return spec;

    int param = 0;
    const double regions[2][2] = {{spec.domain_lo, spec.ind_lo}, {spec.ind_hi, spec.domain_hi}};
    for (const auto& region : regions) {
        const double width = (region[1] - region[0]) / k;
        for (int j = 0; j < k; ++j) {
            BoundarySegment seg;
            seg.lo = region[0] + width * j;
            seg.hi = region[0] + width * (j + 1);
            seg.slope = kSlopes[param % 4];
            seg.intercept = kIntercepts[param % 4];
            spec.ood_segments.push_back(seg);
            ++param;
        }
    }
    return spec;
}

double boundary_value(const PiecewiseBoundarySpec& spec, double x) {
    if (x < spec.domain_lo || x > spec.domain_hi)
        throw InputError("piecewise: x outside domain");
    for (const auto& seg : spec.ood_segments) {
        // Half-open segments [lo, hi), closing the last one at domain_hi.
        if (x >= seg.lo && (x < seg.hi || (seg.hi == spec.domain_hi && x <= seg.hi)))
            return seg.slope * x + seg.intercept;
    }
    return spec.ind_slope * x;
}

BoundaryClass classify_piecewise(const PiecewiseBoundarySpec& spec, double x, double y) {
    return y >= boundary_value(spec, x) ? BoundaryClass::above : BoundaryClass::below;
}

PiecewiseBoundarySpec fit_piecewise(const PiecewiseBoundarySpec& structure,
                                    const std::vector<std::pair<double, double>>& points,
                                    double* residual) {
    PiecewiseBoundarySpec fitted = structure;
    fitted.ind_slope = 0.0;
    for (auto& seg : fitted.ood_segments) {
        seg.slope = 0.0;
        seg.intercept = 0.0;
    }

    // Group points by the segment (or ind line) that covers them.
    const std::size_t n_seg = structure.ood_segments.size();
    std::vector<std::vector<std::pair<double, double>>> groups(n_seg + 1);
    for (const auto& [x, y] : points) {
        std::size_t g = n_seg;  // ind line by default
        for (std::size_t s = 0; s < n_seg; ++s) {
            const auto& seg = structure.ood_segments[s];
            if (x >= seg.lo &&
                (x < seg.hi || (seg.hi == structure.domain_hi && x <= seg.hi))) {
                g = s;
                break;
            }
        }
        groups[g].emplace_back(x, y);
    }

    // ind line through the origin: alpha = sum(xy)/sum(x^2).
    {
        const auto& pts = groups[n_seg];
        if (pts.empty()) throw InputError("piecewise fit: no points on the ind line");
        double sxy = 0.0, sxx = 0.0;
        for (const auto& [x, y] : pts) {
            sxy += x * y;
            sxx += x * x;
        }
        if (sxx == 0.0) throw InputError("piecewise fit: ind points all at x=0");
        fitted.ind_slope = sxy / sxx;
    }

    // Ordinary least squares per segment.
    for (std::size_t s = 0; s < n_seg; ++s) {
        const auto& pts = groups[s];
        if (pts.size() < 2) throw InputError("piecewise fit: segment needs >= 2 points");
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        const auto n = static_cast<double>(pts.size());
        for (const auto& [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double det = n * sxx - sx * sx;
        if (det == 0.0) throw InputError("piecewise fit: degenerate segment points");
        fitted.ood_segments[s].slope = (n * sxy - sx * sy) / det;
        fitted.ood_segments[s].intercept = (sy * sxx - sx * sxy) / det;
    }

    if (residual) {
        double worst = 0.0;
        for (const auto& [x, y] : points)
            worst = std::max(worst, std::fabs(boundary_value(fitted, x) - y));
        *residual = worst;
    }
    return fitted;
}

std::vector<std::pair<double, double>> boundary_points_for_fit(
    const PiecewiseBoundarySpec& spec) {
    std::vector<std::pair<double, double>> pts;
    const double a = spec.ind_lo + 0.25 * (spec.ind_hi - spec.ind_lo);
    const double b = spec.ind_lo + 0.75 * (spec.ind_hi - spec.ind_lo);
    pts.emplace_back(a, boundary_value(spec, a));
    pts.emplace_back(b, boundary_value(spec, b));
    for (const auto& seg : spec.ood_segments) {
        const double u = seg.lo + 0.25 * (seg.hi - seg.lo);
        const double v = seg.lo + 0.75 * (seg.hi - seg.lo);
        pts.emplace_back(u, boundary_value(spec, u));
        pts.emplace_back(v, boundary_value(spec, v));
    }
    return pts;
}

}  // namespace melab::model
