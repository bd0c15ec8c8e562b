#pragma once

#include <vector>

namespace melab::model {

// Two-region binary victim on [domain_lo, domain_hi] x R. Inside the IND
// interval the decision boundary is the line y = alpha * x; each OOD segment
// carries its own (slope, intercept) line. Parameter count is
// 1 + 2 * |segments|.
struct BoundarySegment {
    double lo = 0.0;
    double hi = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
};

struct PiecewiseBoundarySpec {
    double domain_lo = 0.0;
    double domain_hi = 100.0;
    double ind_lo = 20.0;
    double ind_hi = 80.0;
    double ind_slope = 1.0;
    std::vector<BoundarySegment> ood_segments;  // tile [domain] \ [ind] for k >= 1

    int param_count() const { return 1 + 2 * static_cast<int>(ood_segments.size()); }
    int min_exact_fit_samples() const { return param_count() + 1; }
};

enum class BoundaryClass { below = 0, above = 1 };

// k extra lines per OOD region, k in {0,1,2}. k=0 keeps the single ind line
// over the whole domain (1 parameter); k=1 adds one line per region (5);
// k=2 splits each region in two (9).
PiecewiseBoundarySpec build_piecewise_victim(int k, double alpha = 1.0);

// Boundary value at x: the active segment's line, or the ind line when no
// segment covers x. Throws InputError outside the domain.
double boundary_value(const PiecewiseBoundarySpec& spec, double x);

// Ties (y exactly on the boundary) classify as `above`.
BoundaryClass classify_piecewise(const PiecewiseBoundarySpec& spec, double x, double y);

// Least-squares recovery of all coefficients from noiseless boundary points,
// given the segment structure. Returns the fitted spec; `residual` (when
// non-null) receives the max absolute misfit over the input points.
PiecewiseBoundarySpec fit_piecewise(const PiecewiseBoundarySpec& structure,
                                    const std::vector<std::pair<double, double>>& points,
                                    double* residual = nullptr);

// Deterministic noiseless boundary sample of the minimal exact-fit size:
// two points on the ind line, two per OOD segment.
std::vector<std::pair<double, double>> boundary_points_for_fit(
    const PiecewiseBoundarySpec& spec);

}  // namespace melab::model
