#include <cmath>

#include "doctest.h"
#include "melab/errors.hpp"
#include "melab/piecewise.hpp"

using namespace melab::model;

TEST_CASE("parameter counts and minimal sample sizes: 1/5/9 and 2/6/10") {
    const int expect_params[3] = {1, 5, 9};
    for (int k = 0; k <= 2; ++k) {
        const auto spec = build_piecewise_victim(k);
        CHECK(spec.param_count() == expect_params[k]);
        CHECK(spec.min_exact_fit_samples() == expect_params[k] + 1);
        CHECK(static_cast<int>(spec.ood_segments.size()) == 2 * k);
    }
    CHECK_THROWS_AS(build_piecewise_victim(3), melab::InputError);
}

TEST_CASE("segments tile the ood regions without overlap") {
    for (int k = 1; k <= 2; ++k) {
        const auto spec = build_piecewise_victim(k);
        double covered = 0.0;
        for (const auto& seg : spec.ood_segments) {
            CHECK(seg.hi > seg.lo);
            covered += seg.hi - seg.lo;
            const bool left = seg.hi <= spec.ind_lo + 1e-12;
            const bool right = seg.lo >= spec.ind_hi - 1e-12;
            CHECK((left || right));
        }
        CHECK(covered == doctest::Approx(40.0));  // [0,20] plus [80,100]
    }
}

TEST_CASE("classification against the active line") {
    const auto naive = build_piecewise_victim(0, 1.0);
    CHECK(classify_piecewise(naive, 50.0, 60.0) == BoundaryClass::above);
    CHECK(classify_piecewise(naive, 50.0, 50.0) == BoundaryClass::above);  // tie rule
    CHECK(classify_piecewise(naive, 50.0, 49.999) == BoundaryClass::below);
    CHECK_THROWS_AS(classify_piecewise(naive, 101.0, 0.0), melab::InputError);
    CHECK_THROWS_AS(classify_piecewise(naive, -0.5, 0.0), melab::InputError);

    const auto mid = build_piecewise_victim(1, 1.0);
    // An ood point is judged by its own segment's line, not y = alpha x.
    const auto& seg = mid.ood_segments[0];
    const double x = 10.0;
    const double line = seg.slope * x + seg.intercept;
    CHECK(classify_piecewise(mid, x, line + 1.0) == BoundaryClass::above);
    CHECK(classify_piecewise(mid, x, line - 1.0) == BoundaryClass::below);
    CHECK(boundary_value(mid, x) == doctest::Approx(line));
    CHECK(boundary_value(mid, 50.0) == doctest::Approx(50.0));
}

TEST_CASE("exact recovery from minimal noiseless samples") {
    for (int k = 0; k <= 2; ++k) {
        const auto spec = build_piecewise_victim(k, 1.0);
        const auto pts = boundary_points_for_fit(spec);
        CHECK(static_cast<int>(pts.size()) == spec.min_exact_fit_samples());
        double residual = 0.0;
        const auto fitted = fit_piecewise(spec, pts, &residual);
        CHECK(residual < 1e-9);
        CHECK(std::fabs(fitted.ind_slope - spec.ind_slope) < 1e-9);
        for (std::size_t s = 0; s < spec.ood_segments.size(); ++s) {
            CHECK(std::fabs(fitted.ood_segments[s].slope - spec.ood_segments[s].slope) < 1e-9);
            CHECK(std::fabs(fitted.ood_segments[s].intercept -
                            spec.ood_segments[s].intercept) < 1e-9);
        }
    }
}

TEST_CASE("fit rejects under-determined inputs") {
    const auto spec = build_piecewise_victim(1, 1.0);
    auto pts = boundary_points_for_fit(spec);
    pts.erase(pts.begin());  // drop one ind point: the origin-line still fits
    CHECK_NOTHROW(fit_piecewise(spec, pts));
    // Remove a whole segment's points.
    const auto lo = spec.ood_segments[0].lo;
    const auto hi = spec.ood_segments[0].hi;
    std::vector<std::pair<double, double>> sparse;
    for (const auto& pt : pts)
        if (pt.first < lo || pt.first >= hi) sparse.push_back(pt);
    CHECK_THROWS_AS(fit_piecewise(spec, sparse), melab::InputError);
}
