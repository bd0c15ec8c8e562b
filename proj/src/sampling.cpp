#include "melab/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "melab/errors.hpp"
#include "melab/rng.hpp"

namespace melab::sampling {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gaussian_pdf(const GaussianSpec& g, double x) {
    const double z = (x - g.mu) / g.sigma;
    return kInvSqrt2Pi / g.sigma * std::exp(-0.5 * z * z);
}

void check(const GaussianSpec& g) {
    if (!(g.sigma > 0.0)) throw ConfigError("gaussian: sigma must be positive");
}

double min_pdf(const GaussianSpec& a, const GaussianSpec& b, double x) {
    return std::min(gaussian_pdf(a, x), gaussian_pdf(b, x));
}

double simpson(double lo, double hi, double flo, double fmid, double fhi) {
    return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
}

double adaptive_simpson(const GaussianSpec& a, const GaussianSpec& b, double lo, double hi,
                        double flo, double fmid, double fhi, double whole, double tol,
                        int depth) {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid);
    const double rm = 0.5 * (mid + hi);
    const double flm = min_pdf(a, b, lm);
    const double frm = min_pdf(a, b, rm);
    const double left = simpson(lo, mid, flo, flm, fmid);
    const double right = simpson(mid, hi, fmid, frm, fhi);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(a, b, lo, mid, flo, flm, fmid, left, tol / 2.0, depth - 1) +
           adaptive_simpson(a, b, mid, hi, fmid, frm, fhi, right, tol / 2.0, depth - 1);
}

}  // namespace

double wasserstein_1d(const GaussianSpec& a, const GaussianSpec& b) {
    check(a);
    check(b);
    const double dmu = a.mu - b.mu;
    const double dsig = a.sigma - b.sigma;
    return std::sqrt(dmu * dmu + dsig * dsig);
}

double overlap_probability(const GaussianSpec& a, const GaussianSpec& b) {
    check(a);
    check(b);
    // Knots at both centers and +-1/+-10 sigma keep narrow spikes from being
    // stepped over by the first Simpson panels.
    std::vector<double> knots = {a.mu - 10.0 * a.sigma, a.mu - a.sigma, a.mu,
                                 a.mu + a.sigma,        a.mu + 10.0 * a.sigma,
                                 b.mu - 10.0 * b.sigma, b.mu - b.sigma, b.mu,
                                 b.mu + b.sigma,        b.mu + 10.0 * b.sigma};
    std::sort(knots.begin(), knots.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double lo = knots[i];
        const double hi = knots[i + 1];
        if (hi <= lo) continue;
        const double mid = 0.5 * (lo + hi);
        const double flo = min_pdf(a, b, lo);
        const double fmid = min_pdf(a, b, mid);
        const double fhi = min_pdf(a, b, hi);
        const double whole = simpson(lo, hi, flo, fmid, fhi);
        total += adaptive_simpson(a, b, lo, hi, flo, fmid, fhi, whole, 1e-7 / 9.0, 60);
    }
    return std::clamp(total, 0.0, 1.0);
}

double overlap_probability_mc(const GaussianSpec& a, const GaussianSpec& b, std::size_t n,
                              std::uint64_t seed) {
    check(a);
    check(b);
    if (n == 0) throw InputError("overlap mc: need at least one draw");
    Rng rng(seed);
    std::size_t hits_a = 0, hits_b = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xa = rng.normal(a.mu, a.sigma);
        if (gaussian_pdf(a, xa) <= gaussian_pdf(b, xa)) ++hits_a;
        const double xb = rng.normal(b.mu, b.sigma);
        if (gaussian_pdf(b, xb) < gaussian_pdf(a, xb)) ++hits_b;
    }
    return (static_cast<double>(hits_a) + static_cast<double>(hits_b)) / static_cast<double>(n);
}

std::vector<OverlapRow> sweep_overlap(Range mu_range, Range sigma_range, std::size_t n_pairs,
                                      std::uint64_t seed) {
    if (n_pairs < 1) throw InputError("sweep_overlap: n_pairs must be >= 1");
    if (!(mu_range.lo <= mu_range.hi) || !(sigma_range.lo <= sigma_range.hi))
        throw ConfigError("sweep_overlap: invalid ranges");
    std::vector<OverlapRow> rows;
    rows.reserve(n_pairs);
    for (std::size_t i = 0; i < n_pairs; ++i) {
        Rng rng(derive_seed(seed, "overlap-pair", i));
        OverlapRow row;
        row.a.mu = rng.uniform(mu_range.lo, mu_range.hi);
        row.a.sigma = std::max(rng.uniform(sigma_range.lo, sigma_range.hi), 1e-6);
        row.b.mu = rng.uniform(mu_range.lo, mu_range.hi);
        row.b.sigma = std::max(rng.uniform(sigma_range.lo, sigma_range.hi), 1e-6);
        row.w2 = wasserstein_1d(row.a, row.b);
        row.overlap = overlap_probability(row.a, row.b);
        row.overlap_mc = overlap_probability_mc(row.a, row.b, 4000,
                                                derive_seed(seed, "overlap-mc", i));
        rows.push_back(row);
    }
    return rows;
}

VolumeEstimate estimate_ind_volume(const model::MLPClassifier& m, std::size_t n_random,
                                   double threshold, double T,
                                   const data::DistributionSpec& box, std::uint64_t seed,
                                   const data::Dataset* ind_test) {
    if (n_random < 1) throw InputError("estimate_ind_volume: n_random must be >= 1");
    if (threshold < 0.0 || threshold > 1.0)
        throw InputError("estimate_ind_volume: threshold must be in [0,1]");
    const auto queries = data::sample_ood(box, n_random, seed);
    std::size_t above = 0;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        if (model::confidence(m, queries.samples.row(i), T) > threshold) ++above;
    }
    VolumeEstimate est;
    est.fraction_random = static_cast<double>(above) / static_cast<double>(n_random);
    if (ind_test && ind_test->size() > 0) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < ind_test->size(); ++i)
            if (model::confidence(m, ind_test->samples.row(i), T) > threshold) ++hits;
        est.fraction_ind_test =
            static_cast<double>(hits) / static_cast<double>(ind_test->size());
    }
    return est;
}

double parse_threshold(const std::string& s) {
    const double v = std::stod(s);
    if (v < 0.0) throw InputError("threshold must be non-negative");
    if (v > 1.0) {
        if (v > 100.0) throw InputError("threshold above 100");
        return v / 100.0;
    }
    return v;
}

}  // namespace melab::sampling
