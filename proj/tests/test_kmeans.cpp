#include <cmath>
#include <set>

#include "doctest.h"
#include "melab/errors.hpp"
#include "melab/kmeans.hpp"
#include "melab/rng.hpp"

using namespace melab;
using namespace melab::instrument;

namespace {
Mat random_points(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Mat X(0, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double row[2] = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
        X.push_row({row, 2});
    }
    return X;
}
}  // namespace

TEST_CASE("inertia is non-increasing across lloyd iterations") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
        const auto X = random_points(150, seed);
        const auto res = kmeans(X, 6, seed * 10 + 1);
        REQUIRE(res.inertia_trace.size() >= 1);
        for (std::size_t i = 1; i < res.inertia_trace.size(); ++i)
            CHECK(res.inertia_trace[i] <= res.inertia_trace[i - 1] + 1e-9);
    }
}

TEST_CASE("returns exactly m centroids and a full assignment") {
    const auto X = random_points(80, 5);
    const auto res = kmeans(X, 7, 3);
    CHECK(res.centroids.rows == 7);
    CHECK(res.assignment.size() == 80);
    std::set<int> used(res.assignment.begin(), res.assignment.end());
    for (int c : used) {
        CHECK(c >= 0);
        CHECK(c < 7);
    }
}

TEST_CASE("tight clusters are found exactly") {
    Mat X(0, 2);
    Rng rng(9);
    const double centers[3][2] = {{-10, 0}, {10, 0}, {0, 10}};
    for (const auto& c : centers)
        for (int i = 0; i < 30; ++i) {
            const double row[2] = {c[0] + rng.normal() * 0.05, c[1] + rng.normal() * 0.05};
            X.push_row({row, 2});
        }
    const auto res = kmeans(X, 3, 41);
    for (const auto& c : centers) {
        double best = 1e9;
        for (std::size_t k = 0; k < 3; ++k) {
            const double dx = res.centroids(k, 0) - c[0];
            const double dy = res.centroids(k, 1) - c[1];
            best = std::min(best, std::hypot(dx, dy));
        }
        CHECK(best < 0.1);
    }
}

TEST_CASE("deterministic per seed; validates cluster count") {
    const auto X = random_points(60, 7);
    const auto a = kmeans(X, 5, 11);
    const auto b = kmeans(X, 5, 11);
    CHECK(a.centroids.a == b.centroids.a);
    CHECK(a.assignment == b.assignment);
    CHECK_THROWS_AS(kmeans(X, 61, 1), ConfigError);
    CHECK_THROWS_AS(kmeans(X, 0, 1), ConfigError);
}

TEST_CASE("duplicate points do not break seeding or updates") {
    Mat X(0, 2);
    const double row[2] = {1.0, 1.0};
    for (int i = 0; i < 20; ++i) X.push_row({row, 2});
    const double other[2] = {4.0, 4.0};
    X.push_row({other, 2});
    const auto res = kmeans(X, 2, 13);
    CHECK(res.centroids.rows == 2);
    CHECK(res.inertia_trace.back() == doctest::Approx(0.0));
}
