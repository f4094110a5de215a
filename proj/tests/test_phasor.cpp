#include <doctest.h>

#include <cmath>

#include "llrf/phasor.hpp"
#include "llrf/rng.hpp"

using namespace llrf;

namespace {

double mat_gap(const Mat2& a, const Mat2& b) { return (a - b).frobenius(); }

}  // namespace

TEST_CASE("rot_exact basics") {
    CHECK(mat_gap(rot_exact(0.0), Mat2::identity()) == 0.0);
    CHECK(mat_gap(rot_exact(kPi / 2.0), Mat2::j()) < 1e-15);
    CHECK(mat_gap(rot_exact(0.3) * rot_exact(-0.3), Mat2::identity()) < 1e-15);
    CHECK(rot_exact(0.7).det() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("rot_small basics and Taylor bound") {
    CHECK(mat_gap(rot_small(0.0), Mat2::identity()) == 0.0);
    const Mat2 m = rot_small(0.01);
    CHECK(m.m00 == 1.0);
    CHECK(m.m01 == -0.01);
    CHECK(m.m10 == 0.01);
    CHECK(m.m11 == 1.0);

    // ||rot_small - rot_exact||_F <= theta^2 for |theta| <= 0.1
    CHECK(mat_gap(rot_small(0.05), rot_exact(0.05)) <= 0.05 * 0.05);
    for (int i = -100; i <= 100; ++i) {
        const double theta = 0.001 * i;
        CHECK(mat_gap(rot_small(theta), rot_exact(theta)) <= theta * theta);
    }
}

TEST_CASE("angle extraction") {
    CHECK(angle({1.0, 0.0}) == 0.0);
    CHECK(angle({0.0, 1.0}) == doctest::Approx(kPi / 2.0));
    CHECK(angle({-1.0, -1.0}) == doctest::Approx(-3.0 * kPi / 4.0));
    CHECK_THROWS_AS(angle({0.0, 0.0}), std::domain_error);
    // convention: boundary angle is +pi, never -pi
    CHECK(angle({-1.0, 0.0}) == kPi);
    CHECK(angle({-1.0, -0.0}) == kPi);
}

TEST_CASE("wrap_angle convention (-pi, pi]") {
    CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(0.1) == doctest::Approx(0.1));
    RngStream rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double theta = rng.uniform(-50.0, 50.0);
        const double w = wrap_angle(theta);
        CHECK(w > -kPi);
        CHECK(w <= kPi);
        // congruent mod 2*pi
        CHECK(std::sin(w) == doctest::Approx(std::sin(theta)).epsilon(1e-9));
        CHECK(std::cos(w) == doctest::Approx(std::cos(theta)).epsilon(1e-9));
    }
}

TEST_CASE("mat2 inverse") {
    CHECK(mat_gap(Mat2::identity().inverse(), Mat2::identity()) == 0.0);
    CHECK(mat_gap(Mat2::scaled_identity(2.0).inverse(), Mat2::scaled_identity(0.5)) ==
          0.0);

    // scaled rotation inverts to inversely scaled counter-rotation
    const double scale = 0.15707963267948966;
    const Mat2 m = scale * rot_exact(0.1);
    CHECK(mat_gap(m.inverse(), (1.0 / scale) * rot_exact(-0.1)) < 1e-14);

    // m * inverse(m) == I for random well-conditioned matrices
    RngStream rng(11);
    for (int i = 0; i < 200; ++i) {
        Mat2 r{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
               rng.uniform(-2.0, 2.0)};
        if (std::fabs(r.det()) < 1e-3) continue;
        CHECK(mat_gap(r * r.inverse(), Mat2::identity()) < 1e-12);
    }

    CHECK_THROWS_WITH_AS(Mat2{}.inverse(), doctest::Contains("near-singular"),
                         std::domain_error);
    CHECK_THROWS_AS(Mat2::scaled_identity(1e-8).inverse(), std::domain_error);
}

TEST_CASE("rotation group properties") {
    RngStream rng(21);
    for (int i = 0; i < 300; ++i) {
        const double a = rng.uniform(-kPi, kPi);
        const double b = rng.uniform(-kPi, kPi);
        CHECK(mat_gap(rot_exact(a) * rot_exact(b), rot_exact(a + b)) < 1e-12);
        CHECK(mat_gap(rot_exact(a).transpose(), rot_exact(-a)) < 1e-15);

        const Phasor z{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
        if (z.norm() > 1e-6) {
            const double got = angle(rot_exact(a) * z);
            const double want = wrap_angle(angle(z) + a);
            CHECK(std::fabs(wrap_angle(got - want)) < 1e-12);
        }
    }
    // J^2 = -I exactly
    CHECK(mat_gap(Mat2::j() * Mat2::j(), -1.0 * Mat2::identity()) == 0.0);
}
