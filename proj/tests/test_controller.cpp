#include <doctest.h>

#include <cmath>

#include "llrf/cavity.hpp"
#include "llrf/controller.hpp"
#include "llrf/rng.hpp"

using namespace llrf;

namespace {

CavityParams table_params() {
    return CavityParams::make(kTwoPi * 805e6, 1.61e4, 1e-6);
}

Mat2 random_model_a(RngStream& rng) {
    return Mat2::identity() +
           1e-6 * (kTwoPi * rng.uniform(-2000.0, 2000.0) * Mat2::j() -
                   Mat2::scaled_identity(kTwoPi * 25000.0));
}

Mat2 random_model_b(RngStream& rng) {
    return 0.15707963267948966 * rot_exact(rng.uniform(-0.3, 0.3));
}

double one_step_cost(const Mat2& a, const Mat2& b, const ControlWeights& w,
                     const Phasor& e, const Phasor& u) {
    const Phasor e_next = a * e + b * u;
    return dot(e_next, w.q * e_next) + dot(u, w.r * u);
}

}  // namespace

TEST_CASE("control weights validate") {
    CHECK_NOTHROW(ControlWeights::defaults().validate());

    ControlWeights asym;
    asym.q = {0.1, 0.2, -0.2, 0.1};
    CHECK_THROWS_AS(asym.validate(), std::invalid_argument);

    ControlWeights negative;
    negative.r = Mat2::scaled_identity(-1.0);
    CHECK_THROWS_AS(negative.validate(), std::invalid_argument);

    // Q = 0 is fine while R stays positive definite
    ControlWeights zero_q;
    zero_q.q = {};
    CHECK_NOTHROW(zero_q.validate());

    ControlWeights both_semidefinite;
    both_semidefinite.q = {};
    both_semidefinite.r = {};
    CHECK_THROWS_AS(both_semidefinite.validate(), std::invalid_argument);
}

TEST_CASE("feedforward inversion") {
    const CavityParams p = table_params();
    const auto [a, b] = build_discrete_matrices(p, 0.0, 0.0);

    SUBCASE("zero in, zero out") {
        CHECK(feedforward({0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, a, b).norm() == 0.0);
    }
    SUBCASE("unit reference from rest") {
        const Phasor u = feedforward({1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, a, b);
        CHECK(u.i == doctest::Approx(6.366197723675814).epsilon(1e-12));
        CHECK(u.q == doctest::Approx(0.0));
    }
    SUBCASE("algebraic inversion identity at random operating points") {
        RngStream rng(5150);
        for (int i = 0; i < 100; ++i) {
            const Mat2 ah = random_model_a(rng);
            const Mat2 bh = random_model_b(rng);
            const Phasor x_hat{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            const Phasor d_hat{rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01)};
            const Phasor x_next{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            const Phasor u = feedforward(x_next, x_hat, d_hat, ah, bh);
            const Phasor reached = ah * x_hat + bh * u + d_hat;
            CHECK((reached - x_next).norm() < 1e-12);
        }
    }
    SUBCASE("near-singular control matrix is a configuration fault") {
        CHECK_THROWS_WITH_AS(
            feedforward({1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, a,
                        Mat2::scaled_identity(1e-8)),
            doctest::Contains("det"), std::domain_error);
    }
}

TEST_CASE("one-step LQR gain") {
    const CavityParams p = table_params();
    const auto [a, b] = build_discrete_matrices(p, 0.0, 0.0);
    const ControlWeights w = ControlWeights::defaults();

    SUBCASE("no error penalty, no gain") {
        ControlWeights zq = w;
        zq.q = {};
        const Mat2 k = lqr_gain(a, b, zq);
        CHECK(k.frobenius() == 0.0);
    }
    SUBCASE("published operating point") {
        const Mat2 k = lqr_gain(a, b, w);
        // scalar reduction of (B'QB + R)^{-1} B'QA with everything diagonal
        const double beta = p.ts * p.omega_half;
        const double alpha = 1.0 - beta;
        const double want = 0.1 * beta * alpha / (0.1 * beta * beta + 100.0);
        CHECK(k.m00 == doctest::Approx(want).epsilon(1e-12));
        CHECK(k.m00 == doctest::Approx(1.3240e-4).epsilon(1e-4));
        CHECK(k.m11 == doctest::Approx(want).epsilon(1e-12));
        CHECK(std::fabs(k.m01) < 1e-18);
        CHECK(std::fabs(k.m10) < 1e-18);
    }
    SUBCASE("rotated control matrix composes the counter-rotation") {
        const double beta = p.ts * p.omega_half;
        const Mat2 b_rot = beta * rot_exact(0.1);
        const Mat2 k = lqr_gain(a, b_rot, w);
        const double scalar = 0.1 * beta / (0.1 * beta * beta + 100.0);
        const Mat2 want = scalar * (rot_exact(-0.1) * a);
        CHECK((k - want).frobenius() < 1e-15);
    }
    SUBCASE("stronger effort penalty strictly shrinks the gain") {
        RngStream rng(99);
        for (int i = 0; i < 50; ++i) {
            const Mat2 ah = random_model_a(rng);
            const Mat2 bh = random_model_b(rng);
            ControlWeights w10 = w;
            w10.r = 10.0 * w.r;
            CHECK(lqr_gain(ah, bh, w10).frobenius() < lqr_gain(ah, bh, w).frobenius());
        }
    }
}

TEST_CASE("feedback term") {
    const Mat2 k = Mat2::scaled_identity(1.324e-4);
    CHECK(feedback(k, {0.4, -0.2}, {0.4, -0.2}).norm() == 0.0);
    const Phasor u = feedback(k, {1.0, 0.0}, {0.0, 0.0});
    CHECK(u.i == doctest::Approx(1.324e-4).epsilon(1e-12));
    // linearity
    const Phasor e{0.3, -0.7};
    const Phasor one = feedback(k, e, {0.0, 0.0});
    const Phasor two = feedback(k, 2.0 * e, {0.0, 0.0});
    CHECK((two - 2.0 * one).norm() < 1e-18);
}

TEST_CASE("one-step optimality of the gain") {
    const ControlWeights w = ControlWeights::defaults();
    RngStream rng(2718);
    for (int i = 0; i < 100; ++i) {
        const Mat2 ah = random_model_a(rng);
        const Mat2 bh = random_model_b(rng);
        const Mat2 k = lqr_gain(ah, bh, w);
        const Phasor e{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const Phasor u_star = -1.0 * (k * e);
        const double c_star = one_step_cost(ah, bh, w, e, u_star);
        for (int j = 0; j < 50; ++j) {
            const Phasor delta{rng.uniform(-1e-3, 1e-3), rng.uniform(-1e-3, 1e-3)};
            CHECK(one_step_cost(ah, bh, w, e, u_star + delta) >= c_star - 1e-12);
        }
    }
}

TEST_CASE("control_step") {
    const CavityParams p = table_params();
    const ControlWeights w = ControlWeights::defaults();

    SUBCASE("zero reference from rest issues nothing") {
        EstimatorState est;
        const DriveCommand cmd = control_step(est, {0.0, 0.0}, {0.0, 0.0}, w, p);
        CHECK(cmd.u_total.norm() == 0.0);
        CHECK(cmd.u_ff.norm() == 0.0);
        CHECK(cmd.u_fb.norm() == 0.0);
    }
    SUBCASE("composite command is the exact sum") {
        EstimatorState est;
        est.x_hat = {0.3, -0.1};
        est.d_hat = {1e-4, 2e-4};
        const DriveCommand cmd = control_step(est, {1.0, 0.0}, {1.0, 0.0}, w, p);
        CHECK((cmd.u_total - (cmd.u_ff + cmd.u_fb)).norm() == 0.0);
    }
    SUBCASE("deadbeat with no error penalty") {
        ControlWeights zq = w;
        zq.q = {};
        EstimatorState est;
        est.x_hat = {0.42, 0.17};
        const Phasor x_next_ref{0.9, -0.3};
        const DriveCommand cmd = control_step(est, {0.0, 0.0}, x_next_ref, zq, p);
        CHECK(cmd.u_fb.norm() == 0.0);
        const auto [a, b] = build_discrete_matrices(p, 0.0, 0.0);
        const Phasor reached = a * est.x_hat + b * cmd.u_total + est.d_hat;
        CHECK((reached - x_next_ref).norm() < 1e-12);
    }
    SUBCASE("flattop steady drive magnitude is the reference magnitude") {
        // at steady state, u = B^{-1}(I - A) x* = x* at zero detuning
        EstimatorState est;
        est.x_hat = {1.0, 0.0};
        const DriveCommand cmd = control_step(est, {1.0, 0.0}, {1.0, 0.0}, w, p);
        CHECK(cmd.u_total.norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("saturation hook clamps the magnitude when enabled") {
        EstimatorState est;
        const DriveCommand cmd =
            control_step(est, {0.0, 0.0}, {1.0, 0.0}, w, p, 2.0);
        CHECK(cmd.u_total.norm() == doctest::Approx(2.0).epsilon(1e-12));
    }
}
