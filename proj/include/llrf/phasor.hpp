#pragma once
/**
 * @file phasor.hpp
 * @brief Baseband IQ phasor and 2x2 rotation algebra.
 *
 * A cavity-field envelope is carried as a real 2-vector (I, Q) in normalized
 * volts; forward/receiver drifts and detuning act on it through 2x2 rotation
 * and rotation-like matrices. Everything here is a pure value operation, so
 * concurrent use is unrestricted.
 *
 * Conventions:
 *   - Angles are radians, wrapped to (-pi, pi] by wrap_angle().
 *   - J is the quarter-turn matrix [[0,-1],[1,0]] (J*J = -I), the real-matrix
 *     image of the imaginary unit.
 *   - rot_exact(theta) is the exact rotation; rot_small(theta) = I + theta*J
 *     is its first-order form, kept for model-fidelity studies.
 */

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace llrf {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Determinant magnitude below which a 2x2 matrix is treated as singular.
inline constexpr double kDetEpsilon = 1e-14;

/// In-phase / quadrature pair (normalized volts, or volts/s for rates).
struct Phasor {
    double i = 0.0;
    double q = 0.0;

    double norm_sq() const { return i * i + q * q; }
    double norm() const { return std::sqrt(norm_sq()); }
    bool finite() const { return std::isfinite(i) && std::isfinite(q); }
};

inline Phasor operator+(const Phasor& a, const Phasor& b) { return {a.i + b.i, a.q + b.q}; }
inline Phasor operator-(const Phasor& a, const Phasor& b) { return {a.i - b.i, a.q - b.q}; }
inline Phasor operator-(const Phasor& a) { return {-a.i, -a.q}; }
inline Phasor operator*(double s, const Phasor& a) { return {s * a.i, s * a.q}; }
inline Phasor operator*(const Phasor& a, double s) { return s * a; }

inline double dot(const Phasor& a, const Phasor& b) { return a.i * b.i + a.q * b.q; }

/// Real 2x2 matrix, row-major.
struct Mat2 {
    double m00 = 0.0, m01 = 0.0;
    double m10 = 0.0, m11 = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 scaled_identity(double s) { return {s, 0.0, 0.0, s}; }
    /// Quarter-turn matrix J; J*J = -I.
    static Mat2 j() { return {0.0, -1.0, 1.0, 0.0}; }

    Mat2 transpose() const { return {m00, m10, m01, m11}; }
    double det() const { return m00 * m11 - m01 * m10; }
    double frobenius() const {
        return std::sqrt(m00 * m00 + m01 * m01 + m10 * m10 + m11 * m11);
    }
    bool finite() const {
        return std::isfinite(m00) && std::isfinite(m01) && std::isfinite(m10) &&
               std::isfinite(m11);
    }

    /**
     * Inverse by the adjugate formula.
     * @throws std::domain_error when |det| <= 1e-14, naming the determinant.
     */
    Mat2 inverse() const {
        const double d = det();
        if (!(std::fabs(d) > kDetEpsilon)) {
            std::ostringstream msg;
            msg << "2x2 inverse: matrix is near-singular, |det| = " << std::fabs(d)
                << " <= " << kDetEpsilon;
            throw std::domain_error(msg.str());
        }
        const double inv = 1.0 / d;
        return {m11 * inv, -m01 * inv, -m10 * inv, m00 * inv};
    }
};

inline Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.m00 + b.m00, a.m01 + b.m01, a.m10 + b.m10, a.m11 + b.m11};
}
inline Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.m00 - b.m00, a.m01 - b.m01, a.m10 - b.m10, a.m11 - b.m11};
}
inline Mat2 operator*(double s, const Mat2& m) {
    return {s * m.m00, s * m.m01, s * m.m10, s * m.m11};
}
inline Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
            a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
}
inline Phasor operator*(const Mat2& m, const Phasor& v) {
    return {m.m00 * v.i + m.m01 * v.q, m.m10 * v.i + m.m11 * v.q};
}

/// Exact planar rotation [[cos,-sin],[sin,cos]]; orthogonal, det 1.
inline Mat2 rot_exact(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {c, -s, s, c};
}

/// First-order rotation I + theta*J. Valid for |theta| << 1; the Frobenius
/// distance to rot_exact is bounded by theta^2 in that regime.
inline Mat2 rot_small(double theta) {
    return {1.0, -theta, theta, 1.0};
}

/// Wrap an angle into (-pi, pi]; -pi maps to +pi.
inline double wrap_angle(double theta) {
    return theta - kTwoPi * std::ceil((theta - kPi) / kTwoPi);
}

/**
 * Four-quadrant planar orientation of a phasor, in (-pi, pi].
 * @throws std::domain_error for the exact zero vector (orientation undefined;
 *         callers guard with their own magnitude floor).
 */
inline double angle(const Phasor& z) {
    if (z.i == 0.0 && z.q == 0.0) {
        throw std::domain_error("angle: zero phasor has undefined orientation");
    }
    const double a = std::atan2(z.q, z.i);
    return a == -kPi ? kPi : a;
}

}  // namespace llrf
