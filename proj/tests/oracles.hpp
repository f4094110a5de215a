#pragma once
/**
 * Test-side reference math, independent of the library implementation paths
 * it checks. The envelope ODE is solved here with std::complex arithmetic;
 * the library never goes through this code.
 */

#include <complex>

#include "llrf/phasor.hpp"

namespace oracle {

using Cplx = std::complex<double>;

inline Cplx to_cplx(const llrf::Phasor& p) { return {p.i, p.q}; }
inline llrf::Phasor to_phasor(const Cplx& z) { return {z.real(), z.imag()}; }

/// Exact zero-order-hold step of dx/dt = (-omega_half + i*delta_omega) x + c.
inline Cplx exact_zoh_step(const Cplx& x, double omega_half, double delta_omega,
                           const Cplx& c, double dt) {
    const Cplx m{-omega_half, delta_omega};
    const Cplx e = std::exp(m * dt);
    return e * x + (e - 1.0) / m * c;
}

/// Constant forcing seen by the envelope: omega_half*e^{i phi_fwd} u + d.
inline Cplx forcing(double omega_half, double phi_fwd, const llrf::Phasor& u,
                    const llrf::Phasor& d) {
    return omega_half * std::exp(Cplx(0.0, phi_fwd)) * to_cplx(u) + to_cplx(d);
}

}  // namespace oracle
