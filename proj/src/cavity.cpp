#include "llrf/cavity.hpp"

#include <sstream>

namespace llrf {

CavityParams CavityParams::make(double omega0, double q_loaded, double ts,
                                bool small_angle) {
    auto reject = [](const std::string& why) {
        throw std::invalid_argument("cavity params: " + why);
    };
    if (!(omega0 > 0.0)) reject("omega0 must be > 0");
    if (!(q_loaded > 0.0)) reject("q_loaded must be > 0");
    if (!(ts > 0.0)) reject("ts must be > 0");
    CavityParams p;
    p.omega0 = omega0;
    p.q_loaded = q_loaded;
    p.omega_half = omega0 / (2.0 * q_loaded);
    p.ts = ts;
    p.small_angle = small_angle;
    if (!(ts * p.omega_half < 2.0)) {
        std::ostringstream msg;
        msg << "cavity params: ts*omega_half = " << ts * p.omega_half
            << " >= 2, forward-Euler pole unstable";
        throw std::invalid_argument(msg.str());
    }
    return p;
}

DiscreteMatrices build_discrete_matrices(const CavityParams& params, double delta_omega,
                                         double phi_fwd) {
    const double ts = params.ts;
    const double wh = params.omega_half;
    const Mat2 a = Mat2::identity() + ts * (delta_omega * Mat2::j() -
                                            Mat2::scaled_identity(wh));
    const Mat2 b = (ts * wh) * model_rotation(phi_fwd, params.small_angle);
    return {a, b};
}

Phasor step_truth(const TruthState& state, const Phasor& u_cmd,
                  const CavityParams& params) {
    const auto [a, b] = build_discrete_matrices(params, state.delta_omega, state.phi_fwd);
    return a * state.x + b * u_cmd + params.ts * state.d;
}

namespace {

Phasor add_noise(const Phasor& v, double sigma, RngStream& rng) {
    if (sigma == 0.0) return v;
    return {v.i + sigma * rng.normal(), v.q + sigma * rng.normal()};
}

}  // namespace

Phasor measure_pickup(const Phasor& x, double phi_rec, double sigma, RngStream& rng) {
    return add_noise(rot_exact(phi_rec) * x, sigma, rng);
}

Phasor measure_forward(const Phasor& u_cmd, double phi_fwd, double sigma,
                       RngStream& rng) {
    return add_noise(rot_exact(phi_fwd) * u_cmd, sigma, rng);
}

Phasor measure_reflected(const Phasor& u_fwd, const Phasor& x, double kappa,
                         double sigma, RngStream& rng) {
    return add_noise(u_fwd - kappa * x, sigma, rng);
}

}  // namespace llrf
