#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

// Exact wave-curve calculus for the isothermal p-system
//
//   u_t - v_y     = 0
//   v_t + (a^2/u)_y = source
//
// written in Lagrangian mass coordinates, with pressure p(rho) = a^2 rho,
// i.e. p = a^2/u in terms of the specific volume u = 1/rho.
//
// All jump relations are expressed through the signed wave size
//
//   eps = 1/2 ln(u_r/u_l)   (first family)
//   eps = 1/2 ln(u_l/u_r)   (second family)
//
// so that eps < 0 is an admissible shock and eps > 0 a rarefaction front.

namespace flockfront {

enum class Family : int { one = 1, two = 2 };
enum class Kind : int { shock = 0, rarefaction = 1 };

/// Constant state between two fronts. u is the specific volume (= 1/rho).
struct State {
    double u = 1.0;
    double v = 0.0;
};

struct ModelParams {
    double alpha = 1.0;   ///< sound-speed parameter, p(rho) = alpha^2 rho
    double mass = 1.0;    ///< total mass M; Lagrangian domain is (0, M)
    double kernel = 1.0;  ///< interaction kernel K

    void validate() const;
};

inline Kind kind_of(double eps) { return eps < 0.0 ? Kind::shock : Kind::rarefaction; }

/// Signed size of the single wave connecting u_left to u_right in the given family.
double wave_size(double u_left, double u_right, Family family);

/// h(eps): velocity jump across one front, in units of alpha, for either family.
/// 2*eps on the rarefaction branch, 2*sinh(eps) on the shock branch.
double jump_h(double eps);
double jump_h_prime(double eps);

/// Velocity jump v_r - v_l across a single front of signed size eps.
double v_jump(double eps, double alpha);

/// Right state reached from `left` along the exact wave curve of the family.
State apply_wave(const State& left, Family family, double eps, double alpha);

struct RiemannFan {
    double eps1 = 0.0;  ///< size of the first-family wave
    double eps2 = 0.0;  ///< size of the second-family wave
    State middle;       ///< state between the two waves
    int iterations = 0;
};

/// Solve the Riemann problem (left|right): the unique pair (eps1, eps2) with
///   2 eps1 - 2 eps2        = ln(u_r/u_l)
///   h(eps1) + h(eps2)      = (v_r - v_l)/alpha.
/// Damped Newton on the reduced scalar equation with a bisection fallback.
RiemannFan solve_riemann(const State& left, const State& right, double alpha);

/// Propagation speed of a single admissible front.
/// Shock: -+ alpha/sqrt(u_l u_r).  Rarefaction: -+ alpha/u~ with u~ the
/// logarithmic mean of (u_l, u_r), which keeps u-transport across the front
/// exactly conservative (see front_tracker).
/// Throws if the two states do not lie on one wave curve of the given
/// family/kind (residual > 1e-10).
double front_speed(const State& left, const State& right, Family family, Kind kind,
                   double alpha);

/// Logarithmic mean of two positive numbers; equals a when a == b.
double log_mean(double a, double b);

/// Split a rarefaction of size eps > 0 into ceil(eps/eta) equal pieces,
/// each in (0, eta], summing exactly to eps.
std::vector<double> split_rarefaction(double eps, double eta);

struct VacuumSample {
    double delta = 0.0;    ///< right-state density
    double sigma = 0.0;    ///< 2-shock speed
    double v_right = 0.0;  ///< right-state velocity on the S2 curve
};

/// Family-2 shock connecting (rho_l, v_l) to a near-vacuum state (delta, v_r(delta)),
/// evaluated from the Rankine-Hugoniot conditions for each delta in `deltas`.
/// As delta -> 0+ the shock speed sigma tends to v_l like sqrt(delta).
std::vector<VacuumSample> vacuum_shock_study(double rho_left, double v_left, double alpha,
                                             const std::vector<double>& deltas);

}  // namespace flockfront
