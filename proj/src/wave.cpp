#include "flockfront/wave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace flockfront {

namespace {

[[noreturn]] void domain_fail(const std::string& what) { throw std::domain_error(what); }

void require_positive_volume(double u, const char* name) {
    if (!(u > 0.0) || !std::isfinite(u)) {
        domain_fail(std::string("non-positive specific volume: ") + name + " = " +
                    std::to_string(u));
    }
}

}  // namespace

void ModelParams::validate() const {
    if (!(alpha > 0.0)) domain_fail("ModelParams: alpha must be > 0");
    if (!(mass > 0.0)) domain_fail("ModelParams: mass must be > 0");
    if (!(kernel > 0.0)) domain_fail("ModelParams: kernel must be > 0");
}

double wave_size(double u_left, double u_right, Family family) {
    require_positive_volume(u_left, "u_left");
    require_positive_volume(u_right, "u_right");
    const double r = family == Family::one ? u_right / u_left : u_left / u_right;
    return 0.5 * std::log(r);
}

double jump_h(double eps) { return eps >= 0.0 ? 2.0 * eps : 2.0 * std::sinh(eps); }

double jump_h_prime(double eps) { return eps >= 0.0 ? 2.0 : 2.0 * std::cosh(eps); }

double v_jump(double eps, double alpha) { return alpha * jump_h(eps); }

State apply_wave(const State& left, Family family, double eps, double alpha) {
    require_positive_volume(left.u, "left.u");
    const double dir = family == Family::one ? 1.0 : -1.0;
    State right;
    right.u = left.u * std::exp(dir * 2.0 * eps);
    right.v = left.v + v_jump(eps, alpha);
    return right;
}

RiemannFan solve_riemann(const State& left, const State& right, double alpha) {
    require_positive_volume(left.u, "left.u");
    require_positive_volume(right.u, "right.u");
    if (!(alpha > 0.0)) domain_fail("solve_riemann: alpha must be > 0");

    // Reduce to one scalar equation in eps2 via eps1 = eps2 + D.
    const double D = 0.5 * std::log(right.u / left.u);
    const double w = (right.v - left.v) / alpha;

    const auto g = [&](double e2) { return jump_h(e2 + D) + jump_h(e2) - w; };

    RiemannFan fan;
    double e2 = 0.25 * (w - 2.0 * D);  // exact when both branches are linear
    const double gtol = 1e-14 * std::max({1.0, std::fabs(w), std::fabs(D)});

    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        const double val = g(e2);
        fan.iterations = it + 1;
        if (std::fabs(val) <= gtol) {
            converged = true;
            break;
        }
        const double slope = jump_h_prime(e2 + D) + jump_h_prime(e2);  // >= 4
        double step = -val / slope;
        // g is convex-ish for large negative arguments; keep Newton tame.
        step = std::clamp(step, -8.0, 8.0);
        e2 += step;
        if (std::fabs(step) <= 1e-16 * std::max(1.0, std::fabs(e2))) {
            converged = std::fabs(g(e2)) <= 1e-10;
            break;
        }
    }

    if (!converged) {
        // Bisection fallback; g is strictly increasing with slope >= 4.
        double lo = e2, hi = e2;
        double width = 1.0;
        while (g(lo) > 0.0 && width < 1e8) {
            lo -= width;
            width *= 2.0;
        }
        width = 1.0;
        while (g(hi) < 0.0 && width < 1e8) {
            hi += width;
            width *= 2.0;
        }
        if (!(g(lo) <= 0.0 && g(hi) >= 0.0)) {
            throw std::runtime_error("solve_riemann: failed to bracket root (numerics bug)");
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (g(mid) < 0.0)
                lo = mid;
            else
                hi = mid;
            fan.iterations++;
            if (hi - lo <= 1e-16 * std::max(1.0, std::fabs(mid))) break;
        }
        e2 = 0.5 * (lo + hi);
        if (std::fabs(g(e2)) > 1e-10) {
            throw std::runtime_error("solve_riemann: bisection failed to converge (numerics bug)");
        }
    }

    fan.eps2 = e2;
    fan.eps1 = e2 + D;
    fan.middle = apply_wave(left, Family::one, fan.eps1, alpha);
    return fan;
}

double log_mean(double a, double b) {
    if (a == b) return a;
    return (b - a) / std::log(b / a);
}

double front_speed(const State& left, const State& right, Family family, Kind kind,
                   double alpha) {
    require_positive_volume(left.u, "left.u");
    require_positive_volume(right.u, "right.u");
    const double eps = wave_size(left.u, right.u, family);
    if (kind_of(eps) != kind && eps != 0.0) {
        throw std::runtime_error("front_speed: states violate the requested wave kind");
    }
    const double resid = std::fabs(right.v - left.v - v_jump(eps, alpha));
    if (resid > 1e-10 * std::max(1.0, std::fabs(left.v))) {
        throw std::runtime_error("front_speed: states are not on a single wave curve");
    }
    const double mag = kind == Kind::shock ? alpha / std::sqrt(left.u * right.u)
                                           : alpha / log_mean(left.u, right.u);
    return family == Family::one ? -mag : mag;
}

std::vector<double> split_rarefaction(double eps, double eta) {
    if (!(eps > 0.0)) domain_fail("split_rarefaction: eps must be > 0");
    if (!(eta > 0.0)) domain_fail("split_rarefaction: eta must be > 0");
    const std::size_t n = static_cast<std::size_t>(std::ceil(eps / eta));
    std::vector<double> pieces(std::max<std::size_t>(n, 1), 0.0);
    const double piece = eps / static_cast<double>(pieces.size());
    for (auto& p : pieces) p = piece;
    // Make the sum exact regardless of rounding in the division.
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i) sum += pieces[i];
    pieces.back() = eps - sum;
    return pieces;
}

std::vector<VacuumSample> vacuum_shock_study(double rho_left, double v_left, double alpha,
                                             const std::vector<double>& deltas) {
    if (!(rho_left > 0.0)) domain_fail("vacuum_shock_study: rho_left must be > 0");
    if (!(alpha > 0.0)) domain_fail("vacuum_shock_study: alpha must be > 0");
    std::vector<VacuumSample> out;
    out.reserve(deltas.size());
    const auto pressure = [alpha](double rho) { return alpha * alpha * rho; };
    for (const double delta : deltas) {
        if (!(delta > 0.0) || !(delta < rho_left)) {
            domain_fail("vacuum_shock_study: need 0 < delta < rho_left");
        }
        VacuumSample s;
        s.delta = delta;
        // S2 shock curve through (rho_left, v_left), then the mass RH condition.
        s.v_right = v_left - std::sqrt((pressure(delta) - pressure(rho_left)) *
                                       (delta - rho_left) / (delta * rho_left));
        s.sigma = (rho_left * v_left - delta * s.v_right) / (rho_left - delta);
        out.push_back(s);
    }
    return out;
}

}  // namespace flockfront
