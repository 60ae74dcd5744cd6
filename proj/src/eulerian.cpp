#include "flockfront/eulerian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flockfront {

EulerianProfile reconstruct(const SimState& s, double a_of_t) {
    EulerianProfile p;
    p.t = s.time;
    p.a = a_of_t;
    const std::size_t cells = s.states.size();
    if (cells != s.fronts.size() + 1) {
        throw std::invalid_argument("reconstruct: states must outnumber fronts by one");
    }
    p.x.reserve(cells + 1);
    p.rho.reserve(cells);
    p.v.reserve(cells);

    const double M = s.params.mass;
    double x = a_of_t;
    double prev_y = 0.0;
    p.x.push_back(x);
    for (std::size_t i = 0; i < cells; ++i) {
        const double y = i < s.fronts.size() ? s.fronts[i].position : M;
        x += s.states[i].u * (y - prev_y);
        p.x.push_back(x);
        p.rho.push_back(1.0 / s.states[i].u);
        p.v.push_back(s.states[i].v);
        prev_y = y;
    }
    p.b = p.x.back();
    return p;
}

ConcentrationState advance_concentrations(const ConcentrationState& c, double dt, double rho_a,
                                          double rho_b, const ModelParams& params) {
    if (!(dt > 0.0)) throw std::domain_error("advance_concentrations: dt must be > 0");
    if (!(rho_a > 0.0) || !(rho_b > 0.0)) {
        throw std::domain_error("advance_concentrations: densities must be > 0");
    }
    const double km = params.kernel * params.mass;
    const double decay = std::exp(-km * dt);
    const double a2 = params.alpha * params.alpha;
    ConcentrationState out;
    out.P_a = decay * c.P_a + a2 * rho_a * (1.0 - decay) / km;
    out.P_b = decay * c.P_b + a2 * rho_b * (1.0 - decay) / km;
    return out;
}

ConcentrationState concentrations_from_trace(const std::vector<BoundarySegment>& segments,
                                             double t, const ModelParams& params) {
    ConcentrationState c;
    for (const auto& seg : segments) {
        if (seg.t0 >= t) break;
        const double t1 = std::min(seg.t1, t);
        if (t1 <= seg.t0) continue;
        c = advance_concentrations(c, t1 - seg.t0, 1.0 / seg.u_left, 1.0 / seg.u_right, params);
    }
    return c;
}

ConservationAudit audit_conservation(const EulerianProfile& p, const ConcentrationState& c,
                                     const ModelParams& params, double M1_ref) {
    ConservationAudit out;
    double mass = 0.0, mom = 0.0;
    for (std::size_t i = 0; i < p.rho.size(); ++i) {
        const double dx = p.x[i + 1] - p.x[i];
        mass += p.rho[i] * dx;
        mom += p.rho[i] * p.v[i] * dx;
    }
    out.mass_err = std::fabs(mass - params.mass);
    out.momentum_err = std::fabs(mom + c.P_b - c.P_a - M1_ref);
    return out;
}

FlockingMetrics flocking_metrics(const EulerianProfile& p, double rho_inf_est) {
    FlockingMetrics m;
    m.support_len = p.b - p.a;
    if (p.v.empty()) return m;
    double vmin = p.v.front(), vmax = p.v.front(), dev = 0.0;
    for (std::size_t i = 0; i < p.v.size(); ++i) {
        vmin = std::min(vmin, p.v[i]);
        vmax = std::max(vmax, p.v[i]);
        dev = std::max(dev, std::fabs(p.rho[i] - rho_inf_est));
    }
    m.v_osc = vmax - vmin;
    m.rho_dev = dev;
    return m;
}

double rho_inf_estimate(const RunResult& run) {
    if (run.samples.empty()) {
        throw std::invalid_argument("rho_inf_estimate: run has no samples");
    }
    const auto& last = run.samples.back();
    return run.params.mass / (last.b - last.a);
}

double l1_rho_distance(const EulerianProfile& p, const EulerianProfile& q) {
    // Sweep the union of breakpoints; outside a support the density is zero.
    std::vector<double> edges;
    edges.reserve(p.x.size() + q.x.size());
    edges.insert(edges.end(), p.x.begin(), p.x.end());
    edges.insert(edges.end(), q.x.begin(), q.x.end());
    std::sort(edges.begin(), edges.end());

    const auto value_at = [](const EulerianProfile& pr, double x) -> double {
        if (x < pr.x.front() || x >= pr.x.back()) return 0.0;
        const auto it = std::upper_bound(pr.x.begin(), pr.x.end(), x);
        const std::size_t idx = static_cast<std::size_t>(it - pr.x.begin()) - 1;
        return pr.rho[std::min(idx, pr.rho.size() - 1)];
    };

    double dist = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double x0 = edges[i], x1 = edges[i + 1];
        if (!(x1 > x0)) continue;
        const double mid = 0.5 * (x0 + x1);
        dist += std::fabs(value_at(p, mid) - value_at(q, mid)) * (x1 - x0);
    }
    return dist;
}

}  // namespace flockfront
