#pragma once

#include <vector>

#include "flockfront/tracker.hpp"

// Reconstruction of the Eulerian solution (rho, m) on the moving support
// [a(t), b(t)] from a Lagrangian configuration, concentration weights at the
// interfaces, and the conservation / flocking audits built on them.

namespace flockfront {

struct EulerianProfile {
    double t = 0.0;
    double a = 0.0, b = 0.0;
    std::vector<double> x;    ///< cell edges, size rho.size() + 1; x.front() = a, x.back() = b
    std::vector<double> rho;  ///< per-cell density
    std::vector<double> v;    ///< per-cell velocity
};

/// Map a Lagrangian configuration to the Eulerian profile: cell edges are
/// a(t) + cumulative sums of u dy, densities are 1/u, velocities carry over.
EulerianProfile reconstruct(const SimState& s, double a_of_t);

struct ConcentrationState {
    double P_a = 0.0;
    double P_b = 0.0;
};

/// Exact update of the exponential-kernel boundary integrals over an interval
/// on which the boundary densities are constant:
///   P <- exp(-K M dt) P + p(rho_trace) (1 - exp(-K M dt)) / (K M).
ConcentrationState advance_concentrations(const ConcentrationState& c, double dt, double rho_a,
                                          double rho_b, const ModelParams& params);

/// Concentration weights at time t accumulated over piecewise-constant
/// boundary traces starting from P(0) = 0.
ConcentrationState concentrations_from_trace(const std::vector<BoundarySegment>& segments,
                                             double t, const ModelParams& params);

struct ConservationAudit {
    double mass_err = 0.0;      ///< |integral of rho dx - M|
    double momentum_err = 0.0;  ///< |integral of m dx + P_b - P_a - M1_ref|
};

ConservationAudit audit_conservation(const EulerianProfile& p, const ConcentrationState& c,
                                     const ModelParams& params, double M1_ref);

struct FlockingMetrics {
    double support_len = 0.0;
    double v_osc = 0.0;
    double rho_dev = 0.0;             ///< max |rho - rho_inf_est|
    double interface_residual = 0.0;  ///< |b_advected - (a + int u)| when known
};

FlockingMetrics flocking_metrics(const EulerianProfile& p, double rho_inf_est);

/// Estimate of the asymptotic density from the final support length.
double rho_inf_estimate(const RunResult& run);

/// L1 distance between two piecewise-constant density profiles
/// (integrated over the union of supports).
double l1_rho_distance(const EulerianProfile& p, const EulerianProfile& q);

}  // namespace flockfront
