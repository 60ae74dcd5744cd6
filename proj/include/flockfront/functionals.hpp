#pragma once

#include <string>
#include <vector>

#include "flockfront/tracker.hpp"

// Wave-strength functionals over a run: the linear functional L = sum |eps_j|
// with its rarefaction/shock parts R and S, per-event accounting of dL,
// the trapped-region bound on R, and exponential decay estimation.

namespace flockfront {

struct DiagnosticsSample {
    double t = 0.0;
    double L = 0.0, R = 0.0, S = 0.0;
    double tv_ln_u = 0.0, tv_v = 0.0;
    double q = 0.0;  ///< the data constant, stored for the bound tv_v <= 2 a cosh(q) L
};

/// Functionals of one configuration; interior fronts only.
DiagnosticsSample sample(const SimState& s, double q);

/// The data constant q = 1/2 TV{ln rho0} + 1/(2 alpha) TV{v0}.
/// Note TV{ln rho0} = TV{ln u0}.
double q_of_cells(const std::vector<double>& u0, const std::vector<double>& v0, double alpha);
double q_of_data(const InitialDatum& datum, double mass, double alpha, int grid = 1 << 16);

enum class DeltaLCase : int { boundary = 0, SR_to_R = 1, SR_to_S = 2, neutral = 3 };

const char* to_string(DeltaLCase c);

struct DeltaLRecord {
    double tau = 0.0;
    DeltaLCase kind = DeltaLCase::neutral;
    double dL = 0.0;
    double dR_plus = 0.0;
    double dR_minus = 0.0;
    double shock_in = 0.0;
    double rare_in = 0.0;
    double refl_out = 0.0;
    bool ok = true;     ///< the per-case bound of Prop 4.1 holds
    std::string note;   ///< set when ok is false
};

/// Classify one ledger entry and check the case bound at tolerance 1e-10:
///   boundary:  dL = -|eps|
///   SR -> R:   dL = -2 |shock_in| exactly
///   SR -> S:   dL <= -4 rare_in / (cosh q + 1)
DeltaLRecord classify_event(const LedgerEntry& e, double q);

std::vector<DeltaLRecord> classify_ledger(const RunResult& run);

/// Largest |L(t2) - L(t1) - sum of ledger dL in (t1, t2]| over all sample pairs.
double max_ledger_closure_residual(const RunResult& run);

struct TrapAuditReport {
    double t = 0.0;
    double T_bar = 0.0;   ///< window length M / lambda_bar
    double C_R = 0.0;     ///< C exp(M T_bar), C = min{1, (cosh q + 1)/4}
    double R_at_t = 0.0;
    double rhs = 0.0;     ///< C_R * sum of |dL| over (t, t + T_bar]
    bool satisfied = false;
    bool clipped = false;  ///< window extends past the end of the run
};

/// Evaluate the trapped-region bound R(t) <= C_R sum_{t < tau <= t+T} |dL(tau)|
/// at one sampled time.
TrapAuditReport trap_audit(const RunResult& run, double t);

std::vector<TrapAuditReport> trap_audit_all(const RunResult& run);

struct DecayFit {
    double t_a = 0.0, t_b = 0.0;
    double C1 = 0.0;        ///< amplitude of L ~ C1 exp(-C2 t)
    double C2 = 0.0;        ///< decay rate
    double r2 = 0.0;        ///< coefficient of determination of the log fit
    double T_star = 0.0;    ///< measured half-life on the sample grid
    int n_points = 0;
    bool degenerate = false;  ///< too few positive samples in the window
};

/// Least squares on log L over samples in [t_a, t_b] with L > 1e-13,
/// plus a grid scan for the half-life T*.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& L, double t_a,
                   double t_b);

DecayFit fit_decay(const RunResult& run, double t_a, double t_b);

/// Window [t_a, t_b] where L spans [lo, hi]; used by the reports.
bool decay_window(const std::vector<double>& t, const std::vector<double>& L, double lo,
                  double hi, double& t_a, double& t_b);

/// Smallest grid shift T with L(tau + T) <= 1/2 L(tau) for every sampled tau.
/// Returns a negative value when no shift on the grid works.
double measure_half_life(const std::vector<double>& t, const std::vector<double>& L);

}  // namespace flockfront
