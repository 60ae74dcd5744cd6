#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flockfront/eulerian.hpp"
#include "flockfront/functionals.hpp"
#include "flockfront/tracker.hpp"

// Experiment configuration, the kernel rescaling / mean-velocity shift,
// orchestration of refinement sweeps, and all file output.

namespace flockfront {

struct ExperimentConfig {
    ModelParams params;  // alpha, mass, kernel

    std::string datum = "two_bump";  // two_bump | riemann | table
    // two_bump: u0 = u_base (1 + amp_u (g1 + g2)), v0 = amp_v (g1 - g2) with
    // gaussian bumps g_i centered at c_i * M of width w * M.
    double u_base = 1.0;
    double bump_amp_u = 0.35;
    double bump_amp_v = 0.25;
    double bump_width = 0.1;
    double bump_c1 = 0.3;
    double bump_c2 = 0.7;
    // riemann: one jump at y = M/2.
    double u_left = 1.0, v_left = 0.5;
    double u_right = 1.0, v_right = -0.5;
    // table: CSV rows "y,u,v", piecewise-constant in y.
    std::string table_path;

    int nu_min = 0;
    int nu_max = 3;
    double eta0 = 0.05;
    double dt0 = 0.02;
    int cells0 = 64;
    double t_end = 40.0;
    int n_samples = 401;
    double dust_tol0 = 4e-3;
    double clamp = 1e-14;
    double a0 = 0.0;
    std::uint64_t max_events = 400'000'000;
    bool normalize_kernel = true;  ///< rescale to the unit kernel before running
    bool full_log = false;
    bool write_trajectory = false;

    void validate() const;
    std::vector<double> sample_grid() const;  ///< in original time units
};

/// Parse a key = value configuration file. Unknown keys are an error.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

/// Initial datum described by the config, as Lagrangian samplers on (0, M).
InitialDatum make_datum(const ExperimentConfig& cfg);

struct NormalizedProblem {
    double lambda = 1.0;      ///< sqrt(K)
    double v_bar = 0.0;       ///< mean velocity of the original datum
    ModelParams params;       ///< unit kernel, mass = lambda * M
    InitialDatum datum;       ///< zero-mean, unit-kernel samplers
    double time_scale = 1.0;  ///< t_normalized = time_scale * t_original
    double rate_scale = 1.0;  ///< rate_original = rate_scale * rate_normalized
};

/// Rescale to the unit kernel (lambda^2 = K) and shift the velocity to zero
/// mean. Decay rates fitted on the normalized problem map back to the
/// original time as rate * sqrt(K).
NormalizedProblem normalize(const InitialDatum& datum, const ModelParams& params);

struct RunReport {
    int nu = 0;
    RunResult run;
    std::vector<DeltaLRecord> records;
    DecayFit fit;                  ///< on the window L in [1e-10, L0/10], original time
    double closure_residual = 0.0;
    double max_mass_err = 0.0;
    double max_momentum_err = 0.0;
    double trap_pass_fraction = 0.0;  ///< over unclipped windows
    std::size_t trap_windows = 0;
    std::size_t trap_violations = 0;  ///< unclipped windows that fail
    double refl_bound_fraction = 0.0; ///< time-step shock reflections meeting the bound
    double refl_worst_ratio = 0.0;    ///< min |refl| / (decay c1(q) |eps|)
    std::size_t refl_events = 0;
    bool case_bounds_ok = true;
    double v_osc_initial = 0.0, v_osc_final = 0.0;
    double rho_dev_initial = 0.0, rho_dev_final = 0.0;
    double rho_inf_est = 0.0;
    double wall_seconds = 0.0;
};

/// One run at refinement level nu, with all audits evaluated.
RunReport run_one(const ExperimentConfig& cfg, int nu);

struct SuiteReport {
    std::vector<RunReport> runs;
    std::vector<double> l1_rho_adjacent;     ///< L1 distances between successive levels
    std::vector<double> momentum_ratio;      ///< err(nu+1)/err(nu)
    std::string summary_json;
};

/// Run every level in [nu_min, nu_max] (in parallel) and assemble the
/// cross-level convergence report.
SuiteReport run_suite(const ExperimentConfig& cfg);

// ---- file output -----------------------------------------------------------

void write_diagnostics_csv(const std::string& path, const RunResult& run);
void write_ledger_csv(const std::string& path, const RunReport& rep);
void write_audit_csv(const std::string& path, const RunReport& rep);
void write_trajectory_csv(const std::string& path, const RunResult& run);
void write_profile_csv(const std::string& path, const std::vector<EulerianProfile>& profiles,
                       const std::vector<ConcentrationState>& conc);
void write_events_jsonl(const std::string& path, const RunResult& run);
void write_fit_json(const std::string& path, const RunReport& rep);
std::string summary_json(const SuiteReport& suite, const ExperimentConfig& cfg);

/// Eulerian profiles of a run at its snapshot times (requires keep_snapshots).
std::vector<EulerianProfile> profiles_of(const RunResult& run);

}  // namespace flockfront
