#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "flockfront/wave.hpp"

// Event-driven front tracking for the damped p-system on the mass interval
// (0, M): piecewise-constant states separated by shock/rarefaction fronts,
// evolved through pairwise collisions, fractional damping steps at t^n = n dt
// (u unchanged, v scaled by 1 - d dt), and non-reflecting boundaries.
//
// Between damping steps the velocity field is only ever rescaled, so states
// store an unscaled velocity and the engine keeps one global damping factor.
// Each front remembers the factor at its last re-resolution; the deficit
// between the two is the front's pending damping dust. A front is re-resolved
// (emitting its reflected wave) once the dust exceeds `dust_tol`, scaled per
// refinement level. With dust_tol = 0 every jump is re-resolved at every
// step, which reproduces the textbook fractional-step scheme exactly but
// makes the reflected-wave cascade prohibitively expensive on long runs.

namespace flockfront {

enum class EventType : int { collision = 0, time_step = 1, boundary_exit = 2 };

struct WaveRecord {
    Family family = Family::one;
    Kind kind = Kind::shock;
    double size = 0.0;
};

struct EventLogEntry {
    double time = 0.0;
    EventType type = EventType::collision;
    double position = 0.0;
    std::vector<WaveRecord> incoming;
    std::vector<WaveRecord> outgoing;
    double delta_L = 0.0;
};

struct ExitRecord {
    double time = 0.0;
    int boundary = 0;  ///< 0 for y=0, 1 for y=M
    Family family = Family::one;
    Kind kind = Kind::shock;
    double size = 0.0;
};

/// One entry per event with a genuinely non-zero change of L
/// (same-family shock/rarefaction collisions and boundary exits).
struct LedgerEntry {
    double tau = 0.0;
    EventType type = EventType::collision;
    double position = 0.0;
    double dL = 0.0;
    double dR_plus = 0.0;
    double dR_minus = 0.0;
    bool same_family = false;
    bool outgoing_is_shock = false;  ///< kind of the principal outgoing wave
    double shock_in = 0.0;           ///< |incoming shock| for same-family pairs
    double rare_in = 0.0;            ///< |incoming rarefaction|
    double refl_out = 0.0;           ///< |reflected outgoing wave|
};

/// Reflected rarefaction produced when a shock is re-resolved after damping;
/// material for the empirical check of the time-step reflection bound.
struct ShockStepRecord {
    double tau = 0.0;
    double shock_in = 0.0;     ///< |incoming shock size|
    double refl = 0.0;         ///< |reflected wave|
    double decay_frac = 0.0;   ///< 1 - (1 - d dt)^k accumulated since last resolve
};

struct SampleRow {
    double t = 0.0;
    double L = 0.0, R = 0.0, S = 0.0;
    double tv_ln_u = 0.0, tv_v = 0.0;
    double int_v = 0.0;  ///< integral of v over (0, M)
    double int_u = 0.0;  ///< integral of u over (0, M) = support length
    double u_min = 0.0, u_max = 0.0, v_min = 0.0, v_max = 0.0;
    double a = 0.0, b = 0.0;      ///< Eulerian interface positions, b = a + int_u
    double b_advected = 0.0;      ///< right interface advected by the boundary trace
    double P_a = 0.0, P_b = 0.0;  ///< concentration weights
    double cum_dL = 0.0;          ///< ledger sum of dL up to this sample
    double max_wave_residual = 0.0;
    std::size_t n_fronts = 0;
};

/// Piecewise-constant boundary traces between trace-changing events;
/// v entries are the values at segment start (damped within the segment).
struct BoundarySegment {
    double t0 = 0.0, t1 = 0.0;
    double u_left = 1.0, u_right = 1.0;
    double v_left = 0.0, v_right = 0.0;
};

struct TrackerCounters {
    std::uint64_t events = 0;
    std::uint64_t crossings = 0;
    std::uint64_t same_family_collisions = 0;
    std::uint64_t time_step_resolves = 0;
    std::uint64_t time_steps = 0;
    std::uint64_t boundary_exits = 0;
    std::uint64_t clamped_drops = 0;
    std::uint64_t splits = 0;
    double max_neutral_dL = 0.0;  ///< max |dL| over events that must conserve L
    double sum_dropped = 0.0;     ///< total |size| lost to the clamp
    std::size_t peak_fronts = 0;
};

struct FrontView {
    std::uint64_t id = 0;
    Family family = Family::one;
    Kind kind = Kind::shock;
    double size = 0.0;
    double position = 0.0;
    double speed = 0.0;
    double birth_time = 0.0;
    double dust = 0.0;  ///< pending damping deficit on the velocity jump
};

/// Full piecewise-constant configuration at one instant.
struct SimState {
    double time = 0.0;
    std::vector<FrontView> fronts;
    std::vector<State> states;  ///< size fronts.size() + 1, left to right
    ModelParams params;
    double eta = 0.0;
    double dt = 0.0;
    double damping = 0.0;
    std::vector<ExitRecord> exited;
};

struct InitialDatum {
    std::function<double(double)> u0;
    std::function<double(double)> v0;
};

struct RunConfig {
    ModelParams params;
    int nu = 0;
    double eta0 = 0.05;
    double dt0 = 0.02;
    int cells0 = 64;
    double t_end = 10.0;
    double dust_tol0 = 0.0;  ///< velocity-budget at nu=0; halved per level; 0 = exact scheme
    double clamp = 1e-14;
    double a0 = 0.0;         ///< initial left interface position
    std::uint64_t max_events = 400'000'000;
    std::vector<double> sample_times;
    bool full_log = false;        ///< keep every event entry (small runs only)
    bool keep_snapshots = false;  ///< store a SimState per sample time

    double eta() const { return eta0 * std::exp2(-nu); }
    double dt() const { return dt0 * std::exp2(-nu); }
    double dust_tol() const { return dust_tol0 * std::exp2(-nu); }
    int cells() const { return cells0 << nu; }
};

struct RunResult {
    std::vector<SampleRow> samples;
    std::vector<LedgerEntry> ledger;
    std::vector<ExitRecord> exits;
    std::vector<ShockStepRecord> shock_steps;
    std::vector<BoundarySegment> boundary;
    std::vector<EventLogEntry> full_log;
    std::vector<SimState> snapshots;
    TrackerCounters counters;
    double q_sampled = 0.0;  ///< q of the sampled initial datum
    double L0 = 0.0;
    double M1_ref = 0.0;  ///< extended momentum of the sampled datum
    double u_min = 0.0, u_max = 0.0;
    double t_final = 0.0;
    double dt = 0.0, eta = 0.0, damping = 0.0;
    ModelParams params;
};

/// Description of the next scheduled event, for inspection.
struct EventPreview {
    EventType type = EventType::time_step;
    double time = std::numeric_limits<double>::infinity();
    double position = 0.0;
};

class FrontTracker {
  public:
    FrontTracker(const RunConfig& config, const InitialDatum& datum);
    ~FrontTracker();
    FrontTracker(const FrontTracker&) = delete;
    FrontTracker& operator=(const FrontTracker&) = delete;

    double time() const;
    double q_sampled() const;
    double initial_L() const;

    /// Earliest among the next collision, damping step and boundary exit.
    EventPreview next_event() const;

    /// Process one event; false when nothing is scheduled before t_end.
    bool advance_one_event();

    /// Run to t_end, collecting samples and audits.
    RunResult run();

    SimState snapshot() const;

  private:
    struct Impl;
    Impl* impl_;
};

/// Convenience wrapper: build the tracker and run it.
RunResult run_tracker(const RunConfig& config, const InitialDatum& datum);

}  // namespace flockfront
