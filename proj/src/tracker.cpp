#include "flockfront/tracker.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace flockfront {

namespace {

constexpr int kNone = -1;

struct Slot {
    double size = 0.0;  // signed, always recomputed from the realized u-jump
    double y_ref = 0.0;
    double t_ref = 0.0;
    double speed = 0.0;
    double v_anchor = 1.0;  // damping factor at last re-resolution
    double birth = 0.0;
    State right;  // state to the right, velocity in unscaled units
    std::uint64_t id = 0;
    int prev = kNone;
    int next = kNone;
    std::uint32_t ver = 0;
    Family family = Family::one;
    bool alive = false;
};

struct CollEntry {
    double time;
    double y;
    int l, r;
    std::uint32_t lver, rver;
};
struct CollLater {
    bool operator()(const CollEntry& a, const CollEntry& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.y != b.y) return a.y > b.y;
        return a.l > b.l;
    }
};

struct DueEntry {
    double thresh;
    int slot;
    std::uint32_t ver;
};
struct DueLater {
    bool operator()(const DueEntry& a, const DueEntry& b) const {
        if (a.thresh != b.thresh) return a.thresh < b.thresh;
        return a.slot < b.slot;
    }
};

}  // namespace

struct FrontTracker::Impl {
    RunConfig cfg;
    double alpha, M, d, dt, eta, theta, clamp;

    std::vector<Slot> slots;
    std::vector<int> free_list;
    int head = kNone, tail = kNone;
    State left_state;  // state adjoining y = 0, velocity unscaled
    std::size_t alive_count = 0;

    double t = 0.0;
    double V = 1.0;  // global damping factor applied to stored velocities
    std::uint64_t n_step = 0;
    std::uint64_t next_id = 1;

    std::priority_queue<CollEntry, std::vector<CollEntry>, CollLater> coll_heap;
    std::priority_queue<DueEntry, std::vector<DueEntry>, DueLater> due_heap;

    // Eulerian interface track and concentration weights.
    double a_pos = 0.0;
    double b_adv = 0.0;  // right interface advected by v(M-,t)
    double P_a = 0.0, P_b = 0.0;
    double trace_t = 0.0;
    double trace_u_left = 1.0, trace_u_right = 1.0;
    BoundarySegment open_seg;

    RunResult out;
    bool ledger_dirty = false;
    double cum_dL = 0.0;

    double q_sampled = 0.0, L0 = 0.0, M1_ref = 0.0;
    double run_u_min = 0.0, run_u_max = 0.0;

    // ---- basic accessors -------------------------------------------------

    Slot& S(int i) { return slots[static_cast<std::size_t>(i)]; }
    const Slot& S(int i) const { return slots[static_cast<std::size_t>(i)]; }

    double slot_y(int i, double at) const { return S(i).y_ref + S(i).speed * (at - S(i).t_ref); }

    const State& state_left_of(int i) const {
        return S(i).prev == kNone ? left_state : S(S(i).prev).right;
    }

    State materialize(const State& s) const { return State{s.u, s.v * V}; }

    double speed_of(double ul, double ur, double size, Family fam) const {
        const double mag =
            size < 0.0 ? alpha / std::sqrt(ul * ur) : alpha / log_mean(ul, ur);
        return fam == Family::one ? -mag : mag;
    }

    void note_u(double u) {
        run_u_min = std::min(run_u_min, u);
        run_u_max = std::max(run_u_max, u);
    }

    // ---- slot management -------------------------------------------------

    int alloc_slot() {
        if (!free_list.empty()) {
            const int i = free_list.back();
            free_list.pop_back();
            return i;
        }
        slots.emplace_back();
        return static_cast<int>(slots.size()) - 1;
    }

    void unlink(int i) {
        Slot& s = S(i);
        if (s.prev != kNone)
            S(s.prev).next = s.next;
        else
            head = s.next;
        if (s.next != kNone)
            S(s.next).prev = s.prev;
        else
            tail = s.prev;
        s.alive = false;
        s.ver++;
        free_list.push_back(i);
        alive_count--;
    }

    // Insert slot i between l and r (either may be kNone for the ends).
    void link_between(int i, int l, int r) {
        Slot& s = S(i);
        s.prev = l;
        s.next = r;
        if (l != kNone)
            S(l).next = i;
        else
            head = i;
        if (r != kNone)
            S(r).prev = i;
        else
            tail = i;
        alive_count++;
        out.counters.peak_fronts = std::max(out.counters.peak_fronts, alive_count);
    }

    // ---- scheduling ------------------------------------------------------

    void push_pair(int l, int r) {
        if (l == kNone || r == kNone) return;
        const Slot& a = S(l);
        const Slot& b = S(r);
        const double rel = a.speed - b.speed;
        if (!(rel > 0.0)) return;
        const double gap = std::max(0.0, slot_y(r, t) - slot_y(l, t));
        const double tc = t + gap / rel;
        coll_heap.push(CollEntry{tc, slot_y(l, t) + a.speed * (tc - t), l, r, a.ver, b.ver});
    }

    void push_due(int i) {
        const Slot& s = S(i);
        const double hmag = alpha * std::fabs(jump_h(s.size));
        double thresh;
        if (theta <= 0.0) {
            thresh = s.v_anchor;  // due at the very next damping step
        } else if (hmag <= theta) {
            return;  // deficit can never reach the budget
        } else {
            thresh = s.v_anchor * (1.0 - theta / hmag);
        }
        due_heap.push(DueEntry{thresh, i, s.ver});
    }

    bool coll_valid(const CollEntry& e) const {
        return e.l >= 0 && e.r >= 0 && S(e.l).alive && S(e.r).alive && S(e.l).next == e.r &&
               S(e.l).ver == e.lver && S(e.r).ver == e.rver;
    }

    void maybe_purge() {
        const std::size_t cap = 4096 + 16 * alive_count;
        if (coll_heap.size() > cap) {
            std::priority_queue<CollEntry, std::vector<CollEntry>, CollLater> fresh;
            std::swap(coll_heap, fresh);
            for (int i = head; i != kNone; i = S(i).next) push_pair(i, S(i).next);
        }
        if (due_heap.size() > cap) {
            std::priority_queue<DueEntry, std::vector<DueEntry>, DueLater> fresh;
            std::swap(due_heap, fresh);
            for (int i = head; i != kNone; i = S(i).next)
                if (V < S(i).v_anchor) push_due(i);
        }
    }

    // ---- boundary traces, interface track, concentration weights ---------

    void refresh_traces() {
        trace_u_left = left_state.u;
        trace_u_right = tail == kNone ? left_state.u : S(tail).right.u;
    }

    double pressure_of_u(double u) const { return alpha * alpha / u; }

    /// Integrate a(t) and the concentration weights up to `to` (traces constant).
    void advance_traces(double to) {
        if (to <= trace_t) return;
        const double span = to - trace_t;
        a_pos += left_state.v * V * span;
        b_adv += (tail == kNone ? left_state.v : S(tail).right.v) * V * span;
        const double decay = std::exp(-d * span);
        P_a = decay * P_a + pressure_of_u(trace_u_left) * (1.0 - decay) / d;
        P_b = decay * P_b + pressure_of_u(trace_u_right) * (1.0 - decay) / d;
        trace_t = to;
    }

    void close_segment(double at) {
        open_seg.t1 = at;
        if (at > open_seg.t0) out.boundary.push_back(open_seg);
        open_seg = BoundarySegment{at, at, left_state.u,
                                   tail == kNone ? left_state.u : S(tail).right.u,
                                   left_state.v * V,
                                   (tail == kNone ? left_state.v : S(tail).right.v) * V};
    }

    // ---- fan assembly ----------------------------------------------------

    struct FanPiece {
        Family family;
        double size;
    };

    // Replace the gap between neighbors l and r (states A | ... | C) by the
    // resolved fan (eps1, eps2). Outgoing waves below the clamp are dropped
    // with the u-jump folded into the surviving wave. Returns created slots.
    std::vector<int> insert_fan(int l, int r, const State& A_scaled, const State& C_unscaled,
                                double eps1, double eps2, double y,
                                std::uint64_t keep_id) {
        bool keep1 = std::fabs(eps1) >= clamp;
        bool keep2 = std::fabs(eps2) >= clamp;
        if (!keep1 && eps1 != 0.0) {
            out.counters.clamped_drops++;
            out.counters.sum_dropped += std::fabs(eps1);
        }
        if (!keep2 && eps2 != 0.0) {
            out.counters.clamped_drops++;
            out.counters.sum_dropped += std::fabs(eps2);
        }

        std::vector<FanPiece> pieces;
        if (keep1 && keep2) {
            append_pieces(pieces, Family::one, eps1);
            append_pieces(pieces, Family::two, eps2);
        } else if (keep1) {
            append_pieces(pieces, Family::one,
                          wave_size(A_scaled.u, C_unscaled.u, Family::one));
        } else if (keep2) {
            append_pieces(pieces, Family::two,
                          wave_size(A_scaled.u, C_unscaled.u, Family::two));
        } else {
            return {};
        }

        std::vector<int> created;
        created.reserve(pieces.size());
        State cur = A_scaled;  // scaled units while composing
        int left_link = l;
        for (std::size_t k = 0; k < pieces.size(); ++k) {
            const bool last = (k + 1 == pieces.size());
            State nxt_scaled;
            double realized;
            if (last) {
                nxt_scaled = State{C_unscaled.u, C_unscaled.v * V};
                realized = wave_size(cur.u, nxt_scaled.u, pieces[k].family);
            } else {
                nxt_scaled = apply_wave(cur, pieces[k].family, pieces[k].size, alpha);
                realized = wave_size(cur.u, nxt_scaled.u, pieces[k].family);
                note_u(nxt_scaled.u);
            }
            const int i = alloc_slot();
            Slot& s = S(i);
            s.size = realized;
            s.y_ref = y;
            s.t_ref = t;
            s.speed = speed_of(cur.u, nxt_scaled.u, realized, pieces[k].family);
            s.v_anchor = V;
            s.birth = t;
            s.right = last ? C_unscaled : State{nxt_scaled.u, nxt_scaled.v / V};
            s.id = (k == 0 && keep_id != 0) ? keep_id : next_id++;
            s.ver++;
            s.alive = true;
            s.family = pieces[k].family;
            link_between(i, left_link, r);
            created.push_back(i);
            left_link = i;
            cur = nxt_scaled;
        }

        for (std::size_t k = 0; k < created.size(); ++k) {
            push_due(created[k]);
            if (k + 1 < created.size()) push_pair(created[k], created[k + 1]);
        }
        if (l != kNone) push_pair(l, created.front());
        if (r != kNone) push_pair(created.back(), r);
        return created;
    }

    void append_pieces(std::vector<FanPiece>& pieces, Family fam, double eps) {
        if (eps > eta * (1.0 + 1e-12)) {
            for (double p : split_rarefaction(eps, eta)) {
                pieces.push_back(FanPiece{fam, p});
                out.counters.splits++;
            }
        } else {
            pieces.push_back(FanPiece{fam, eps});
        }
    }

    // ---- logging ---------------------------------------------------------

    WaveRecord record_of(const Slot& s) const {
        return WaveRecord{s.family, kind_of(s.size), s.size};
    }

    void log_event(EventType type, double y, std::vector<WaveRecord> in,
                   const std::vector<int>& out_slots, double dL) {
        if (!cfg.full_log) return;
        EventLogEntry e;
        e.time = t;
        e.type = type;
        e.position = y;
        e.incoming = std::move(in);
        for (int i : out_slots) e.outgoing.push_back(record_of(S(i)));
        e.delta_L = dL;
        out.full_log.push_back(std::move(e));
    }

    void note_neutral(double dL) {
        out.counters.max_neutral_dL = std::max(out.counters.max_neutral_dL, std::fabs(dL));
    }

    double out_sum(const std::vector<int>& created) const {
        double s = 0.0;
        for (int i : created) s += std::fabs(S(i).size);
        return s;
    }

    double out_rare(const std::vector<int>& created) const {
        double s = 0.0;
        for (int i : created) s += std::max(0.0, S(i).size);
        return s;
    }

    // ---- event handlers --------------------------------------------------

    /// Re-resolve one front against its damped neighbour states, emitting the
    /// reflected wave. Returns false when the reflection is below the clamp
    /// (nothing changes; the deficit keeps accruing).
    bool resolve_front(int i, bool count_as_step) {
        Slot& s = S(i);
        if (V >= s.v_anchor) return false;
        const State A = materialize(state_left_of(i));
        const State B = materialize(s.right);
        const RiemannFan fan = solve_riemann(A, B, alpha);
        const double principal = s.family == Family::one ? fan.eps1 : fan.eps2;
        const double reflected = s.family == Family::one ? fan.eps2 : fan.eps1;
        if (std::fabs(reflected) < clamp && kind_of(principal) == kind_of(s.size)) {
            return false;
        }

        const double decay_frac = 1.0 - V / s.v_anchor;
        const double y = slot_y(i, t);
        const double in_size = s.size;
        std::vector<WaveRecord> in{record_of(s)};
        const int l = s.prev, r = s.next;
        const std::uint64_t keep = s.id;
        const State C_unscaled = s.right;
        unlink(i);
        const auto created = insert_fan(l, r, A, C_unscaled, fan.eps1, fan.eps2, y, keep);

        const double dL = out_sum(created) - std::fabs(in_size);
        note_neutral(dL);
        cum_dL += dL;
        if (count_as_step) out.counters.time_step_resolves++;
        if (in_size < 0.0) {
            out.shock_steps.push_back(
                ShockStepRecord{t, std::fabs(in_size), std::fabs(reflected), decay_frac});
        }
        log_event(EventType::time_step, y, std::move(in), created, dL);
        return true;
    }

    void apply_time_step() {
        const double ts = dt * static_cast<double>(n_step + 1);
        advance_traces(ts);
        t = ts;
        n_step++;
        out.counters.time_steps++;
        V *= (1.0 - d * dt);
        if (V < 1e-60) rebase();

        // Re-resolve every front whose damping deficit has reached the budget.
        while (!due_heap.empty() && due_heap.top().thresh >= V) {
            const DueEntry e = due_heap.top();
            due_heap.pop();
            if (e.slot < 0 || !S(e.slot).alive || S(e.slot).ver != e.ver) continue;
            if (!resolve_front(e.slot, true)) {
                // Reflection still under the clamp; retry from the next step on.
                due_heap.push(DueEntry{V * (1.0 - 0.5 * d * dt), e.slot, e.ver});
            }
            out.counters.events++;
        }
    }

    void rebase() {
        left_state.v *= V;
        for (int i = head; i != kNone; i = S(i).next) {
            S(i).right.v *= V;
            S(i).v_anchor /= V;
        }
        // Thresholds scale with v_anchor; rebuild the due heap.
        std::priority_queue<DueEntry, std::vector<DueEntry>, DueLater> fresh;
        std::swap(due_heap, fresh);
        V = 1.0;
        for (int i = head; i != kNone; i = S(i).next)
            if (V < S(i).v_anchor) push_due(i);
    }

    void handle_collision(const CollEntry& e) {
        const int l = e.l, r = e.r;
        t = std::max(t, e.time);
        const double y = 0.5 * (slot_y(l, t) + slot_y(r, t));

        if (S(l).family == Family::two && S(r).family == Family::one) {
            cross(l, r, y);
            return;
        }
        if (S(l).family != S(r).family) {
            // 1-family left of 2-family separates; a scheduled collision here
            // means the ordering broke down.
            throw std::runtime_error("front_tracker: separating pair scheduled for collision");
        }

        // Same family: fold any pending damping deficit into real waves first,
        // so the interaction identities apply to clean states.
        if (V < S(l).v_anchor && resolve_front(l, false)) return;
        if (V < S(r).v_anchor && resolve_front(r, false)) return;

        const State A = materialize(state_left_of(l));
        const State C_unscaled = S(r).right;
        const State C = materialize(C_unscaled);
        const double sl = S(l).size, sr = S(r).size;
        if (sl > 0.0 && sr > 0.0) {
            throw std::runtime_error("front_tracker: rarefaction-rarefaction collision");
        }
        std::vector<WaveRecord> in{record_of(S(l)), record_of(S(r))};
        const Family fam = S(l).family;
        const int pl = S(l).prev, nr = S(r).next;
        unlink(l);
        unlink(r);
        const RiemannFan fan = solve_riemann(A, C, alpha);
        const auto created = insert_fan(pl, nr, A, C_unscaled, fan.eps1, fan.eps2, y, 0);

        const double dL = out_sum(created) - std::fabs(sl) - std::fabs(sr);
        const double principal = fam == Family::one ? fan.eps1 : fan.eps2;
        const double reflected = fam == Family::one ? fan.eps2 : fan.eps1;
        cum_dL += dL;
        out.counters.same_family_collisions++;

        const bool is_sr = (sl < 0.0) != (sr < 0.0);
        if (is_sr) {
            LedgerEntry le;
            le.tau = t;
            le.type = EventType::collision;
            le.position = y;
            le.dL = dL;
            const double rin = std::max(sl, sr);  // the rarefaction (positive)
            le.dR_plus = std::max(0.0, out_rare(created) - rin);
            le.dR_minus = std::max(0.0, rin - out_rare(created));
            le.same_family = true;
            le.outgoing_is_shock = principal < 0.0;
            le.shock_in = std::fabs(std::min(sl, sr));
            le.rare_in = rin;
            le.refl_out = std::fabs(reflected);
            out.ledger.push_back(le);
        } else {
            note_neutral(dL);
        }
        log_event(EventType::collision, y, std::move(in), created, dL);
    }

    // Fronts of different families pass through each other; both sizes are
    // preserved exactly, only the middle state and the speeds change.
    void cross(int l, int r, double y) {
        Slot& a = S(l);  // family two
        Slot& b = S(r);  // family one
        const State& A = state_left_of(l);
        const State B = a.right;
        const State C = b.right;
        std::vector<WaveRecord> in{record_of(a), record_of(b)};
        const double old_sum = std::fabs(a.size) + std::fabs(b.size);

        State mid;
        mid.u = A.u * (C.u / B.u);
        mid.v = A.v + (C.v - B.v);  // unscaled arithmetic is exact here
        note_u(mid.u);

        Slot tmp_a = a;  // the 2-wave, moves to the right logical position
        Slot tmp_b = b;  // the 1-wave, moves left

        a.family = Family::one;
        a.size = wave_size(A.u, mid.u, Family::one);
        a.right = mid;
        a.speed = speed_of(A.u, mid.u, a.size, Family::one);
        a.id = tmp_b.id;
        a.v_anchor = tmp_b.v_anchor;
        a.birth = tmp_b.birth;
        a.y_ref = y;
        a.t_ref = t;
        a.ver++;

        b.family = Family::two;
        b.size = wave_size(mid.u, C.u, Family::two);
        b.speed = speed_of(mid.u, C.u, b.size, Family::two);
        b.id = tmp_a.id;
        b.v_anchor = tmp_a.v_anchor;
        b.birth = tmp_a.birth;
        b.y_ref = y;
        b.t_ref = t;
        b.ver++;

        const double dL = std::fabs(a.size) + std::fabs(b.size) - old_sum;
        note_neutral(dL);
        cum_dL += dL;
        out.counters.crossings++;

        push_pair(a.prev, l);
        push_pair(l, r);  // defensive; the pair now separates
        push_pair(r, b.next);
        if (V < a.v_anchor) push_due(l);
        if (V < b.v_anchor) push_due(r);
        log_event(EventType::collision, y, std::move(in), {l, r}, dL);
    }

    void handle_exit(int side) {
        const int i = side == 0 ? head : tail;
        const Slot& s = S(i);
        const double tx = side == 0 ? t + slot_y(i, t) / (-s.speed)
                                    : t + (M - slot_y(i, t)) / s.speed;
        advance_traces(std::max(t, tx));
        t = std::max(t, tx);

        ExitRecord ex{t, side, s.family, kind_of(s.size), s.size};
        out.exits.push_back(ex);
        const double dL = -std::fabs(s.size);
        cum_dL += dL;
        out.counters.boundary_exits++;

        LedgerEntry le;
        le.tau = t;
        le.type = EventType::boundary_exit;
        le.position = side == 0 ? 0.0 : M;
        le.dL = dL;
        le.dR_minus = std::max(0.0, s.size);
        out.ledger.push_back(le);

        std::vector<WaveRecord> in{record_of(s)};
        if (side == 0) left_state = s.right;
        unlink(i);
        refresh_traces();
        close_segment(t);
        log_event(EventType::boundary_exit, le.position, std::move(in), {}, dL);
    }

    // ---- event selection ---------------------------------------------------

    struct Picked {
        EventType type;
        double time;
        double y;
        CollEntry coll{};
        int side = 0;
        bool valid = false;
    };

    Picked pick() {
        Picked p;
        p.valid = false;

        // Next damping step.
        const double t_step = dt * static_cast<double>(n_step + 1);

        // Next collision (drop stale entries).
        while (!coll_heap.empty() && !coll_valid(coll_heap.top())) coll_heap.pop();
        const bool has_coll = !coll_heap.empty();
        const CollEntry c = has_coll ? coll_heap.top() : CollEntry{};

        // Boundary exits can only happen at the ends of the chain.
        double t_exit0 = std::numeric_limits<double>::infinity();
        double t_exitM = std::numeric_limits<double>::infinity();
        if (head != kNone && S(head).speed < 0.0)
            t_exit0 = t + std::max(0.0, slot_y(head, t)) / (-S(head).speed);
        if (tail != kNone && S(tail).speed > 0.0)
            t_exitM = t + std::max(0.0, M - slot_y(tail, t)) / S(tail).speed;

        double best = t_step;
        EventType type = EventType::time_step;
        double y = 0.0;
        int side = 0;
        if (has_coll && c.time < best) {
            best = c.time;
            type = EventType::collision;
            y = c.y;
        }
        // Exits tie-break against collisions by position (leftmost first).
        if (t_exit0 < best || (t_exit0 == best && type == EventType::collision && 0.0 < y)) {
            best = t_exit0;
            type = EventType::boundary_exit;
            side = 0;
            y = 0.0;
        }
        if (t_exitM < best) {
            best = t_exitM;
            type = EventType::boundary_exit;
            side = 1;
            y = M;
        }

        p.type = type;
        p.time = std::max(t, best);
        p.y = y;
        p.side = side;
        if (type == EventType::collision) p.coll = c;
        p.valid = true;
        return p;
    }

    void dispatch(const Picked& p) {
        out.counters.events++;
        if (out.counters.events > cfg.max_events) {
            throw std::runtime_error(
                "front_tracker: event cap exceeded (" + std::to_string(cfg.max_events) +
                "); runaway front cascade - raise max_events or dust_tol0");
        }
        switch (p.type) {
            case EventType::time_step:
                apply_time_step();
                break;
            case EventType::collision:
                coll_heap.pop();
                handle_collision(p.coll);
                break;
            case EventType::boundary_exit:
                handle_exit(p.side);
                break;
        }
        maybe_purge();
    }

    // ---- sampling ----------------------------------------------------------

    SampleRow sample_row(double ts) {
        advance_traces(ts);
        SampleRow row;
        row.t = ts;
        row.a = a_pos;
        row.P_a = P_a;
        row.P_b = P_b;
        row.cum_dL = cum_dL;

        State cur = left_state;
        double prev_y = 0.0;
        double L = 0, Rr = 0, Sh = 0, tvu = 0, tvv = 0, iu = 0, iv = 0, resid = 0;
        double umin = cur.u, umax = cur.u;
        double vmin = cur.v * V, vmax = cur.v * V;
        std::size_t n = 0;
        for (int i = head; i != kNone; i = S(i).next) {
            const Slot& s = S(i);
            const double yy = slot_y(i, ts);
            iu += cur.u * (yy - prev_y);
            iv += cur.v * V * (yy - prev_y);
            const State& nx = s.right;
            L += std::fabs(s.size);
            if (s.size > 0)
                Rr += s.size;
            else
                Sh -= s.size;
            tvu += std::fabs(std::log(nx.u) - std::log(cur.u));
            tvv += std::fabs(nx.v - cur.v) * V;
            // Residual against the declared wave curve, damping deficit included.
            const double dv_model = v_jump(s.size, alpha) * (V / s.v_anchor);
            resid = std::max(resid, std::fabs((nx.v - cur.v) * V - dv_model));
            prev_y = yy;
            cur = nx;
            umin = std::min(umin, cur.u);
            umax = std::max(umax, cur.u);
            vmin = std::min(vmin, cur.v * V);
            vmax = std::max(vmax, cur.v * V);
            n++;
        }
        iu += cur.u * (M - prev_y);
        iv += cur.v * V * (M - prev_y);

        row.L = L;
        row.R = Rr;
        row.S = Sh;
        row.tv_ln_u = tvu;
        row.tv_v = tvv;
        row.int_u = iu;
        row.int_v = iv;
        row.u_min = umin;
        row.u_max = umax;
        row.v_min = vmin;
        row.v_max = vmax;
        row.b = a_pos + iu;
        row.b_advected = b_adv;
        row.max_wave_residual = resid;
        row.n_fronts = n;
        return row;
    }

    SimState make_snapshot(double ts) const {
        SimState st;
        st.time = ts;
        st.params = cfg.params;
        st.eta = eta;
        st.dt = dt;
        st.damping = d;
        st.states.push_back(State{left_state.u, left_state.v * V});
        for (int i = head; i != kNone; i = S(i).next) {
            const Slot& s = S(i);
            FrontView f;
            f.id = s.id;
            f.family = s.family;
            f.kind = kind_of(s.size);
            f.size = s.size;
            f.position = s.y_ref + s.speed * (ts - s.t_ref);
            f.speed = s.speed;
            f.birth_time = s.birth;
            f.dust = std::fabs(v_jump(s.size, alpha)) * (1.0 - V / s.v_anchor);
            st.fronts.push_back(f);
            st.states.push_back(State{s.right.u, s.right.v * V});
        }
        st.exited = out.exits;
        return st;
    }

    // ---- construction ------------------------------------------------------

    void build(const InitialDatum& datum) {
        cfg.params.validate();
        alpha = cfg.params.alpha;
        M = cfg.params.mass;
        d = cfg.params.kernel * M;
        dt = cfg.dt();
        eta = cfg.eta();
        theta = cfg.dust_tol();
        clamp = cfg.clamp;
        if (!(dt > 0.0) || !(eta > 0.0)) {
            throw std::invalid_argument("front_tracker: dt and eta must be positive");
        }

        const int n = cfg.cells();
        std::vector<State> cells(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double y = (i + 0.5) * M / n;
            cells[static_cast<std::size_t>(i)] = State{datum.u0(y), datum.v0(y)};
            if (!(cells[static_cast<std::size_t>(i)].u > 0.0)) {
                throw std::domain_error("front_tracker: initial datum has non-positive u");
            }
        }

        double tvu = 0, tvv = 0, iv = 0;
        for (int i = 0; i < n; ++i) {
            const auto& c = cells[static_cast<std::size_t>(i)];
            iv += c.v * M / n;
            if (i > 0) {
                tvu += std::fabs(std::log(c.u) - std::log(cells[static_cast<std::size_t>(i - 1)].u));
                tvv += std::fabs(c.v - cells[static_cast<std::size_t>(i - 1)].v);
            }
        }
        q_sampled = 0.5 * tvu + tvv / (2.0 * alpha);
        M1_ref = iv;

        const double bound = std::min(1.0, 2.0 / std::cosh(q_sampled));
        if (!(d * dt < bound)) {
            throw std::invalid_argument(
                "front_tracker: K*M*dt = " + std::to_string(d * dt) +
                " violates the damping-step bound min{1, 2/cosh q} = " + std::to_string(bound));
        }

        left_state = cells.front();
        run_u_min = run_u_max = left_state.u;
        a_pos = cfg.a0;
        trace_t = 0.0;

        int last = kNone;
        State chain = cells.front();  // realized state, V = 1 at t = 0
        for (int i = 1; i < n; ++i) {
            const State target = cells[static_cast<std::size_t>(i)];
            if (chain.u == target.u && chain.v == target.v) continue;
            const RiemannFan fan = solve_riemann(chain, target, alpha);
            const double y = static_cast<double>(i) * M / n;
            const auto created =
                insert_fan(last, kNone, chain, target, fan.eps1, fan.eps2, y, 0);
            if (!created.empty()) {
                last = created.back();
                chain = S(last).right;
            }
        }

        for (int i = head; i != kNone; i = S(i).next) {
            L0 += std::fabs(S(i).size);
            note_u(S(i).right.u);
        }
        {
            State cur = left_state;
            double prev_y = 0.0, iu = 0.0;
            for (int i = head; i != kNone; i = S(i).next) {
                iu += cur.u * (slot_y(i, 0.0) - prev_y);
                prev_y = slot_y(i, 0.0);
                cur = S(i).right;
            }
            iu += cur.u * (M - prev_y);
            b_adv = cfg.a0 + iu;
        }
        refresh_traces();
        open_seg = BoundarySegment{0.0, 0.0, trace_u_left, trace_u_right, left_state.v,
                                   tail == kNone ? left_state.v : S(tail).right.v};
    }
};

FrontTracker::FrontTracker(const RunConfig& config, const InitialDatum& datum)
    : impl_(new Impl) {
    impl_->cfg = config;
    if (impl_->cfg.sample_times.empty()) {
        impl_->cfg.sample_times = {config.t_end};
    }
    std::sort(impl_->cfg.sample_times.begin(), impl_->cfg.sample_times.end());
    impl_->build(datum);
}

FrontTracker::~FrontTracker() { delete impl_; }

double FrontTracker::time() const { return impl_->t; }
double FrontTracker::q_sampled() const { return impl_->q_sampled; }
double FrontTracker::initial_L() const { return impl_->L0; }

EventPreview FrontTracker::next_event() const {
    auto p = impl_->pick();
    EventPreview ev;
    ev.type = p.type;
    ev.time = p.time;
    ev.position = p.type == EventType::time_step ? 0.0 : p.y;
    return ev;
}

bool FrontTracker::advance_one_event() {
    auto p = impl_->pick();
    if (!p.valid || p.time > impl_->cfg.t_end) return false;
    impl_->dispatch(p);
    return true;
}

SimState FrontTracker::snapshot() const { return impl_->make_snapshot(impl_->t); }

RunResult FrontTracker::run() {
    Impl& im = *impl_;
    std::size_t cursor = 0;
    const auto& stimes = im.cfg.sample_times;

    const auto emit_samples_before = [&](double te) {
        while (cursor < stimes.size() && stimes[cursor] < te &&
               stimes[cursor] <= im.cfg.t_end) {
            im.out.samples.push_back(im.sample_row(stimes[cursor]));
            if (im.cfg.keep_snapshots)
                im.out.snapshots.push_back(im.make_snapshot(stimes[cursor]));
            cursor++;
        }
    };

    while (true) {
        auto p = im.pick();
        if (!p.valid || p.time > im.cfg.t_end) break;
        emit_samples_before(p.time);
        im.dispatch(p);
    }
    emit_samples_before(std::numeric_limits<double>::infinity());
    im.advance_traces(im.cfg.t_end);
    im.t = im.cfg.t_end;
    im.close_segment(im.t);

    im.out.q_sampled = im.q_sampled;
    im.out.L0 = im.L0;
    im.out.M1_ref = im.M1_ref;
    im.out.u_min = im.run_u_min;
    im.out.u_max = im.run_u_max;
    im.out.t_final = im.t;
    im.out.dt = im.dt;
    im.out.eta = im.eta;
    im.out.damping = im.d;
    im.out.params = im.cfg.params;
    return std::move(im.out);
}

RunResult run_tracker(const RunConfig& config, const InitialDatum& datum) {
    FrontTracker tracker(config, datum);
    return tracker.run();
}

}  // namespace flockfront
