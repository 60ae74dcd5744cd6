#include "flockfront/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flockfront {

DiagnosticsSample sample(const SimState& s, double q) {
    DiagnosticsSample d;
    d.t = s.time;
    d.q = q;
    for (const auto& f : s.fronts) {
        d.L += std::fabs(f.size);
        if (f.size > 0.0)
            d.R += f.size;
        else
            d.S -= f.size;
    }
    for (std::size_t i = 0; i + 1 < s.states.size(); ++i) {
        d.tv_ln_u += std::fabs(std::log(s.states[i + 1].u) - std::log(s.states[i].u));
        d.tv_v += std::fabs(s.states[i + 1].v - s.states[i].v);
    }
    return d;
}

double q_of_cells(const std::vector<double>& u0, const std::vector<double>& v0, double alpha) {
    if (u0.size() != v0.size() || u0.empty()) {
        throw std::invalid_argument("q_of_cells: need equally sized, non-empty samples");
    }
    double tvu = 0.0, tvv = 0.0;
    for (std::size_t i = 0; i + 1 < u0.size(); ++i) {
        if (!(u0[i] > 0.0) || !(u0[i + 1] > 0.0)) {
            throw std::domain_error("q_of_cells: non-positive u sample");
        }
        tvu += std::fabs(std::log(u0[i + 1]) - std::log(u0[i]));
        tvv += std::fabs(v0[i + 1] - v0[i]);
    }
    return 0.5 * tvu + tvv / (2.0 * alpha);
}

double q_of_data(const InitialDatum& datum, double mass, double alpha, int grid) {
    std::vector<double> u(static_cast<std::size_t>(grid)), v(static_cast<std::size_t>(grid));
    for (int i = 0; i < grid; ++i) {
        const double y = (i + 0.5) * mass / grid;
        u[static_cast<std::size_t>(i)] = datum.u0(y);
        v[static_cast<std::size_t>(i)] = datum.v0(y);
    }
    return q_of_cells(u, v, alpha);
}

const char* to_string(DeltaLCase c) {
    switch (c) {
        case DeltaLCase::boundary: return "boundary";
        case DeltaLCase::SR_to_R: return "SR_to_R";
        case DeltaLCase::SR_to_S: return "SR_to_S";
        case DeltaLCase::neutral: return "neutral";
    }
    return "?";
}

DeltaLRecord classify_event(const LedgerEntry& e, double q) {
    DeltaLRecord r;
    r.tau = e.tau;
    r.dL = e.dL;
    r.dR_plus = e.dR_plus;
    r.dR_minus = e.dR_minus;
    r.shock_in = e.shock_in;
    r.rare_in = e.rare_in;
    r.refl_out = e.refl_out;

    constexpr double tol = 1e-10;
    if (e.type == EventType::boundary_exit) {
        r.kind = DeltaLCase::boundary;
        if (!(e.dL <= tol)) {
            r.ok = false;
            r.note = "boundary exit increased L";
        }
    } else if (e.same_family && e.shock_in > 0.0 && e.rare_in > 0.0) {
        if (e.outgoing_is_shock) {
            r.kind = DeltaLCase::SR_to_S;
            const double bound = -4.0 * e.rare_in / (std::cosh(q) + 1.0);
            if (!(e.dL <= bound * (1.0 - 1e-8) + tol)) {
                r.ok = false;
                r.note = "SR->S decrease weaker than 4 beta/(cosh q + 1)";
            }
        } else {
            r.kind = DeltaLCase::SR_to_R;
            if (std::fabs(e.dL + 2.0 * e.shock_in) > tol) {
                r.ok = false;
                r.note = "SR->R decrease differs from 2|alpha_s|";
            }
        }
    } else {
        r.kind = DeltaLCase::neutral;
        if (std::fabs(e.dL) > tol) {
            r.ok = false;
            r.note = "neutral event changed L";
        }
    }
    return r;
}

std::vector<DeltaLRecord> classify_ledger(const RunResult& run) {
    std::vector<DeltaLRecord> out;
    out.reserve(run.ledger.size());
    for (const auto& e : run.ledger) out.push_back(classify_event(e, run.q_sampled));
    return out;
}

double max_ledger_closure_residual(const RunResult& run) {
    // cum_dL is carried per sample; closure over any pair reduces to
    // consistency of L(t) - L(0) with the accumulated ledger sum.
    double worst = 0.0;
    for (const auto& row : run.samples) {
        worst = std::max(worst, std::fabs(row.L - run.L0 - row.cum_dL));
    }
    return worst;
}

TrapAuditReport trap_audit(const RunResult& run, double t) {
    TrapAuditReport rep;
    const double q = run.q_sampled;
    const double M = run.params.mass;
    const double lambda_star = run.params.alpha / run.u_max;
    const double lambda_bar = 0.5 * lambda_star;
    rep.t = t;
    rep.T_bar = M / lambda_bar;
    const double C = std::min(1.0, (std::cosh(q) + 1.0) / 4.0);
    rep.C_R = C * std::exp(M * rep.T_bar);

    const SampleRow* row = nullptr;
    for (const auto& s : run.samples) {
        if (s.t == t) {
            row = &s;
            break;
        }
    }
    if (row == nullptr) {
        throw std::domain_error("trap_audit: t is not a sampled time");
    }
    rep.R_at_t = row->R;

    double sum = 0.0;
    for (const auto& e : run.ledger) {
        if (e.tau > t && e.tau <= t + rep.T_bar) sum += std::fabs(e.dL);
    }
    rep.rhs = rep.C_R * sum;
    rep.clipped = t + rep.T_bar > run.t_final;
    rep.satisfied = rep.R_at_t <= rep.rhs + 1e-12;
    return rep;
}

std::vector<TrapAuditReport> trap_audit_all(const RunResult& run) {
    std::vector<TrapAuditReport> out;
    out.reserve(run.samples.size());
    for (const auto& s : run.samples) out.push_back(trap_audit(run, s.t));
    return out;
}

bool decay_window(const std::vector<double>& t, const std::vector<double>& L, double lo,
                  double hi, double& t_a, double& t_b) {
    bool found = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (L[i] <= hi && L[i] >= lo) {
            if (!found) t_a = t[i];
            t_b = t[i];
            found = true;
        }
    }
    return found;
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& L, double t_a,
                   double t_b) {
    if (t.size() != L.size()) {
        throw std::invalid_argument("fit_decay: mismatched series");
    }
    DecayFit fit;
    fit.t_a = t_a;
    fit.t_b = t_b;

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] >= t_a && t[i] <= t_b && L[i] > 1e-13) {
            xs.push_back(t[i]);
            ys.push_back(std::log(L[i]));
        }
    }
    fit.n_points = static_cast<int>(xs.size());
    if (xs.size() < 10) {
        fit.degenerate = true;  // fully decayed or window too narrow
        return fit;
    }

    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / xs.size(), my = sy / ys.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double icept = my - slope * mx;
    fit.C2 = -slope;
    fit.C1 = std::exp(icept);
    double ss_res = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (icept + slope * xs[i]);
        ss_res += e * e;
    }
    fit.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;

    // Half-life measured on the samples inside the window.
    std::vector<double> wt, wL;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] >= t_a && t[i] <= t_b) {
            wt.push_back(t[i]);
            wL.push_back(L[i]);
        }
    }
    fit.T_star = measure_half_life(wt, wL);
    return fit;
}

DecayFit fit_decay(const RunResult& run, double t_a, double t_b) {
    std::vector<double> t, L;
    t.reserve(run.samples.size());
    for (const auto& s : run.samples) {
        t.push_back(s.t);
        L.push_back(s.L);
    }
    return fit_decay(t, L, t_a, t_b);
}

double measure_half_life(const std::vector<double>& t, const std::vector<double>& L) {
    const std::size_t n = t.size();
    if (n < 2) return -1.0;
    for (std::size_t k = 1; k < n; ++k) {
        bool ok = true;
        for (std::size_t i = 0; i + k < n; ++i) {
            if (L[i + k] > 0.5 * L[i] + 1e-300) {
                ok = false;
                break;
            }
        }
        if (ok) return t[k] - t[0];
    }
    return -1.0;
}

}  // namespace flockfront
