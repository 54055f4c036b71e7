// Copyright 2026 The spinlev Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spinlev/witness.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spinlev/magnus_dynamics.h"
#include "spinlev/parallel.h"

namespace spinlev {

namespace {

constexpr cplx kI{0.0, 1.0};
const double kSqrt2 = std::sqrt(2.0);

void require_nbar(double nbar) {
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) {
        throw DomainError("nbar must be finite and nonnegative");
    }
}

struct Cov2 {
    double qq, qp, pp;
};

Cov2 covariance(const WitnessMoments &m) {
    return {m.qq - m.q * m.q, m.qp - m.q * m.p, m.pp - m.p * m.p};
}

double spin_term(double s, double sq, double sp, const WitnessMoments &m, const Cov2 &cov,
                 double a, double b) {
    double cq = sq - s * m.q;
    double cp = sp - s * m.p;
    return 0.25 * (1.0 - s * s) + a * cq + b * cp +
           a * a * cov.qq + 2.0 * a * b * cov.qp + b * b * cov.pp;
}

// v = -1/2 cov^{-1} c
std::pair<double, double> solve(const Cov2 &cov, double cq, double cp) {
    double det = cov.qq * cov.pp - cov.qp * cov.qp;
    double scale = std::max(1.0, (cov.qq + cov.pp) * (cov.qq + cov.pp));
    if (!(det > 1e-13 * scale)) {
        // null direction of the quadrature covariance
        double lo = 0.5 * (cov.qq + cov.pp) -
                    std::sqrt(0.25 * (cov.qq - cov.pp) * (cov.qq - cov.pp) + cov.qp * cov.qp);
        double vq = cov.qp, vp = lo - cov.qq;
        if (std::abs(vq) + std::abs(vp) == 0.0) {
            vq = cov.qq <= cov.pp ? 1.0 : 0.0;
            vp = 1.0 - vq;
        }
        double n = std::hypot(vq, vp);
        throw DegeneracyError("quadrature covariance is singular along (q, p) = (" +
                              std::to_string(vq / n) + ", " + std::to_string(vp / n) + ")");
    }
    double a = -0.5 * (cov.pp * cq - cov.qp * cp) / det;
    double b = -0.5 * (-cov.qp * cq + cov.qq * cp) / det;
    return {a, b};
}

double ratio_at(const WitnessResult &r) {
    return r.w_ratio;
}

std::optional<double> crossing(const std::vector<ScanRow> &rows, double level) {
    for (size_t i = 0; i + 1 < rows.size(); i++) {
        double a = rows[i].w_ratio - level, b = rows[i + 1].w_ratio - level;
        if (a == 0.0) {
            return rows[i].sweep_value;
        }
        if ((a > 0.0) != (b > 0.0)) {
            double f = a / (a - b);
            return rows[i].sweep_value + f * (rows[i + 1].sweep_value - rows[i].sweep_value);
        }
    }
    return std::nullopt;
}

}  // namespace

WitnessResult make_result(double w_b, double w_en) {
    WitnessResult r;
    r.w_b = w_b;
    r.w_en = w_en;
    r.w_ratio = (w_b - w_en) / w_b;
    if (r.w_ratio > 0.0) {
        // slack so that exact squares (ratio 1/6 -> 36) survive rounding of the ratio
        double n = std::ceil(1.0 / (r.w_ratio * r.w_ratio) * (1.0 - 1e-12));
        r.n_meas = n >= 1.8e19 ? std::numeric_limits<uint64_t>::max() : static_cast<uint64_t>(n);
    }
    return r;
}

double witness_value(const WitnessMoments &m, const WitnessCoefficients &c) {
    Cov2 cov = covariance(m);
    return 0.25 * (1.0 - m.sx * m.sx) + m.var_sx_shift +
           spin_term(m.sy, m.syq, m.syp, m, cov, c.a_y, c.b_y) +
           spin_term(m.sz, m.szq, m.szp, m, cov, c.a_z, c.b_z);
}

double separable_bound(const WitnessCoefficients &c) {
    return 0.5 + std::abs(c.a_y * c.b_z - c.a_z * c.b_y);
}

double thermal_wb(double lambda, double nbar, double omega, double omega_l, double t) {
    require_nbar(nbar);
    double c = lambda * lambda * (1.0 - std::cos(omega * t));
    double a = 2.0 * nbar + 1.0;
    return 0.5 + std::exp(-a * c) * std::cos(omega_l * t) * c / (a + 2.0 * c);
}

double thermal_wen(double lambda, double nbar, double omega, double t) {
    require_nbar(nbar);
    double c = lambda * lambda * (1.0 - std::cos(omega * t));
    double a = 1.0 + 2.0 * nbar;
    return 0.5 + a / (4.0 * (a + 2.0 * c)) - 0.25 * std::exp(-2.0 * a * c) * (1.0 + 2.0 * a * c);
}

WitnessCoefficients halfperiod_coefficients_stripped(double lambda, double nbar) {
    require_nbar(nbar);
    double a = 2.0 * nbar + 1.0;
    WitnessCoefficients c;
    c.b_y = lambda * std::exp(-2.0 * a * lambda * lambda);
    c.a_z = lambda / (a + 4.0 * lambda * lambda);
    return c;
}

WitnessCoefficients halfperiod_coefficients(double lambda, double nbar) {
    WitnessCoefficients c = halfperiod_coefficients_stripped(lambda, nbar);
    c.b_y *= kSqrt2;
    c.a_z *= kSqrt2;
    return c;
}

double halfperiod_wb(double lambda, double nbar) {
    require_nbar(nbar);
    double a = 1.0 + 2.0 * nbar, l2 = lambda * lambda;
    return 0.5 + 2.0 * std::exp(-2.0 * a * l2) * l2 / (a + 4.0 * l2);
}

double halfperiod_wen(double lambda, double nbar) {
    require_nbar(nbar);
    double a = 1.0 + 2.0 * nbar, l2 = lambda * lambda;
    return 0.5 + a / (4.0 * (a + 4.0 * l2)) - 0.25 * std::exp(-4.0 * a * l2) * (1.0 + 4.0 * a * l2);
}

double pulsed_effective_lambda(double g, double omega, double tau) {
    return 0.25 * omega * g * tau * tau;
}

BathDeltas bath_deltas(double lambda, double nbar_over_q, double omega, double t, double q_zpf,
                       double p_zpf) {
    if (!(nbar_over_q >= 0.0)) {
        throw DomainError("nbar_over_q must be nonnegative");
    }
    double x = omega * t, r = nbar_over_q;
    double s1 = std::sin(x), s2 = std::sin(2.0 * x), sh = std::sin(0.5 * x);
    BathDeltas d;
    d.var_sx = 0.5 * lambda * lambda * r * (6.0 * x - 8.0 * s1 + s2);
    d.qq = 2.0 * q_zpf * q_zpf * r * (2.0 * x - s2);
    d.pp = 2.0 * p_zpf * p_zpf * r * (2.0 * x + s2);
    d.qp_pq = 8.0 * q_zpf * p_zpf * r * s1 * s1;
    d.syq = 16.0 * lambda * r * q_zpf * sh * sh * sh * sh;
    d.syp = -8.0 * lambda * r * p_zpf * (0.5 * x - s1 + 0.25 * s2);
    return d;
}

WitnessMoments add_bath(WitnessMoments m, const BathDeltas &d) {
    m.var_sx_shift += d.var_sx;
    m.qq += d.qq;
    m.pp += d.pp;
    m.qp += 0.5 * d.qp_pq;
    m.syq += d.syq;
    m.syp += d.syp;
    return m;
}

WitnessMoments branch_moments(const PulseSequence &seq, double g, double omega, double nbar,
                              double omega_l) {
    seq.validate();
    require_nbar(nbar);
    AffineBranch up = propagate(drive_steps(seq, g, +1), omega);
    AffineBranch down = propagate(drive_steps(seq, g, -1), omega);
    // Larmor precession in the toggling frame: branch sigma gains -sigma w_L int s / 2.
    double larmor = 0.0;
    for (const Segment &s : seq.segments()) {
        larmor += omega_l * s.sign * (s.end - s.start);
    }
    cplx e = up.rotation;
    cplx d0 = up.offset, d1 = down.offset;
    // <beta0|beta1> carries exp(i Im(beta0^* beta1)); its alpha-dependent part folds into k.
    cplx k = down.phase_slope - up.phase_slope - kI * e * std::conj(d0 - d1);
    double phase = down.phase0 - up.phase0 + larmor + (std::conj(d0) * d1).imag();
    cplx z = 0.5 * std::exp(kI * phase) * std::exp(-0.5 * std::norm(d0 - d1) - 0.25 * std::norm(k) * nbar);

    // Gaussian integration by parts: E[alpha h] = (i nbar k^*/2) E[h], E[alpha^* h] = (i nbar k/2) E[h].
    cplx ea = kI * nbar * std::conj(k) / 2.0, eac = kI * nbar * k / 2.0;
    cplx zq = z * (e * ea + std::conj(e) * eac + d1 + std::conj(d0));
    cplx zp = z * (e * ea - std::conj(e) * eac + d1 - std::conj(d0));

    WitnessMoments m;
    m.sx = 2.0 * z.real();
    m.sy = 2.0 * z.imag();
    m.sz = 0.0;
    m.syq = 2.0 * (zq / kSqrt2).imag();
    m.syp = 2.0 * (zp / (kI * kSqrt2)).imag();
    m.szq = (d0.real() - d1.real()) / kSqrt2;
    m.szp = (d0.imag() - d1.imag()) / kSqrt2;
    m.q = (d0.real() + d1.real()) / kSqrt2;
    m.p = (d0.imag() + d1.imag()) / kSqrt2;
    m.qq = 0.5 + nbar + d0.real() * d0.real() + d1.real() * d1.real();
    m.pp = 0.5 + nbar + d0.imag() * d0.imag() + d1.imag() * d1.imag();
    m.qp = d0.real() * d0.imag() + d1.real() * d1.imag();
    if (seq.pulse_times.size() % 2 == 1) {
        // odd number of pi pulses: labels are swapped relative to the lab basis
        m.sy = -m.sy;
        m.sz = -m.sz;
        m.syq = -m.syq;
        m.syp = -m.syp;
        m.szq = -m.szq;
        m.szp = -m.szp;
    }
    return m;
}

WitnessCoefficients optimize_coefficients(const WitnessMoments &m) {
    Cov2 cov = covariance(m);
    WitnessCoefficients c;
    std::tie(c.a_y, c.b_y) = solve(cov, m.syq - m.sy * m.q, m.syp - m.sy * m.p);
    std::tie(c.a_z, c.b_z) = solve(cov, m.szq - m.sz * m.q, m.szp - m.sz * m.p);
    return c;
}

WitnessResult bath_witness(double lambda, double nbar, double nbar_over_q, double omega,
                           double omega_l, double t, InitialState initial) {
    require_nbar(nbar);
    if (!(t > 0.0) || !(omega > 0.0)) {
        throw DomainError("bath_witness needs t > 0 and omega > 0");
    }
    double start = initial == InitialState::Ground ? 0.0 : nbar;
    double g = 0.5 * lambda * omega;
    WitnessMoments clean = branch_moments(PulseSequence::ramsey(t), g, omega, start, omega_l);
    WitnessCoefficients c = optimize_coefficients(clean);
    WitnessMoments noisy = add_bath(clean, bath_deltas(lambda, nbar_over_q, omega, t));
    return make_result(separable_bound(c), witness_value(noisy, c));
}

std::string_view mode_name(WitnessMode m) {
    return m == WitnessMode::Pulsed ? "pulsed" : "pulseless";
}

std::string_view sweep_name(SweepVariable s) {
    return s == SweepVariable::Time ? "t" : "nbar";
}

ScanResult violation_scan(const ScanConfig &cfg) {
    if (cfg.grid.empty()) {
        throw DomainError("scan grid is empty");
    }
    if (!std::is_sorted(cfg.grid.begin(), cfg.grid.end())) {
        throw DomainError("scan grid must be sorted");
    }
    if (cfg.mode == WitnessMode::Pulsed && cfg.nbar_over_q > 0.0) {
        throw DomainError("the pulsed witness has no bath model; set nbar_over_q = 0");
    }
    ScanResult out;
    out.rows.resize(cfg.grid.size());
    parallel_for(cfg.grid.size(), cfg.threads, [&](size_t i) {
        double v = cfg.grid[i];
        double t = cfg.sweep == SweepVariable::Time ? v : cfg.tau;
        double nbar = cfg.sweep == SweepVariable::Nbar ? v : cfg.nbar;
        WitnessResult r;
        if (cfg.mode == WitnessMode::Pulsed) {
            double lam = pulsed_effective_lambda(cfg.g, cfg.omega, t);
            r = make_result(halfperiod_wb(lam, nbar), halfperiod_wen(lam, nbar));
        } else {
            double lam = 2.0 * cfg.g / cfg.omega;
            if (cfg.nbar_over_q > 0.0) {
                r = bath_witness(lam, nbar, cfg.nbar_over_q, cfg.omega, cfg.omega_l, t, cfg.initial);
            } else {
                double start = cfg.initial == InitialState::Ground ? 0.0 : nbar;
                r = make_result(thermal_wb(lam, start, cfg.omega, cfg.omega_l, t),
                                thermal_wen(lam, start, cfg.omega, t));
            }
        }
        double ratio = ratio_at(r);
        out.rows[i] = {v, r.w_b, r.w_en, ratio,
                       ratio > 0.0 ? std::log10(ratio) : std::numeric_limits<double>::quiet_NaN()};
    });

    if (cfg.sweep == SweepVariable::Time) {
        bool seen_positive = false;
        for (const ScanRow &row : out.rows) {
            if (row.w_ratio > 0.0) {
                seen_positive = true;
            } else if (seen_positive) {
                out.landmarks.tau_asymp = row.sweep_value;
                break;
            }
        }
        out.landmarks.tau_star = crossing(out.rows, kStarThreshold);
    } else {
        if (out.rows.front().w_ratio > 0.0) {
            out.landmarks.max_nbar = crossing(out.rows, 0.0);
        }
    }
    return out;
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
    if (!(lo > 0.0 && hi > lo && per_decade > 0)) {
        throw DomainError("log_grid needs 0 < lo < hi and per_decade > 0");
    }
    double decades = std::log10(hi / lo);
    auto n = static_cast<size_t>(std::ceil(decades * per_decade - 1e-9));
    std::vector<double> out(n + 1);
    for (size_t i = 0; i <= n; i++) {
        out[i] = lo * std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(n));
    }
    out.back() = hi;
    return out;
}

double max_nbar_at_threshold(double g_over_omega, const std::vector<double> &tau_omega_over_pi,
                             double threshold) {
    auto best = [&](double nbar) {
        double m = -std::numeric_limits<double>::infinity();
        for (double x : tau_omega_over_pi) {
            double lam = 0.25 * g_over_omega * (kPi * x) * (kPi * x);
            m = std::max(m, make_result(halfperiod_wb(lam, nbar), halfperiod_wen(lam, nbar)).w_ratio);
        }
        return m - threshold;
    };
    if (best(0.0) < 0.0) {
        return 0.0;
    }
    double lo = 0.0, hi = 1.0;
    while (best(hi) >= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) {
            throw DomainError("violation threshold is met at every nbar");
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; it++) {
        double mid = 0.5 * (lo + hi);
        (best(mid) >= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace spinlev
