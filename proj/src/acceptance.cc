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

#include "spinlev/acceptance.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include <json.hpp>

#include "spinlev/core_model.h"
#include "spinlev/fock_oracle.h"
#include "spinlev/pulse_kernel.h"
#include "spinlev/sensing.h"
#include "spinlev/witness.h"

namespace spinlev {

namespace {

const SequenceKind kNamed[] = {SequenceKind::Ramsey, SequenceKind::HahnEcho,
                               SequenceKind::CarrPurcell2};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(double a, double b) {
    if (a == b) {
        return 0.0;
    }
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

std::string fmt(const char *f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, x);
    return buf;
}

std::string name_of(SequenceKind k) {
    return std::string(kind_name(k));
}

class Suite {
   public:
    explicit Suite(const AcceptanceOptions &o) : o_(o) {}

    // observed <= tolerance
    void at_most(int c, std::string name, double observed, double tol, double expected = 0.0) {
        double t = tol * o_.tolerance_scale;
        add(c, std::move(name), expected, observed, t, observed <= t);
    }
    // |observed - expected| <= tolerance
    void near(int c, std::string name, double expected, double observed, double tol) {
        double t = tol * o_.tolerance_scale;
        add(c, std::move(name), expected, observed, t, std::abs(observed - expected) <= t);
    }
    // observed within a factor of expected (tolerance is the factor)
    void within_factor(int c, std::string name, double expected, double observed, double factor) {
        double f = 1.0 + (factor - 1.0) * o_.tolerance_scale;
        bool ok = observed > 0.0 && observed <= expected * f && observed >= expected / f;
        add(c, std::move(name), expected, observed, f, ok);
    }
    void add(int c, std::string name, double expected, double observed, double tol, bool pass) {
        checks_.push_back({c, std::move(name), expected, observed, tol, pass});
    }

    const AcceptanceOptions &options() const {
        return o_;
    }
    std::vector<Check> take() {
        return std::move(checks_);
    }

   private:
    AcceptanceOptions o_;
    std::vector<Check> checks_;
};

NaturalParams natural(double g, double omega) {
    NaturalParams n;
    n.g = g;
    n.omega = omega;
    n.lambda = 2.0 * g / omega;
    return n;
}

void oracle_equivalence(Suite &s) {
    auto t0 = Clock::now();
    OracleConfig cfg;
    const cplx h = 1.0 / std::sqrt(2.0);
    double worst = 1.0;
    for (SequenceKind k : kNamed) {
        for (double go : {0.1, 1.0, 2.0}) {
            for (double wt : {0.1, kPi, 2.0 * kPi}) {
                auto seq = PulseSequence::make(k, wt);
                size_t n = default_cutoff(amplitude_bound(seq, go, 1.0, 0.0));
                JointState st = evolve(JointState::product(h, h, 0.0, n), natural(go, 1.0), seq,
                                       nullptr, cfg);
                worst = std::min(worst, branch_fidelity(branch_state(seq, 0.0, go, 1.0), st));
            }
        }
    }
    double t = 1e-8 * s.options().tolerance_scale;
    s.add(1, "oracle_equivalence/min_fidelity", 1.0, worst, t,
          worst > 1.0 - t && seconds_since(t0) < 300.0);
}

void squeezing_table(Suite &s) {
    for (SequenceKind k : kNamed) {
        double worst = 0.0;
        for (int i = 1; i <= 100; i++) {
            double x = 2.0 * kPi * i / 100.0;
            auto seq = PulseSequence::make(k, x);
            worst = std::max(worst, rel(squeezing_parameter(seq, 1.0, 1.0),
                                        squeezing_closed_form(k, 1.0, 1.0, x)));
        }
        s.at_most(2, "squeezing_closed_form/" + name_of(k), worst, 1e-10);
    }
}

void backaction_zeros(Suite &s) {
    double worst = 0.0;
    for (double x : {2.0 * kPi, 4.0 * kPi, 6.0 * kPi}) {
        // integrated displacement, not the tabulated closed form
        worst = std::max(worst, std::norm(residual_displacement(PulseSequence::ramsey(x), 1.0, 1.0).beta));
    }
    s.at_most(3, "backaction/ramsey_zeros", worst, 1e-12);
    double cp = 0.0;
    for (int i = 1; i <= 100; i++) {
        double x = 2.0 * kPi * i / 100.0;
        double b = std::norm(residual_displacement(PulseSequence::carr_purcell2(x), 1.0, 1.0).beta);
        double f = std::pow(2.0, 6) * std::pow(std::sin(x / 8.0), 4) * std::pow(std::sin(x / 4.0), 2);
        cp = std::max(cp, rel(b, f));
    }
    s.at_most(3, "backaction/carr_purcell2_formula", cp, 1e-10);
}

void witness_identities(Suite &s) {
    double worst = 0.0;
    bool exact = true;
    for (int i = 0; i <= 40; i++) {
        double lam = 2.0 * i / 40.0;
        for (int j = 0; j <= 40; j++) {
            double nbar = 10.0 * j / 40.0;
            worst = std::max(worst, std::abs(separable_bound(halfperiod_coefficients(lam, nbar)) -
                                             thermal_wb(lam, nbar, 1.0, 0.0, kPi)));
            if (i == 0) {
                for (double t : {0.3, kPi, 5.0}) {
                    exact = exact && thermal_wb(0.0, nbar, 1.0, 0.4, t) == 0.5 &&
                            thermal_wen(0.0, nbar, 1.0, t) == 0.5;
                }
            }
        }
    }
    s.at_most(4, "witness/separable_bound_identity", worst, 1e-12);
    s.add(4, "witness/lambda_zero_exact", 0.5, exact ? 0.5 : NAN, 0.0, exact);
}

void witness_oracle(Suite &s) {
    const AcceptanceOptions &o = s.options();
    OracleConfig cfg;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.n_trajectories = 10000;
    double lam = 0.5;
    for (double t : {kPi / 2.0, kPi}) {
        auto m = witness_moments(natural(0.5 * lam, 1.0), PulseSequence::ramsey(t), 0.0, cfg);
        s.near(5, "witness_oracle/ground/wt=" + fmt("%.4f", t), thermal_wen(lam, 0.0, 1.0, t),
               optimal_wen(m.mean), 1e-8);
    }
    for (double nbar : {0.5, 1.0, 2.0}) {
        auto m = witness_moments(natural(0.5 * lam, 1.0), PulseSequence::ramsey(kPi), nbar, cfg);
        Estimate e = jackknife(m, [](const WitnessMoments &x) { return optimal_wen(x); });
        s.near(5, "witness_oracle/thermal/nbar=" + fmt("%g", nbar), thermal_wen(lam, nbar, 1.0, kPi),
               e.value, 3.0 * e.error);
    }
}

void bath_monte_carlo(Suite &s) {
    const AcceptanceOptions &o = s.options();
    auto t0 = Clock::now();
    double lam = 0.5;
    OracleConfig cfg;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.n_trajectories = 1000;
    std::vector<std::pair<std::string, std::pair<Estimate, double>>> rows;
    for (double r : {1e-3, 1.0}) {
        for (double x : {kPi / 2.0, kPi, 2.0 * kPi}) {
            NaturalParams n = natural(0.5 * lam, 1.0);
            n.gamma = 1.0;
            n.nbar = r;
            ThermalStatistics st = thermal_trajectories(n, PulseSequence::ramsey(x), cfg);
            BathDeltas d = bath_deltas(lam, r, 1.0, x);
            std::string tag = "bath/r=" + fmt("%g", r) + "/wt=" + fmt("%.4f", x) + "/";
            std::pair<const char *, std::pair<Estimate, double>> stats[] = {
                {"var_sx", {st.var_phase_quarter, d.var_sx}}, {"qq", {st.qq, d.qq}},
                {"pp", {st.pp, d.pp}},
                {"qp_pq", {st.qp_pq, d.qp_pq}},
                {"syq", {st.cov_phase_q, d.syq}},
                {"syp", {st.cov_phase_p, d.syp}}};
            for (auto &[name, v] : stats) {
                rows.push_back({tag + name, v});
            }
        }
    }
    bool fast = seconds_since(t0) < 600.0;
    for (auto &[name, v] : rows) {
        double t = 3.0 * v.first.error * o.tolerance_scale;
        s.add(6, name, v.second, v.first.value, t, fast && std::abs(v.first.value - v.second) <= t);
    }
}

void pulsed_cutoff(Suite &s) {
    const AcceptanceOptions &o = s.options();
    double w = 2.0 * kPi * 100.0;
    for (double go : {0.5, 1.0, 2.0}) {
        ScanConfig cfg;
        cfg.mode = WitnessMode::Pulsed;
        cfg.sweep = SweepVariable::Nbar;
        cfg.omega = w;
        cfg.g = go * w;
        cfg.tau = 0.1 * kPi / w;
        cfg.grid = log_grid(1e-3, 1e3, 100);
        cfg.threads = o.threads;
        ScanResult r = violation_scan(cfg);
        double m = r.landmarks.max_nbar ? *r.landmarks.max_nbar : NAN;
        // order one: between 0.1 and 10
        s.within_factor(7, "pulsed_cutoff/max_nbar/g_over_w=" + fmt("%g", go), 1.0, m, 10.0);
    }
    auto grid = log_grid(1e-3, 1.0, 400);
    double lo = 1e300, hi = 0.0;
    for (double go : {0.5, 1.0, 2.0}) {
        double m = max_nbar_at_threshold(go, grid);
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    s.at_most(7, "pulsed_cutoff/max_nbar_at_threshold_spread", hi / lo - 1.0, 0.05);
}

PhysicalParams sensing_device() {
    PhysicalParams p;
    p.mass = 4.0 / 3.0 * kPi * 1e-18 * 3500.0;
    p.trap_frequency = 2.0 * kPi * 100.0;
    p.gradient = 1e4;
    p.quality_factor = 1e6;
    p.nbar = 0.0;
    p.cooling_rate = 1e3;
    p.cooling_time = 1e-4;
    return p;
}

void sensitivity_curve(Suite &s) {
    PhysicalParams p = sensing_device();
    SensitivityOptions opt;
    opt.nbar_over_q = 1.0;
    std::vector<double> hz = log_grid(1.0, 1e6, 20);
    std::vector<double> nu;
    for (double f : hz) {
        nu.push_back(2.0 * kPi * f);
    }
    auto eta = [&](SequenceKind k) {
        auto pts = force_sensitivity_sweep(p, PulseSequence::make(k, 1e-4), nu, opt, s.options().threads);
        std::vector<double> e;
        for (const auto &pt : pts) {
            e.push_back(pt.eta);
        }
        return e;
    };
    auto at = [&](const std::vector<double> &e, double f) {
        size_t i = std::min_element(hz.begin(), hz.end(), [&](double a, double b) {
                       return std::abs(std::log(a / f)) < std::abs(std::log(b / f));
                   }) - hz.begin();
        return e[i];
    };
    std::vector<double> cp = eta(SequenceKind::CarrPurcell2);
    double best = INFINITY;
    for (size_t i = 0; i < hz.size(); i++) {
        if (hz[i] >= 3e3 * (1 - 1e-12) && hz[i] <= 3e4 * (1 + 1e-12)) {
            best = std::min(best, cp[i]);
        }
    }
    // one order of magnitude around 1e-23
    s.at_most(8, "sensing_curve/carr_purcell2_min_eta_3k_30k", best, 1e-22, 1e-23);
    for (SequenceKind k : {SequenceKind::Ramsey, SequenceKind::HahnEcho}) {
        std::vector<double> e = eta(k);
        s.at_most(8, "sensing_curve/flat_low_frequency/" + name_of(k), std::abs(at(e, 10.0) / at(e, 100.0) - 1.0),
                  0.05);
    }
    // suppressed: the low-frequency end sits well above the band minimum
    s.add(8, "sensing_curve/carr_purcell2_low_frequency_suppressed", 10.0, at(cp, 10.0) / best, 0.0,
          at(cp, 10.0) / best >= 10.0);
}

void reference_anchors(Suite &s) {
    s.within_factor(9, "anchors/projection_eta", 5e-11,
                    projection_limit_eta(1e-12, 2.0 * kPi * 1e6, 1e4, 1e-6), 3.0);
    s.within_factor(9, "anchors/sql_gradient", 7.5e3, sql_gradient(1.8e-15, 300e-6, 300e-6, 1).gradient,
                    3.0);
    PhysicalParams p;
    p.mass = 3e-15;
    p.trap_frequency = 2.0 * kPi * 100.0;
    p.gradient = 1e4;
    p.nbar = 0.0;
    NaturalParams n = to_natural(p);
    s.within_factor(9, "anchors/g_over_omega", 2.0, n.g / n.omega, 3.0);
}

void sql_structure(Suite &s) {
    PhysicalParams p = sensing_device();
    double w = p.trap_frequency;
    double xi = cooling_factor(p.cooling_rate, p.cooling_time);
    for (SequenceKind k : kNamed) {
        auto seq = PulseSequence::make(k, 1e-4);
        SensitivityPoint pt = force_sensitivity(p, seq, 2.0 * kPi * 1e3);
        s.at_most(10, "sql/noise_balance/" + name_of(k), rel(pt.budget.projection_var, pt.budget.backaction_var),
                  1e-9);
        auto wide = PulseSequence::make(k, 0.3 / w);
        double ref = force_sql(wide, w, xi, 0.1 * w);
        double worst = 0.0;
        for (int i = 0; i <= 20; i++) {
            double g = 0.1 * w * std::pow(100.0, i / 20.0);
            worst = std::max(worst, rel(force_sql(wide, w, xi, g), ref));
        }
        s.at_most(10, "sql/coupling_invariance/" + name_of(k), worst, 1e-9);
    }
}

void squeezed_readout(Suite &s) {
    double worst = 0.0, largest = 0.0;
    for (uint64_t n : {uint64_t{100}, uint64_t{10000}}) {
        for (int i = 0; i <= 29; i++) {
            double nz = 0.1 + 2.9 * i / 29.0;
            double zeta = nz / static_cast<double>(n);
            double f = squeezed_rotation(n, zeta).shot_noise_factor;
            double oracle = one_axis_twist(n, zeta).phase_noise_factor;
            worst = std::max(worst, std::abs(f - oracle) / oracle);
            largest = std::max(largest, f);
            largest = std::max(largest, squeezed_rotation(n, -zeta).shot_noise_factor);
        }
    }
    s.at_most(11, "squeezed_readout/oracle_deviation", worst, 0.05);
    bool unit = squeezed_rotation(100, 0.0).shot_noise_factor == 1.0;
    s.add(11, "squeezed_readout/factor_at_most_one", 1.0, largest, 0.0, largest < 1.0 && unit);
}

std::vector<Check> core_suite(const AcceptanceOptions &o) {
    Suite s(o);
    oracle_equivalence(s);
    squeezing_table(s);
    backaction_zeros(s);
    witness_identities(s);
    witness_oracle(s);
    bath_monte_carlo(s);
    pulsed_cutoff(s);
    sensitivity_curve(s);
    reference_anchors(s);
    sql_structure(s);
    squeezed_readout(s);
    return s.take();
}

nlohmann::json number(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace

std::string_view criterion_title(int criterion) {
    switch (criterion) {
        case 1: return "oracle / closed-form branch equivalence";
        case 2: return "squeezing closed forms";
        case 3: return "backaction zeros";
        case 4: return "witness identities";
        case 5: return "witness vs Fock oracle";
        case 6: return "bath deltas vs Monte Carlo";
        case 7: return "pulsed witness thermal cutoff";
        case 8: return "force sensitivity curve";
        case 9: return "order-of-magnitude anchors";
        case 10: return "SQL structure";
        case 11: return "squeezed readout";
        case 12: return "thread-count determinism";
    }
    return "unknown";
}

std::vector<Check> run_acceptance(const AcceptanceOptions &options) {
    std::vector<Check> checks = core_suite(options);
    if (options.determinism) {
        std::string mine = report_json(checks);
        bool same = true;
        for (int t : {1, 4, 8}) {
            AcceptanceOptions o = options;
            o.threads = t;
            o.determinism = false;
            if (t != options.threads) {
                same = same && report_json(core_suite(o)) == mine;
            }
        }
        checks.push_back({12, "determinism/reports_identical_1_4_8_threads", 1.0, same ? 1.0 : 0.0, 0.0, same});
    }
    return checks;
}

bool criterion_passed(const std::vector<Check> &checks, int criterion) {
    bool any = false;
    for (const Check &c : checks) {
        if (c.criterion == criterion) {
            any = true;
            if (!c.pass) {
                return false;
            }
        }
    }
    return any;
}

std::string report_json(const std::vector<Check> &checks) {
    nlohmann::json list = nlohmann::json::array();
    size_t passed = 0;
    for (const Check &c : checks) {
        list.push_back({{"check_name", c.name},
                        {"criterion", c.criterion},
                        {"expected", number(c.expected)},
                        {"observed", number(c.observed)},
                        {"tolerance", number(c.tolerance)},
                        {"pass", c.pass}});
        passed += c.pass ? 1 : 0;
    }
    nlohmann::json doc = {{"checks", list}, {"passed", passed}, {"failed", checks.size() - passed}};
    return doc.dump(2) + "\n";
}

}  // namespace spinlev
