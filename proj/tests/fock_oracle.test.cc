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

#include "spinlev/fock_oracle.h"

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

using namespace spinlev;

namespace {

const double kHalf = 1.0 / std::sqrt(2.0);
const SequenceKind kNamed[] = {SequenceKind::Ramsey, SequenceKind::HahnEcho,
                               SequenceKind::CarrPurcell2};

NaturalParams natural(double g, double omega, double larmor = 0.0) {
    NaturalParams n;
    n.g = g;
    n.omega = omega;
    n.lambda = 2.0 * g / omega;
    n.larmor = larmor;
    return n;
}

JointState plus_vacuum(const PulseSequence &seq, double g, double omega, cplx alpha = 0.0) {
    size_t n = default_cutoff(amplitude_bound(seq, g, omega, alpha));
    return JointState::product(kHalf, kHalf, alpha, n);
}

ForceSeries smooth_force(double tau, size_t cells) {
    ForceSeries f{tau / static_cast<double>(cells), std::vector<double>(cells)};
    for (size_t k = 0; k < cells; k++) {
        double t = (static_cast<double>(k) + 0.5) * f.dt;
        f.values[k] = 0.4 * std::cos(1.7 * t) + 0.2;
    }
    return f;
}

// refine every cell into `by` equal cells (same function)
ForceSeries refine(const ForceSeries &f, size_t by) {
    ForceSeries r{f.dt / static_cast<double>(by), {}};
    for (double v : f.values) {
        for (size_t i = 0; i < by; i++) {
            r.values.push_back(v);
        }
    }
    return r;
}

// Dicke-basis one-axis twisting of N spins polarized along +x.
struct DickeMoments {
    double jx, var_plus, var_minus;
};

DickeMoments dicke_twist(int n, double zeta) {
    double j = 0.5 * n;
    int dim = n + 1;
    Eigen::VectorXcd psi(dim);
    double lognorm = -0.5 * n * std::log(2.0);
    for (int k = 0; k < dim; k++) {
        double m = k - j;
        double logc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
        psi[k] = std::exp(0.5 * logc + lognorm) * std::polar(1.0, -zeta * m * m);
    }
    Eigen::MatrixXcd jp = Eigen::MatrixXcd::Zero(dim, dim), jz = Eigen::MatrixXcd::Zero(dim, dim);
    for (int k = 0; k < dim; k++) {
        double m = k - j;
        jz(k, k) = m;
        if (k + 1 < dim) {
            jp(k + 1, k) = std::sqrt(j * (j + 1) - m * (m + 1));
        }
    }
    Eigen::MatrixXcd jx = 0.5 * (jp + jp.adjoint());
    Eigen::MatrixXcd jy = (jp - jp.adjoint()) / cplx(0.0, 2.0);
    auto ev = [&](const Eigen::MatrixXcd &op) { return psi.dot(op * psi).real(); };
    double my = ev(jy), mz = ev(jz);
    double vyy = ev(jy * jy) - my * my;
    double vzz = ev(jz * jz) - mz * mz;
    double vyz = 0.5 * ev(jy * jz + jz * jy) - my * mz;
    double tr = 0.5 * (vyy + vzz), det = vyy * vzz - vyz * vyz;
    double disc = std::sqrt(std::max(0.0, tr * tr - det));
    return {ev(jx), tr + disc, tr - disc};
}

}  // namespace

TEST(fock_oracle, config_validation) {
    OracleConfig c;
    EXPECT_NO_THROW(c.validate());
    c.n_max = 3;
    EXPECT_THROW(c.validate(), DomainError);
    c = {};
    c.tail_tolerance = 1e-5;
    EXPECT_THROW(c.validate(), DomainError);
    c.tail_tolerance = 0.0;
    EXPECT_THROW(c.validate(), DomainError);
    EXPECT_EQ(default_cutoff(0.0), 30u);
    EXPECT_EQ(default_cutoff(3.0), static_cast<size_t>(std::ceil(9 + 10 * std::sqrt(10.0) + 20)));
}

TEST(fock_oracle, coherent_vector_and_product) {
    auto v = coherent_vector({1.2, -0.4}, 60);
    EXPECT_NEAR(v.squaredNorm(), 1.0, 1e-14);
    auto st = JointState::product(1.0, 0.0, {1.2, -0.4}, 60);
    EXPECT_NEAR(st.norm(), 1.0, 1e-15);
    WitnessMoments m = state_moments(st);
    EXPECT_NEAR(m.q, std::sqrt(2.0) * 1.2, 1e-13);
    EXPECT_NEAR(m.p, -std::sqrt(2.0) * 0.4, 1e-13);
    EXPECT_NEAR(m.qq, 0.5 + 2 * 1.44, 1e-12);
    EXPECT_NEAR(m.pp, 0.5 + 2 * 0.16, 1e-12);
    EXPECT_NEAR(m.qp, 2 * 1.2 * -0.4, 1e-12);
    EXPECT_NEAR(m.sz, 1.0, 1e-15);
    EXPECT_THROW(JointState::product(0.0, 0.0, 0.0, 10), DomainError);
}

TEST(fock_oracle, free_oscillator) {
    double w = 1.3, tau = 2.1;
    cplx alpha{0.8, 0.5};
    auto seq = PulseSequence::ramsey(tau);
    auto st = JointState::product(1.0, 0.0, alpha, 50);
    auto out = evolve(st, natural(0.0, w), seq, nullptr, {});
    EntangledState expect;
    expect.branch0 = {1.0, alpha * std::polar(1.0, -w * tau)};
    expect.branch1 = {0.0, 0.0};
    EXPECT_GT(branch_fidelity(expect, out), 1.0 - 1e-10);
}

TEST(fock_oracle, ramsey_branches) {
    auto seq = PulseSequence::ramsey(0.1);
    cplx alpha{1.0, 0.0};
    auto out = evolve(plus_vacuum(seq, 1.0, 1.0, alpha), natural(1.0, 1.0), seq, nullptr, {});
    EXPECT_GT(branch_fidelity(pulseless_state(alpha, 1.0, 1.0, 0.1), out), 1.0 - 1e-8);
    auto pulsed = PulseSequence::carr_purcell2(0.1);
    out = evolve(plus_vacuum(pulsed, 1.0, 1.0, alpha), natural(1.0, 1.0), pulsed, nullptr, {});
    EXPECT_GT(branch_fidelity(branch_state(pulsed, alpha, 1.0, 1.0), out), 1.0 - 1e-8);
}

TEST(fock_oracle, closed_form_branches_grid) {
    for (SequenceKind k : kNamed) {
        for (double go : {0.1, 1.0, 2.0}) {
            for (double wt : {0.1, kPi, 2 * kPi}) {
                auto seq = PulseSequence::make(k, wt);
                auto out = evolve(plus_vacuum(seq, go, 1.0), natural(go, 1.0), seq, nullptr, {});
                EXPECT_GT(branch_fidelity(branch_state(seq, 0.0, go, 1.0), out), 1.0 - 1e-8)
                    << kind_name(k) << " g/w=" << go << " wt=" << wt;
            }
        }
    }
}

TEST(fock_oracle, branch_fidelity_basics) {
    EntangledState s;
    s.branch0 = {kHalf, {0.3, 0.1}};
    s.branch1 = {kHalf, {-0.3, 0.2}};
    JointState j;
    j.spin[0] = kHalf * coherent_vector(s.branch0.alpha, 40);
    j.spin[1] = kHalf * coherent_vector(s.branch1.alpha, 40);
    EXPECT_NEAR(branch_fidelity(s, j), 1.0, 1e-14);
    // same mechanical parts in swapped spin sectors: overlap only through them
    EntangledState f = s;
    f.spin_flipped = true;
    cplx o = coherent_overlap(s.branch0.alpha, s.branch1.alpha);
    EXPECT_NEAR(branch_fidelity(f, j), o.real() * o.real(), 1e-14);
    EntangledState orth;
    orth.branch0 = {1.0, 0.3};
    orth.branch1 = {0.0, 0.0};
    JointState down = JointState::product(0.0, 1.0, 0.3, 40);
    EXPECT_NEAR(branch_fidelity(orth, down), 0.0, 1e-30);
}

TEST(fock_oracle, forced_evolution_matches_closed_form) {
    double w = 1.0, g = 0.5, tau = kPi;
    for (SequenceKind k : kNamed) {
        auto seq = PulseSequence::make(k, tau);
        ForceSeries coarse = smooth_force(tau, 512);
        auto st = plus_vacuum(seq, g, w, 0.0);
        st = JointState::product(kHalf, kHalf, 0.0, st.n_max() + 20);
        auto out = evolve(st, natural(g, w), seq, &coarse, {});
        EXPECT_NEAR(out.norm(), 1.0, 1e-10);
        EXPECT_GT(branch_fidelity(branch_state(seq, 0.0, g, w, &coarse), out), 1.0 - 1e-8)
            << kind_name(k);
    }
}

TEST(fock_oracle, step_refinement_converges_at_second_order) {
    double w = 1.0, g = 0.5, tau = kPi;
    auto seq = PulseSequence::hahn_echo(tau);
    ForceSeries base = smooth_force(tau, 128);
    auto closed = branch_state(seq, 0.0, g, w, &base);
    auto st = JointState::product(kHalf, kHalf, 0.0, 60);
    double prev = 0.0;
    for (size_t by : {1, 2, 4}) {
        ForceSeries f = refine(base, by);
        double err = std::sqrt(1.0 - branch_fidelity(closed, evolve(st, natural(g, w), seq, &f, {})));
        if (by > 1) {
            EXPECT_GT(prev / err, 3.0);
            EXPECT_LT(prev / err, 5.0);
        }
        prev = err;
    }
    // halving dt at the reference settings moves the fidelity by < 1e-9
    ForceSeries f1 = refine(base, 4), f2 = refine(base, 8);
    double a = branch_fidelity(closed, evolve(st, natural(g, w), seq, &f1, {}));
    double b = branch_fidelity(closed, evolve(st, natural(g, w), seq, &f2, {}));
    EXPECT_LT(std::abs(a - b), 1e-9);
}

TEST(fock_oracle, truncation_monotonicity) {
    auto seq = PulseSequence::carr_purcell2(kPi);
    double g = 2.0;
    auto closed = branch_state(seq, 0.0, g, 1.0);
    OracleConfig cfg;
    cfg.tail_tolerance = 1e-6;
    double prev = 1.0;
    for (size_t n : {28, 34, 40}) {
        auto out = evolve(JointState::product(kHalf, kHalf, 0.0, n), natural(g, 1.0), seq, nullptr, cfg);
        double err = 1.0 - branch_fidelity(closed, out);
        EXPECT_LT(err, prev) << n;
        prev = err;
    }
}

TEST(fock_oracle, cutoff_and_resolution_errors) {
    auto seq = PulseSequence::carr_purcell2(kPi);
    EXPECT_THROW(evolve(JointState::product(kHalf, kHalf, 0.0, 8), natural(2.0, 1.0), seq, nullptr, {}),
                 CutoffError);
    ForceSeries coarse{kPi / 8, std::vector<double>(8, 0.1)};
    EXPECT_THROW(evolve(JointState::product(kHalf, kHalf, 0.0, 40), natural(0.5, 1.0), seq, &coarse, {}),
                 ResolutionError);
    ForceSeries short_force{kPi / 1024, std::vector<double>(100, 0.1)};
    EXPECT_THROW(evolve(JointState::product(kHalf, kHalf, 0.0, 40), natural(0.5, 1.0), seq, &short_force, {}),
                 DomainError);
}

TEST(fock_oracle, product_state_has_no_correlations) {
    auto seq = PulseSequence::ramsey(1.7);
    auto m = witness_moments(natural(0.0, 1.0), seq, 0.0, {}).mean;
    EXPECT_NEAR(m.syq, 0.0, 1e-14);
    EXPECT_NEAR(m.syp, 0.0, 1e-14);
    EXPECT_NEAR(m.szq, 0.0, 1e-14);
    EXPECT_NEAR(m.szp, 0.0, 1e-14);
    EXPECT_NEAR(m.sx, 1.0, 1e-14);
}

TEST(fock_oracle, pure_moments_match_engine) {
    for (SequenceKind k : kNamed) {
        for (double wl : {0.0, 0.37}) {
            auto seq = PulseSequence::make(k, 2.3);
            auto o = witness_moments(natural(0.6, 1.0, wl), seq, 0.0, {});
            auto e = branch_moments(seq, 0.6, 1.0, 0.0, wl);
            auto a = std::array{o.mean.sx, o.mean.sy, o.mean.syq, o.mean.syp, o.mean.szq,
                                o.mean.szp, o.mean.q, o.mean.p, o.mean.qq, o.mean.pp, o.mean.qp};
            auto b = std::array{e.sx, e.sy, e.syq, e.syp, e.szq, e.szp, e.q, e.p, e.qq, e.pp, e.qp};
            for (size_t i = 0; i < a.size(); i++) {
                EXPECT_NEAR(a[i], b[i], 1e-9) << kind_name(k) << " field " << i << " wl " << wl;
            }
        }
    }
}

TEST(fock_oracle, ground_state_witness_halfperiod) {
    double lam = 0.5;
    auto m = witness_moments(natural(0.5 * lam, 1.0), PulseSequence::ramsey(kPi), 0.0, {});
    EXPECT_NEAR(optimal_wen(m.mean), halfperiod_wen(lam, 0.0), 1e-8);
    EXPECT_EQ(m.stderr_.sx, 0.0);
}

TEST(fock_oracle, thermal_witness_sampling) {
    OracleConfig cfg;
    cfg.n_trajectories = 10000;
    double lam = 0.5;
    for (double nbar : {0.5, 1.0, 2.0}) {
        auto m = witness_moments(natural(0.5 * lam, 1.0), PulseSequence::ramsey(kPi), nbar, cfg);
        auto e = jackknife(m, [](const WitnessMoments &x) { return optimal_wen(x); });
        EXPECT_GT(e.error, 0.0);
        EXPECT_LT(std::abs(e.value - thermal_wen(lam, nbar, 1.0, kPi)), 3.0 * e.error) << nbar;
        EXPECT_LT(std::abs(m.mean.qq - (0.5 + nbar + 2 * 0.0625 * 4)), 4.0 * m.stderr_.qq + 1e-2);
    }
}

TEST(fock_oracle, sampling_is_thread_independent) {
    OracleConfig a;
    a.n_trajectories = 400;
    a.seed = 77;
    OracleConfig b = a;
    b.threads = 3;
    auto seq = PulseSequence::hahn_echo(2.0);
    auto x = witness_moments(natural(0.4, 1.0), seq, 1.0, a);
    auto y = witness_moments(natural(0.4, 1.0), seq, 1.0, b);
    EXPECT_EQ(x.mean.sx, y.mean.sx);
    EXPECT_EQ(x.mean.syq, y.mean.syq);
    EXPECT_EQ(x.stderr_.qq, y.stderr_.qq);
}

TEST(fock_oracle, bath_without_noise) {
    NaturalParams n = natural(0.25, 1.0);
    n.gamma = 1e-6;
    n.nbar = 0.0;
    OracleConfig cfg;
    cfg.n_trajectories = 100;
    auto s = thermal_trajectories(n, PulseSequence::ramsey(kPi), cfg);
    EXPECT_EQ(s.qq.value, 0.0);
    EXPECT_EQ(s.var_phase_quarter.value, 0.0);
    EXPECT_EQ(s.full_syq.value, 0.0);
    cfg.n_trajectories = 50;
    EXPECT_THROW(thermal_trajectories(n, PulseSequence::ramsey(kPi), cfg), DomainError);
}

TEST(fock_oracle, bath_step_limits) {
    NaturalParams n = natural(0.25, 1.0);
    n.gamma = 1.0;
    n.nbar = 1.0;
    OracleConfig cfg;
    cfg.n_trajectories = 100;
    cfg.dt = kPi / 32;
    EXPECT_THROW(thermal_trajectories(n, PulseSequence::ramsey(kPi), cfg), ResolutionError);
    n.nbar = 10.0;
    cfg.dt = 0.02;
    EXPECT_THROW(thermal_trajectories(n, PulseSequence::ramsey(kPi), cfg), ResolutionError);
}

TEST(fock_oracle, bath_statistics_match_closed_forms) {
    double lam = 0.5, r = 1.0, x = kPi;
    NaturalParams n = natural(0.5 * lam, 1.0);
    n.gamma = 1.0;
    n.nbar = r;
    OracleConfig cfg;
    cfg.n_trajectories = 1000;
    cfg.seed = 5;
    auto s = thermal_trajectories(n, PulseSequence::ramsey(x), cfg);
    BathDeltas d = bath_deltas(lam, r, 1.0, x);
    auto within = [](Estimate e, double want) { return std::abs(e.value - want) < 3.0 * e.error; };
    EXPECT_TRUE(within(s.var_phase_quarter, d.var_sx)) << s.var_phase_quarter.value;
    EXPECT_TRUE(within(s.qq, d.qq)) << s.qq.value;
    EXPECT_TRUE(within(s.pp, d.pp)) << s.pp.value;
    EXPECT_TRUE(within(s.qp_pq, d.qp_pq)) << s.qp_pq.value;
    EXPECT_TRUE(within(s.cov_phase_q, d.syq)) << s.cov_phase_q.value;
    EXPECT_TRUE(within(s.cov_phase_p, d.syp)) << s.cov_phase_p.value;
    // the sampled force itself integrates to 2 gamma nbar t
    EXPECT_TRUE(within(s.impulse_var, 2.0 * r * x)) << s.impulse_var.value;
    // the full-state spin variance saturates at 1/4 and falls short of the linear value
    EXPECT_LT(s.full_var_sx.value, d.var_sx);
    EXPECT_LE(s.full_var_sx.value, 0.25);
}

TEST(fock_oracle, bath_is_thread_independent) {
    NaturalParams n = natural(0.25, 1.0);
    n.gamma = 1.0;
    n.nbar = 0.1;
    OracleConfig a;
    a.n_trajectories = 120;
    OracleConfig b = a;
    b.threads = 4;
    auto x = thermal_trajectories(n, PulseSequence::hahn_echo(kPi), a);
    auto y = thermal_trajectories(n, PulseSequence::hahn_echo(kPi), b);
    EXPECT_EQ(x.var_phase_quarter.value, y.var_phase_quarter.value);
    EXPECT_EQ(x.cov_phase_p.error, y.cov_phase_p.error);
    EXPECT_EQ(x.full_var_sx.value, y.full_var_sx.value);
}

TEST(fock_oracle, one_axis_twist_matches_dicke) {
    for (int n : {2, 3, 10, 41}) {
        for (double zeta : {0.0, 0.003, 0.02, 0.1, 0.4}) {
            TwistedSpin t = one_axis_twist(static_cast<uint64_t>(n), zeta);
            DickeMoments d = dicke_twist(n, zeta);
            EXPECT_NEAR(t.jx, d.jx, 1e-10 * n) << n << " " << zeta;
            EXPECT_NEAR(t.var_plus, d.var_plus, 1e-9 * n * n) << n << " " << zeta;
            EXPECT_NEAR(t.var_minus, d.var_minus, 1e-9 * n * n) << n << " " << zeta;
        }
    }
}

TEST(fock_oracle, one_axis_twist_limits) {
    TwistedSpin t = one_axis_twist(1000, 0.0);
    EXPECT_NEAR(t.phase_noise_factor, 1.0, 1e-14);
    EXPECT_NEAR(t.min_variance_factor, 1.0, 1e-14);
    // squeezing shrinks the minimum variance but not the optimal-readout phase noise
    TwistedSpin s = one_axis_twist(10000, 1e-4);
    EXPECT_LT(s.min_variance_factor, 0.9);
    EXPECT_GE(s.phase_noise_factor, 1.0);
    EXPECT_EQ(one_axis_twist(1, 0.3).phase_noise_factor, 1.0);
}
