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

#include "spinlev/magnus_dynamics.h"

#include <cmath>

#include <gtest/gtest.h>

#include "quadrature.h"

using namespace spinlev;

namespace {

constexpr cplx kI{0.0, 1.0};

ForceSeries constant_force(double f0, double tau, size_t n) {
    return ForceSeries{tau / static_cast<double>(n), std::vector<double>(n, f0)};
}

}  // namespace

TEST(magnus_dynamics, ramsey_without_force) {
    double g = 0.3, w = 1.1, tau = 2.3;
    auto seq = PulseSequence::ramsey(tau);
    MagnusPhases m = magnus_phases(seq, g, w);
    // alpha(tau) = -i g int_0^tau e^{-i w (tau - t)} dt
    cplx want = -kI * g * (1.0 - std::exp(-kI * (w * tau))) / (kI * w);
    EXPECT_NEAR(std::abs(m.displacement_per_sz - want), 0.0, 1e-15);
    EXPECT_EQ(m.displacement_force, cplx(0.0));
    EXPECT_EQ(m.force_phase_per_sz, 0.0);
    EXPECT_EQ(m.squeezing_zeta, squeezing_parameter(seq, g, w));
}

TEST(magnus_dynamics, zero_coupling_only_force_displacement) {
    double w = 1.0, tau = 1.0, f0 = 0.2;
    auto seq = PulseSequence::hahn_echo(tau);
    MagnusPhases m = magnus_phases(seq, 0.0, w, constant_force(f0, tau, 400));
    EXPECT_EQ(m.displacement_per_sz, cplx(0.0));
    EXPECT_EQ(m.squeezing_zeta, 0.0);
    EXPECT_EQ(m.force_phase_per_sz, 0.0);
    cplx want = kI * f0 * (1.0 - std::exp(-kI * (w * tau))) / (kI * w);
    EXPECT_NEAR(std::abs(m.displacement_force - want), 0.0, 1e-14);
}

TEST(magnus_dynamics, constant_force_phase_is_dc_kernel) {
    double g = 0.5, w = 2.0, f0 = 0.3;
    for (SequenceKind k : {SequenceKind::Ramsey, SequenceKind::HahnEcho, SequenceKind::CarrPurcell2}) {
        double tau = 1.7;
        auto seq = PulseSequence::make(k, tau);
        MagnusPhases m = magnus_phases(seq, g, w, constant_force(f0, tau, 512));
        double want = (f0 * phase_kernel(seq, g, w, 0.0)).real();
        EXPECT_NEAR(m.force_phase_per_sz, want, 1e-13);
    }
}

TEST(magnus_dynamics, spectral_and_time_domain_force_agree) {
    double w = 1.0, g = 1.0, f0 = 1.0;
    double tau = 0.1 / w;
    auto seq = PulseSequence::hahn_echo(tau);
    MagnusPhases time = magnus_phases(seq, g, w, constant_force(f0, tau, 1024));

    // boxcar on [0, tau]: f(nu) = f0 (e^{i nu tau} - 1) / (i nu sqrt(2 pi))
    ForceSpectrum spec;
    double cut = 4000.0 / tau, h = 0.05 / tau;
    for (double nu = -cut; nu <= cut + 0.5 * h; nu += h) {
        spec.nu.push_back(nu);
        cplx z = kI * (nu * tau);
        spec.amplitude.push_back(f0 * tau * phi1(z) / std::sqrt(2.0 * kPi));
    }
    MagnusPhases freq = magnus_phases(seq, g, w, spec);
    EXPECT_NEAR(freq.force_phase_per_sz / time.force_phase_per_sz, 1.0, 1e-3);
    EXPECT_NEAR(std::abs(freq.displacement_force - time.displacement_force) /
                    std::abs(time.displacement_force),
                0.0, 1e-3);
}

TEST(magnus_dynamics, under_sampled_force_rejected) {
    auto seq = PulseSequence::ramsey(1.0);
    EXPECT_THROW(magnus_phases(seq, 1.0, 1.0, constant_force(1.0, 1.0, 100)), ResolutionError);
    EXPECT_THROW(magnus_phases(seq, 1.0, 1.0, constant_force(1.0, 0.5, 1000)), DomainError);
}

TEST(magnus_dynamics, pulseless_half_period) {
    double g = 0.4, w = 1.0;
    cplx alpha(0.3, -0.2);
    auto s = pulseless_state(alpha, g, w, kPi / w);
    EXPECT_NEAR(std::abs(s.branch0.alpha - (-alpha - 2 * g / w)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(s.branch1.alpha - (-alpha + 2 * g / w)), 0.0, 1e-14);
    EXPECT_FALSE(s.spin_flipped);
    auto full = pulseless_state(alpha, g, w, 2 * kPi / w);
    EXPECT_NEAR(std::abs(full.branch0.alpha - alpha), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(full.branch1.alpha - alpha), 0.0, 1e-14);
}

TEST(magnus_dynamics, pulseless_general_form) {
    double g = 0.7, w = 1.3, tau = 0.77;
    cplx alpha(-0.5, 0.9);
    auto s = pulseless_state(alpha, g, w, tau);
    cplx e = std::exp(-kI * (w * tau));
    double r = g / w;
    EXPECT_NEAR(std::abs(s.branch0.alpha - ((alpha + r) * e - r)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(s.branch1.alpha - ((alpha - r) * e + r)), 0.0, 1e-14);
    EXPECT_NEAR(std::norm(s.branch0.amplitude) + std::norm(s.branch1.amplitude), 1.0, 1e-14);
}

TEST(magnus_dynamics, pulsed_exact_form_and_small_time) {
    double g = 1.0, w = 1.0;
    cplx alpha(1.0, 0.0);
    for (double x : {0.1, 1.0, 3.0}) {
        double tau = x / w;
        auto s = pulsed_state(alpha, g, w, tau);
        cplx e = std::exp(-kI * x), h = std::exp(-kI * (x / 2.0));
        double r = g / w;
        // first half with +g, second half with -g
        cplx b0 = (alpha + r) * e + r - 2.0 * r * h;
        cplx b1 = (alpha - r) * e - r + 2.0 * r * h;
        EXPECT_NEAR(std::abs(s.branch0.alpha - b0), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(s.branch1.alpha - b1), 0.0, 1e-14);
        EXPECT_TRUE(s.spin_flipped);
    }
    double tau = 1e-3;
    auto s = pulsed_state(alpha, g, w, tau);
    double sep = std::abs(s.branch0.alpha - s.branch1.alpha);
    EXPECT_NEAR(sep / (0.5 * w * g * tau * tau), 1.0, 1e-3);
    auto free = pulseless_state(alpha, 0.0, w, tau);
    EXPECT_NEAR(std::abs(s.branch0.alpha + s.branch1.alpha - 2.0 * free.branch0.alpha), 0.0, 1e-15);
}

TEST(magnus_dynamics, zero_coupling_is_separable) {
    cplx alpha(0.2, 0.1);
    auto s = pulsed_state(alpha, 0.0, 1.0, 0.9);
    EXPECT_EQ(s.branch0.alpha, s.branch1.alpha);
    EXPECT_NEAR(std::abs(s.branch0.alpha - alpha * std::exp(-kI * 0.9)), 0.0, 1e-15);
    EXPECT_NEAR(s.relative_phase, 0.0, 1e-15);
}

TEST(magnus_dynamics, composition_of_steps) {
    double w = 1.7, c = 0.6;
    for (double T : {1e-6, 0.3, 4.0}) {
        AffineBranch one, two;
        one.step(w, c, T);
        two.step(w, c, T / 2);
        two.step(w, c, T / 2);
        cplx alpha(0.4, -1.3);
        EXPECT_NEAR(std::abs(one.beta(alpha) - two.beta(alpha)), 0.0, 1e-12);
        EXPECT_NEAR(one.phase(alpha), two.phase(alpha), 1e-12);
    }
}

TEST(magnus_dynamics, phase_matches_direct_integration) {
    // theta = int -c Re(beta(t)) * 2 dt accumulated along the path, i.e.
    // d theta / dt = -c (beta + beta*) for H = w n + c (a + a^dag) in the
    // rotating coherent-state ansatz |beta(t)> e^{i theta(t)}.
    double w = 1.3, c = 0.45, T = 2.2;
    cplx alpha(0.3, 0.8);
    AffineBranch b;
    b.step(w, c, T);
    double want = spinlev_test::integrate<double>(
        [&](double t) {
            cplx beta = (alpha + c / w) * std::exp(-kI * (w * t)) - c / w;
            return -c * beta.real();
        },
        0.0, T, 16);
    EXPECT_NEAR(b.phase(alpha), want, 1e-13);
}

TEST(magnus_dynamics, force_shifts_relative_phase_by_four_phi) {
    double g = 0.6, w = 1.0, tau = 2.0, f0 = 0.05;
    auto seq = PulseSequence::hahn_echo(tau);
    ForceSeries f = constant_force(f0, tau, 256);
    auto with = branch_state(seq, 0.0, g, w, &f);
    auto without = branch_state(seq, 0.0, g, w);
    double phi = magnus_phases(seq, g, w, f).force_phase_per_sz;
    EXPECT_NEAR(std::arg(spin_coherence(with) / spin_coherence(without)), 4.0 * phi, 1e-13);
}

TEST(magnus_dynamics, trajectory_geometry) {
    double g = 0.5, w = 1.0, tau = 3.0;
    cplx alpha(0.2, 0.0);
    auto ramsey = PulseSequence::ramsey(tau);
    auto path = trajectory(ramsey, g, w, 0, 64, alpha);
    ASSERT_EQ(path.size(), 64u);
    EXPECT_EQ(path.front().t, 0.0);
    EXPECT_EQ(path.back().t, tau);
    double r = std::abs(alpha + g / w) * std::sqrt(2.0);
    for (const auto &pt : path) {
        EXPECT_NEAR(std::hypot(pt.x + std::sqrt(2.0) * g / w, pt.p), r, 1e-14);
    }
    auto echo = PulseSequence::hahn_echo(tau);
    for (int b : {0, 1}) {
        auto end = trajectory(echo, g, w, b, 7, alpha).back();
        auto s = pulsed_state(alpha, g, w, tau);
        cplx beta = b == 0 ? s.branch0.alpha : s.branch1.alpha;
        EXPECT_NEAR(end.x, std::sqrt(2.0) * beta.real(), 1e-12);
        EXPECT_NEAR(end.p, std::sqrt(2.0) * beta.imag(), 1e-12);
    }
    auto free = trajectory(ramsey, 0.0, w, 1, 5, alpha);
    for (const auto &pt : free) {
        cplx beta = alpha * std::exp(-kI * (w * pt.t));
        EXPECT_NEAR(pt.x, std::sqrt(2.0) * beta.real(), 1e-15);
    }
    EXPECT_THROW(trajectory(ramsey, g, w, 2, 5), DomainError);
    EXPECT_THROW(trajectory(ramsey, g, w, 0, 1), DomainError);
}

TEST(magnus_dynamics, echo_refocuses_displacement) {
    double w = 1.0, g = 1.0;
    for (double x : {1e-2, 1e-3}) {
        double ramsey = std::abs(magnus_phases(PulseSequence::ramsey(x), g, w).displacement_per_sz);
        double echo = std::abs(magnus_phases(PulseSequence::hahn_echo(x), g, w).displacement_per_sz);
        EXPECT_NEAR(echo / ramsey, x / 4.0, 0.01 * x);
    }
}
