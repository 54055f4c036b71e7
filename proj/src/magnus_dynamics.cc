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

#include <algorithm>
#include <cmath>

namespace spinlev {

namespace {

constexpr cplx kI{0.0, 1.0};

// Merged partition of [0, tau] by pulse times and force-step edges.
struct Cell {
    double a;
    double b;
    int sign;
    double force;
};

std::vector<Cell> cells(const PulseSequence &seq, const ForceSeries *force) {
    std::vector<Cell> out;
    double tau = seq.total_time;
    for (const Segment &s : seq.segments()) {
        if (force == nullptr) {
            out.push_back({s.start, s.end, s.sign, 0.0});
            continue;
        }
        double t = s.start;
        while (t < s.end) {
            auto k = static_cast<size_t>(std::floor(t / force->dt + 1e-9));
            double edge = std::min(s.end, (k + 1) * force->dt);
            if (edge <= t) {
                edge = std::min(s.end, t + force->dt);
            }
            double f = k < force->values.size() ? force->values[k] : force->values.back();
            out.push_back({t, edge, s.sign, f});
            t = edge;
        }
    }
    (void)tau;
    return out;
}

void check_force(const PulseSequence &seq, double omega, const ForceSeries &force) {
    double tau = seq.total_time;
    if (!(force.dt > 0.0) || force.values.empty()) {
        throw DomainError("force series needs dt > 0 and at least one sample");
    }
    if (force.dt * static_cast<double>(force.values.size()) < tau * (1.0 - 1e-12)) {
        throw DomainError("force series does not cover the sequence");
    }
    double scale = tau / 8.0;
    if (omega > 0.0) {
        scale = std::min(scale, 2.0 * kPi / omega);
    }
    if (force.dt > scale / 16.0 * (1.0 + 1e-12)) {
        throw ResolutionError("force series under-sampled: need at least 16 points per min(2pi/omega, tau/8)");
    }
}

}  // namespace

double ForceSeries::at(double t) const {
    auto k = static_cast<size_t>(std::max(0.0, std::floor(t / dt)));
    return values[std::min(k, values.size() - 1)];
}

void AffineBranch::step(double omega, double c, double duration) {
    cplx rot = std::exp(-kI * (omega * duration));
    // w = (1 - e^{-i w T}) / (i w), finite as w -> 0.
    cplx w = duration * phi1(-kI * (omega * duration));
    double quad = 0.0;
    if (omega > 0.0) {
        quad = c * c / omega * duration * one_minus_sinc(omega * duration);
    }
    phase0 += -c * (offset * w).real() + quad;
    phase_slope += -c * rotation * w;
    offset = offset * rot - kI * c * w;
    rotation *= rot;
}

std::vector<DriveStep> drive_steps(const PulseSequence &seq, double g, int sigma,
                                   const ForceSeries *force) {
    std::vector<DriveStep> out;
    for (const Cell &cell : cells(seq, force)) {
        out.push_back({cell.b - cell.a, sigma * g * cell.sign - cell.force});
    }
    return out;
}

AffineBranch propagate(const std::vector<DriveStep> &steps, double omega) {
    AffineBranch b;
    for (const DriveStep &s : steps) {
        b.step(omega, s.c, s.duration);
    }
    return b;
}

EntangledState branch_state(const PulseSequence &seq, cplx alpha, double g, double omega,
                            const ForceSeries *force) {
    seq.validate();
    if (force != nullptr) {
        check_force(seq, omega, *force);
    }
    AffineBranch up = propagate(drive_steps(seq, g, +1, force), omega);
    AffineBranch down = propagate(drive_steps(seq, g, -1, force), omega);
    double th0 = up.phase(alpha);
    double th1 = down.phase(alpha);
    const double w = 1.0 / std::sqrt(2.0);
    EntangledState s;
    s.branch0 = {w * std::exp(kI * th0), up.beta(alpha)};
    s.branch1 = {w * std::exp(kI * th1), down.beta(alpha)};
    s.relative_phase = th1 - th0;
    s.spin_flipped = seq.pulse_times.size() % 2 == 1;
    return s;
}

cplx coherent_overlap(cplx a, cplx b) {
    return std::exp(-0.5 * std::norm(a - b) + kI * (std::conj(a) * b).imag());
}

cplx spin_coherence(const EntangledState &s) {
    return 2.0 * std::conj(s.branch0.amplitude) * s.branch1.amplitude *
           coherent_overlap(s.branch0.alpha, s.branch1.alpha);
}

EntangledState pulseless_state(cplx alpha, double g, double omega, double tau) {
    return branch_state(PulseSequence::ramsey(tau), alpha, g, omega);
}

EntangledState pulsed_state(cplx alpha, double g, double omega, double tau) {
    return branch_state(PulseSequence::hahn_echo(tau), alpha, g, omega);
}

MagnusPhases magnus_phases(const PulseSequence &seq, double g, double omega) {
    MagnusPhases m{};
    m.displacement_per_sz = residual_displacement(seq, g, omega).beta;
    m.displacement_force = 0.0;
    m.force_phase_per_sz = 0.0;
    m.squeezing_zeta = squeezing_parameter(seq, g, omega);
    return m;
}

MagnusPhases magnus_phases(const PulseSequence &seq, double g, double omega,
                           const ForceSeries &force) {
    check_force(seq, omega, force);
    MagnusPhases m = magnus_phases(seq, g, omega);
    std::vector<detail::Piece> pieces;
    CompensatedSum<cplx> disp;
    for (const Cell &c : cells(seq, &force)) {
        pieces.push_back({c.a, c.b, g * c.sign, c.force});
        disp.add(c.force * detail::segment_exp_integral(omega, c.a, c.b));
    }
    double tau = seq.total_time;
    m.displacement_force = kI * std::exp(-kI * (omega * tau)) * disp.value();
    m.force_phase_per_sz = detail::causal_double_integral(pieces, omega, -omega).imag();
    return m;
}

MagnusPhases magnus_phases(const PulseSequence &seq, double g, double omega,
                           const ForceSpectrum &force) {
    if (force.nu.size() != force.amplitude.size() || force.nu.size() < 2) {
        throw DomainError("force spectrum needs matching nu/amplitude arrays of length >= 2");
    }
    MagnusPhases m = magnus_phases(seq, g, omega);
    double tau = seq.total_time;
    const double norm = 1.0 / std::sqrt(2.0 * kPi);
    CompensatedSum<cplx> phase, disp;
    for (size_t i = 0; i + 1 < force.nu.size(); i++) {
        double h = force.nu[i + 1] - force.nu[i];
        for (size_t j : {i, i + 1}) {
            double nu = force.nu[j];
            cplx f = force.amplitude[j];
            phase.add(0.5 * h * response_kernel(seq, g, omega, nu) * f);
            disp.add(0.5 * h * norm * f * detail::segment_exp_integral(omega - nu, 0.0, tau));
        }
    }
    m.force_phase_per_sz = phase.value().real();
    m.displacement_force = kI * std::exp(-kI * (omega * tau)) * disp.value();
    return m;
}

std::vector<PhasePoint> trajectory(const PulseSequence &seq, double g, double omega,
                                   int spin_branch, size_t n_samples, cplx alpha) {
    seq.validate();
    if (n_samples < 2) {
        throw DomainError("trajectory needs at least 2 samples");
    }
    if (spin_branch != 0 && spin_branch != 1) {
        throw DomainError("spin_branch must be 0 or 1");
    }
    int sigma = spin_branch == 0 ? 1 : -1;
    auto segs = seq.segments();
    std::vector<PhasePoint> out;
    out.reserve(n_samples);
    double tau = seq.total_time;
    for (size_t i = 0; i < n_samples; i++) {
        double t = (i + 1 == n_samples) ? tau : tau * static_cast<double>(i) / (n_samples - 1);
        AffineBranch b;
        for (const Segment &s : segs) {
            if (s.start >= t) {
                break;
            }
            b.step(omega, sigma * g * s.sign, std::min(s.end, t) - s.start);
        }
        cplx beta = b.beta(alpha);
        out.push_back({std::sqrt(2.0) * beta.real(), std::sqrt(2.0) * beta.imag(), t});
    }
    return out;
}

}  // namespace spinlev
