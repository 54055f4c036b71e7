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

#pragma once

#include <vector>

#include "spinlev/numerics.h"
#include "spinlev/pulse_kernel.h"

namespace spinlev {

/// Piecewise-constant force: f(t) = values[k] for t in [k dt, (k+1) dt).
struct ForceSeries {
    double dt = 0.0;
    std::vector<double> values;

    double at(double t) const;
};

/// Force given by its spectrum, f(t) = int f(nu) e^{-i nu t} dnu / sqrt(2 pi),
/// sampled on a sorted grid (trapezoidal rule).
struct ForceSpectrum {
    std::vector<double> nu;
    std::vector<cplx> amplitude;
};

struct Branch {
    cplx amplitude;  // spin-sector amplitude (weight 1/sqrt 2 times a phase)
    cplx alpha;      // coherent amplitude of the oscillator
};

/// Two spin-labelled coherent branches. Labels follow the toggling frame:
/// branch0 started in |0> (sigma_z = +1). If spin_flipped is set, an odd
/// number of pulses has exchanged the physical spin states.
struct EntangledState {
    Branch branch0;
    Branch branch1;
    double relative_phase = 0.0;  // arg(amplitude1) - arg(amplitude0)
    bool spin_flipped = false;
};

struct MagnusPhases {
    cplx displacement_per_sz;     // oscillator displacement per unit sigma_z
    cplx displacement_force;      // displacement driven by the force
    double force_phase_per_sz;    // phi = int int g(t) sin(w(t - t')) f(t')
    double squeezing_zeta;        // int int sin(w(t - t')) g(t) g(t')
};

/// Constant drive c over `duration`, H = w a^dag a + c (a + a^dag).
struct DriveStep {
    double duration;
    double c;
};

/// Exact evolution of a coherent state under piecewise-constant drive, kept
/// affine in the initial amplitude: beta = rotation * alpha + offset and the
/// accumulated phase theta = phase0 + Re(phase_slope * alpha).
struct AffineBranch {
    cplx rotation{1.0, 0.0};
    cplx offset{0.0, 0.0};
    double phase0 = 0.0;
    cplx phase_slope{0.0, 0.0};

    void step(double omega, double c, double duration);
    cplx beta(cplx alpha) const {
        return rotation * alpha + offset;
    }
    double phase(cplx alpha) const {
        return phase0 + (phase_slope * alpha).real();
    }
};

/// Drive steps for spin branch sigma = +1/-1 under `seq`, c = sigma g s(t) - f(t).
std::vector<DriveStep> drive_steps(const PulseSequence &seq, double g, int sigma,
                                   const ForceSeries *force = nullptr);

AffineBranch propagate(const std::vector<DriveStep> &steps, double omega);

EntangledState branch_state(const PulseSequence &seq, cplx alpha, double g, double omega,
                            const ForceSeries *force = nullptr);

EntangledState pulseless_state(cplx alpha, double g, double omega, double tau);
EntangledState pulsed_state(cplx alpha, double g, double omega, double tau);

/// <a|b> for coherent states.
cplx coherent_overlap(cplx a, cplx b);

/// 2 conj(c0) c1 <alpha0|alpha1>: the off-diagonal spin element, whose phase is
/// the observable spin precession including the motional overlap.
cplx spin_coherence(const EntangledState &s);

MagnusPhases magnus_phases(const PulseSequence &seq, double g, double omega);
MagnusPhases magnus_phases(const PulseSequence &seq, double g, double omega,
                           const ForceSeries &force);
MagnusPhases magnus_phases(const PulseSequence &seq, double g, double omega,
                           const ForceSpectrum &force);

struct PhasePoint {
    double x;  // sqrt(2) Re beta
    double p;  // sqrt(2) Im beta
    double t;
};

std::vector<PhasePoint> trajectory(const PulseSequence &seq, double g, double omega,
                                   int spin_branch, size_t n_samples, cplx alpha = 0.0);

}  // namespace spinlev
