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

#include <cstdint>
#include <optional>
#include <vector>

#include "spinlev/core_model.h"
#include "spinlev/pulse_kernel.h"

namespace spinlev {

/// xi = e^{-x}/(1 - e^{-x}), x = gamma_c t_c.
double cooling_factor(double gamma_c, double t_c);

double backaction_occupation(double delta_n, double xi);

/// (1/(4 N) + N dn^2 xi + thermal_var) / phi^2. Infinite when phi = 0.
double noise_to_signal(double phi_per_f, double delta_n, double xi, uint64_t n_spins,
                       double thermal_var);

/// Extra spin-phase variance per shot from a white-noise bath.
double thermal_dephasing(double lambda, double nbar_over_q, double omega, double tau);

/// sqrt(sqrt(xi) dn/g^2) / |phi/(g f)|, in oscillator force units (1/s).
/// The result does not depend on g; `g` only selects where the ratios are
/// evaluated.
double force_sql(const PulseSequence &seq, double omega, double xi, double g = 1.0);

/// g* = 1 / sqrt(2 (dn/g^2) sqrt(xi)) / sqrt(N). Infinite when dn vanishes.
double optimal_coupling(const PulseSequence &seq, double omega, double xi, uint64_t n_spins);

/// 2 m w^2 / (gamma_e dB sqrt(T2*)) / sqrt(N), N/sqrt(Hz).
double projection_limit_eta(double mass, double omega, double gradient, double t2_star,
                            double gamma_e = kDefaultGammaE, uint64_t n_spins = 1);

/// sqrt(4 m (w/Q) k_B T), N/sqrt(Hz).
double thermal_limit_eta(double mass, double omega, double q_factor, double temperature);

struct SqlGradient {
    double delta_x_sql;  // sqrt(hbar t / m), metres
    double gradient;     // T/m
};

SqlGradient sql_gradient(double mass, double t_between, double tau_precess, uint64_t n_spins,
                         double gamma_e = kDefaultGammaE);

struct NoiseBudget {
    double projection_var = 0.0;
    double backaction_var = 0.0;
    double thermal_var = 0.0;
    double signal_phase_per_force = 0.0;  // |phi/f|, seconds
};

struct SensitivityPoint {
    double sweep_value = 0.0;
    double eta = 0.0;         // N/sqrt(Hz); infinite when the response vanishes
    double coupling = 0.0;    // g used, rad/s
    NoiseBudget budget;
};

struct SensitivityOptions {
    bool optimal_coupling = true;         // otherwise the coupling implied by the gradient
    std::optional<double> nbar_over_q;    // defaults to params nbar / Q
};

/// eta(nu) = sqrt(NSR (tau + t_c)) / |K(nu)| converted to N/sqrt(Hz) with hbar/x0.
SensitivityPoint force_sensitivity(const PhysicalParams &params, const PulseSequence &seq,
                                   double nu, const SensitivityOptions &options = {});

std::vector<SensitivityPoint> force_sensitivity_sweep(const PhysicalParams &params,
                                                      const PulseSequence &seq,
                                                      const std::vector<double> &nu,
                                                      const SensitivityOptions &options = {},
                                                      int threads = 1);

struct SqueezedRotation {
    double theta;              // readout rotation about x
    double shot_noise_factor;  // 1/sqrt(1 + (N zeta/4)^2)
    bool within_validity;      // N zeta < sqrt(N)
};

SqueezedRotation squeezed_rotation(uint64_t n_spins, double zeta);

}  // namespace spinlev
