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

#include "spinlev/numerics.h"

namespace spinlev {

/// Laboratory description of a levitated spin-oscillator device (SI units).
struct PhysicalParams {
    double mass = 0.0;                              // kg
    double trap_frequency = 0.0;                    // rad/s
    double gradient = 0.0;                          // T/m
    double gyromagnetic_ratio = kDefaultGammaE;     // rad/(s T)
    uint64_t n_spins = 1;
    double quality_factor = 1.0;
    std::optional<double> temperature;              // K
    std::optional<double> nbar;                     // phonons
    double t2 = 0.0;                                // s
    double t2_star = 0.0;                           // s
    double cooling_rate = 0.0;                      // 1/s
    double cooling_time = 0.0;                      // s
    double larmor_frequency = 0.0;                  // rad/s

    /// Throws DomainError when an invariant is broken.
    void validate() const;
};

/// Oscillator units (hbar = 1, frequencies in rad/s).
struct NaturalParams {
    double g = 0.0;
    double omega = 0.0;
    double lambda = 0.0;  // 2 g / omega
    double nbar = 0.0;
    double gamma = 0.0;   // omega / Q
    double x0 = 0.0;      // sqrt(hbar / (2 m omega)), metres
    double larmor = 0.0;
};

double oscillator_length(double mass, double omega);
double nbar_from_temperature(double temperature, double omega);

NaturalParams to_natural(const PhysicalParams &p);

/// Returns a copy of `p` with the gradient chosen so that to_natural gives
/// coupling `g`.
PhysicalParams with_coupling(const PhysicalParams &p, double g);

/// (g/omega)_1 / (g/omega)_2.
double coupling_ratio_scaling(const PhysicalParams &p1, const PhysicalParams &p2);

}  // namespace spinlev
