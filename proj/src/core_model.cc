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

#include "spinlev/core_model.h"

#include <cmath>

namespace spinlev {

namespace {

void require(bool ok, const char *what) {
    if (!ok) {
        throw DomainError(what);
    }
}

bool finite_nonneg(double x) {
    return std::isfinite(x) && x >= 0.0;
}

}  // namespace

void PhysicalParams::validate() const {
    require(std::isfinite(mass) && mass > 0.0, "mass must be finite and positive");
    require(std::isfinite(trap_frequency) && trap_frequency > 0.0,
            "trap_frequency must be finite and positive");
    require(std::isfinite(gradient), "gradient must be finite");
    require(std::isfinite(gyromagnetic_ratio) && gyromagnetic_ratio > 0.0,
            "gyromagnetic_ratio must be finite and positive");
    require(n_spins >= 1, "n_spins must be at least 1");
    require(std::isfinite(quality_factor) && quality_factor > 0.0,
            "quality_factor must be finite and positive");
    require(temperature.has_value() != nbar.has_value(),
            "exactly one of temperature / nbar must be given");
    if (temperature) {
        require(finite_nonneg(*temperature), "temperature must be nonnegative");
    }
    if (nbar) {
        require(finite_nonneg(*nbar), "nbar must be nonnegative");
    }
    require(finite_nonneg(t2) && finite_nonneg(t2_star), "coherence times must be nonnegative");
    require(finite_nonneg(cooling_rate) && finite_nonneg(cooling_time),
            "cooling parameters must be nonnegative");
    require(std::isfinite(larmor_frequency), "larmor_frequency must be finite");
}

double oscillator_length(double mass, double omega) {
    return std::sqrt(kHbar / (2.0 * mass * omega));
}

double nbar_from_temperature(double temperature, double omega) {
    if (!(temperature >= 0.0) || !(omega > 0.0)) {
        throw DomainError("nbar_from_temperature needs T >= 0 and omega > 0");
    }
    if (temperature == 0.0) {
        return 0.0;
    }
    return 1.0 / std::expm1(kHbar * omega / (kBoltzmann * temperature));
}

NaturalParams to_natural(const PhysicalParams &p) {
    p.validate();
    NaturalParams n;
    n.omega = p.trap_frequency;
    n.x0 = oscillator_length(p.mass, p.trap_frequency);
    n.g = p.gyromagnetic_ratio * p.gradient * n.x0 / 2.0;
    n.lambda = 2.0 * n.g / n.omega;
    n.gamma = n.omega / p.quality_factor;
    n.nbar = p.nbar ? *p.nbar : nbar_from_temperature(*p.temperature, p.trap_frequency);
    n.larmor = p.larmor_frequency;
    return n;
}

PhysicalParams with_coupling(const PhysicalParams &p, double g) {
    PhysicalParams out = p;
    double x0 = oscillator_length(p.mass, p.trap_frequency);
    out.gradient = 2.0 * g / (p.gyromagnetic_ratio * x0);
    return out;
}

double coupling_ratio_scaling(const PhysicalParams &p1, const PhysicalParams &p2) {
    NaturalParams a = to_natural(p1);
    NaturalParams b = to_natural(p2);
    return (a.g / a.omega) / (b.g / b.omega);
}

}  // namespace spinlev
