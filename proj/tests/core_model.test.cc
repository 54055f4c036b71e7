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

#include <gtest/gtest.h>

using namespace spinlev;

namespace {

PhysicalParams device() {
    PhysicalParams p;
    p.mass = 3e-15;
    p.trap_frequency = 2 * kPi * 100.0;
    p.gradient = 1e4;
    p.quality_factor = 1e6;
    p.nbar = 0.0;
    return p;
}

}  // namespace

TEST(core_model, coupling_from_gradient) {
    PhysicalParams p = device();
    NaturalParams n = to_natural(p);
    double x0 = std::sqrt(kHbar / (2.0 * p.mass * p.trap_frequency));
    EXPECT_DOUBLE_EQ(n.x0, x0);
    EXPECT_NEAR(n.g / (kDefaultGammaE * 1e4 * x0 / 2.0), 1.0, 1e-15);
    EXPECT_NEAR(n.lambda, 2.0 * n.g / n.omega, 1e-15 * n.lambda);
    EXPECT_NEAR(n.gamma, n.omega / 1e6, 1e-18);
}

TEST(core_model, g_over_omega_scales_as_gradient_over_m_omega_cubed) {
    PhysicalParams a = device();
    PhysicalParams b = device();
    b.gradient *= 3.0;
    b.mass *= 4.0;
    b.trap_frequency *= 2.0;
    // g/w ~ dB / sqrt(m w^3)
    double want = 1.0 / (3.0 / std::sqrt(4.0 * 8.0));
    EXPECT_NEAR(coupling_ratio_scaling(a, b), want, 1e-12);
}

TEST(core_model, with_coupling_round_trips) {
    PhysicalParams p = device();
    for (double g : {1e-3, 1.0, 700.0}) {
        EXPECT_NEAR(to_natural(with_coupling(p, g)).g / g, 1.0, 1e-14);
    }
}

TEST(core_model, nbar_from_temperature) {
    double w = 2 * kPi * 100.0;
    EXPECT_EQ(nbar_from_temperature(0.0, w), 0.0);
    double t = 1e-3;
    double x = kHbar * w / (kBoltzmann * t);
    EXPECT_NEAR(nbar_from_temperature(t, w) * std::expm1(x), 1.0, 1e-12);
    // classical limit kT / hbar w - 1/2
    double hot = 300.0;
    EXPECT_NEAR(nbar_from_temperature(hot, w) / (kBoltzmann * hot / (kHbar * w) - 0.5), 1.0, 1e-9);
    PhysicalParams p = device();
    p.nbar.reset();
    p.temperature = t;
    EXPECT_NEAR(to_natural(p).nbar, nbar_from_temperature(t, w), 1e-15);
}

TEST(core_model, validation) {
    PhysicalParams p = device();
    p.mass = -1.0;
    EXPECT_THROW(to_natural(p), DomainError);
    p = device();
    p.n_spins = 0;
    EXPECT_THROW(p.validate(), DomainError);
    p = device();
    p.temperature = 1.0;  // both temperature and nbar
    EXPECT_THROW(p.validate(), DomainError);
    p = device();
    p.nbar.reset();
    EXPECT_THROW(p.validate(), DomainError);
    p = device();
    p.quality_factor = std::nan("");
    EXPECT_THROW(p.validate(), DomainError);
}
