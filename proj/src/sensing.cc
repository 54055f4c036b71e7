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

#include "spinlev/sensing.h"

#include <cmath>
#include <limits>

#include "spinlev/parallel.h"
#include "spinlev/witness.h"

namespace spinlev {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double x, const char *what) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError(std::string(what) + " must be finite and positive");
    }
}

// dn / g^2 and |phi / (g f)| at DC, both g-free.
double dn_per_g2(const PulseSequence &seq, double omega, double g) {
    return residual_displacement(seq, g, omega).delta_n / (g * g);
}

}  // namespace

double cooling_factor(double gamma_c, double t_c) {
    double x = gamma_c * t_c;
    if (!(x > 0.0)) {
        throw DomainError("cooling factor diverges unless gamma_c * t_c > 0");
    }
    return 1.0 / std::expm1(x);
}

double backaction_occupation(double delta_n, double xi) {
    if (!(delta_n >= 0.0) || !(xi >= 0.0)) {
        throw DomainError("backaction_occupation needs delta_n, xi >= 0");
    }
    return xi * delta_n;
}

double noise_to_signal(double phi_per_f, double delta_n, double xi, uint64_t n_spins,
                       double thermal_var) {
    if (n_spins == 0) {
        throw DomainError("n_spins must be at least 1");
    }
    double n = static_cast<double>(n_spins);
    double noise = 0.25 / n + n * delta_n * delta_n * xi + thermal_var;
    if (phi_per_f == 0.0) {
        return kInf;
    }
    return noise / (phi_per_f * phi_per_f);
}

double thermal_dephasing(double lambda, double nbar_over_q, double omega, double tau) {
    if (!(nbar_over_q >= 0.0) || !(tau >= 0.0)) {
        throw DomainError("thermal_dephasing needs nonnegative inputs");
    }
    return bath_deltas(lambda, nbar_over_q, omega, tau).var_sx;
}

double force_sql(const PulseSequence &seq, double omega, double xi, double g) {
    require_positive(g, "g");
    double d = dn_per_g2(seq, omega, g);
    double p = std::abs(phase_kernel(seq, g, omega, 0.0)) / g;
    return std::sqrt(std::sqrt(xi) * d) / p;
}

double optimal_coupling(const PulseSequence &seq, double omega, double xi, uint64_t n_spins) {
    if (n_spins == 0) {
        throw DomainError("n_spins must be at least 1");
    }
    double d = dn_per_g2(seq, omega, 1.0);
    if (d == 0.0 || xi == 0.0) {
        return kInf;
    }
    return 1.0 / std::sqrt(2.0 * d * std::sqrt(xi)) / std::sqrt(static_cast<double>(n_spins));
}

double projection_limit_eta(double mass, double omega, double gradient, double t2_star,
                            double gamma_e, uint64_t n_spins) {
    require_positive(mass, "mass");
    require_positive(omega, "omega");
    require_positive(gradient, "gradient");
    require_positive(t2_star, "t2_star");
    require_positive(gamma_e, "gamma_e");
    return 2.0 * mass * omega * omega / (gamma_e * gradient * std::sqrt(t2_star)) /
           std::sqrt(static_cast<double>(n_spins));
}

double thermal_limit_eta(double mass, double omega, double q_factor, double temperature) {
    require_positive(mass, "mass");
    require_positive(omega, "omega");
    require_positive(q_factor, "q_factor");
    if (!(temperature >= 0.0)) {
        throw DomainError("temperature must be nonnegative");
    }
    return std::sqrt(4.0 * mass * (omega / q_factor) * kBoltzmann * temperature);
}

SqlGradient sql_gradient(double mass, double t_between, double tau_precess, uint64_t n_spins,
                         double gamma_e) {
    require_positive(mass, "mass");
    require_positive(t_between, "t_between");
    require_positive(tau_precess, "tau_precess");
    SqlGradient out;
    out.delta_x_sql = std::sqrt(kHbar * t_between / mass);
    out.gradient = 1.0 / (gamma_e * tau_precess * std::sqrt(static_cast<double>(n_spins)) *
                          out.delta_x_sql);
    return out;
}

SensitivityPoint force_sensitivity(const PhysicalParams &params, const PulseSequence &seq,
                                   double nu, const SensitivityOptions &options) {
    NaturalParams n = to_natural(params);
    double xi = cooling_factor(params.cooling_rate, params.cooling_time);
    double g = options.optimal_coupling
                   ? optimal_coupling(seq, n.omega, xi, params.n_spins)
                   : n.g;
    if (!std::isfinite(g)) {
        throw DomainError("optimal coupling is unbounded for this sequence (no backaction)");
    }
    double nbar_over_q = options.nbar_over_q ? *options.nbar_over_q : n.nbar / params.quality_factor;
    double tau = seq.total_time;

    SensitivityPoint pt;
    pt.sweep_value = nu;
    pt.coupling = g;
    double dn = residual_displacement(seq, g, n.omega).delta_n;
    double ns = static_cast<double>(params.n_spins);
    pt.budget.projection_var = 0.25 / ns;
    pt.budget.backaction_var = ns * dn * dn * xi;
    pt.budget.thermal_var = thermal_dephasing(2.0 * g / n.omega, nbar_over_q, n.omega, tau);
    pt.budget.signal_phase_per_force = std::abs(phase_kernel(seq, g, n.omega, nu));
    double nsr = noise_to_signal(pt.budget.signal_phase_per_force, dn, xi, params.n_spins,
                                 pt.budget.thermal_var);
    // per-shot noise-to-signal -> spectral density over the duty cycle, then f -> F = f hbar / x0
    pt.eta = std::sqrt(nsr * (tau + params.cooling_time)) * kHbar / n.x0;
    return pt;
}

std::vector<SensitivityPoint> force_sensitivity_sweep(const PhysicalParams &params,
                                                      const PulseSequence &seq,
                                                      const std::vector<double> &nu,
                                                      const SensitivityOptions &options,
                                                      int threads) {
    std::vector<SensitivityPoint> out(nu.size());
    parallel_for(nu.size(), threads, [&](size_t i) {
        out[i] = force_sensitivity(params, seq, nu[i], options);
    });
    return out;
}

SqueezedRotation squeezed_rotation(uint64_t n_spins, double zeta) {
    if (n_spins == 0) {
        throw DomainError("n_spins must be at least 1");
    }
    double n = static_cast<double>(n_spins);
    double s = n * zeta;
    SqueezedRotation r;
    // theta -> -pi/2 as zeta -> 0 (arctan of infinity)
    r.theta = s == 0.0 ? -0.5 * kPi : -std::atan(4.0 / s + 0.5 * s);
    r.shot_noise_factor = 1.0 / std::sqrt(1.0 + 0.0625 * s * s);
    r.within_validity = std::abs(s) < std::sqrt(n);
    return r;
}

}  // namespace spinlev
