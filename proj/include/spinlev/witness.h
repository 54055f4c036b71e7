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
#include <string_view>
#include <vector>

#include "spinlev/numerics.h"
#include "spinlev/pulse_kernel.h"

namespace spinlev {

/// Coefficients of W = Var(sx)/4 + Var(sy/2 + a_y q + b_y p) + Var(sz/2 + a_z q + b_z p)
/// with canonical quadratures q = (a + a^dag)/sqrt 2, p = (a - a^dag)/(i sqrt 2).
struct WitnessCoefficients {
    double a_y = 0.0;
    double b_y = 0.0;
    double a_z = 0.0;
    double b_z = 0.0;
};

struct WitnessResult {
    double w_b = 0.5;
    double w_en = 0.5;
    double w_ratio = 0.0;
    std::optional<uint64_t> n_meas;  // ceil(w_ratio^-2), empty unless w_ratio > 0
};

WitnessResult make_result(double w_b, double w_en);

/// First and second moments of {sigma_x, sigma_y, sigma_z, q, p} needed by W.
/// Mixed moments are plain products (spin and oscillator commute); qp is the
/// symmetrized <(qp + pq)/2>.
struct WitnessMoments {
    double sx = 0.0, sy = 0.0, sz = 0.0;
    double syq = 0.0, syp = 0.0, szq = 0.0, szp = 0.0;
    double q = 0.0, p = 0.0;
    double qq = 0.5, pp = 0.5, qp = 0.0;
    double var_sx_shift = 0.0;  // extra Var(sx/2) from a noise bath
};

double witness_value(const WitnessMoments &m, const WitnessCoefficients &c);

double separable_bound(const WitnessCoefficients &c);

/// Closed forms for a thermal start, lambda = 2g/omega, no bath.
double thermal_wb(double lambda, double nbar, double omega, double omega_l, double t);
double thermal_wen(double lambda, double nbar, double omega, double t);

/// Half-period values (t = pi/omega, omega_L = 0).
WitnessCoefficients halfperiod_coefficients(double lambda, double nbar);
/// Same with the sqrt(2) quadrature factor dropped, i.e. the SI coefficients
/// divided by sqrt(2/(m w)) and sqrt(2 m w).
WitnessCoefficients halfperiod_coefficients_stripped(double lambda, double nbar);
double halfperiod_wb(double lambda, double nbar);
double halfperiod_wen(double lambda, double nbar);

double pulsed_effective_lambda(double g, double omega, double tau);

struct BathDeltas {
    double var_sx = 0.0;  // Var(sx/2)
    double qq = 0.0;
    double pp = 0.0;
    double qp_pq = 0.0;   // <qp + pq>
    double syq = 0.0;     // <S_y q + q S_y> = <sigma_y q>
    double syp = 0.0;
};

BathDeltas bath_deltas(double lambda, double nbar_over_q, double omega, double t,
                       double q_zpf = 1.0 / std::sqrt(2.0), double p_zpf = 1.0 / std::sqrt(2.0));

WitnessMoments add_bath(WitnessMoments m, const BathDeltas &d);

/// Exact moments of the two-branch state produced by `seq` from a thermal
/// oscillator (occupation nbar) times |+>, averaged analytically over the
/// Glauber-P distribution. Spin moments are in the lab basis.
WitnessMoments branch_moments(const PulseSequence &seq, double g, double omega, double nbar,
                              double omega_l = 0.0);

/// Minimizes W over the coefficients (W is quadratic in them).
WitnessCoefficients optimize_coefficients(const WitnessMoments &m);

enum class InitialState { Ground, Thermal };

WitnessResult bath_witness(double lambda, double nbar, double nbar_over_q, double omega,
                           double omega_l, double t, InitialState initial);

enum class WitnessMode { Pulseless, Pulsed };
enum class SweepVariable { Time, Nbar };

std::string_view mode_name(WitnessMode m);
std::string_view sweep_name(SweepVariable s);

struct ScanConfig {
    WitnessMode mode = WitnessMode::Pulsed;
    SweepVariable sweep = SweepVariable::Nbar;
    std::vector<double> grid;  // t (or tau) in seconds / natural time, or nbar
    double g = 0.0;
    double omega = 1.0;
    double nbar = 0.0;         // used when sweeping time
    double tau = 0.0;          // used when sweeping nbar
    double omega_l = 0.0;
    double nbar_over_q = 0.0;  // pulseless only
    InitialState initial = InitialState::Thermal;
    int threads = 1;
};

struct ScanRow {
    double sweep_value;
    double w_b;
    double w_en;
    double w_ratio;
    double log10_w_ratio;  // NaN when w_ratio <= 0
};

struct ScanLandmarks {
    std::optional<double> tau_asymp;  // first grid point with w_ratio <= 0 (time sweeps)
    std::optional<double> tau_star;   // first crossing of w_ratio = threshold (time sweeps)
    std::optional<double> max_nbar;   // interpolated zero crossing (nbar sweeps)
};

struct ScanResult {
    std::vector<ScanRow> rows;
    ScanLandmarks landmarks;
};

inline constexpr double kStarThreshold = 1e-3;

ScanResult violation_scan(const ScanConfig &config);

/// log-spaced grid with `per_decade` points per decade, endpoints included.
std::vector<double> log_grid(double lo, double hi, int per_decade);

/// Largest nbar for which the pulsed violation reaches `threshold` somewhere
/// on the tau grid (tau given as tau*omega/pi).
double max_nbar_at_threshold(double g_over_omega, const std::vector<double> &tau_omega_over_pi,
                             double threshold = kStarThreshold);

}  // namespace spinlev
