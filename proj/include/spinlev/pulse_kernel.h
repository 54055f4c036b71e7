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

#include <string>
#include <string_view>
#include <vector>

#include "spinlev/numerics.h"

namespace spinlev {

enum class SequenceKind { Ramsey, HahnEcho, CarrPurcell2, Custom };

std::string_view kind_name(SequenceKind kind);
SequenceKind parse_kind(std::string_view name);

/// A stretch of free evolution with a constant sign of the spin coupling.
struct Segment {
    double start;
    double end;
    int sign;
};

/// Total free-evolution time plus instantaneous pi-pulse times.
struct PulseSequence {
    SequenceKind kind = SequenceKind::Ramsey;
    double total_time = 0.0;
    std::vector<double> pulse_times;

    static PulseSequence ramsey(double tau);
    static PulseSequence hahn_echo(double tau);
    static PulseSequence carr_purcell2(double tau);
    static PulseSequence custom(double tau, std::vector<double> pulse_times);
    static PulseSequence make(SequenceKind kind, double tau);

    void validate() const;
    std::vector<Segment> segments(double origin = 0.0) const;
};

/// +1 before the first pulse, flipping at every pulse (right-continuous).
int sign_profile(const PulseSequence &seq, double t);

struct Displacement {
    cplx beta;       // oscillator displacement per unit sigma_z
    double delta_n;  // |beta|^2
};

Displacement residual_displacement(const PulseSequence &seq, double g, double omega);

/// Closed forms for the named sequences (throws for Custom).
double delta_n_closed_form(SequenceKind kind, double g, double omega, double tau);

/// chi(nu): spin phase per unit spectral force amplitude, including the
/// 1/sqrt(2 pi) of the Fourier measure.
cplx response_kernel(const PulseSequence &seq, double g, double omega, double nu);

/// Same kernel without the 1/sqrt(2 pi); phase_kernel(nu = 0)/g is the DC
/// phase per unit force.
cplx phase_kernel(const PulseSequence &seq, double g, double omega, double nu);

/// The printed closed form for Ramsey, 2g(nu(cos w t - 1) - w(cos nu t - 1))/(nu w (nu - w)).
double ramsey_closed_form_kernel(double g, double omega, double tau, double nu);

struct ResponseKernel {
    std::vector<double> nu;
    std::vector<cplx> chi;
};

ResponseKernel response_kernel_grid(const PulseSequence &seq, double g, double omega,
                                    const std::vector<double> &nu, int threads = 1);

/// Small-omega*tau approximation for CarrPurcell2 (no 1/sqrt(2 pi)).
cplx cp_approx_kernel(double g, double omega, double tau, double nu);

/// zeta = int_0^tau int_0^t sin(w(t - t')) g(t) g(t') dt' dt.
double squeezing_parameter(const PulseSequence &seq, double g, double omega);

/// Tabulated closed forms of zeta for the named sequences.
double squeezing_closed_form(SequenceKind kind, double g, double omega, double tau);

struct LeadingOrderRow {
    double phi_per_gf;
    double delta_n_per_g2;
    double force_sql_scale;
    double g_star_scale;  // one spin, xi = 1/4
    bool out_of_regime;   // omega * tau >= 0.5
};

LeadingOrderRow leading_order_row(SequenceKind kind, double g, double omega, double tau);

namespace detail {

/// One cell of a common time partition. The double integral below weights
/// the outer variable by w_outer and the inner (earlier) one by w_inner.
struct Piece {
    double a;
    double b;
    double w_outer;
    double w_inner;
};

/// int_a^b e^{i k t} dt.
cplx segment_exp_integral(double k, double a, double b);

/// sum over pieces of int dt w_outer(t) int_{t' < t} dt' w_inner(t') e^{i(p t + q t')}.
cplx causal_double_integral(const std::vector<Piece> &pieces, double p, double q);

}  // namespace detail

}  // namespace spinlev
