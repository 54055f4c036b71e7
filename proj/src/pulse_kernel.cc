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

#include "spinlev/pulse_kernel.h"

#include <algorithm>
#include <cmath>

#include "spinlev/parallel.h"

namespace spinlev {

namespace {

constexpr cplx kI{0.0, 1.0};

std::vector<detail::Piece> sign_pieces(const PulseSequence &seq, bool inner_weight_is_sign) {
    std::vector<detail::Piece> out;
    for (const Segment &s : seq.segments()) {
        double w = static_cast<double>(s.sign);
        out.push_back({s.start, s.end, w, inner_weight_is_sign ? w : 1.0});
    }
    return out;
}

}  // namespace

std::string_view kind_name(SequenceKind kind) {
    switch (kind) {
        case SequenceKind::Ramsey:
            return "ramsey";
        case SequenceKind::HahnEcho:
            return "hahn_echo";
        case SequenceKind::CarrPurcell2:
            return "carr_purcell2";
        case SequenceKind::Custom:
            return "custom";
    }
    return "unknown";
}

SequenceKind parse_kind(std::string_view name) {
    if (name == "ramsey") return SequenceKind::Ramsey;
    if (name == "hahn_echo" || name == "echo") return SequenceKind::HahnEcho;
    if (name == "carr_purcell2" || name == "cp") return SequenceKind::CarrPurcell2;
    if (name == "custom") return SequenceKind::Custom;
    throw DomainError("unknown sequence kind: " + std::string(name));
}

PulseSequence PulseSequence::ramsey(double tau) {
    return make(SequenceKind::Ramsey, tau);
}
PulseSequence PulseSequence::hahn_echo(double tau) {
    return make(SequenceKind::HahnEcho, tau);
}
PulseSequence PulseSequence::carr_purcell2(double tau) {
    return make(SequenceKind::CarrPurcell2, tau);
}

PulseSequence PulseSequence::custom(double tau, std::vector<double> pulse_times) {
    PulseSequence seq{SequenceKind::Custom, tau, std::move(pulse_times)};
    seq.validate();
    return seq;
}

PulseSequence PulseSequence::make(SequenceKind kind, double tau) {
    PulseSequence seq{kind, tau, {}};
    switch (kind) {
        case SequenceKind::Ramsey:
            break;
        case SequenceKind::HahnEcho:
            seq.pulse_times = {tau / 2.0};
            break;
        case SequenceKind::CarrPurcell2:
            seq.pulse_times = {tau / 4.0, 3.0 * tau / 4.0};
            break;
        case SequenceKind::Custom:
            throw DomainError("custom sequences need explicit pulse times");
    }
    seq.validate();
    return seq;
}

void PulseSequence::validate() const {
    if (!(std::isfinite(total_time) && total_time > 0.0)) {
        throw DomainError("sequence total_time must be positive");
    }
    double prev = 0.0;
    for (double t : pulse_times) {
        if (!(t > prev && t < total_time)) {
            throw DomainError("pulse times must be strictly increasing inside (0, tau)");
        }
        prev = t;
    }
    auto expect = [&](std::vector<double> want) {
        if (pulse_times != want) {
            throw DomainError("pulse times do not match sequence kind " +
                              std::string(kind_name(kind)));
        }
    };
    switch (kind) {
        case SequenceKind::Ramsey:
            expect({});
            break;
        case SequenceKind::HahnEcho:
            expect({total_time / 2.0});
            break;
        case SequenceKind::CarrPurcell2:
            expect({total_time / 4.0, 3.0 * total_time / 4.0});
            break;
        case SequenceKind::Custom:
            break;
    }
}

std::vector<Segment> PulseSequence::segments(double origin) const {
    std::vector<Segment> out;
    double start = 0.0;
    int sign = 1;
    for (double t : pulse_times) {
        out.push_back({origin + start, origin + t, sign});
        start = t;
        sign = -sign;
    }
    out.push_back({origin + start, origin + total_time, sign});
    return out;
}

int sign_profile(const PulseSequence &seq, double t) {
    if (!(t >= 0.0 && t <= seq.total_time)) {
        throw DomainError("sign_profile: t outside [0, tau]");
    }
    auto flips = std::upper_bound(seq.pulse_times.begin(), seq.pulse_times.end(), t) -
                 seq.pulse_times.begin();
    return (flips % 2 == 0) ? 1 : -1;
}

namespace detail {

cplx segment_exp_integral(double k, double a, double b) {
    double len = b - a;
    return len * std::exp(kI * (k * a)) * phi1(kI * (k * len));
}

cplx causal_double_integral(const std::vector<Piece> &pieces, double p, double q) {
    CompensatedSum<cplx> total;
    cplx earlier = 0.0;  // sum of w_inner * int e^{iqt'} over completed pieces
    for (const Piece &pc : pieces) {
        double len = pc.b - pc.a;
        cplx outer = segment_exp_integral(p, pc.a, pc.b);
        total.add(pc.w_outer * outer * earlier);
        cplx tri = std::exp(kI * ((p + q) * pc.a)) * (len * len) *
                   exp_dd(0.0, kI * (p * len), kI * ((p + q) * len));
        total.add(pc.w_outer * pc.w_inner * tri);
        earlier += pc.w_inner * segment_exp_integral(q, pc.a, pc.b);
    }
    return total.value();
}

}  // namespace detail

Displacement residual_displacement(const PulseSequence &seq, double g, double omega) {
    seq.validate();
    if (!(omega >= 0.0)) {
        throw DomainError("omega must be nonnegative");
    }
    double tau = seq.total_time;
    CompensatedSum<cplx> acc;
    for (const Segment &s : seq.segments()) {
        acc.add(static_cast<double>(s.sign) * detail::segment_exp_integral(omega, s.start, s.end));
    }
    cplx beta = -kI * g * std::exp(-kI * (omega * tau)) * acc.value();
    double dn = std::norm(beta);
    if (seq.kind != SequenceKind::Custom && omega > 0.0) {
        dn = delta_n_closed_form(seq.kind, g, omega, tau);
    }
    return {beta, dn};
}

double delta_n_closed_form(SequenceKind kind, double g, double omega, double tau) {
    double x = omega * tau;
    double r = g / omega;
    switch (kind) {
        case SequenceKind::Ramsey: {
            double s = std::sin(x / 2.0);
            return 4.0 * r * r * s * s;
        }
        case SequenceKind::HahnEcho: {
            double s = std::sin(x / 4.0);
            return 16.0 * r * r * s * s * s * s;
        }
        case SequenceKind::CarrPurcell2: {
            double s8 = std::sin(x / 8.0);
            double s4 = std::sin(x / 4.0);
            return r * r * 64.0 * s8 * s8 * s8 * s8 * s4 * s4;
        }
        case SequenceKind::Custom:
            break;
    }
    throw DomainError("no closed form for custom sequences");
}

cplx phase_kernel(const PulseSequence &seq, double g, double omega, double nu) {
    seq.validate();
    auto pieces = sign_pieces(seq, false);
    cplx plus = detail::causal_double_integral(pieces, omega, -omega - nu);
    cplx minus = detail::causal_double_integral(pieces, -omega, omega - nu);
    return g * (plus - minus) / (2.0 * kI);
}

cplx response_kernel(const PulseSequence &seq, double g, double omega, double nu) {
    return phase_kernel(seq, g, omega, nu) / std::sqrt(2.0 * kPi);
}

double ramsey_closed_form_kernel(double g, double omega, double tau, double nu) {
    auto eval = [&](double v) {
        // nu(cos wt - 1) - w(cos vt - 1), divided by nu without cancellation.
        double half = 0.5 * v * tau;
        double sinc = (half == 0.0) ? 1.0 : std::sin(half) / half;
        double num_over_nu = (std::cos(omega * tau) - 1.0) + omega * v * tau * tau * 0.5 * sinc * sinc;
        return 2.0 * g * num_over_nu / (omega * (v - omega));
    };
    if (std::abs(nu - omega) * tau < 1e-6) {
        double h = 1e-4 / tau;
        return 0.5 * (eval(omega + h) + eval(omega - h));
    }
    return eval(nu);
}

ResponseKernel response_kernel_grid(const PulseSequence &seq, double g, double omega,
                                    const std::vector<double> &nu, int threads) {
    ResponseKernel out{nu, std::vector<cplx>(nu.size())};
    parallel_for(nu.size(), threads, [&](size_t i) {
        out.chi[i] = response_kernel(seq, g, omega, nu[i]);
    });
    return out;
}

cplx cp_approx_kernel(double g, double omega, double tau, double nu) {
    double mag = g * omega * tau * tau * tau / 32.0;
    double env = std::exp(-(9.0 * omega * omega + nu * nu) * tau * tau / 64.0);
    return mag * env * std::exp(-kI * (nu * tau / 2.0));
}

double squeezing_parameter(const PulseSequence &seq, double g, double omega) {
    seq.validate();
    auto pieces = sign_pieces(seq, true);
    return g * g * detail::causal_double_integral(pieces, omega, -omega).imag();
}

double squeezing_closed_form(SequenceKind kind, double g, double omega, double tau) {
    double x = omega * tau;
    double num = 0.0;
    switch (kind) {
        case SequenceKind::Ramsey:
            num = x - std::sin(x);
            break;
        case SequenceKind::HahnEcho:
            num = x - 4.0 * std::sin(x / 2.0) + std::sin(x);
            break;
        case SequenceKind::CarrPurcell2:
            num = x - 4.0 * std::sin(x / 4.0) - 4.0 * std::sin(x / 2.0) +
                  4.0 * std::sin(3.0 * x / 4.0) - std::sin(x);
            break;
        case SequenceKind::Custom:
            throw DomainError("no closed form for custom sequences");
    }
    return g * g * num / (omega * omega);
}

LeadingOrderRow leading_order_row(SequenceKind kind, double g, double omega, double tau) {
    (void)g;
    double t2 = tau * tau, t3 = t2 * tau;
    LeadingOrderRow row{};
    row.out_of_regime = omega * tau >= 0.5;
    switch (kind) {
        case SequenceKind::Ramsey:
            row.phi_per_gf = omega * t3 / 6.0;
            row.delta_n_per_g2 = t2;
            row.force_sql_scale = 6.0 / (omega * t2);
            row.g_star_scale = 1.0 / tau;
            break;
        case SequenceKind::HahnEcho:
            row.phi_per_gf = omega * t3 / 8.0;
            row.delta_n_per_g2 = omega * omega * t2 * t2 / 16.0;
            row.force_sql_scale = 2.0 / tau;
            row.g_star_scale = 4.0 / (omega * t2);
            break;
        case SequenceKind::CarrPurcell2:
            row.phi_per_gf = omega * t3 / 32.0;
            row.delta_n_per_g2 = std::pow(omega, 4) * t3 * t3 / 1024.0;
            row.force_sql_scale = omega;
            row.g_star_scale = 32.0 / (omega * omega * t3);
            break;
        case SequenceKind::Custom:
            throw DomainError("no tabulated row for custom sequences");
    }
    return row;
}

}  // namespace spinlev
