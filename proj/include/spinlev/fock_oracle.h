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

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "spinlev/core_model.h"
#include "spinlev/magnus_dynamics.h"
#include "spinlev/witness.h"

namespace spinlev {

// Brute-force reference engine: the spin-oscillator state on a truncated Fock
// space, propagated without using any of the closed forms.

struct OracleConfig {
    size_t n_max = 0;              // 0: chosen from the largest amplitude involved
    double dt = 0.0;               // force step; 0: min(2 pi / w, shortest segment) / 128
    uint64_t seed = 1;
    size_t n_trajectories = 1000;
    double tail_tolerance = 1e-12;  // allowed population in the top four levels
    int threads = 1;

    void validate() const;
};

/// Fock cutoff ceil(A + 10 sqrt(A + 1) + 20) for |alpha|^2 <= A.
size_t default_cutoff(double max_abs_alpha);

/// Largest coherent amplitude reached by either spin branch (plus the force).
double amplitude_bound(const PulseSequence &seq, double g, double omega, cplx alpha,
                       const ForceSeries *force = nullptr);

/// Spin (lab basis, index 0 is sigma_z = +1) times Fock levels 0..n_max.
struct JointState {
    std::array<Eigen::VectorXcd, 2> spin;

    size_t n_max() const {
        return static_cast<size_t>(spin[0].size()) - 1;
    }
    double norm() const;
    double tail_population() const;

    /// (c0 |0> + c1 |1>) x |alpha>, normalized after truncation.
    static JointState product(cplx c0, cplx c1, cplx alpha, size_t n_max);
};

Eigen::VectorXcd coherent_vector(cplx alpha, size_t n_max);

/// H = g sigma_z (a + a^dag) + w a^dag a - f(t)(a + a^dag) + w_L sigma_z / 2 with
/// instantaneous sigma_x flips at the pulse times. Constant stretches are
/// exponentiated exactly; forced steps use a Strang split around the kick.
JointState evolve(const JointState &state, const NaturalParams &natural, const PulseSequence &seq,
                  const ForceSeries *force, const OracleConfig &cfg);

/// |<closed|oracle>|^2.
double branch_fidelity(const EntangledState &closed, const JointState &oracle);

/// Moments of a pure joint state.
WitnessMoments state_moments(const JointState &state);

struct OracleMoments {
    WitnessMoments mean;
    WitnessMoments stderr_;  // batch standard errors; zero for pure states
    std::vector<WitnessMoments> batches;
    size_t samples = 0;
};

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

/// |+> x thermal(nbar) through `seq`. nbar = 0 is a single pure run; otherwise
/// cfg.n_trajectories Glauber-P samples split into 20 batches.
OracleMoments witness_moments(const NaturalParams &natural, const PulseSequence &seq, double nbar,
                              const OracleConfig &cfg);

/// fn(mean moments) with a leave-one-batch-out jackknife error.
template <typename Fn>
Estimate jackknife(const OracleMoments &m, Fn &&fn);

/// W_en of the moments with optimized coefficients.
double optimal_wen(const WitnessMoments &m);

struct ThermalStatistics {
    size_t trajectories = 0;
    // linear response: Phi is the unwrapped force-induced rotation of the spin
    // coherence, Q and P the force-induced quadrature shifts
    Estimate var_phase_quarter;  // Var(Phi)/4
    Estimate cov_phase_q;        // Cov(Phi, Q)
    Estimate cov_phase_p;
    Estimate qq;                 // Delta <q^2>
    Estimate pp;
    Estimate qp_pq;              // Delta <qp + pq>
    // full state
    Estimate full_var_sx;        // Delta Var(sigma_x)/4
    Estimate full_syq;           // Delta <sigma_y q>
    Estimate full_syp;
    Estimate impulse_var;        // Var(int f dt), expected D t
};

/// White-noise force with <f(t) f(t')> = 2 gamma nbar delta(t - t') acting on
/// |+> x |0> through `seq`.
ThermalStatistics thermal_trajectories(const NaturalParams &natural, const PulseSequence &seq,
                                       const OracleConfig &cfg);

/// One-axis twisting exp(-i zeta J_z^2) of N spins polarized along x.
struct TwistedSpin {
    double jx;
    double var_plus;   // principal variances in the y-z plane
    double var_minus;
    /// Phase-estimation noise with the optimal readout rotation relative to
    /// the unsqueezed state: sqrt(4 V+ V-) / |<J_x>|.
    double phase_noise_factor;
    double min_variance_factor;  // sqrt(V- / (N/4))
};

TwistedSpin one_axis_twist(uint64_t n_spins, double zeta);

template <typename Fn>
Estimate jackknife(const OracleMoments &m, Fn &&fn) {
    Estimate e;
    e.value = fn(m.mean);
    size_t k = m.batches.size();
    if (k < 2) {
        return e;
    }
    std::vector<double> loo(k);
    double avg = 0.0;
    for (size_t i = 0; i < k; i++) {
        WitnessMoments s{};
        s.qq = s.pp = 0.0;
        auto acc = [&](const WitnessMoments &b, double w) {
            s.sx += w * b.sx;
            s.sy += w * b.sy;
            s.sz += w * b.sz;
            s.syq += w * b.syq;
            s.syp += w * b.syp;
            s.szq += w * b.szq;
            s.szp += w * b.szp;
            s.q += w * b.q;
            s.p += w * b.p;
            s.qq += w * b.qq;
            s.pp += w * b.pp;
            s.qp += w * b.qp;
        };
        for (size_t j = 0; j < k; j++) {
            if (j != i) {
                acc(m.batches[j], 1.0 / static_cast<double>(k - 1));
            }
        }
        loo[i] = fn(s);
        avg += loo[i] / static_cast<double>(k);
    }
    double ss = 0.0;
    for (double v : loo) {
        ss += (v - avg) * (v - avg);
    }
    e.error = std::sqrt(ss * static_cast<double>(k - 1) / static_cast<double>(k));
    return e;
}

}  // namespace spinlev
