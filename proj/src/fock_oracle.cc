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

#include "spinlev/fock_oracle.h"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>

#include "spinlev/parallel.h"

namespace spinlev {

namespace {

constexpr int kBatches = 20;
constexpr double kNormTolerance = 1e-10;

// Exact exponentials of w n + sigma g x (sigma = +1, -1) and of x itself.
class Propagator {
   public:
    Propagator(size_t n_max, double g, double omega) {
        Eigen::Index n = static_cast<Eigen::Index>(n_max) + 1;
        Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index k = 1; k < n; k++) {
            x(k - 1, k) = x(k, k - 1) = std::sqrt(static_cast<double>(k));
        }
        for (int s = 0; s < 2; s++) {
            Eigen::MatrixXd h = (s == 0 ? g : -g) * x;
            for (Eigen::Index k = 0; k < n; k++) {
                h(k, k) = omega * static_cast<double>(k);
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
            v_[s] = es.eigenvectors();
            d_[s] = es.eigenvalues();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
        u_ = es.eigenvectors();
        lam_ = es.eigenvalues();
    }

    void free(Eigen::VectorXcd &psi, int s, double h) const {
        Eigen::VectorXcd y = v_[s].transpose() * psi;
        for (Eigen::Index k = 0; k < y.size(); k++) {
            y[k] *= std::polar(1.0, -d_[s][k] * h);
        }
        psi = v_[s] * y;
    }

    // exp(+i f h x), i.e. the -f x term of H over h
    void kick(Eigen::VectorXcd &psi, double fh) const {
        Eigen::VectorXcd y = u_.transpose() * psi;
        for (Eigen::Index k = 0; k < y.size(); k++) {
            y[k] *= std::polar(1.0, fh * lam_[k]);
        }
        psi = u_ * y;
    }

   private:
    Eigen::MatrixXd v_[2];
    Eigen::VectorXd d_[2];
    Eigen::MatrixXd u_;
    Eigen::VectorXd lam_;
};

// Propagators keyed by cutoff, built on first use.
class PropagatorCache {
   public:
    PropagatorCache(double g, double omega) : g_(g), omega_(omega) {}

    const Propagator &get(size_t n_max) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto &slot = cache_[n_max];
        if (!slot) {
            slot = std::make_unique<Propagator>(n_max, g_, omega_);
        }
        return *slot;
    }

   private:
    double g_, omega_;
    std::mutex mutex_;
    std::map<size_t, std::unique_ptr<Propagator>> cache_;
};

double min_segment(const PulseSequence &seq) {
    double m = seq.total_time;
    for (const Segment &s : seq.segments()) {
        m = std::min(m, s.end - s.start);
    }
    return m;
}

double step_limit(const PulseSequence &seq, double omega) {
    return std::min(2.0 * kPi / omega, min_segment(seq));
}

void check_force(const PulseSequence &seq, double omega, const ForceSeries &force) {
    if (!(force.dt > 0.0)) {
        throw DomainError("force series needs dt > 0");
    }
    if (static_cast<double>(force.values.size()) * force.dt < seq.total_time * (1.0 - 1e-9)) {
        throw DomainError("force series does not cover the sequence");
    }
    if (force.dt > step_limit(seq, omega) / 64.0 * (1.0 + 1e-12)) {
        throw ResolutionError("force step too coarse: need dt <= min(2 pi / omega, segment) / 64");
    }
}

// Called after every constant stretch with the current state and whether the
// lab spin labels are exchanged relative to the initial ones.
using StepHook = std::function<void(const JointState &, bool)>;

void run(JointState &st, const Propagator &prop, const NaturalParams &nat, const PulseSequence &seq,
         const ForceSeries *force, const StepHook &hook) {
    std::vector<Segment> segs = seq.segments();
    bool flipped = false;
    auto stretch = [&](double h, double f) {
        for (int s = 0; s < 2; s++) {
            Eigen::VectorXcd &psi = st.spin[s];
            if (f == 0.0) {
                prop.free(psi, s, h);
            } else {
                prop.free(psi, s, 0.5 * h);
                prop.kick(psi, f * h);
                prop.free(psi, s, 0.5 * h);
            }
            if (nat.larmor != 0.0) {
                psi *= std::polar(1.0, (s == 0 ? -0.5 : 0.5) * nat.larmor * h);
            }
        }
        if (hook) {
            hook(st, flipped);
        }
    };
    for (size_t j = 0; j < segs.size(); j++) {
        double a = segs[j].start, b = segs[j].end;
        if (!force) {
            stretch(b - a, 0.0);
        } else {
            double t = a;
            double eps = 1e-12 * seq.total_time;
            while (t < b - eps) {
                size_t k = static_cast<size_t>(std::floor(t / force->dt));
                if ((static_cast<double>(k) + 1.0) * force->dt <= t + eps) {
                    k++;
                }
                double end = std::min(b, (static_cast<double>(k) + 1.0) * force->dt);
                k = std::min(k, force->values.size() - 1);
                stretch(end - t, force->values[k]);
                t = end;
            }
        }
        if (j + 1 < segs.size()) {
            std::swap(st.spin[0], st.spin[1]);
            flipped = !flipped;
        }
    }
    double norm = st.norm();
    if (std::abs(norm - 1.0) > kNormTolerance) {
        throw ResolutionError("norm drifted to " + std::to_string(norm));
    }
}

void check_tail(const JointState &st, double tolerance) {
    double tail = st.tail_population();
    if (tail > tolerance) {
        throw CutoffError("population " + std::to_string(tail) + " in the top Fock levels of n_max = " +
                          std::to_string(st.n_max()) + "; increase n_max");
    }
}

size_t round_up(size_t n, size_t to) {
    return (n + to - 1) / to * to;
}

Eigen::VectorXcd lower(const Eigen::VectorXcd &v) {
    Eigen::VectorXcd r = Eigen::VectorXcd::Zero(v.size());
    for (Eigen::Index k = 0; k + 1 < v.size(); k++) {
        r[k] = std::sqrt(static_cast<double>(k + 1)) * v[k + 1];
    }
    return r;
}

constexpr size_t kFields = 12;

std::array<double, kFields> pack(const WitnessMoments &m) {
    return {m.sx, m.sy, m.sz, m.syq, m.syp, m.szq, m.szp, m.q, m.p, m.qq, m.pp, m.qp};
}

WitnessMoments unpack(const std::array<double, kFields> &a) {
    WitnessMoments m;
    m.sx = a[0];
    m.sy = a[1];
    m.sz = a[2];
    m.syq = a[3];
    m.syp = a[4];
    m.szq = a[5];
    m.szp = a[6];
    m.q = a[7];
    m.p = a[8];
    m.qq = a[9];
    m.pp = a[10];
    m.qp = a[11];
    return m;
}

// Index-ordered compensated mean of samples[lo, hi).
template <typename Get>
double mean_of(size_t lo, size_t hi, Get &&get) {
    CompensatedSum<double> s;
    for (size_t i = lo; i < hi; i++) {
        s.add(get(i));
    }
    return s.value() / static_cast<double>(hi - lo);
}

// Statistic over all samples, with the spread of the same statistic over
// contiguous batches as its error.
template <typename Stat>
Estimate batched(size_t n, Stat &&stat) {
    Estimate e;
    e.value = stat(size_t{0}, n);
    std::array<double, kBatches> b;
    for (int k = 0; k < kBatches; k++) {
        b[k] = stat(n * k / kBatches, n * (k + 1) / kBatches);
    }
    double avg = 0.0;
    for (double v : b) {
        avg += v / kBatches;
    }
    double ss = 0.0;
    for (double v : b) {
        ss += (v - avg) * (v - avg);
    }
    e.error = std::sqrt(ss / (kBatches - 1) / kBatches);
    return e;
}

}  // namespace

void OracleConfig::validate() const {
    if (n_max != 0 && n_max < 4) {
        throw DomainError("n_max must be at least 4");
    }
    if (!(dt >= 0.0)) {
        throw DomainError("dt must be nonnegative");
    }
    if (!(tail_tolerance > 0.0 && tail_tolerance <= 1e-6)) {
        throw DomainError("tail_tolerance must lie in (0, 1e-6]");
    }
    if (n_trajectories == 0) {
        throw DomainError("n_trajectories must be positive");
    }
}

size_t default_cutoff(double max_abs_alpha) {
    double a = max_abs_alpha * max_abs_alpha;
    return static_cast<size_t>(std::ceil(a + 10.0 * std::sqrt(a + 1.0) + 20.0));
}

double amplitude_bound(const PulseSequence &seq, double g, double omega, cplx alpha,
                       const ForceSeries *force) {
    double best = std::abs(alpha);
    for (int sigma : {+1, -1}) {
        cplx beta = alpha;
        for (const DriveStep &s : drive_steps(seq, g, sigma, force)) {
            // arc of the circle about -c/omega: within the sagitta of its chord
            cplx center = -s.c / omega;
            double radius = std::abs(beta - center);
            double sweep = omega * s.duration;
            cplx next = center + (beta - center) * std::polar(1.0, -sweep);
            double reach = std::abs(center) + radius;
            if (sweep < kPi) {
                double chord = std::max(std::abs(beta), std::abs(next));
                reach = std::min(reach, chord + radius * (1.0 - std::cos(0.5 * sweep)));
            }
            best = std::max(best, reach);
            beta = next;
        }
    }
    return best;
}

double JointState::norm() const {
    return std::sqrt(spin[0].squaredNorm() + spin[1].squaredNorm());
}

double JointState::tail_population() const {
    double t = 0.0;
    for (const auto &v : spin) {
        Eigen::Index n = v.size();
        t += v.tail(std::min<Eigen::Index>(4, n)).squaredNorm();
    }
    return t;
}

Eigen::VectorXcd coherent_vector(cplx alpha, size_t n_max) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(n_max) + 1);
    v[0] = std::exp(-0.5 * std::norm(alpha));
    for (Eigen::Index k = 1; k < v.size(); k++) {
        v[k] = v[k - 1] * alpha / std::sqrt(static_cast<double>(k));
    }
    return v;
}

JointState JointState::product(cplx c0, cplx c1, cplx alpha, size_t n_max) {
    if (n_max < 4) {
        throw DomainError("n_max must be at least 4");
    }
    double s = std::sqrt(std::norm(c0) + std::norm(c1));
    if (s == 0.0) {
        throw DomainError("spin amplitudes vanish");
    }
    Eigen::VectorXcd v = coherent_vector(alpha, n_max);
    v /= v.norm();
    JointState st;
    st.spin[0] = (c0 / s) * v;
    st.spin[1] = (c1 / s) * v;
    return st;
}

JointState evolve(const JointState &state, const NaturalParams &natural, const PulseSequence &seq,
                  const ForceSeries *force, const OracleConfig &cfg) {
    cfg.validate();
    seq.validate();
    if (std::abs(state.norm() - 1.0) > kNormTolerance) {
        throw DomainError("initial state is not normalized");
    }
    check_tail(state, cfg.tail_tolerance);
    if (force) {
        check_force(seq, natural.omega, *force);
    }
    Propagator prop(state.n_max(), natural.g, natural.omega);
    JointState st = state;
    run(st, prop, natural, seq, force, nullptr);
    check_tail(st, cfg.tail_tolerance);
    return st;
}

double branch_fidelity(const EntangledState &closed, const JointState &oracle) {
    size_t n = oracle.n_max();
    int i0 = closed.spin_flipped ? 1 : 0;
    JointState c;
    c.spin[i0] = closed.branch0.amplitude * coherent_vector(closed.branch0.alpha, n);
    c.spin[1 - i0] = closed.branch1.amplitude * coherent_vector(closed.branch1.alpha, n);
    double nc = c.norm(), no = oracle.norm();
    cplx overlap = c.spin[0].dot(oracle.spin[0]) + c.spin[1].dot(oracle.spin[1]);
    return std::min(1.0, std::norm(overlap) / (nc * nc * no * no));
}

WitnessMoments state_moments(const JointState &st) {
    const Eigen::VectorXcd &u = st.spin[0], &d = st.spin[1];
    Eigen::VectorXcd au = lower(u), ad = lower(d);
    auto q_el = [](const Eigen::VectorXcd &x, const Eigen::VectorXcd &ax, const Eigen::VectorXcd &y,
                   const Eigen::VectorXcd &ay) { return (x.dot(ay) + ax.dot(y)) / std::sqrt(2.0); };
    auto p_el = [](const Eigen::VectorXcd &x, const Eigen::VectorXcd &ax, const Eigen::VectorXcd &y,
                   const Eigen::VectorXcd &ay) {
        return (x.dot(ay) - ax.dot(y)) / cplx(0.0, std::sqrt(2.0));
    };
    WitnessMoments m;
    cplx c = u.dot(d);
    m.sx = 2.0 * c.real();
    m.sy = 2.0 * c.imag();
    m.sz = u.squaredNorm() - d.squaredNorm();
    m.syq = 2.0 * q_el(u, au, d, ad).imag();
    m.syp = 2.0 * p_el(u, au, d, ad).imag();
    double qu = q_el(u, au, u, au).real(), qd = q_el(d, ad, d, ad).real();
    double pu = p_el(u, au, u, au).real(), pd = p_el(d, ad, d, ad).real();
    m.szq = qu - qd;
    m.szp = pu - pd;
    m.q = qu + qd;
    m.p = pu + pd;
    cplx a2 = u.dot(lower(au)) + d.dot(lower(ad));
    double n = au.squaredNorm() + ad.squaredNorm();
    double norm2 = u.squaredNorm() + d.squaredNorm();
    m.qq = a2.real() + n + 0.5 * norm2;
    m.pp = -a2.real() + n + 0.5 * norm2;
    m.qp = a2.imag();
    return m;
}

double optimal_wen(const WitnessMoments &m) {
    return witness_value(m, optimize_coefficients(m));
}

OracleMoments witness_moments(const NaturalParams &natural, const PulseSequence &seq, double nbar,
                              const OracleConfig &cfg) {
    cfg.validate();
    seq.validate();
    if (!(nbar >= 0.0)) {
        throw DomainError("nbar must be nonnegative");
    }
    const cplx plus = 1.0 / std::sqrt(2.0);
    OracleMoments out;
    if (nbar == 0.0) {
        size_t n = cfg.n_max ? cfg.n_max
                             : default_cutoff(amplitude_bound(seq, natural.g, natural.omega, 0.0));
        JointState st = evolve(JointState::product(plus, plus, 0.0, n), natural, seq, nullptr, cfg);
        out.mean = state_moments(st);
        out.stderr_ = unpack({});
        out.samples = 1;
        return out;
    }
    size_t ns = cfg.n_trajectories;
    if (ns < static_cast<size_t>(kBatches)) {
        throw DomainError("thermal moments need at least 20 samples");
    }
    // Glauber-P: alpha complex Gaussian with <|alpha|^2> = nbar
    std::vector<cplx> alpha(ns);
    double bound = 0.0;
    for (size_t i = 0; i < ns; i++) {
        std::mt19937_64 rng(stream_seed(cfg.seed, i));
        std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * nbar));
        double re = normal(rng);
        double im = normal(rng);
        alpha[i] = {re, im};
        bound = std::max(bound, std::abs(alpha[i]));
    }
    size_t n = cfg.n_max ? cfg.n_max
                         : default_cutoff(amplitude_bound(seq, natural.g, natural.omega, bound));
    Propagator prop(n, natural.g, natural.omega);
    std::vector<std::array<double, kFields>> rows(ns);
    parallel_for(ns, cfg.threads, [&](size_t i) {
        JointState st = JointState::product(plus, plus, alpha[i], n);
        check_tail(st, cfg.tail_tolerance);
        run(st, prop, natural, seq, nullptr, nullptr);
        check_tail(st, cfg.tail_tolerance);
        rows[i] = pack(state_moments(st));
    });
    std::array<double, kFields> mean{}, err{};
    std::array<std::array<double, kFields>, kBatches> batch{};
    for (size_t f = 0; f < kFields; f++) {
        auto get = [&](size_t i) { return rows[i][f]; };
        mean[f] = mean_of(0, ns, get);
        double avg = 0.0;
        for (int k = 0; k < kBatches; k++) {
            batch[k][f] = mean_of(ns * k / kBatches, ns * (k + 1) / kBatches, get);
            avg += batch[k][f] / kBatches;
        }
        double ss = 0.0;
        for (int k = 0; k < kBatches; k++) {
            ss += (batch[k][f] - avg) * (batch[k][f] - avg);
        }
        err[f] = std::sqrt(ss / (kBatches - 1) / kBatches);
    }
    out.mean = unpack(mean);
    out.stderr_ = unpack(err);
    for (const auto &b : batch) {
        out.batches.push_back(unpack(b));
    }
    out.samples = ns;
    return out;
}

ThermalStatistics thermal_trajectories(const NaturalParams &natural, const PulseSequence &seq,
                                       const OracleConfig &cfg) {
    cfg.validate();
    seq.validate();
    if (cfg.n_trajectories < 100) {
        throw DomainError("thermal_trajectories needs at least 100 trajectories");
    }
    double omega = natural.omega, g = natural.g;
    double rate = natural.gamma * natural.nbar;  // <f f> = 2 rate delta
    if (!(rate >= 0.0)) {
        throw DomainError("gamma * nbar must be nonnegative");
    }
    size_t nt = cfg.n_trajectories;
    ThermalStatistics out;
    out.trajectories = nt;
    if (rate == 0.0) {
        return out;
    }
    double limit = step_limit(seq, omega);
    double dt = cfg.dt > 0.0 ? cfg.dt : limit / 128.0;
    if (dt > limit / 64.0 * (1.0 + 1e-12)) {
        throw ResolutionError("dt too coarse: need dt <= min(2 pi / omega, segment) / 64");
    }
    if (rate * dt > 0.1) {
        throw ResolutionError("dt too coarse for the white-noise rate (gamma nbar dt > 0.1)");
    }
    double tau = seq.total_time;
    size_t steps = static_cast<size_t>(std::ceil(tau / dt - 1e-9));
    double sigma_f = std::sqrt(2.0 * rate / dt);
    const cplx plus = 1.0 / std::sqrt(2.0);

    PropagatorCache cache(g, omega);
    // unwrapped angle of <psi_b0|psi_b1>, following the branch labels
    auto evolve_tracked = [&](const ForceSeries &f, double &angle) {
        size_t n = cfg.n_max ? cfg.n_max
                             : round_up(default_cutoff(amplitude_bound(seq, g, omega, 0.0, &f)), 8);
        JointState st = JointState::product(plus, plus, 0.0, n);
        cplx prev = st.spin[0].dot(st.spin[1]);
        angle = 0.0;
        run(st, cache.get(n), natural, seq, &f, [&](const JointState &s, bool flipped) {
            int b0 = flipped ? 1 : 0;
            cplx c = s.spin[b0].dot(s.spin[1 - b0]);
            angle += std::arg(c / prev);
            prev = c;
        });
        check_tail(st, cfg.tail_tolerance);
        return st;
    };

    ForceSeries quiet{dt, std::vector<double>(steps, 0.0)};
    double angle0 = 0.0;
    WitnessMoments m0 = state_moments(evolve_tracked(quiet, angle0));

    struct Row {
        double phi, dq, dp, impulse;
        WitnessMoments m;
    };
    std::vector<Row> rows(nt);
    parallel_for(nt, cfg.threads, [&](size_t i) {
        std::mt19937_64 rng(stream_seed(cfg.seed, i));
        std::normal_distribution<double> normal(0.0, sigma_f);
        ForceSeries f{dt, std::vector<double>(steps)};
        CompensatedSum<double> impulse;
        for (size_t k = 0; k < steps; k++) {
            f.values[k] = normal(rng);
            double h = std::min(dt, tau - static_cast<double>(k) * dt);
            impulse.add(f.values[k] * h);
        }
        double angle = 0.0;
        Row r;
        r.m = state_moments(evolve_tracked(f, angle));
        r.phi = angle - angle0;
        r.dq = r.m.q - m0.q;
        r.dp = r.m.p - m0.p;
        r.impulse = impulse.value();
        rows[i] = r;
    });

    auto cov = [&](auto x, auto y) {
        return [&rows, x, y](size_t lo, size_t hi) {
            double mx = mean_of(lo, hi, [&](size_t i) { return x(rows[i]); });
            double my = mean_of(lo, hi, [&](size_t i) { return y(rows[i]); });
            double s = mean_of(lo, hi, [&](size_t i) { return (x(rows[i]) - mx) * (y(rows[i]) - my); });
            return s * static_cast<double>(hi - lo) / static_cast<double>(hi - lo - 1);
        };
    };
    auto phi = [](const Row &r) { return r.phi; };
    auto dq = [](const Row &r) { return r.dq; };
    auto dp = [](const Row &r) { return r.dp; };
    auto imp = [](const Row &r) { return r.impulse; };
    auto shifted = [&](auto field, double base, double scale) {
        return [&rows, field, base, scale](size_t lo, size_t hi) {
            return scale * (mean_of(lo, hi, [&](size_t i) { return field(rows[i].m); }) - base);
        };
    };

    Estimate v = batched(nt, cov(phi, phi));
    out.var_phase_quarter = {0.25 * v.value, 0.25 * v.error};
    out.cov_phase_q = batched(nt, cov(phi, dq));
    out.cov_phase_p = batched(nt, cov(phi, dp));
    out.qq = batched(nt, shifted([](const WitnessMoments &m) { return m.qq; }, m0.qq, 1.0));
    out.pp = batched(nt, shifted([](const WitnessMoments &m) { return m.pp; }, m0.pp, 1.0));
    out.qp_pq = batched(nt, shifted([](const WitnessMoments &m) { return m.qp; }, m0.qp, 2.0));
    out.full_syq = batched(nt, shifted([](const WitnessMoments &m) { return m.syq; }, m0.syq, 1.0));
    out.full_syp = batched(nt, shifted([](const WitnessMoments &m) { return m.syp; }, m0.syp, 1.0));
    out.full_var_sx = batched(nt, [&](size_t lo, size_t hi) {
        double sx = mean_of(lo, hi, [&](size_t i) { return rows[i].m.sx; });
        return 0.25 * (m0.sx * m0.sx - sx * sx);
    });
    out.impulse_var = batched(nt, cov(imp, imp));
    return out;
}

TwistedSpin one_axis_twist(uint64_t n_spins, double zeta) {
    if (n_spins == 0) {
        throw DomainError("n_spins must be at least 1");
    }
    double n = static_cast<double>(n_spins);
    TwistedSpin t;
    if (n_spins == 1) {
        // J_z^2 = 1/4 is a c-number
        t.jx = 0.5;
        t.var_plus = t.var_minus = 0.25;
        t.phase_noise_factor = t.min_variance_factor = 1.0;
        return t;
    }
    double mu = 2.0 * zeta;
    double a = 1.0 - std::pow(std::cos(mu), n - 2.0);
    double b = 4.0 * std::sin(0.5 * mu) * std::pow(std::cos(0.5 * mu), n - 2.0);
    double r = std::sqrt(a * a + b * b);
    t.jx = 0.5 * n * std::pow(std::cos(0.5 * mu), n - 1.0);
    t.var_plus = 0.25 * n * (1.0 + 0.25 * (n - 1.0) * (a + r));
    t.var_minus = 0.25 * n * (1.0 + 0.25 * (n - 1.0) * (a - r));
    t.phase_noise_factor = std::sqrt(4.0 * t.var_plus * t.var_minus) / std::abs(t.jx);
    t.min_variance_factor = std::sqrt(t.var_minus / (0.25 * n));
    return t;
}

}  // namespace spinlev
