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

// spinlev command-line front end.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinlev/acceptance.h"
#include "spinlev/core_model.h"
#include "spinlev/magnus_dynamics.h"
#include "spinlev/parallel.h"
#include "spinlev/pulse_kernel.h"
#include "spinlev/sensing.h"
#include "spinlev/witness.h"

using json = nlohmann::json;
using namespace spinlev;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    uint64_t seed = 1;
    std::optional<int> threads;

    int thread_count() const {
        if (threads) {
            return std::max(1, *threads);
        }
        if (const char *env = std::getenv("SPINLEV_THREADS")) {
            char *end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end != env && *end == '\0' && v > 0) {
                return static_cast<int>(v);
            }
            throw UsageError("SPINLEV_THREADS must be a positive integer");
        }
        return 1;
    }
};

// ---- output ----

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", x);
    return buf;
}

json jnum(double x) {
    return std::isfinite(x) ? json(x) : json(nullptr);
}

class Table {
   public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

    void row(std::vector<json> cells) {
        rows_.push_back(std::move(cells));
    }

    std::string csv() const {
        std::ostringstream os;
        for (size_t i = 0; i < header_.size(); i++) {
            os << (i ? "," : "") << header_[i];
        }
        os << "\n";
        for (const auto &r : rows_) {
            for (size_t i = 0; i < r.size(); i++) {
                os << (i ? "," : "");
                const json &c = r[i];
                if (c.is_number_float()) {
                    os << num(c.get<double>());
                } else if (c.is_null()) {
                    os << "nan";
                } else if (c.is_string()) {
                    os << c.get<std::string>();
                } else {
                    os << c.dump();
                }
            }
            os << "\n";
        }
        return os.str();
    }

    json to_json() const {
        json out = json::array();
        for (const auto &r : rows_) {
            json o = json::object();
            for (size_t i = 0; i < r.size(); i++) {
                const json &c = r[i];
                o[header_[i]] = c.is_number_float() ? jnum(c.get<double>()) : c;
            }
            out.push_back(o);
        }
        return out;
    }

   private:
    std::vector<std::string> header_;
    std::vector<std::vector<json>> rows_;
};

// temp file + rename; "-" or empty writes to stdout
void write_output(const std::string &path, const std::string &text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        f << text;
        f.flush();
        if (!f) {
            throw std::runtime_error("write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot move output into place: " + ec.message());
    }
}

// ---- config ----

const std::set<std::string> kKnownKeys = {
    "mass_kg",       "freq_hz",        "gradient_t_per_m", "gamma_e_rad_per_s_t", "n_spins",
    "q_factor",      "temperature_k",  "nbar",             "t2_s",                "t2star_s",
    "cooling_rate_hz", "cooling_time_s", "larmor_hz",      "sequence",            "sequences",
    "tau_s",         "omega_tau",      "sweep",            "nbar_over_q",         "nu_hz",
    "coupling",      "mode",           "initial",          "g_over_omega",        "n_samples",
    "alpha",         "comment"};

json load_config(const Globals &g) {
    if (g.config_path.empty()) {
        return json::object();
    }
    std::ifstream f(g.config_path);
    if (!f) {
        throw UsageError("cannot read config " + g.config_path);
    }
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error &e) {
        throw UsageError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw UsageError("config must be a JSON object");
    }
    for (const auto &[k, v] : j.items()) {
        (void)v;
        if (!kKnownKeys.count(k)) {
            throw UsageError("unknown config key '" + k + "'");
        }
    }
    return j;
}

template <typename T>
T get(const json &j, const char *key, T fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception &) {
        throw UsageError(std::string("config key '") + key + "' has the wrong type");
    }
}

bool has_params(const json &j) {
    return j.contains("mass_kg") || j.contains("freq_hz");
}

PhysicalParams physical_params(const json &j) {
    if (!j.contains("mass_kg") || !j.contains("freq_hz")) {
        throw UsageError("config needs mass_kg and freq_hz");
    }
    PhysicalParams p;
    p.mass = get<double>(j, "mass_kg", 0.0);
    p.trap_frequency = 2.0 * kPi * get<double>(j, "freq_hz", 0.0);
    p.gradient = get<double>(j, "gradient_t_per_m", 0.0);
    p.gyromagnetic_ratio = get<double>(j, "gamma_e_rad_per_s_t", kDefaultGammaE);
    p.n_spins = get<uint64_t>(j, "n_spins", 1);
    p.quality_factor = get<double>(j, "q_factor", 1.0);
    if (j.contains("temperature_k") && j.contains("nbar")) {
        throw UsageError("give temperature_k or nbar, not both");
    }
    if (j.contains("temperature_k")) {
        p.temperature = get<double>(j, "temperature_k", 0.0);
    } else {
        p.nbar = get<double>(j, "nbar", 0.0);
    }
    p.t2 = get<double>(j, "t2_s", 0.0);
    p.t2_star = get<double>(j, "t2star_s", 0.0);
    p.cooling_rate = get<double>(j, "cooling_rate_hz", 0.0);
    p.cooling_time = get<double>(j, "cooling_time_s", 0.0);
    p.larmor_frequency = 2.0 * kPi * get<double>(j, "larmor_hz", 0.0);
    try {
        p.validate();
    } catch (const DomainError &e) {
        throw UsageError(e.what());
    }
    return p;
}

SequenceKind sequence_kind(const std::string &name) {
    try {
        SequenceKind k = parse_kind(name);
        if (k == SequenceKind::Custom) {
            throw DomainError("custom");
        }
        return k;
    } catch (const std::exception &) {
        throw UsageError("unknown sequence '" + name + "' (ramsey, hahn_echo, carr_purcell2)");
    }
}

std::vector<SequenceKind> sequences(const json &j) {
    if (j.contains("sequence")) {
        return {sequence_kind(get<std::string>(j, "sequence", ""))};
    }
    std::vector<SequenceKind> out;
    for (const std::string &s : get<std::vector<std::string>>(
             j, "sequences", {"ramsey", "hahn_echo", "carr_purcell2"})) {
        out.push_back(sequence_kind(s));
    }
    return out;
}

struct Sweep {
    std::string variable;
    std::vector<double> values;
};

Sweep sweep(const json &j, const std::set<std::string> &allowed) {
    if (!j.contains("sweep") || !j.at("sweep").is_object()) {
        throw UsageError("config needs a sweep object {variable, start, stop, points, scale}");
    }
    const json &s = j.at("sweep");
    Sweep out;
    out.variable = get<std::string>(s, "variable", "");
    if (!allowed.count(out.variable)) {
        std::string list;
        for (const auto &a : allowed) {
            list += (list.empty() ? "" : ", ") + a;
        }
        throw UsageError("sweep variable '" + out.variable + "' is not one of " + list);
    }
    double start = get<double>(s, "start", NAN), stop = get<double>(s, "stop", NAN);
    int64_t points = get<int64_t>(s, "points", 0);
    std::string scale = get<std::string>(s, "scale", "log");
    if (!(start < stop)) {
        throw UsageError("sweep needs start < stop");
    }
    if (points < 2) {
        throw UsageError("sweep needs at least 2 points");
    }
    if (scale != "log" && scale != "linear") {
        throw UsageError("sweep scale must be log or linear");
    }
    if (scale == "log" && !(start > 0.0)) {
        throw UsageError("log sweeps need start > 0");
    }
    for (int64_t i = 0; i < points; i++) {
        double f = static_cast<double>(i) / static_cast<double>(points - 1);
        out.values.push_back(scale == "log" ? start * std::pow(stop / start, f) : start + (stop - start) * f);
    }
    out.values.back() = stop;
    return out;
}

// ---- commands ----

std::string emit(const Globals &g, const Table &t, json extra = nullptr) {
    if (g.format == "json") {
        json doc = extra.is_null() ? t.to_json() : json{{"rows", t.to_json()}, {"landmarks", extra}};
        return doc.dump(2) + "\n";
    }
    return t.csv();
}

int cmd_sensitivity(const Globals &g) {
    json cfg = load_config(g);
    PhysicalParams p = physical_params(cfg);
    NaturalParams n = to_natural(p);
    Sweep sw = sweep(cfg, {"g", "tau", "nu"});
    std::vector<SequenceKind> kinds = sequences(cfg);
    double tau = get<double>(cfg, "tau_s", 1e-4);
    double nu_hz = get<double>(cfg, "nu_hz", 0.0);
    std::vector<double> noq = cfg.contains("nbar_over_q")
                                  ? (cfg.at("nbar_over_q").is_array() ? get<std::vector<double>>(cfg, "nbar_over_q", {})
                                                                      : std::vector<double>{get<double>(cfg, "nbar_over_q", 0.0)})
                                  : std::vector<double>{n.nbar / p.quality_factor};
    std::string coupling = get<std::string>(cfg, "coupling", "optimal");
    if (coupling != "optimal" && coupling != "gradient") {
        throw UsageError("coupling must be optimal or gradient");
    }
    if (!(tau > 0.0)) {
        throw UsageError("tau_s must be positive");
    }
    if (!(p.cooling_rate * p.cooling_time > 0.0)) {
        throw UsageError("sensitivity needs cooling_rate_hz * cooling_time_s > 0");
    }
    int threads = g.thread_count();

    Table t({"sweep_name", "sweep_value", "eta_n_per_sqrt_hz", "projection_var", "backaction_var",
             "thermal_var", "sequence", "nbar_over_q"});
    for (SequenceKind k : kinds) {
        for (double q : noq) {
            SensitivityOptions opt;
            opt.nbar_over_q = q;
            opt.optimal_coupling = coupling == "optimal" && sw.variable != "g";
            std::vector<SensitivityPoint> pts(sw.values.size());
            parallel_for(sw.values.size(), threads, [&](size_t i) {
                double v = sw.values[i];
                if (sw.variable == "nu") {
                    pts[i] = force_sensitivity(p, PulseSequence::make(k, tau), 2.0 * kPi * v, opt);
                } else if (sw.variable == "tau") {
                    pts[i] = force_sensitivity(p, PulseSequence::make(k, v), 2.0 * kPi * nu_hz, opt);
                } else {
                    PhysicalParams pg = with_coupling(p, v * n.omega);
                    pts[i] = force_sensitivity(pg, PulseSequence::make(k, tau), 2.0 * kPi * nu_hz, opt);
                }
            });
            for (size_t i = 0; i < pts.size(); i++) {
                t.row({sw.variable, sw.values[i], pts[i].eta, pts[i].budget.projection_var,
                       pts[i].budget.backaction_var, pts[i].budget.thermal_var, std::string(kind_name(k)), q});
            }
        }
    }
    write_output(g.out_path, emit(g, t));
    return kExitOk;
}

json landmarks_json(const ScanLandmarks &l) {
    auto opt = [](const std::optional<double> &v) { return v ? jnum(*v) : json(nullptr); };
    return {{"tau_asymp", opt(l.tau_asymp)}, {"tau_star", opt(l.tau_star)}, {"max_nbar", opt(l.max_nbar)}};
}

int cmd_witness(const Globals &g) {
    json cfg = load_config(g);
    ScanConfig sc;
    std::string mode = get<std::string>(cfg, "mode", "pulsed");
    std::string initial = get<std::string>(cfg, "initial", "thermal");
    if (mode != "pulsed" && mode != "pulseless") {
        throw UsageError("mode must be pulsed or pulseless");
    }
    if (initial != "thermal" && initial != "ground") {
        throw UsageError("initial must be thermal or ground");
    }
    sc.mode = mode == "pulsed" ? WitnessMode::Pulsed : WitnessMode::Pulseless;
    sc.initial = initial == "thermal" ? InitialState::Thermal : InitialState::Ground;
    Sweep sw = sweep(cfg, {"t", "nbar"});
    sc.sweep = sw.variable == "t" ? SweepVariable::Time : SweepVariable::Nbar;
    sc.grid = sw.values;
    // natural units unless physical parameters are supplied
    double omega = 1.0, nbar = get<double>(cfg, "nbar", 0.0), larmor = 0.0, g_phys = 0.0;
    if (has_params(cfg)) {
        PhysicalParams p = physical_params(cfg);
        NaturalParams n = to_natural(p);
        omega = n.omega;
        nbar = n.nbar;
        larmor = n.larmor;
        g_phys = n.g;
    }
    sc.omega = omega;
    sc.g = cfg.contains("g_over_omega") ? get<double>(cfg, "g_over_omega", 0.0) * omega : g_phys;
    sc.nbar = nbar;
    sc.omega_l = larmor;
    sc.tau = get<double>(cfg, "tau_s", 0.0);
    sc.nbar_over_q = get<double>(cfg, "nbar_over_q", 0.0);
    sc.threads = g.thread_count();
    if (sc.sweep == SweepVariable::Nbar && !(sc.tau > 0.0)) {
        throw UsageError("nbar sweeps need tau_s > 0");
    }
    ScanResult r;
    try {
        r = violation_scan(sc);
    } catch (const DomainError &e) {
        throw UsageError(e.what());
    }
    Table t({"sweep_name", "sweep_value", "w_b", "w_en", "w_ratio", "log10_w_ratio"});
    for (const ScanRow &row : r.rows) {
        t.row({std::string(sweep_name(sc.sweep)), row.sweep_value, row.w_b, row.w_en, row.w_ratio,
               row.log10_w_ratio});
    }
    json marks = landmarks_json(r.landmarks);
    if (g.format == "json") {
        write_output(g.out_path, emit(g, t, marks));
    } else {
        write_output(g.out_path, t.csv());
        if (g.out_path.empty() || g.out_path == "-") {
            std::cerr << marks.dump() << "\n";
        } else {
            write_output(g.out_path + ".landmarks.json", marks.dump(2) + "\n");
        }
    }
    return kExitOk;
}

int cmd_table(const Globals &g) {
    json cfg = load_config(g);
    std::vector<double> xs = cfg.contains("omega_tau") && cfg.at("omega_tau").is_array()
                                 ? get<std::vector<double>>(cfg, "omega_tau", {})
                                 : std::vector<double>{get<double>(cfg, "omega_tau", 0.1)};
    double omega = has_params(cfg) ? physical_params(cfg).trap_frequency : 1.0;
    const double xi = 0.25;
    Table t({"sequence", "omega_tau", "quantity", "leading_order", "exact", "ratio"});
    for (SequenceKind k : sequences(cfg)) {
        for (double x : xs) {
            if (!(x > 0.0)) {
                throw UsageError("omega_tau must be positive");
            }
            double tau = x / omega;
            auto seq = PulseSequence::make(k, tau);
            LeadingOrderRow lo = leading_order_row(k, 1.0, omega, tau);
            double t3 = tau * tau * tau;
            double zeta_lo = k == SequenceKind::Ramsey ? omega * t3 / 6.0
                             : k == SequenceKind::HahnEcho ? -omega * t3 / 12.0
                                                           : -omega * t3 / 48.0;
            struct Q {
                const char *name;
                double lead, exact;
            } rows[] = {
                {"phi_per_gf", lo.phi_per_gf, std::abs(phase_kernel(seq, 1.0, omega, 0.0))},
                {"delta_n_per_g2", lo.delta_n_per_g2, residual_displacement(seq, 1.0, omega).delta_n},
                {"zeta_per_g2", zeta_lo, squeezing_parameter(seq, 1.0, omega)},
                {"force_sql_over_xi_quarter", lo.force_sql_scale, force_sql(seq, omega, xi) / std::pow(xi, 0.25)},
                {"g_star_one_spin_xi_quarter", lo.g_star_scale, optimal_coupling(seq, omega, xi, 1)},
            };
            for (const Q &q : rows) {
                t.row({std::string(kind_name(k)), x, q.name, q.lead, q.exact, q.exact / q.lead});
            }
        }
    }
    write_output(g.out_path, emit(g, t));
    return kExitOk;
}

int cmd_trajectory(const Globals &g) {
    json cfg = load_config(g);
    std::vector<SequenceKind> kinds = sequences(cfg);
    if (kinds.size() != 1) {
        throw UsageError("trajectory takes a single sequence");
    }
    double omega = 1.0, gc = 0.0;
    if (has_params(cfg)) {
        NaturalParams n = to_natural(physical_params(cfg));
        omega = n.omega;
        gc = n.g;
    }
    if (cfg.contains("g_over_omega")) {
        gc = get<double>(cfg, "g_over_omega", 0.0) * omega;
    }
    double tau = cfg.contains("tau_s") ? get<double>(cfg, "tau_s", 0.0) : get<double>(cfg, "omega_tau", 0.2 * kPi) / omega;
    int64_t samples = get<int64_t>(cfg, "n_samples", 201);
    std::vector<double> a = get<std::vector<double>>(cfg, "alpha", {0.0, 0.0});
    if (!(tau > 0.0) || samples < 2 || a.size() != 2) {
        throw UsageError("trajectory needs tau > 0, n_samples >= 2 and alpha = [re, im]");
    }
    auto seq = PulseSequence::make(kinds[0], tau);
    Table t({"t_s", "x_ho_units", "p_ho_units", "branch"});
    for (int branch : {0, 1}) {
        for (const PhasePoint &pt : trajectory(seq, gc, omega, branch,
                                               static_cast<size_t>(samples), cplx(a[0], a[1]))) {
            t.row({pt.t, pt.x, pt.p, branch});
        }
    }
    write_output(g.out_path, emit(g, t));
    return kExitOk;
}

int cmd_verify(const Globals &g) {
    AcceptanceOptions opt;
    opt.seed = g.seed;
    opt.threads = g.thread_count();
    std::vector<Check> checks = run_acceptance(opt);
    if (g.format == "json") {
        write_output(g.out_path, report_json(checks));
    } else {
        Table t({"check_name", "criterion", "expected", "observed", "tolerance", "pass"});
        for (const Check &c : checks) {
            t.row({c.name, c.criterion, c.expected, c.observed, c.tolerance, c.pass ? "true" : "false"});
        }
        write_output(g.out_path, t.csv());
    }
    bool ok = true;
    for (const Check &c : checks) {
        if (!c.pass) {
            std::cerr << "FAILED " << c.name << "\n";
            ok = false;
        }
    }
    return ok ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"spinlev: spin-oscillator force sensing and entanglement witness tools"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--out", g.out_path, "output file (default stdout)");
    app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", g.seed, "random seed");
    app.add_option_function<int>("--threads", [&](const int &n) { g.threads = n; }, "worker threads")
        ->check(CLI::PositiveNumber);

    struct Command {
        const char *name;
        const char *help;
        int (*run)(const Globals &);
    };
    const Command commands[] = {
        {"sensitivity", "force sensitivity sweeps", cmd_sensitivity},
        {"witness", "entanglement witness violation scans", cmd_witness},
        {"table", "leading-order vs exact per-sequence quantities", cmd_table},
        {"trajectory", "phase-space trajectories of the two spin branches", cmd_trajectory},
        {"verify", "run the acceptance suite", cmd_verify},
    };
    for (const Command &c : commands) {
        app.add_subcommand(c.name, c.help);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }
    try {
        for (const Command &c : commands) {
            if (app.got_subcommand(c.name)) {
                return c.run(g);
            }
        }
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError &e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailed;
    }
    return kExitUsage;
}
