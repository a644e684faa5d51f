// Command-line front end for the two-level laser photon-statistics toolkit.
//
// Subcommands: steady, spectrum, fano, simulate, compare, sweep.
// Exit codes: 0 success, 2 validation error, 3 statistical gate failure
// (compare only).

#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <twolevel/twolevel.hpp>

namespace tl = twolevel;
using nlohmann::json;

namespace {

constexpr const char* TOOL_VERSION = "0.1.0";

std::vector<double> log_grid(double lo, double hi, int n) {
    if (n < 1) throw std::invalid_argument("grid needs at least one point");
    if (!(lo > 0.0)) throw std::invalid_argument("log grid requires a positive lower bound");
    if (n == 1) return {lo};
    if (!(hi > lo)) throw std::invalid_argument("grid upper bound must exceed lower bound");
    std::vector<double> g(n);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i) g[i] = std::exp(llo + (lhi - llo) * double(i) / double(n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
    if (n < 1) throw std::invalid_argument("grid needs at least one point");
    if (n == 1) return {lo};
    if (!(hi > lo)) throw std::invalid_argument("grid upper bound must exceed lower bound");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * double(i) / double(n - 1);
    g.back() = hi;
    return g;
}

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Shared option state for one subcommand: physical parameters, simulation
// configuration, and the merge logic (defaults, then --config file, then
// explicit flags).
struct CommonOpts {
    std::string config_path;
    bool stamp = false;

    double N = 1e5, alpha = 6.32, gamma = 0.0, J = 0.0, xi = 1.0;
    CLI::Option *oN = nullptr, *oAlpha = nullptr, *oGamma = nullptr, *oJ = nullptr,
                *oXi = nullptr;

    double duration = 1000.0, burn_in = 0.0, sample_interval = -1.0;
    std::uint64_t seed = 1, stream = 0;
    bool no_detections = false;
    CLI::Option *oDur = nullptr, *oBurn = nullptr, *oSi = nullptr, *oSeed = nullptr,
                *oStream = nullptr, *oNoDet = nullptr;

    void add_param_opts(CLI::App* cmd) {
        cmd->add_option("--config", config_path,
                        "JSON config file (flat keys or a previous run manifest)");
        oN = cmd->add_option("--N", N, "number of active atoms");
        oAlpha = cmd->add_option("--alpha", alpha, "photon absorption/detection rate");
        oGamma = cmd->add_option("--gamma", gamma, "spontaneous decay rate");
        oJ = cmd->add_option("--J", J, "mean pump rate");
        oXi = cmd->add_option("--xi", xi, "pump noise parameter in [0,1]");
        cmd->add_flag("--stamp", stamp, "add a UTC timestamp to the manifest");
    }

    void add_sim_opts(CLI::App* cmd) {
        oDur = cmd->add_option("--duration", duration, "total simulated time");
        oBurn = cmd->add_option("--burn-in", burn_in, "discarded initial interval");
        oSi = cmd->add_option("--sample-interval", sample_interval,
                              "state sample spacing (default: detection bin width)");
        oSeed = cmd->add_option("--seed", seed, "RNG seed");
        oStream = cmd->add_option("--stream", stream, "independent trajectory index");
        oNoDet = cmd->add_flag("--no-detections", no_detections,
                               "do not record detection timestamps");
    }

    // Resolves params and config with the merge order defaults -> config
    // file -> flags, and returns whether the config file pinned pump_mode.
    bool resolve(tl::LaserParams& p, tl::SimConfig& c) const {
        bool pump_mode_set = false;
        if (!config_path.empty()) {
            const auto doc = tl::io::load_json_file(config_path);
            pump_mode_set = tl::io::apply_config_json(doc, p, c).pump_mode_set;
        }
        if (oN && oN->count()) p.N = N;
        if (oAlpha && oAlpha->count()) p.alpha = alpha;
        if (oGamma && oGamma->count()) p.gamma = gamma;
        if (oJ && oJ->count()) p.J = J;
        if (oXi && oXi->count()) p.xi = xi;
        if (oDur && oDur->count()) c.duration = duration;
        if (oBurn && oBurn->count()) c.burn_in = burn_in;
        if (oSi && oSi->count()) c.sample_interval = sample_interval;
        if (oSeed && oSeed->count()) c.seed = seed;
        if (oStream && oStream->count()) c.stream = stream;
        if (oNoDet && oNoDet->count()) c.record_detections = false;
        return pump_mode_set;
    }

    tl::LaserParams resolve_params() const {
        tl::LaserParams p;
        p.N = 1e5;
        p.alpha = 6.32;
        tl::SimConfig ignored;
        resolve(p, ignored);
        return tl::validate_params(p);
    }
};

// Derives the simulated pump mode from xi, which is the source of truth;
// only xi in {0, 1} has a microscopic pump realization.
tl::PumpMode pump_mode_from_xi(const tl::LaserParams& p, bool pump_mode_set,
                               tl::PumpMode configured) {
    if (p.xi != 0.0 && p.xi != 1.0)
        throw std::invalid_argument("simulable pumps are xi in {0, 1}; got xi = " +
                                    tl::io::format_sig(p.xi));
    const auto derived = p.xi == 1.0 ? tl::PumpMode::Poissonian : tl::PumpMode::Regular;
    if (pump_mode_set && configured != derived)
        throw std::invalid_argument("configured pump_mode contradicts xi");
    return derived;
}

json make_manifest(const std::string& command, const tl::LaserParams& p,
                   const std::vector<std::string>& outputs, bool stamp) {
    json m{{"command", command},
           {"version", TOOL_VERSION},
           {"params", tl::io::params_to_json(p)},
           {"outputs", outputs}};
    if (stamp) m["timestamp"] = utc_timestamp();
    return m;
}

void warn_ground_depletion(const tl::LaserParams& p, const tl::SteadyState& ss) {
    if (const auto w = tl::ground_depletion_warning(p, ss)) std::cerr << "warning: " << *w << "\n";
}

json steady_report(const tl::LaserParams& p) {
    const auto ss = tl::steady_state(p);
    warn_ground_depletion(p, ss);
    const auto [r_pump, r_photon] = tl::balance_residuals(p, ss);
    return {{"m", ss.m},
            {"n2", ss.n2},
            {"n0", ss.n0},
            {"J_hat", ss.J_hat},
            {"m_hat", ss.m_hat},
            {"residuals", {{"pump_balance", r_pump}, {"photon_balance", r_photon}}}};
}

// ----------------------------------------------------------------- steady

struct SteadyCmd {
    CommonOpts common;
    std::string out;

    int run() const {
        const auto p = common.resolve_params();
        json report = make_manifest("steady", p, {}, common.stamp);
        report["result"] = steady_report(p);
        if (!out.empty()) {
            report["outputs"] = {out};
            tl::io::atomic_write_text(out, report.dump(2) + "\n");
        }
        std::cout << report.dump(2) << "\n";
        return 0;
    }
};

// ---------------------------------------------------------------- spectrum

struct SpectrumCmd {
    CommonOpts common;
    double omega_min = 1e-2, omega_max = 1e4;
    int points = 200;
    bool linear = false, intracavity = false, peak = false;
    std::string out = "spectrum.csv";

    int run() const {
        const auto p = common.resolve_params();
        const auto grid =
            linear ? linear_grid(omega_min, omega_max, points) : log_grid(omega_min, omega_max, points);
        const auto kind = intracavity ? tl::SpectrumKind::Intracavity : tl::SpectrumKind::Photocurrent;
        if (peak && intracavity)
            throw std::invalid_argument("--peak applies to the photocurrent spectrum only");
        const auto series = tl::spectrum_sweep(p, grid, kind);
        warn_ground_depletion(p, tl::steady_state(p));

        std::vector<std::vector<double>> rows;
        rows.reserve(series.points.size());
        for (const auto& pt : series.points) rows.push_back({pt.omega, pt.value});
        tl::io::write_csv(out, "omega,value", rows);

        json report = make_manifest("spectrum", p, {out}, common.stamp);
        report["grid"] = {{"omega_min", omega_min},
                          {"omega_max", omega_max},
                          {"points", points},
                          {"spacing", linear ? "linear" : "log"},
                          {"kind", intracavity ? "intracavity" : "photocurrent"}};
        if (peak) {
            const auto pk = tl::psd_peak(p);
            report["peak"] = {{"omega_star", pk.omega_star}, {"s_max", pk.s_max}};
        }
        const std::string mpath =
            std::filesystem::path(out).replace_extension().string() + "_manifest.json";
        report["outputs"].push_back(mpath);
        tl::io::atomic_write_text(mpath, report.dump(2) + "\n");
        std::cout << report.dump(2) << "\n";
        return 0;
    }
};

// -------------------------------------------------------------------- fano

struct FanoCmd {
    CommonOpts common;
    std::string out;

    int run() const {
        const auto p = common.resolve_params();
        const double closed = tl::fano_closed_form(p);
        const double quad = tl::fano_quadrature(p);
        json report = make_manifest("fano", p, {}, common.stamp);
        report["result"] = {{"closed_form", closed},
                            {"quadrature", quad},
                            {"rel_diff", std::abs(closed - quad) / std::abs(closed)}};
        if (!out.empty()) {
            report["outputs"] = {out};
            tl::io::atomic_write_text(out, report.dump(2) + "\n");
        }
        std::cout << report.dump(2) << "\n";
        return 0;
    }
};

// ---------------------------------------------------------------- simulate

json estimate_block(const tl::Trajectory& tr) {
    const auto mean = tl::estimate_mean_photon(tr);
    const auto fano = tl::estimate_fano(tr);
    return {{"mean_m",
             {{"value", mean.value}, {"std_error", mean.std_error}, {"n_effective", mean.n_effective}}},
            {"fano",
             {{"value", fano.value}, {"std_error", fano.std_error}, {"n_effective", fano.n_effective}}}};
}

json counts_block(const tl::Trajectory& tr) {
    return {{"pump", tr.event_counts.pump},
            {"stimulated", tr.event_counts.stimulated},
            {"spontaneous", tr.event_counts.spontaneous},
            {"detection", tr.event_counts.detection},
            {"blocked_pump", tr.event_counts.blocked_pump}};
}

struct SimulateCmd {
    CommonOpts common;
    std::string out_prefix = "run";
    bool estimate = false;
    double bin_width = -1.0;
    int segments = 32;

    int run() const {
        tl::LaserParams p;
        p.N = 1e5;
        p.alpha = 6.32;
        tl::SimConfig cfg;
        const bool pump_mode_set = common.resolve(p, cfg);
        tl::validate_params(p);
        cfg.pump_mode = pump_mode_from_xi(p, pump_mode_set, cfg.pump_mode);
        if (cfg.sample_interval <= 0.0) cfg.sample_interval = tl::default_bin_width(p);
        if (const auto w = tl::config_warning(cfg)) std::cerr << "warning: " << *w << "\n";

        const auto tr = tl::simulate(p, cfg);

        const std::string samples_path = out_prefix + "_samples.csv";
        const std::string detections_path = out_prefix + "_detections.csv";
        const std::string manifest_path = out_prefix + "_manifest.json";

        std::vector<std::string> outputs{samples_path};
        {
            std::string body = "t,m,n2\n";
            for (const auto& s : tr.samples) {
                body += tl::io::format_sig(s.t);
                body += ',';
                body += std::to_string(s.m);
                body += ',';
                body += std::to_string(s.n2);
                body += '\n';
            }
            tl::io::atomic_write_text(samples_path, body);
        }
        if (cfg.record_detections) {
            std::string body = "t\n";
            for (double t : tr.detections) {
                body += tl::io::format_sig(t);
                body += '\n';
            }
            tl::io::atomic_write_text(detections_path, body);
            outputs.push_back(detections_path);
        }

        json manifest = make_manifest("simulate", p, {}, common.stamp);
        manifest["config"] = tl::io::config_to_json(cfg);
        manifest["event_counts"] = counts_block(tr);
        manifest["state"] = {{"m_initial", tr.m_initial},
                             {"n2_initial", tr.n2_initial},
                             {"m_final", tr.m_final},
                             {"n2_final", tr.n2_final}};
        if (estimate) {
            manifest["estimates"] = estimate_block(tr);
            if (cfg.record_detections && !tr.detections.empty()) {
                const double bw = bin_width > 0.0 ? bin_width : tl::default_bin_width(p);
                const auto psd =
                    tl::estimate_psd(tr.detections, cfg.duration - cfg.burn_in, bw, segments);
                const std::string psd_path = out_prefix + "_psd.csv";
                std::vector<std::vector<double>> rows;
                rows.reserve(psd.points.size());
                for (const auto& pt : psd.points)
                    rows.push_back({pt.omega, pt.value, pt.std_error});
                tl::io::write_csv(psd_path, "omega,value,std_error", rows);
                outputs.push_back(psd_path);
                manifest["estimates"]["psd"] = {{"file", psd_path},
                                                {"bin_width", psd.bin_width},
                                                {"n_segments", psd.n_segments}};
            }
        }
        outputs.push_back(manifest_path);
        manifest["outputs"] = outputs;
        tl::io::atomic_write_text(manifest_path, manifest.dump(2) + "\n");
        std::cout << manifest.dump(2) << "\n";
        return 0;
    }
};

// ----------------------------------------------------------------- compare

struct CompareCmd {
    CommonOpts common;
    std::string out = "compare.csv";
    double bin_width = -1.0;
    int segments = 32;

    int run() const {
        tl::LaserParams p;
        p.N = 1e5;
        p.alpha = 6.32;
        tl::SimConfig cfg;
        const bool pump_mode_set = common.resolve(p, cfg);
        tl::validate_params(p);
        if (!(p.J > 0.0)) throw std::invalid_argument("compare requires a bright laser (J > 0)");
        cfg.pump_mode = pump_mode_from_xi(p, pump_mode_set, cfg.pump_mode);
        cfg.record_detections = true;
        if (cfg.sample_interval <= 0.0) cfg.sample_interval = tl::default_bin_width(p);

        const auto ss = tl::steady_state(p);
        const double analytic_fano = tl::fano_closed_form(p);

        const auto tr = tl::simulate(p, cfg);
        const auto mean = tl::estimate_mean_photon(tr);
        const auto fano = tl::estimate_fano(tr);
        const double bw = bin_width > 0.0 ? bin_width : tl::default_bin_width(p);
        const auto psd = tl::estimate_psd(tr.detections, cfg.duration - cfg.burn_in, bw, segments);

        auto zscore = [](double est, double ana, double se) {
            if (se > 0.0) return (est - ana) / se;
            return est == ana ? 0.0 : std::numeric_limits<double>::infinity();
        };

        double max_abs_z = 0.0;
        std::string body = "quantity,omega,analytic,estimated,std_error,z\n";
        auto add_row = [&](const std::string& name, const std::string& omega, double ana,
                           double est, double se) {
            const double z = zscore(est, ana, se);
            max_abs_z = std::max(max_abs_z, std::abs(z));
            body += name + "," + omega + "," + tl::io::format_sig(ana) + "," +
                    tl::io::format_sig(est) + "," + tl::io::format_sig(se) + "," +
                    tl::io::format_sig(z) + "\n";
        };
        add_row("mean_m", "", ss.m, mean.value, mean.std_error);
        add_row("fano", "", analytic_fano, fano.value, fano.std_error);
        for (const auto& pt : psd.points)
            add_row("S", tl::io::format_sig(pt.omega), tl::photocurrent_psd(p, ss, pt.omega),
                    pt.value, pt.std_error);
        tl::io::atomic_write_text(out, body);

        const bool gate_failed = max_abs_z > 5.0;
        json report = make_manifest("compare", p, {out}, common.stamp);
        report["config"] = tl::io::config_to_json(cfg);
        report["result"] = {{"max_abs_z", max_abs_z},
                            {"rows", 2 + psd.points.size()},
                            {"gate", gate_failed ? "fail" : "pass"},
                            {"analytic", {{"mean_m", ss.m}, {"fano", analytic_fano}}},
                            {"estimates", estimate_block(tr)}};
        const std::string mpath =
            std::filesystem::path(out).replace_extension().string() + "_manifest.json";
        report["outputs"].push_back(mpath);
        tl::io::atomic_write_text(mpath, report.dump(2) + "\n");
        std::cout << report.dump(2) << "\n";
        if (gate_failed)
            std::cerr << "statistical gate failed: max |z| = " << max_abs_z << " > 5\n";
        return gate_failed ? 3 : 0;
    }
};

// ------------------------------------------------------------------- sweep

struct SweepCmd {
    CommonOpts common;
    double j_min = 0.1, j_max = 1e6;
    int j_points = 121;
    std::string gamma_set = "single";
    std::string out = "sweep.csv";

    int run() const {
        const auto base = common.resolve_params();
        std::vector<double> gammas;
        if (gamma_set == "paper") gammas = {0.0, 6.32, 63.2, 632.0, 6325.0};
        else gammas = {base.gamma};
        const auto jgrid = log_grid(j_min, j_max, j_points);

        std::vector<std::vector<double>> rows;
        rows.reserve(gammas.size() * jgrid.size());
        for (double g : gammas) {
            for (double J : jgrid) {
                tl::LaserParams p = base;
                p.gamma = g;
                p.J = J;
                const auto ss = tl::steady_state(p);
                const double F = tl::fano_closed_form(p);
                const auto pk = tl::psd_peak(p);
                rows.push_back({J, g, ss.m, F, pk.s_max, pk.omega_star});
            }
        }
        tl::io::write_csv(out, "J,gamma,m,F,S_max,omega_star", rows);

        json report = make_manifest("sweep", base, {out}, common.stamp);
        report["grid"] = {{"j_min", j_min},
                          {"j_max", j_max},
                          {"j_points", j_points},
                          {"gamma_set", gamma_set},
                          {"gammas", gammas}};
        const std::string mpath =
            std::filesystem::path(out).replace_extension().string() + "_manifest.json";
        report["outputs"].push_back(mpath);
        tl::io::atomic_write_text(mpath, report.dump(2) + "\n");
        std::cout << report.dump(2) << "\n";
        return 0;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-level laser photon statistics: analytic spectra, Fano factor, "
                 "jump-process simulation, and cross-validation"};
    app.set_version_flag("--version", TOOL_VERSION);
    app.require_subcommand(1);

    SteadyCmd steady;
    auto* c_steady = app.add_subcommand("steady", "deterministic operating point");
    steady.common.add_param_opts(c_steady);
    c_steady->add_option("--out", steady.out, "also write the report to this JSON file");

    SpectrumCmd spectrum;
    auto* c_spectrum =
        app.add_subcommand("spectrum", "photocurrent or intracavity spectral density grid");
    spectrum.common.add_param_opts(c_spectrum);
    c_spectrum->add_option("--omega-min", spectrum.omega_min, "lowest frequency");
    c_spectrum->add_option("--omega-max", spectrum.omega_max, "highest frequency");
    c_spectrum->add_option("--points", spectrum.points, "grid size")->check(CLI::PositiveNumber);
    c_spectrum->add_flag("--linear", spectrum.linear, "linear grid instead of log");
    c_spectrum->add_flag("--intracavity", spectrum.intracavity,
                         "tabulate the photon-number spectrum instead");
    c_spectrum->add_flag("--peak", spectrum.peak, "locate the spectral maximum");
    c_spectrum->add_option("--out", spectrum.out, "output CSV path");

    FanoCmd fano;
    auto* c_fano = app.add_subcommand("fano", "Fano factor, closed form and quadrature");
    fano.common.add_param_opts(c_fano);
    c_fano->add_option("--out", fano.out, "also write the report to this JSON file");

    SimulateCmd simulate;
    auto* c_sim = app.add_subcommand("simulate", "stochastic jump-process trajectory");
    simulate.common.add_param_opts(c_sim);
    simulate.common.add_sim_opts(c_sim);
    c_sim->add_option("--out-prefix", simulate.out_prefix, "prefix for output files");
    c_sim->add_flag("--estimate", simulate.estimate, "run estimators on the trajectory");
    c_sim->add_option("--bin-width", simulate.bin_width, "detection bin width for the PSD");
    c_sim->add_option("--segments", simulate.segments, "minimum periodogram segments")
        ->check(CLI::PositiveNumber);

    CompareCmd compare;
    auto* c_cmp =
        app.add_subcommand("compare", "simulate, estimate, and z-score against the analytics");
    compare.common.add_param_opts(c_cmp);
    compare.common.add_sim_opts(c_cmp);
    c_cmp->add_option("--out", compare.out, "comparison table CSV path");
    c_cmp->add_option("--bin-width", compare.bin_width, "detection bin width for the PSD");
    c_cmp->add_option("--segments", compare.segments, "minimum periodogram segments")
        ->check(CLI::PositiveNumber);

    SweepCmd sweep;
    auto* c_sweep = app.add_subcommand("sweep", "pump-rate sweep of m, F, and the spectral peak");
    sweep.common.add_param_opts(c_sweep);
    c_sweep->add_option("--j-min", sweep.j_min, "lowest pump rate (log grid)");
    c_sweep->add_option("--j-max", sweep.j_max, "highest pump rate");
    c_sweep->add_option("--j-points", sweep.j_points, "pump grid size")
        ->check(CLI::PositiveNumber);
    c_sweep->add_option("--gamma-set", sweep.gamma_set, "'single' or 'paper'")
        ->check(CLI::IsMember({"single", "paper"}));
    c_sweep->add_option("--out", sweep.out, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_steady->parsed()) return steady.run();
        if (c_spectrum->parsed()) return spectrum.run();
        if (c_fano->parsed()) return fano.run();
        if (c_sim->parsed()) return simulate.run();
        if (c_cmp->parsed()) return compare.run();
        if (c_sweep->parsed()) return sweep.run();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
