// Command-line front end.
//
// Exit status: 0 on success, 1 for usage or configuration errors, 2 when a
// numerical step fails (solver non-convergence, failed decomposition, ...).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "superres/errors.hpp"
#include "superres/io.hpp"

using namespace superres;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericalError = 2;

struct Globals {
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string config;
    std::string out = ".";
    std::string format = "csv";
};

// Numerical failure reported by a run that still produced output.
struct NumericalFailure : Error {
    using Error::Error;
};

json load_config(const Globals& g) { return g.config.empty() ? json::object() : read_json_file(g.config); }

fs::path out_path(const Globals& g, const std::string& stem, const std::string& ext) {
    fs::create_directories(g.out);
    return fs::path(g.out) / (stem + "." + ext);
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw InvalidArgument("cannot write '" + p.string() + "'");
    return os;
}

void emit_spectrum(const Globals& g, const std::string& stem, const RetrievedSpectrum& s) {
    if (g.format == "json") {
        write_json_file(out_path(g, stem, "json").string(), to_json(s));
    } else {
        auto os = open_out(out_path(g, stem, "csv"));
        write_spectrum_csv(os, s);
    }
}

json manifest(const Globals& g, const std::string& command, const json& config) {
    return {{"command", command},
            {"config", config},
            {"master_seed", g.seed},
            {"versions",
             {{"superres", "0.1.0"},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"compiler", __VERSION__}}}};
}

// A problem instance given either as a signal document (it has "coeffs") or
// as a DOA configuration, from which realization 0 is drawn with --seed.
struct Problem {
    MeasurementSet meas;
    std::optional<FrequencyMixture> truth;
    std::optional<CMatrix> y_full;
    int music_order = 0;
    json echo;
};

Problem load_problem(const Globals& g) {
    const json cfg = load_config(g);
    if (cfg.empty()) throw InvalidArgument("this command needs --config (signal document or DOA config)");
    Problem p;
    if (cfg.contains("coeffs")) {
        const SignalDocument doc = signal_document_from_json(cfg);
        auto mat = materialize(doc);
        p.meas = std::move(mat.meas);
        p.y_full = std::move(mat.y_full);
        if (doc.mixture.order() > 0) p.truth = doc.mixture;
        p.music_order = static_cast<int>(doc.mixture.order());
        p.echo = to_json(doc);
    } else {
        DoaConfig dc = doa_config_from_json(cfg);
        if (g.seed_given) dc.master_seed = g.seed;
        dc.validate();
        const DoaInstance inst = make_doa_instance(dc, 0);
        p.meas = inst.meas;
        p.truth = inst.mixture;
        p.music_order = static_cast<int>(dc.freqs.size());
        p.echo = to_json(dc);
    }
    return p;
}

json score_json(const RetrievedSpectrum& spec, const Problem& p, const SdpSolution* sol) {
    json j = json::object();
    if (!p.truth) return j;
    const MatchScore s = match_and_score(spec, *p.truth);
    j["freq_mse"] = s.freq_mse;
    j["order_error"] = s.order_error;
    j["detected"] = s.detected;
    if (sol != nullptr && p.y_full && p.y_full->rows() == sol->y_star.rows() &&
        p.y_full->cols() == sol->y_star.cols()) {
        j["signal_rel_mse"] = signal_relative_mse(sol->y_star, *p.y_full);
    }
    return j;
}

int cmd_synth(const Globals& g, int n_opt, int m_opt, int k_opt, double sep_opt, int l_opt, double sigma2_opt) {
    json cfg = load_config(g);
    const int n = n_opt > 0 ? n_opt : cfg.value("n", 64);
    const int m = m_opt > 0 ? m_opt : cfg.value("m", n);
    const int k = k_opt >= 0 ? k_opt : cfg.value("k", 3);
    const double sep = sep_opt >= 0.0 ? sep_opt : cfg.value("sep", 1.0);
    const int l = l_opt > 0 ? l_opt : cfg.value("l", 1);
    const double sigma2 = sigma2_opt >= 0.0 ? sigma2_opt : cfg.value("sigma2", 0.0);
    if (n < 1 || m < 1 || m > n || l < 1 || k < 0 || sep < 0.0 || sigma2 < 0.0) {
        throw InvalidArgument("synth: need 1 <= m <= n, l >= 1, k >= 0, sep >= 0, sigma2 >= 0");
    }

    Rng rng(derive_seed(g.seed, {0}));
    SignalDocument doc;
    doc.n = n;
    doc.l = l;
    doc.pattern = m == n ? SamplingPattern::full(n) : draw_sampling_pattern(n, m, rng);
    doc.mixture = draw_mixture(k, sep / n, l, rng);
    doc.sigma2 = sigma2;
    doc.noise_seed = derive_seed(g.seed, {1});
    if (sigma2 > 0.0) doc.domain = BallOnOmega{noise_ball_radius(m, l, sigma2)};

    write_json_file(out_path(g, "signal", "json").string(), to_json(doc));
    if (g.format == "csv") {
        auto os = open_out(out_path(g, "mixture", "csv"));
        os.precision(17);
        os << "freq,coeff_norm\n";
        for (Eigen::Index i = 0; i < doc.mixture.order(); ++i) {
            os << doc.mixture.freqs()[static_cast<std::size_t>(i)] << ',' << doc.mixture.coeffs().row(i).norm()
               << '\n';
        }
    }
    return kOk;
}

int cmd_anm(const Globals& g, double rank_tol) {
    const Problem p = load_problem(g);
    const json cfg = load_config(g);
    const SolverOptions opts = cfg.contains("anm_solver") ? solver_options_from_json(cfg.at("anm_solver")) : SolverOptions{};
    const SdpSolution sol = anm_solve(p.meas, opts);
    const RetrievedSpectrum spec = retrieve_spectrum(sol.u_star, rank_tol);
    emit_spectrum(g, "spectrum", spec);
    json out = to_json(sol);
    out["score"] = score_json(spec, p, &sol);
    out["problem"] = p.echo;
    write_json_file(out_path(g, "solution", "json").string(), out);
    if (!sol.converged) throw NumericalFailure("anm: solver stopped at the iteration cap without converging");
    return kOk;
}

int cmd_ram(const Globals& g, double rank_tol, int max_iters) {
    const Problem p = load_problem(g);
    const json cfg = load_config(g);
    RamConfig rc = cfg.contains("ram") ? ram_config_from_json(cfg.at("ram")) : RamConfig{};
    if (cfg.contains("ram_max_iters")) rc.max_iters = cfg.at("ram_max_iters").get<int>();
    if (max_iters > 0) rc.max_iters = max_iters;
    const RamResult res = ram_solve(p.meas, rc);
    const RetrievedSpectrum spec = retrieve_spectrum(res.solution.u_star, rank_tol);
    emit_spectrum(g, "spectrum", spec);
    {
        auto os = open_out(out_path(g, "trace", "csv"));
        write_trace_csv(os, res.trace);
    }
    json out = to_json(res.solution);
    out["score"] = score_json(spec, p, &res.solution);
    out["ram"] = {{"iterations", res.trace.iterations.size()},
                  {"converged", res.trace.converged},
                  {"aborted", res.trace.aborted},
                  {"scale", res.trace.scale},
                  {"config", to_json(rc)}};
    out["problem"] = p.echo;
    write_json_file(out_path(g, "solution", "json").string(), out);
    if (res.trace.aborted) throw NumericalFailure("ram: two consecutive inner solves failed");
    return kOk;
}

int cmd_music(const Globals& g, int k_opt, int grid) {
    const Problem p = load_problem(g);
    const int k = k_opt > 0 ? k_opt : p.music_order;
    if (k < 1) throw InvalidArgument("music: model order unknown; pass --k");
    const Pseudospectrum ps = music_pseudospectrum(sample_covariance(p.meas.y_obs()), k, p.meas.pattern(), grid);
    const PeakPick peaks = pick_peaks(ps, k);
    RetrievedSpectrum spec;
    spec.freqs = peaks.freqs;
    spec.powers.assign(peaks.freqs.size(), 0.0);
    for (std::size_t i = 0; i < peaks.freqs.size(); ++i) {
        const auto idx = static_cast<std::size_t>(std::lround(peaks.freqs[i] * grid)) % ps.values.size();
        spec.powers[i] = ps.values[idx];
    }
    spec.order = static_cast<int>(spec.freqs.size());
    emit_spectrum(g, "spectrum", spec);
    if (g.format == "json") {
        write_json_file(out_path(g, "pseudospectrum", "json").string(), {{"f", ps.grid}, {"value", ps.values}});
    } else {
        auto os = open_out(out_path(g, "pseudospectrum", "csv"));
        write_pseudospectrum_csv(os, ps);
    }
    if (!peaks.complete) throw NumericalFailure("music: fewer peaks than the model order");
    return kOk;
}

int cmd_decompose(const Globals& g, int k_opt, double rank_tol) {
    const json cfg = load_config(g);
    if (!cfg.contains("u")) throw InvalidArgument("decompose: config needs \"u\" as a list of [re, im] pairs");
    const ToeplitzParam u(complex_vector_from_json(cfg.at("u")));
    const double tol = cfg.value("rank_tol", rank_tol);
    const int k = k_opt >= 0 ? k_opt : cfg.value("k", -1);
    const RetrievedSpectrum spec = k >= 0 ? vandermonde_decompose(u, k) : retrieve_spectrum(u, tol);
    emit_spectrum(g, "spectrum", spec);
    return kOk;
}

int cmd_phase(const Globals& g, const std::string& method) {
    const json raw = load_config(g);
    PhaseTransitionConfig cfg = phase_config_from_json(raw);
    if (g.seed_given) cfg.master_seed = g.seed;
    std::vector<Method> methods;
    if (method == "both") {
        methods = {Method::Anm, Method::Ram};
    } else {
        methods = {method_from_string(method)};
    }
    const auto res = run_phase_transition(cfg, methods, [](const PhaseRunRecord& r) {
        std::fprintf(stderr, "%s K=%d sep=%g run=%d %s instance=%016llx\n", to_string(r.method).c_str(), r.k, r.sep,
                     r.run, r.success ? "success" : (r.solver_failure ? "solver-failure" : "miss"),
                     static_cast<unsigned long long>(r.instance));
    });
    if (g.format == "json") {
        json cells = json::array();
        for (const auto& c : res.cells) {
            cells.push_back({{"method", to_string(c.method)},
                             {"K", c.k},
                             {"sep", c.sep},
                             {"rate", c.rate()},
                             {"n_runs", c.runs},
                             {"n_successes", c.successes},
                             {"n_solver_failures", c.solver_failures}});
        }
        json runs = json::array();
        for (const auto& r : res.runs) {
            char hash[17];
            std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.instance));
            runs.push_back({{"method", to_string(r.method)},
                            {"K", r.k},
                            {"sep", r.sep},
                            {"run", r.run},
                            {"success", r.success},
                            {"solver_failure", r.solver_failure},
                            {"signal_rel_mse", r.signal_rel_mse},
                            {"freq_mse", r.freq_mse},
                            {"order", r.order},
                            {"ram_iterations", r.ram_iterations},
                            {"instance_hash", hash},
                            {"wall_seconds", r.wall_seconds},
                            {"error", r.error}});
        }
        write_json_file(out_path(g, "phase_grid", "json").string(), cells);
        write_json_file(out_path(g, "phase_runs", "json").string(), runs);
    } else {
        auto grid = open_out(out_path(g, "phase_grid", "csv"));
        write_phase_grid_csv(grid, res);
        auto runs = open_out(out_path(g, "phase_runs", "csv"));
        write_phase_runs_csv(runs, res);
    }
    Globals gm = g;
    gm.seed = cfg.master_seed;
    write_json_file(out_path(g, "manifest", "json").string(), manifest(gm, "phase-transition", to_json(cfg)));
    return kOk;
}

int cmd_doa(const Globals& g, const std::vector<std::string>& method_names, const std::string& mode) {
    const json raw = load_config(g);
    DoaConfig cfg = doa_config_from_json(raw);
    if (g.seed_given) cfg.master_seed = g.seed;
    if (!mode.empty()) cfg = doa_config_from_json({{"correlation", mode}}, cfg);
    std::vector<Method> methods;
    for (const auto& m : method_names) methods.push_back(method_from_string(m));
    const auto res = run_doa(cfg, methods, [](const DoaRun& r) {
        for (const auto& m : r.methods) {
            std::fprintf(stderr, "run %d %s: %zu components%s%s\n", r.run, to_string(m.method).c_str(),
                         m.freqs.size(), m.ok ? "" : " error: ", m.error.c_str());
        }
    });
    if (g.format == "json") {
        json runs = json::array();
        for (const auto& r : res.runs) {
            for (const auto& m : r.methods) {
                runs.push_back({{"run", r.run},
                                {"method", to_string(m.method)},
                                {"freqs", m.freqs},
                                {"powers", m.powers},
                                {"detected", m.score.detected},
                                {"errors", m.score.errors},
                                {"ok", m.ok},
                                {"error", m.error},
                                {"wall_seconds", m.wall_seconds}});
            }
        }
        write_json_file(out_path(g, "doa", "json").string(), runs);
    } else {
        auto os = open_out(out_path(g, "doa", "csv"));
        write_doa_csv(os, res, cfg);
    }
    Globals gm = g;
    gm.seed = cfg.master_seed;
    write_json_file(out_path(g, "manifest", "json").string(), manifest(gm, "doa", to_json(cfg)));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gridless line-spectral estimation: atomic norm, reweighted atomic norm and MUSIC"};
    app.require_subcommand(1);

    Globals g;
    auto* seed_opt = app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
    app.add_option("--config", g.config, "JSON configuration file");
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--format", g.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    int n = 0, m = 0, k = -1, l = 0;
    double sep = -1.0, sigma2 = -1.0;
    auto* synth = app.add_subcommand("synth", "Draw a random mixture and sampling pattern; writes signal.json");
    synth->add_option("--n", n, "Signal length N");
    synth->add_option("--m", m, "Number of observed samples M");
    synth->add_option("--k", k, "Number of sinusoids K");
    synth->add_option("--sep", sep, "Minimum separation in units of 1/N");
    synth->add_option("--l", l, "Number of snapshots L");
    synth->add_option("--sigma2", sigma2, "Noise variance");

    double rank_tol_anm = 1e-3;
    auto* anm = app.add_subcommand("anm", "Atomic norm minimization on a signal document or DOA config");
    anm->add_option("--rank-tol", rank_tol_anm, "Relative eigenvalue threshold for the model order")
        ->capture_default_str();

    double rank_tol_ram = 1e-6;
    int ram_iters = 0;
    auto* ram = app.add_subcommand("ram", "Reweighted atomic norm minimization; writes spectrum and trace");
    ram->add_option("--rank-tol", rank_tol_ram, "Relative eigenvalue threshold for the model order")
        ->capture_default_str();
    ram->add_option("--max-iters", ram_iters, "Reweighting iterations (overrides the config)");

    int music_k = 0;
    int music_grid = 8192;
    auto* music = app.add_subcommand("music", "MUSIC pseudospectrum and peak picking");
    music->add_option("--k", music_k, "Model order (defaults to the true order)");
    music->add_option("--grid", music_grid, "Grid size")->capture_default_str();

    int dec_k = -1;
    double dec_tol = 1e-6;
    auto* decompose = app.add_subcommand("decompose", "Vandermonde decomposition of a Toeplitz parameter u");
    decompose->add_option("--k", dec_k, "Order (detected from the spectrum when omitted)");
    decompose->add_option("--rank-tol", dec_tol, "Relative eigenvalue threshold")->capture_default_str();

    std::string pt_method = "both";
    auto* phase = app.add_subcommand("phase-transition", "Monte Carlo success rates over (K, separation) cells");
    phase->add_option("--method", pt_method, "Recovery method")
        ->check(CLI::IsMember({"anm", "ram", "both"}))
        ->capture_default_str();

    std::vector<std::string> doa_methods{"music", "anm", "ram"};
    std::string doa_mode;
    auto* doa = app.add_subcommand("doa", "Direction-of-arrival study on the sparse linear array");
    doa->add_option("--methods", doa_methods, "Methods to run")
        ->check(CLI::IsMember({"music", "anm", "ram"}))
        ->capture_default_str();
    doa->add_option("--mode", doa_mode, "Source correlation")->check(CLI::IsMember({"uncorrelated", "coherent_1_3"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kConfigError;
    }
    g.seed_given = seed_opt->count() > 0;

    try {
        if (*synth) return cmd_synth(g, n, m, k, sep, l, sigma2);
        if (*anm) return cmd_anm(g, rank_tol_anm);
        if (*ram) return cmd_ram(g, rank_tol_ram, ram_iters);
        if (*music) return cmd_music(g, music_k, music_grid);
        if (*decompose) return cmd_decompose(g, dec_k, dec_tol);
        if (*phase) return cmd_phase(g, pt_method);
        if (*doa) return cmd_doa(g, doa_methods, doa_mode);
    } catch (const InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InfeasibleDomain& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InfeasibleSeparation& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    }
    return kConfigError;
}
