#include "superres/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>

#include <Eigen/SVD>

#include "superres/errors.hpp"
#include "superres/toeplitz.hpp"

namespace superres {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
    return h;
}

std::uint64_t instance_hash(const FrequencyMixture& mix, const SamplingPattern& pattern) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto feed = [&h](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= p[i];
            h *= 0x100000001B3ULL;
        }
    };
    feed(mix.freqs().data(), mix.freqs().size() * sizeof(double));
    feed(mix.coeffs().data(), static_cast<std::size_t>(mix.coeffs().size()) * sizeof(Complex));
    feed(pattern.omega().data(), pattern.omega().size() * sizeof(int));
    return h;
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Anm: return "anm";
        case Method::Ram: return "ram";
        case Method::Music: return "music";
    }
    return "unknown";
}

Method method_from_string(const std::string& s) {
    if (s == "anm") return Method::Anm;
    if (s == "ram") return Method::Ram;
    if (s == "music") return Method::Music;
    throw InvalidArgument("unknown method '" + s + "'");
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (count <= 0) return;
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, count);
    if (workers == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------

void PhaseTransitionConfig::validate() const {
    if (n < 1 || m < 1 || m > n) throw InvalidArgument("phase transition: need 1 <= m <= n");
    if (l < 1) throw InvalidArgument("phase transition: l must be positive");
    if (k_grid.empty() || sep_grid.empty()) throw InvalidArgument("phase transition: empty grid");
    if (runs_per_cell < 1) throw InvalidArgument("phase transition: runs_per_cell must be positive");
    if (!(success_threshold > 0.0)) throw InvalidArgument("phase transition: threshold must be positive");
    ram.validate();
}

const PhaseCell& PhaseTransitionResult::cell(int k, double sep, Method method) const {
    for (const auto& c : cells) {
        if (c.k == k && c.sep == sep && c.method == method) return c;
    }
    throw InvalidArgument("phase transition: no such cell");
}

PhaseInstance make_phase_instance(const PhaseTransitionConfig& cfg, std::size_t k_index, std::size_t sep_index,
                                  int run) {
    const int k = cfg.k_grid.at(k_index);
    const double sep = cfg.sep_grid.at(sep_index) / cfg.n;
    Rng rng(derive_seed(cfg.master_seed, {k_index, sep_index, static_cast<std::uint64_t>(run)}));
    SamplingPattern pattern;
    if (cfg.omega_mode == OmegaMode::PerRun) {
        pattern = draw_sampling_pattern(cfg.n, cfg.m, rng);
    } else {
        Rng omega_rng(derive_seed(cfg.master_seed, {0xFFFFFFFFULL}));
        pattern = draw_sampling_pattern(cfg.n, cfg.m, omega_rng);
    }
    FrequencyMixture mix = draw_mixture(k, sep, cfg.l, rng);
    CMatrix y = synthesize(mix, cfg.n);
    return {std::move(pattern), std::move(mix), std::move(y)};
}

namespace {

PhaseRunRecord solve_phase_run(const PhaseTransitionConfig& cfg, const PhaseInstance& inst, Method method) {
    PhaseRunRecord rec;
    rec.method = method;
    rec.instance = instance_hash(inst.mixture, inst.pattern);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const MeasurementSet meas(inst.pattern, subsample(inst.y_full, inst.pattern), EqualityOnOmega{});
        SdpSolution sol;
        double rank_tol = cfg.anm_rank_tol;
        if (method == Method::Anm) {
            sol = anm_solve(meas, cfg.anm_solver);
            rec.solver_failure = !sol.converged;
        } else {
            RamResult res = ram_solve(meas, cfg.ram);
            rec.ram_iterations = static_cast<int>(res.trace.iterations.size());
            rec.solver_failure = res.trace.aborted;
            sol = std::move(res.solution);
            rank_tol = cfg.ram_rank_tol;
        }
        const RetrievedSpectrum spec = retrieve_spectrum(sol.u_star, rank_tol);
        const MatchScore score = match_and_score(spec, inst.mixture);
        rec.order = spec.order;
        rec.signal_rel_mse = signal_relative_mse(sol.y_star, inst.y_full);
        rec.freq_mse = score.freq_mse;
        const bool all_matched = std::all_of(score.detected.begin(), score.detected.end(), [](bool b) { return b; });
        rec.success = !rec.solver_failure && all_matched && rec.signal_rel_mse < cfg.success_threshold &&
                      rec.freq_mse < cfg.success_threshold;
    } catch (const Error& e) {
        rec.solver_failure = true;
        rec.success = false;
        rec.error = e.what();
    }
    rec.wall_seconds = seconds_since(t0);
    return rec;
}

}  // namespace

PhaseTransitionResult run_phase_transition(const PhaseTransitionConfig& cfg, const std::vector<Method>& methods,
                                           const std::function<void(const PhaseRunRecord&)>& on_run) {
    cfg.validate();
    for (Method m : methods) {
        if (m == Method::Music) throw InvalidArgument("phase transition: MUSIC is not a recovery method");
    }
    struct Job {
        std::size_t ki, si;
        int run;
    };
    std::vector<Job> jobs;
    for (std::size_t ki = 0; ki < cfg.k_grid.size(); ++ki) {
        for (std::size_t si = 0; si < cfg.sep_grid.size(); ++si) {
            for (int r = 0; r < cfg.runs_per_cell; ++r) jobs.push_back({ki, si, r});
        }
    }

    std::vector<PhaseRunRecord> records(jobs.size() * methods.size());
    std::mutex cb_mutex;
    parallel_for(static_cast<int>(jobs.size()), cfg.threads, [&](int i) {
        const Job& job = jobs[static_cast<std::size_t>(i)];
        const PhaseInstance inst = make_phase_instance(cfg, job.ki, job.si, job.run);
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            PhaseRunRecord rec = solve_phase_run(cfg, inst, methods[mi]);
            rec.k = cfg.k_grid[job.ki];
            rec.sep = cfg.sep_grid[job.si];
            rec.run = job.run;
            if (on_run) {
                const std::lock_guard lock(cb_mutex);
                on_run(rec);
            }
            records[static_cast<std::size_t>(i) * methods.size() + mi] = std::move(rec);
        }
    });

    PhaseTransitionResult result;
    for (int k : cfg.k_grid) {
        for (double sep : cfg.sep_grid) {
            for (Method m : methods) result.cells.push_back({k, sep, m, 0, 0, 0});
        }
    }
    for (const auto& rec : records) {
        for (auto& c : result.cells) {
            if (c.k == rec.k && c.sep == rec.sep && c.method == rec.method) {
                ++c.runs;
                c.successes += rec.success ? 1 : 0;
                c.solver_failures += rec.solver_failure ? 1 : 0;
            }
        }
    }
    result.runs = std::move(records);
    return result;
}

// ---------------------------------------------------------------------------

DimensionReduction dimension_reduce(const CMatrix& y_obs) {
    DimensionReduction out;
    const Eigen::Index m = y_obs.rows();
    const Eigen::Index l = y_obs.cols();
    if (l < m || m == 0) {
        out.reduced = y_obs;
        out.v = CMatrix::Identity(l, l);
        return out;
    }
    const Eigen::JacobiSVD<CMatrix> svd(y_obs, Eigen::ComputeThinV);
    out.v = svd.matrixV().leftCols(m);
    out.reduced = y_obs * out.v;
    out.applied = true;
    return out;
}

void DoaConfig::validate() const {
    const SamplingPattern check(omega, n);
    if (freqs.size() != powers.size()) throw InvalidArgument("doa: freqs and powers differ in length");
    for (double p : powers) {
        if (!(p > 0.0)) throw InvalidArgument("doa: source powers must be positive");
    }
    if (correlation == Correlation::Coherent13 && freqs.size() < 3) {
        throw InvalidArgument("doa: coherent mode needs at least three sources");
    }
    if (l < 1 || runs < 0 || !(sigma2 >= 0.0)) throw InvalidArgument("doa: invalid l, runs or sigma2");
    if (ram_max_iters < 1) throw InvalidArgument("doa: ram_max_iters must be positive");
    ram.validate();
}

DoaInstance make_doa_instance(const DoaConfig& cfg, int run) {
    Rng rng(derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(run)}));
    const auto k = static_cast<Eigen::Index>(cfg.freqs.size());
    CMatrix waves = complex_normal(k, cfg.l, 1.0, rng);
    if (cfg.correlation == Correlation::Coherent13) waves.row(2) = std::polar(1.0, cfg.coherent_phase) * waves.row(0);
    for (Eigen::Index i = 0; i < k; ++i) waves.row(i) *= std::sqrt(cfg.powers[static_cast<std::size_t>(i)]);

    DoaInstance inst;
    inst.mixture = FrequencyMixture(cfg.freqs, waves);
    inst.pattern = SamplingPattern(cfg.omega, cfg.n);
    inst.y_obs = add_noise(subsample(synthesize(inst.mixture, cfg.n), inst.pattern), cfg.sigma2, rng);

    FeasibleDomain domain = EqualityOnOmega{};
    if (cfg.sigma2 > 0.0) {
        domain = BallOnOmega{noise_ball_radius(inst.pattern.m(), cfg.l, cfg.sigma2)};
    }
    CMatrix data = cfg.reduce ? dimension_reduce(inst.y_obs).reduced : inst.y_obs;
    inst.meas = MeasurementSet(inst.pattern, std::move(data), domain);
    return inst;
}

DoaMethodResult run_doa_method(const DoaConfig& cfg, const DoaInstance& inst, Method method) {
    DoaMethodResult r;
    r.method = method;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const int k = static_cast<int>(cfg.freqs.size());
        if (method == Method::Music) {
            const Pseudospectrum ps =
                music_pseudospectrum(sample_covariance(inst.y_obs), k, inst.pattern, cfg.music_grid);
            const PeakPick peaks = pick_peaks(ps, k);
            r.freqs = peaks.freqs;
            std::sort(r.freqs.begin(), r.freqs.end());
            r.ok = peaks.complete;
        } else {
            SdpSolution sol;
            double tol = cfg.anm_rank_tol;
            if (method == Method::Anm) {
                sol = anm_solve(inst.meas, cfg.anm_solver);
                r.iterations = 1;
                r.ok = sol.converged;
            } else {
                RamConfig rc = cfg.ram;
                rc.max_iters = cfg.ram_max_iters;
                RamResult res = ram_solve(inst.meas, rc);
                r.iterations = static_cast<int>(res.trace.iterations.size());
                r.ok = !res.trace.aborted;
                sol = std::move(res.solution);
                tol = cfg.ram_rank_tol;
            }
            const RetrievedSpectrum spec = retrieve_spectrum(sol.u_star, tol);
            r.freqs = spec.freqs;
            r.powers = spec.powers;
        }
        r.score = match_and_score(r.freqs, inst.mixture.freqs());
    } catch (const Error& e) {
        r.ok = false;
        r.error = e.what();
    }
    r.wall_seconds = seconds_since(t0);
    return r;
}

const DoaMethodResult* DoaRun::find(Method m) const {
    for (const auto& r : methods) {
        if (r.method == m) return &r;
    }
    return nullptr;
}

DoaResult run_doa(const DoaConfig& cfg, const std::vector<Method>& methods,
                  const std::function<void(const DoaRun&)>& on_run) {
    cfg.validate();
    DoaResult result;
    result.runs.resize(static_cast<std::size_t>(cfg.runs));
    std::mutex cb_mutex;
    parallel_for(cfg.runs, cfg.threads, [&](int i) {
        const DoaInstance inst = make_doa_instance(cfg, i);
        DoaRun run;
        run.run = i;
        for (Method m : methods) run.methods.push_back(run_doa_method(cfg, inst, m));
        if (on_run) {
            const std::lock_guard lock(cb_mutex);
            on_run(run);
        }
        result.runs[static_cast<std::size_t>(i)] = std::move(run);
    });
    return result;
}

bool detects_all_exactly(const DoaMethodResult& r, std::size_t true_order, double tol) {
    if (r.freqs.size() != true_order) return false;
    for (std::size_t i = 0; i < r.score.errors.size(); ++i) {
        if (!r.score.detected[i] || !(r.score.errors[i] < tol)) return false;
    }
    return r.score.detected.size() == true_order;
}

bool has_component_near(const DoaMethodResult& r, double f, double tol) {
    return std::any_of(r.freqs.begin(), r.freqs.end(), [&](double g) { return wrap_distance(f, g) < tol; });
}

}  // namespace superres
