#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "superres/music.hpp"
#include "superres/ram.hpp"
#include "superres/retrieval.hpp"

namespace superres {

/// splitmix64-based derivation of a child seed from a master seed and a path
/// of integers (cell indices, run number, ...).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// FNV-1a hash of the mixture and pattern bytes, logged to show that paired
/// methods saw identical instances.
std::uint64_t instance_hash(const FrequencyMixture& mix, const SamplingPattern& pattern);

enum class Method { Anm, Ram, Music };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Sparsity-separation phase transition

enum class OmegaMode { Fixed, PerRun };

struct PhaseTransitionConfig {
    int n = 64;
    int m = 30;
    int l = 1;
    std::vector<int> k_grid{1};
    /// Minimum separations in units of 1/N.
    std::vector<double> sep_grid{1.0};
    int runs_per_cell = 20;
    /// 1e-12 reproduces the interior-point protocol; the first-order solver
    /// reaches about 1e-8 reliably, which is the default profile.
    double success_threshold = 1e-8;
    std::uint64_t master_seed = 0;
    OmegaMode omega_mode = OmegaMode::PerRun;
    SolverOptions anm_solver;
    RamConfig ram;
    double anm_rank_tol = 1e-3;
    double ram_rank_tol = 1e-6;
    /// Worker threads; 0 picks the hardware concurrency.
    int threads = 0;

    void validate() const;
};

struct PhaseRunRecord {
    int k = 0;
    double sep = 0.0;  ///< In units of 1/N.
    int run = 0;
    Method method = Method::Anm;
    bool success = false;
    bool solver_failure = false;
    double signal_rel_mse = 0.0;
    double freq_mse = 0.0;
    int order = 0;
    int ram_iterations = 0;
    std::uint64_t instance = 0;
    double wall_seconds = 0.0;
    std::string error;
};

struct PhaseCell {
    int k = 0;
    double sep = 0.0;
    Method method = Method::Anm;
    int runs = 0;
    int successes = 0;
    int solver_failures = 0;
    double rate() const { return runs > 0 ? static_cast<double>(successes) / runs : 0.0; }
};

struct PhaseTransitionResult {
    std::vector<PhaseCell> cells;
    std::vector<PhaseRunRecord> runs;

    const PhaseCell& cell(int k, double sep, Method method) const;
};

/// Draws one (pattern, mixture) instance of cell (k_index, sep_index), run r.
struct PhaseInstance {
    SamplingPattern pattern;
    FrequencyMixture mixture;
    CMatrix y_full;
};
PhaseInstance make_phase_instance(const PhaseTransitionConfig& cfg, std::size_t k_index,
                                  std::size_t sep_index, int run);

/// Success requires signal relative MSE and frequency MSE below the threshold
/// and every true source matched.
PhaseTransitionResult run_phase_transition(const PhaseTransitionConfig& cfg, const std::vector<Method>& methods,
                                           const std::function<void(const PhaseRunRecord&)>& on_run = {});

// ---------------------------------------------------------------------------
// Direction-of-arrival study

struct DimensionReduction {
    CMatrix reduced;  ///< M x M (or the input when skipped).
    CMatrix v;        ///< L x M right singular vectors (identity when skipped).
    bool applied = false;
};

/// Y V with V the top-M right singular vectors of Y (M x L, L >= M). The
/// Gram matrix Y Y^H is preserved. Skipped (identity) when L < M.
DimensionReduction dimension_reduce(const CMatrix& y_obs);

enum class Correlation { Uncorrelated, Coherent13 };

struct DoaConfig {
    std::vector<int> omega{1, 2, 5, 6, 8, 12, 15, 17, 19, 20};
    int n = 20;
    std::vector<double> freqs{0.1, 0.11, 0.2, 0.5};
    std::vector<double> powers{10.0, 10.0, 3.0, 1.0};
    int l = 200;
    double sigma2 = 1.0;
    Correlation correlation = Correlation::Uncorrelated;
    /// Phase of source 3 relative to source 1 in coherent mode (radians).
    double coherent_phase = 0.0;
    int runs = 100;
    int ram_max_iters = 10;
    bool reduce = true;
    std::uint64_t master_seed = 0;
    SolverOptions anm_solver;
    RamConfig ram;
    double anm_rank_tol = 1e-3;
    double ram_rank_tol = 1e-6;
    int music_grid = 8192;
    int threads = 0;

    void validate() const;
};

struct DoaInstance {
    FrequencyMixture mixture;
    SamplingPattern pattern;
    CMatrix y_obs;     ///< M x L noisy sensor data.
    MeasurementSet meas;  ///< Possibly reduced data with its feasible domain.
};

/// Realization r: source waveforms (coherent mode copies source 1's row into
/// source 3), sensor data, noise and the ball (or equality when sigma2 = 0).
DoaInstance make_doa_instance(const DoaConfig& cfg, int run);

struct DoaMethodResult {
    Method method = Method::Anm;
    std::vector<double> freqs;
    std::vector<double> powers;
    MatchScore score;
    int iterations = 0;
    bool ok = true;
    std::string error;
    double wall_seconds = 0.0;
};

struct DoaRun {
    int run = 0;
    std::vector<DoaMethodResult> methods;
    const DoaMethodResult* find(Method m) const;
};

struct DoaResult {
    std::vector<DoaRun> runs;
};

DoaMethodResult run_doa_method(const DoaConfig& cfg, const DoaInstance& inst, Method method);

DoaResult run_doa(const DoaConfig& cfg, const std::vector<Method>& methods,
                  const std::function<void(const DoaRun&)>& on_run = {});

/// True iff every true source is matched within tol and no extra component
/// was reported.
bool detects_all_exactly(const DoaMethodResult& r, std::size_t true_order, double tol);

/// True iff some reported frequency lies within tol of f.
bool has_component_near(const DoaMethodResult& r, double f, double tol);

/// Runs body(i) for i in [0, count) on up to `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace superres
