#include "superres/io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "superres/errors.hpp"

namespace superres {

json complex_matrix_to_json(const CMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

CMatrix complex_matrix_from_json(const json& j) {
    if (!j.is_array()) throw InvalidArgument("complex matrix: expected an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    CMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols) throw InvalidArgument("complex matrix: ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& e = row.at(static_cast<std::size_t>(c));
            m(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
        }
    }
    return m;
}

json complex_vector_to_json(const CVector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
    return out;
}

CVector complex_vector_from_json(const json& j) {
    CVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = Complex(j.at(i).at(0).get<double>(), j.at(i).at(1).get<double>());
    }
    return v;
}

json to_json(const SignalDocument& doc) {
    json j;
    j["n"] = doc.n;
    j["l"] = doc.l;
    j["omega"] = doc.pattern.omega();
    j["freqs"] = doc.mixture.freqs();
    j["coeffs"] = complex_matrix_to_json(doc.mixture.coeffs());
    j["noise"] = {{"sigma2", doc.sigma2}, {"seed", doc.noise_seed}};
    if (const auto* ball = std::get_if<BallOnOmega>(&doc.domain)) {
        j["domain"] = {{"variant", "ball"}, {"eta", ball->eta}};
    } else {
        j["domain"] = {{"variant", "equality"}, {"eta", 0.0}};
    }
    if (doc.y_obs) j["y_obs"] = complex_matrix_to_json(*doc.y_obs);
    return j;
}

SignalDocument signal_document_from_json(const json& j) {
    SignalDocument doc;
    doc.n = j.at("n").get<int>();
    doc.l = j.value("l", 1);
    doc.pattern = j.contains("omega") ? SamplingPattern(j.at("omega").get<std::vector<int>>(), doc.n)
                                      : SamplingPattern::full(doc.n);
    CMatrix coeffs = j.contains("coeffs") ? complex_matrix_from_json(j.at("coeffs")) : CMatrix(0, doc.l);
    if (coeffs.rows() == 0) coeffs.resize(0, doc.l);
    doc.mixture = FrequencyMixture(j.value("freqs", std::vector<double>{}), std::move(coeffs));
    if (doc.mixture.order() > 0 && doc.mixture.snapshots() != doc.l) {
        throw InvalidArgument("signal document: coeffs column count differs from l");
    }
    if (j.contains("noise")) {
        doc.sigma2 = j.at("noise").value("sigma2", 0.0);
        doc.noise_seed = j.at("noise").value("seed", std::uint64_t{0});
    }
    if (j.contains("domain")) {
        const std::string variant = j.at("domain").value("variant", "equality");
        if (variant == "ball") {
            doc.domain = BallOnOmega{j.at("domain").value("eta", 0.0)};
        } else if (variant == "equality") {
            doc.domain = EqualityOnOmega{};
        } else {
            throw InvalidArgument("signal document: unknown domain variant '" + variant + "'");
        }
    }
    if (j.contains("y_obs")) doc.y_obs = complex_matrix_from_json(j.at("y_obs"));
    return doc;
}

MaterializedSignal materialize(const SignalDocument& doc) {
    CMatrix y_full = doc.mixture.order() > 0 ? synthesize(doc.mixture, doc.n) : CMatrix::Zero(doc.n, doc.l);
    CMatrix y_obs;
    if (doc.y_obs) {
        y_obs = *doc.y_obs;
    } else {
        Rng rng(doc.noise_seed);
        y_obs = add_noise(subsample(y_full, doc.pattern), doc.sigma2, rng);
    }
    return {std::move(y_full), MeasurementSet(doc.pattern, std::move(y_obs), doc.domain)};
}

json to_json(const SolverOptions& o) {
    return {{"tol", o.tol}, {"max_iter", o.max_iter}, {"relaxation", o.relaxation},
            {"rho", o.rho}, {"rho_update_every", o.rho_update_every},
            {"anderson_memory", o.anderson_memory}, {"precondition", o.precondition}, {"verbose", o.verbose}};
}

SolverOptions solver_options_from_json(const json& j, SolverOptions o) {
    o.tol = j.value("tol", o.tol);
    o.max_iter = j.value("max_iter", o.max_iter);
    o.relaxation = j.value("relaxation", o.relaxation);
    o.rho = j.value("rho", o.rho);
    o.rho_update_every = j.value("rho_update_every", o.rho_update_every);
    o.anderson_memory = j.value("anderson_memory", o.anderson_memory);
    o.precondition = j.value("precondition", o.precondition);
    o.verbose = j.value("verbose", o.verbose);
    return o;
}

json to_json(const RamConfig& c) {
    return {{"eps0", c.eps0},
            {"eps_halving", c.eps_halving},
            {"eps_floor", c.eps_floor},
            {"max_iters", c.max_iters},
            {"rel_change_tol", c.rel_change_tol},
            {"scale_to_m", c.scale_to_m},
            {"warm_start", c.warm_start},
            {"solver", to_json(c.solver)}};
}

RamConfig ram_config_from_json(const json& j, RamConfig c) {
    c.eps0 = j.value("eps0", c.eps0);
    c.eps_halving = j.value("eps_halving", c.eps_halving);
    c.eps_floor = j.value("eps_floor", c.eps_floor);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.rel_change_tol = j.value("rel_change_tol", c.rel_change_tol);
    c.scale_to_m = j.value("scale_to_m", c.scale_to_m);
    c.warm_start = j.value("warm_start", c.warm_start);
    if (j.contains("solver")) c.solver = solver_options_from_json(j.at("solver"), c.solver);
    c.validate();
    return c;
}

json to_json(const PhaseTransitionConfig& c) {
    return {{"n", c.n},
            {"m", c.m},
            {"l", c.l},
            {"k_grid", c.k_grid},
            {"sep_grid", c.sep_grid},
            {"runs_per_cell", c.runs_per_cell},
            {"success_threshold", c.success_threshold},
            {"master_seed", c.master_seed},
            {"omega_mode", c.omega_mode == OmegaMode::Fixed ? "fixed" : "per_run"},
            {"anm_solver", to_json(c.anm_solver)},
            {"ram", to_json(c.ram)},
            {"anm_rank_tol", c.anm_rank_tol},
            {"ram_rank_tol", c.ram_rank_tol},
            {"threads", c.threads}};
}

PhaseTransitionConfig phase_config_from_json(const json& j, PhaseTransitionConfig c) {
    c.n = j.value("n", c.n);
    c.m = j.value("m", c.m);
    c.l = j.value("l", c.l);
    c.k_grid = j.value("k_grid", c.k_grid);
    c.sep_grid = j.value("sep_grid", c.sep_grid);
    c.runs_per_cell = j.value("runs_per_cell", c.runs_per_cell);
    c.success_threshold = j.value("success_threshold", c.success_threshold);
    c.master_seed = j.value("master_seed", c.master_seed);
    if (j.contains("omega_mode")) {
        const auto mode = j.at("omega_mode").get<std::string>();
        if (mode != "fixed" && mode != "per_run") throw InvalidArgument("omega_mode must be fixed or per_run");
        c.omega_mode = mode == "fixed" ? OmegaMode::Fixed : OmegaMode::PerRun;
    }
    if (j.contains("anm_solver")) c.anm_solver = solver_options_from_json(j.at("anm_solver"), c.anm_solver);
    if (j.contains("ram")) c.ram = ram_config_from_json(j.at("ram"), c.ram);
    c.anm_rank_tol = j.value("anm_rank_tol", c.anm_rank_tol);
    c.ram_rank_tol = j.value("ram_rank_tol", c.ram_rank_tol);
    c.threads = j.value("threads", c.threads);
    c.validate();
    return c;
}

json to_json(const DoaConfig& c) {
    return {{"omega", c.omega},
            {"n", c.n},
            {"freqs", c.freqs},
            {"powers", c.powers},
            {"l", c.l},
            {"sigma2", c.sigma2},
            {"correlation", c.correlation == Correlation::Coherent13 ? "coherent_1_3" : "uncorrelated"},
            {"coherent_phase", c.coherent_phase},
            {"runs", c.runs},
            {"ram_max_iters", c.ram_max_iters},
            {"reduce", c.reduce},
            {"master_seed", c.master_seed},
            {"anm_solver", to_json(c.anm_solver)},
            {"ram", to_json(c.ram)},
            {"anm_rank_tol", c.anm_rank_tol},
            {"ram_rank_tol", c.ram_rank_tol},
            {"music_grid", c.music_grid},
            {"threads", c.threads}};
}

DoaConfig doa_config_from_json(const json& j, DoaConfig c) {
    c.omega = j.value("omega", c.omega);
    c.n = j.value("n", c.n);
    c.freqs = j.value("freqs", c.freqs);
    c.powers = j.value("powers", c.powers);
    c.l = j.value("l", c.l);
    c.sigma2 = j.value("sigma2", c.sigma2);
    if (j.contains("correlation")) {
        const auto mode = j.at("correlation").get<std::string>();
        if (mode == "uncorrelated") {
            c.correlation = Correlation::Uncorrelated;
        } else if (mode == "coherent_1_3") {
            c.correlation = Correlation::Coherent13;
        } else {
            throw InvalidArgument("correlation must be uncorrelated or coherent_1_3");
        }
    }
    c.coherent_phase = j.value("coherent_phase", c.coherent_phase);
    c.runs = j.value("runs", c.runs);
    c.ram_max_iters = j.value("ram_max_iters", c.ram_max_iters);
    c.reduce = j.value("reduce", c.reduce);
    c.master_seed = j.value("master_seed", c.master_seed);
    if (j.contains("anm_solver")) c.anm_solver = solver_options_from_json(j.at("anm_solver"), c.anm_solver);
    if (j.contains("ram")) c.ram = ram_config_from_json(j.at("ram"), c.ram);
    c.anm_rank_tol = j.value("anm_rank_tol", c.anm_rank_tol);
    c.ram_rank_tol = j.value("ram_rank_tol", c.ram_rank_tol);
    c.music_grid = j.value("music_grid", c.music_grid);
    c.threads = j.value("threads", c.threads);
    c.validate();
    return c;
}

json to_json(const SdpSolution& s) {
    return {{"y_star", complex_matrix_to_json(s.y_star)},
            {"u_star", complex_vector_to_json(s.u_star.u())},
            {"objective", s.objective},
            {"primal_residual", s.primal_residual},
            {"dual_or_fixed_point_residual", s.dual_or_fixed_point_residual},
            {"iterations", s.iterations},
            {"converged", s.converged}};
}

json to_json(const RetrievedSpectrum& s) {
    return {{"freqs", s.freqs}, {"powers", s.powers}, {"order", s.order}, {"residual", s.residual}};
}

RetrievedSpectrum retrieved_spectrum_from_json(const json& j) {
    RetrievedSpectrum s;
    s.freqs = j.at("freqs").get<std::vector<double>>();
    s.powers = j.at("powers").get<std::vector<double>>();
    s.order = j.value("order", static_cast<int>(s.freqs.size()));
    s.residual = j.value("residual", 0.0);
    if (s.freqs.size() != s.powers.size() || static_cast<int>(s.freqs.size()) != s.order) {
        throw InvalidArgument("spectrum: freqs, powers and order disagree");
    }
    return s;
}

namespace {

template <typename T>
std::string join(const std::vector<T>& v) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ";" : "") << v[i];
    return os.str();
}

}  // namespace

void write_spectrum_csv(std::ostream& os, const RetrievedSpectrum& s) {
    const auto p = os.precision(17);
    os << "freq,power\n";
    for (std::size_t i = 0; i < s.freqs.size(); ++i) os << s.freqs[i] << ',' << s.powers[i] << '\n';
    os.precision(p);
}

void write_pseudospectrum_csv(std::ostream& os, const Pseudospectrum& ps) {
    const auto p = os.precision(17);
    os << "f,value\n";
    for (std::size_t i = 0; i < ps.grid.size(); ++i) os << ps.grid[i] << ',' << ps.values[i] << '\n';
    os.precision(p);
}

void write_phase_grid_csv(std::ostream& os, const PhaseTransitionResult& r) {
    const auto p = os.precision(17);
    os << "method,K,sep,rate,n_runs,n_successes,n_solver_failures\n";
    for (const auto& c : r.cells) {
        os << to_string(c.method) << ',' << c.k << ',' << c.sep << ',' << c.rate() << ',' << c.runs << ','
           << c.successes << ',' << c.solver_failures << '\n';
    }
    os.precision(p);
}

void write_phase_runs_csv(std::ostream& os, const PhaseTransitionResult& r) {
    const auto p = os.precision(17);
    os << "method,K,sep,run,success,solver_failure,signal_rel_mse,freq_mse,order,ram_iterations,instance_hash,"
          "wall_seconds\n";
    for (const auto& x : r.runs) {
        os << to_string(x.method) << ',' << x.k << ',' << x.sep << ',' << x.run << ',' << x.success << ','
           << x.solver_failure << ',' << x.signal_rel_mse << ',' << x.freq_mse << ',' << x.order << ','
           << x.ram_iterations << ',' << std::hex << x.instance << std::dec << ',' << x.wall_seconds << '\n';
    }
    os.precision(p);
}

void write_doa_csv(std::ostream& os, const DoaResult& r, const DoaConfig& cfg) {
    const auto p = os.precision(17);
    os << "run,mode,method,freqs,powers,detected,errors,ok,wall_seconds\n";
    const char* mode = cfg.correlation == Correlation::Coherent13 ? "coherent_1_3" : "uncorrelated";
    for (const auto& run : r.runs) {
        for (const auto& m : run.methods) {
            std::vector<int> det(m.score.detected.begin(), m.score.detected.end());
            os << run.run << ',' << mode << ',' << to_string(m.method) << ',' << join(m.freqs) << ','
               << join(m.powers) << ',' << join(det) << ',' << join(m.score.errors) << ',' << m.ok << ','
               << m.wall_seconds << '\n';
        }
    }
    os.precision(p);
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidArgument("'" + path + "': " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

}  // namespace superres
