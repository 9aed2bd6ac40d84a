#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>

#include <json.hpp>

#include "superres/experiments.hpp"

namespace superres {

using json = nlohmann::json;

/// Self-contained description of a synthetic measurement: the mixture, the
/// sampling pattern, the noise draw and the feasible domain. When `y_obs` is
/// present it is the observed data verbatim; otherwise the data are
/// regenerated from the mixture and the noise seed.
struct SignalDocument {
    int n = 0;
    int l = 1;
    SamplingPattern pattern;
    FrequencyMixture mixture;
    double sigma2 = 0.0;
    std::uint64_t noise_seed = 0;
    FeasibleDomain domain = EqualityOnOmega{};
    std::optional<CMatrix> y_obs;
};

/// Nested rows of [re, im] pairs.
json complex_matrix_to_json(const CMatrix& m);
CMatrix complex_matrix_from_json(const json& j);
json complex_vector_to_json(const CVector& v);
CVector complex_vector_from_json(const json& j);

json to_json(const SignalDocument& doc);
SignalDocument signal_document_from_json(const json& j);

/// Full-length data Y^o and the measurement set the document describes.
struct MaterializedSignal {
    CMatrix y_full;
    MeasurementSet meas;
};
MaterializedSignal materialize(const SignalDocument& doc);

json to_json(const SolverOptions& o);
SolverOptions solver_options_from_json(const json& j, SolverOptions base = {});
json to_json(const RamConfig& c);
RamConfig ram_config_from_json(const json& j, RamConfig base = {});
json to_json(const PhaseTransitionConfig& c);
PhaseTransitionConfig phase_config_from_json(const json& j, PhaseTransitionConfig base = {});
json to_json(const DoaConfig& c);
DoaConfig doa_config_from_json(const json& j, DoaConfig base = {});

json to_json(const SdpSolution& s);
json to_json(const RetrievedSpectrum& s);
RetrievedSpectrum retrieved_spectrum_from_json(const json& j);

void write_spectrum_csv(std::ostream& os, const RetrievedSpectrum& s);
void write_pseudospectrum_csv(std::ostream& os, const Pseudospectrum& ps);
void write_phase_grid_csv(std::ostream& os, const PhaseTransitionResult& r);
void write_phase_runs_csv(std::ostream& os, const PhaseTransitionResult& r);
void write_doa_csv(std::ostream& os, const DoaResult& r, const DoaConfig& cfg);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace superres
