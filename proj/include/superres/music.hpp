#pragma once

#include <vector>

#include "superres/signal_model.hpp"

namespace superres {

/// Spectrum sampled on a uniform grid of [0, 1).
struct Pseudospectrum {
    std::vector<double> grid;
    std::vector<double> values;
};

/// (1/L) Y Y^H.
CMatrix sample_covariance(const CMatrix& y_obs);

/// MUSIC spectrum 1 / ||E_n^H a_Omega(f)||^2 of a sensor covariance, where
/// E_n spans the M - k least dominant eigenvectors and a_Omega(f) is the
/// steering vector restricted to the sensor positions.
Pseudospectrum music_pseudospectrum(const CMatrix& r, int k, const SamplingPattern& pattern,
                                    int grid_size = 8192);

struct PeakPick {
    /// Ordered by decreasing peak height; equal heights by frequency.
    std::vector<double> freqs;
    /// False when fewer than the requested number of maxima exist.
    bool complete = true;
};

/// The k highest strict local maxima (circular neighbourhood), each refined
/// by a parabola through the peak and its two neighbours.
PeakPick pick_peaks(const Pseudospectrum& ps, int k);

}  // namespace superres
