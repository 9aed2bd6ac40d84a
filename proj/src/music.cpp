#include "superres/music.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "superres/errors.hpp"
#include "superres/linalg.hpp"

namespace superres {

CMatrix sample_covariance(const CMatrix& y_obs) {
    if (y_obs.cols() < 1) throw InvalidArgument("sample_covariance: need at least one snapshot");
    CMatrix r = y_obs * y_obs.adjoint() / static_cast<double>(y_obs.cols());
    return hermitian_part(r);
}

Pseudospectrum music_pseudospectrum(const CMatrix& r, int k, const SamplingPattern& pattern, int grid_size) {
    const int m = pattern.m();
    if (r.rows() != m || r.cols() != m) throw InvalidArgument("music: covariance does not match the pattern");
    if (k < 0 || k >= m) throw InvalidArgument("music: need 0 <= k < M");
    if (grid_size < 3) throw InvalidArgument("music: grid too small");

    const auto es = hermitian_eigen(r);
    const CMatrix noise = es.eigenvectors().leftCols(m - k);

    Pseudospectrum ps;
    ps.grid.resize(static_cast<std::size_t>(grid_size));
    ps.values.resize(static_cast<std::size_t>(grid_size));
    CVector a(m);
    for (int g = 0; g < grid_size; ++g) {
        const double f = static_cast<double>(g) / grid_size;
        for (int i = 0; i < m; ++i) a(i) = std::polar(1.0, 2.0 * std::numbers::pi * f * pattern.row(i));
        const double den = (noise.adjoint() * a).squaredNorm();
        ps.grid[static_cast<std::size_t>(g)] = f;
        ps.values[static_cast<std::size_t>(g)] = den > 0.0 ? 1.0 / den : std::numeric_limits<double>::max();
    }
    return ps;
}

PeakPick pick_peaks(const Pseudospectrum& ps, int k) {
    const auto g = ps.values.size();
    if (ps.grid.size() != g) throw InvalidArgument("pick_peaks: grid and values differ in length");
    PeakPick out;
    if (k <= 0 || g < 3) {
        out.complete = k <= 0;
        return out;
    }
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < g; ++i) {
        const double left = ps.values[(i + g - 1) % g];
        const double right = ps.values[(i + 1) % g];
        if (ps.values[i] > left && ps.values[i] > right) peaks.push_back(i);
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [&](std::size_t a, std::size_t b) { return ps.values[a] > ps.values[b]; });
    if (static_cast<int>(peaks.size()) < k) out.complete = false;
    peaks.resize(std::min(peaks.size(), static_cast<std::size_t>(k)));

    const double step = 1.0 / static_cast<double>(g);
    for (std::size_t i : peaks) {
        const double ym = ps.values[(i + g - 1) % g];
        const double y0 = ps.values[i];
        const double yp = ps.values[(i + 1) % g];
        const double curv = ym - 2.0 * y0 + yp;
        double offset = curv < 0.0 ? 0.5 * (ym - yp) / curv : 0.0;
        offset = std::clamp(offset, -0.5, 0.5);
        out.freqs.push_back(canonical_frequency(ps.grid[i] + offset * step));
    }
    return out;
}

}  // namespace superres
