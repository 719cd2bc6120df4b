// SPDX-License-Identifier: Apache-2.0
//
// l3scr: sparse channel reconstruction for fluid antenna mmWave uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Estimation pipeline, per user:
//   beamspace transform -> peak detection -> per-peak rotation refinement of
//   the arrival angle -> dictionary matched filter for departure angle and
//   gain -> rank-L reconstruction over the full port grid.
// Only the K estimating positions ever transmit pilots; the other N - K port
// channels come out of the reconstruction.

#ifndef L3SCR_ESTIMATOR_H
#define L3SCR_ESTIMATOR_H

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "l3scr/geometry.hpp"

namespace l3scr {

// Unitary DFT matrix. The phase index is reduced mod size before the sincos
// so large index products cost no precision.
struct DftOperator {
    Eigen::MatrixXcd mat;

    explicit DftOperator(int size) {
        if (size < 1)
            throw std::invalid_argument("DftOperator: size must be positive");
        mat.resize(size, size);
        const double amp = 1.0 / std::sqrt(double(size));
        for (int c = 0; c < size; ++c)
            for (int r = 0; r < size; ++r)
                mat(r, c) = std::polar(amp, -2.0 * pi * double((long long)(r) * c % size) / double(size));
    }
};

// Beamspace image (1/sqrt(M K)) * F^H * H. Rows index beams, columns keep
// indexing estimating positions.
inline Eigen::MatrixXcd dft_transform(const Eigen::MatrixXcd& h, const DftOperator& dft) {
    if (dft.mat.rows() != h.rows())
        throw std::invalid_argument("dft_transform: operator size does not match rows");
    return (dft.mat.adjoint() * h) / std::sqrt(double(h.rows()) * double(h.cols()));
}

inline Eigen::MatrixXcd dft_transform(const Eigen::MatrixXcd& h) {
    return dft_transform(h, DftOperator(int(h.rows())));
}

struct PeakDetector {
    enum class Mode { threshold, known_count };
    Mode mode = Mode::threshold;
    double alpha = 0.05; // threshold mode: keep local maxima >= alpha * strongest row
    int count = 0;       // known_count mode: how many peaks to return

    static PeakDetector threshold(double a) { return {Mode::threshold, a, 0}; }
    static PeakDetector known(int l) { return {Mode::known_count, 0.0, l}; }
};

struct PeakReport {
    std::vector<int> bins;      // 1-based beam indices, ascending
    Eigen::VectorXd row_powers; // squared row norms of the beamspace input
};

// Cyclic local maxima of the beamspace row powers. threshold mode keeps
// maxima at or above alpha times the strongest row and merges peaks closer
// than two bins, keeping the stronger (adjacent bins are leakage of a single
// arrival, not two). known_count mode returns the requested number of
// strongest local maxima unfiltered. Ties resolve toward the lower index.
inline PeakReport detect_peaks(const Eigen::MatrixXcd& beamspace, const PeakDetector& det) {
    const int m = int(beamspace.rows());
    PeakReport report;
    report.row_powers = beamspace.rowwise().squaredNorm();
    const Eigen::VectorXd& r = report.row_powers;

    std::vector<int> cand;
    for (int i = 0; i < m; ++i) {
        const double left = r((i + m - 1) % m);
        const double right = r((i + 1) % m);
        if (r(i) >= left && r(i) >= right)
            cand.push_back(i);
    }
    // strongest first, lower index wins ties
    std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) {
        if (r(a) != r(b)) return r(a) > r(b);
        return a < b;
    });

    if (det.mode == PeakDetector::Mode::known_count) {
        if (det.count < 0)
            throw std::invalid_argument("detect_peaks: negative peak count");
        cand.resize(std::min<size_t>(cand.size(), size_t(det.count)));
    } else {
        if (!(det.alpha > 0.0) || !(det.alpha < 1.0))
            throw std::invalid_argument("detect_peaks: alpha must be in (0, 1)");
        const double rmax = r.maxCoeff();
        std::vector<int> kept;
        if (rmax > 0.0) {
            for (int i : cand) {
                if (r(i) < det.alpha * rmax)
                    continue;
                bool merged = false;
                for (int j : kept) {
                    const int dist = std::abs(i - j);
                    if (std::min(dist, m - dist) < 2) {
                        merged = true;
                        break;
                    }
                }
                if (!merged)
                    kept.push_back(i);
            }
        }
        cand = std::move(kept);
    }

    std::sort(cand.begin(), cand.end());
    report.bins.reserve(cand.size());
    for (int i : cand)
        report.bins.push_back(i + 1);
    return report;
}

// Arrival angle of a beamspace bin center. Bins in the upper half of the
// index range wrap to negative cosines (obtuse arrivals). A bin no angle can
// reach under the given spacing is a spurious peak and is rejected.
inline double coarse_aoa(int bin, int rx_antennas, double rx_spacing, double wavelength) {
    if (bin < 1 || bin > rx_antennas)
        throw std::invalid_argument("coarse_aoa: bin out of range");
    const double ratio = wavelength / (double(rx_antennas) * rx_spacing);
    const bool acute = double(bin - 1) / double(rx_antennas) <= rx_spacing / wavelength;
    const double u = acute ? double(bin - 1) * ratio : double(bin - 1 - rx_antennas) * ratio;
    if (u < -1.0 || u > 1.0)
        throw std::domain_error("coarse_aoa: bin unreachable for this antenna spacing");
    return std::acos(u);
}

// Squared norm of beamspace row `bin` after rotating the estimate by
// diag{exp(j 2 pi i psi)}. Only the one needed row is formed: a single
// M-vector inner product per column, never the M x M rotation matrix.
inline double rotate_and_project(const Eigen::MatrixXcd& h, double psi, int bin) {
    const int m = int(h.rows());
    const int k = int(h.cols());
    if (bin < 1 || bin > m)
        throw std::invalid_argument("rotate_and_project: bin out of range");
    const double amp = 1.0 / std::sqrt(double(m));
    Eigen::VectorXcd w(m);
    for (int i = 0; i < m; ++i) {
        const double grid = double((long long)(i) * (bin - 1) % m) / double(m);
        w(i) = std::polar(amp, 2.0 * pi * (double(i) * psi - grid));
    }
    return (w.adjoint() * h).squaredNorm() / (double(m) * double(k));
}

struct RotationResult {
    double psi;
    double aoa;
};

// Scans psi over [-1/(2M), 1/(2M)] in rot_step increments for the rotation
// that concentrates the most power in row `bin`, then converts the shifted
// bin center to the refined arrival angle. Ties prefer the smaller |psi|,
// then the smaller psi. The acos argument is clamped: at the outermost bins
// a legitimate rotation can push it epsilon past +-1.
inline RotationResult refine_aoa(const Eigen::MatrixXcd& h, int bin, double rx_spacing,
                                 double wavelength, double rot_step) {
    const int m = int(h.rows());
    if (!(rot_step > 0.0))
        throw std::invalid_argument("refine_aoa: rot_step must be positive");
    const double lo = -0.5 / double(m);
    const int steps = int(std::lround(1.0 / (double(m) * rot_step)));
    double best_power = -1.0;
    double best_psi = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double psi = lo + double(i) * rot_step;
        const double p = rotate_and_project(h, psi, bin);
        bool take = p > best_power;
        if (p == best_power) {
            const double a = std::abs(psi), b = std::abs(best_psi);
            take = a < b || (a == b && psi < best_psi);
        }
        if (take) {
            best_power = p;
            best_psi = psi;
        }
    }
    const double ratio = wavelength / (double(m) * rx_spacing);
    const bool acute = double(bin - 1) / double(m) <= rx_spacing / wavelength;
    const double shifted = double(bin - 1) - double(m) * best_psi;
    double u = (acute ? shifted : shifted - double(m)) * ratio;
    u = std::clamp(u, -1.0, 1.0);
    return {best_psi, std::acos(u)};
}

// Transmit response dictionary on the estimating grid, column c (1-based) at
// angle (c-1)*pi/C.
struct Dictionary {
    Eigen::MatrixXcd cols;      // els x size
    std::vector<double> angles; // size

    Dictionary(int els, double el_spacing, double wavelength, int size) {
        if (els < 2)
            throw std::invalid_argument("Dictionary: at least two estimating positions required");
        if (!(el_spacing > 0.0) || el_spacing >= wavelength)
            throw std::invalid_argument("Dictionary: spacing must be positive and below one wavelength");
        if (size < 2)
            throw std::invalid_argument("Dictionary: at least two columns required");
        cols.resize(els, size);
        angles.resize(size);
        for (int c = 0; c < size; ++c) {
            angles[c] = double(c) * pi / double(size);
            cols.col(c) = steering(angles[c], els, el_spacing, wavelength);
        }
    }
};

struct AodGainEstimate {
    std::vector<double> aods;
    std::vector<cxd> gains;
    std::vector<int> dict_index;   // 1-based dictionary columns
    Eigen::MatrixXd response;      // |D^H P|, size x paths, only when captured
};

// Projects the estimate onto each refined arrival direction; the projection
// is (up to the other paths' residual) the conjugated transmit response
// scaled by the conjugated gain, so the dictionary argmax gives the AoD and
// the matched filter value at the argmax gives the gain. Ties keep the
// lowest dictionary column.
inline AodGainEstimate estimate_aod_gain(const Eigen::MatrixXcd& h,
                                         const Eigen::MatrixXcd& rx_dirs,
                                         const Dictionary& dict,
                                         bool capture_response = false) {
    if (rx_dirs.rows() != h.rows())
        throw std::invalid_argument("estimate_aod_gain: direction matrix rows must match antennas");
    if (dict.cols.rows() != h.cols())
        throw std::invalid_argument("estimate_aod_gain: dictionary rows must match estimating positions");
    const int npaths = int(rx_dirs.cols());
    const double norm = std::sqrt(double(h.rows()) * double(h.cols()));
    const Eigen::MatrixXcd proj = (h.adjoint() * rx_dirs) / norm; // els x paths
    const Eigen::MatrixXcd filt = dict.cols.adjoint() * proj;     // size x paths

    AodGainEstimate out;
    out.aods.resize(npaths);
    out.gains.resize(npaths);
    out.dict_index.resize(npaths);
    if (capture_response)
        out.response = filt.cwiseAbs();
    for (int l = 0; l < npaths; ++l) {
        int best = 0;
        double best_mag = -1.0;
        for (int c = 0; c < int(dict.angles.size()); ++c) {
            const double mag = std::norm(filt(c, l));
            if (mag > best_mag) {
                best_mag = mag;
                best = c;
            }
        }
        out.aods[l] = dict.angles[best];
        out.gains[l] = std::conj(filt(best, l));
        out.dict_index[l] = best + 1;
    }
    return out;
}

struct SparseEstimate {
    PathSet paths;                 // refined AoAs, dictionary AoDs, matched gains
    PeakReport peaks;
    std::vector<double> psis;      // chosen rotation per peak
    std::vector<int> dict_index;   // chosen dictionary column per peak
    Eigen::MatrixXd dict_response; // captured matched filter magnitudes, optional
};

// Rank-L reconstruction over the full port grid; identical formula to the
// generator, so exact parameters reproduce the true channel bit for bit.
// An empty estimate gives the all-zero channel.
inline ChannelMatrix reconstruct_full(const PathSet& paths, const SystemConfig& c) {
    return channel_at_ports(paths, c);
}

// Per-configuration operators, built once and shared across trials. Immutable
// after construction, safe to use from several threads.
struct EstimatorContext {
    SystemConfig cfg; // resolved
    DftOperator dft;
    Dictionary dict;

    static SystemConfig checked(SystemConfig c) {
        validate(c);
        return c;
    }

    explicit EstimatorContext(const SystemConfig& raw)
        : cfg(checked(raw.resolved())),
          dft(cfg.rx_antennas),
          dict(cfg.els, cfg.el_spacing, cfg.wavelength, cfg.dict_size) {}

    // Full pipeline on one user's LS estimate at the estimating positions.
    std::pair<SparseEstimate, ChannelMatrix> run(const Eigen::MatrixXcd& h_ls,
                                                 PeakDetector det,
                                                 bool capture_diagnostics = false) const {
        if (int(h_ls.rows()) != cfg.rx_antennas || int(h_ls.cols()) != cfg.els)
            throw std::invalid_argument("EstimatorContext::run: estimate shape mismatch");
        if (det.mode == PeakDetector::Mode::known_count && det.count == 0)
            det.count = cfg.paths;

        SparseEstimate est;
        est.peaks = detect_peaks(dft_transform(h_ls, dft), det);
        const int found = int(est.peaks.bins.size());
        if (found == 0)
            return {std::move(est), reconstruct_full(est.paths, cfg)};

        est.psis.resize(found);
        est.paths.aoas.resize(found);
        Eigen::MatrixXcd rx_dirs(cfg.rx_antennas, found);
        for (int l = 0; l < found; ++l) {
            const RotationResult rot =
                refine_aoa(h_ls, est.peaks.bins[l], cfg.rx_spacing, cfg.wavelength, cfg.rot_step);
            est.psis[l] = rot.psi;
            est.paths.aoas[l] = rot.aoa;
            rx_dirs.col(l) = steering_rx(rot.aoa, cfg);
        }

        AodGainEstimate aod = estimate_aod_gain(h_ls, rx_dirs, dict, capture_diagnostics);
        est.paths.aods = std::move(aod.aods);
        est.paths.gains = std::move(aod.gains);
        est.dict_index = std::move(aod.dict_index);
        est.dict_response = std::move(aod.response);
        return {std::move(est), reconstruct_full(est.paths, cfg)};
    }
};

// Convenience wrapper for single runs; Monte-Carlo loops should hold an
// EstimatorContext instead of rebuilding the dictionary per trial.
inline std::pair<SparseEstimate, ChannelMatrix> run_l3scr(const Eigen::MatrixXcd& h_ls,
                                                          const SystemConfig& cfg,
                                                          const PeakDetector& det,
                                                          bool capture_diagnostics = false) {
    return EstimatorContext(cfg).run(h_ls, det, capture_diagnostics);
}

} // namespace l3scr

#endif
