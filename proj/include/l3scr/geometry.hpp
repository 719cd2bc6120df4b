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

#ifndef L3SCR_GEOMETRY_H
#define L3SCR_GEOMETRY_H

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "l3scr/config.hpp"
#include "l3scr/rng.hpp"

namespace l3scr {

// One user's propagation paths.
struct PathSet {
    std::vector<cxd> gains;
    std::vector<double> aoas; // arrival angles at the BS, radians in [0, pi]
    std::vector<double> aods; // departure angles at the FAS, radians in [0, pi]

    int count() const { return int(gains.size()); }
};

// Channel seen at a set of transmit element coordinates. Column k belongs to
// the element at positions(k) meters from the shared origin.
struct ChannelMatrix {
    Eigen::MatrixXcd m; // rx_antennas x positions.size()
    Eigen::VectorXd positions;
};

// Unit-norm array response of `count` elements spaced `spacing` meters apart
// from a common x = 0 origin. Serves the BS array, the EL grid and the AoD
// dictionary alike.
inline Eigen::VectorXcd steering(double angle, int count, double spacing, double wavelength) {
    if (!(angle >= 0.0 && angle <= pi))
        throw std::domain_error("steering: angle outside [0, pi]");
    if (count < 1)
        throw std::invalid_argument("steering: element count must be positive");
    const double step = 2.0 * pi / wavelength * spacing * std::cos(angle);
    const double amp = 1.0 / std::sqrt(double(count));
    Eigen::VectorXcd v(count);
    for (int i = 0; i < count; ++i)
        v(i) = std::polar(amp, -step * double(i));
    return v;
}

inline Eigen::VectorXcd steering_rx(double aoa, const SystemConfig& c) {
    return steering(aoa, c.rx_antennas, c.rx_spacing, c.wavelength);
}

// N port coordinates spanning [0, W*lambda], spacing W*lambda/(N-1)
inline Eigen::VectorXd port_grid(const SystemConfig& c) {
    Eigen::VectorXd x(c.ports);
    const double step = c.aperture * c.wavelength / double(c.ports - 1);
    for (int n = 0; n < c.ports; ++n)
        x(n) = step * double(n);
    return x;
}

// K estimating positions at {0, delta, ..., (K-1)*delta}
inline Eigen::VectorXd el_grid(const SystemConfig& c) {
    Eigen::VectorXd x(c.els);
    for (int k = 0; k < c.els; ++k)
        x(k) = c.el_spacing * double(k);
    return x;
}

// Path gains are CN(0, 1/L) so each channel entry has unit average power;
// both angles are Uniform[0, pi]. One PathSet per user, users drawn in order.
inline std::vector<PathSet> generate_paths(const SystemConfig& c, Rng& rng) {
    std::vector<PathSet> out(c.users);
    for (auto& ps : out) {
        ps.gains.resize(c.paths);
        ps.aoas.resize(c.paths);
        ps.aods.resize(c.paths);
        for (auto& g : ps.gains) g = rng.cgaussian(1.0 / double(c.paths));
        for (auto& a : ps.aoas) a = rng.uniform() * pi;
        for (auto& a : ps.aods) a = rng.uniform() * pi;
    }
    return out;
}

// Multipath channel at arbitrary element coordinates x (meters). Entry (i, k):
//   sum_l gain_l * exp(-j*2pi/lambda * spacing*i * cos(aoa_l))
//                * exp(+j*2pi/lambda * x_k      * cos(aod_l))
// The transmit-side sign is positive because the rank-one factorization
// carries the Hermitian transpose of the transmit response; restricted to a
// uniform grid this matches sqrt(M*P) * A_rx * diag(gains) * A_tx^H exactly.
// Each column depends only on its own coordinate, so generating on a subset
// of positions reproduces those columns bit for bit.
inline ChannelMatrix channel_at_positions(const PathSet& paths, const Eigen::VectorXd& x,
                                          int rx_antennas, double rx_spacing, double wavelength) {
    if (rx_antennas < 1)
        throw std::invalid_argument("channel_at_positions: rx_antennas must be positive");
    ChannelMatrix out;
    out.positions = x;
    out.m = Eigen::MatrixXcd::Zero(rx_antennas, x.size());
    const double k0 = 2.0 * pi / wavelength;
    Eigen::VectorXcd rx(rx_antennas);
    Eigen::RowVectorXcd tx(x.size());
    for (int l = 0; l < paths.count(); ++l) {
        const double ca = std::cos(paths.aoas[l]);
        const double cd = std::cos(paths.aods[l]);
        for (int i = 0; i < rx_antennas; ++i)
            rx(i) = std::polar(1.0, -k0 * rx_spacing * double(i) * ca);
        for (int k = 0; k < x.size(); ++k)
            tx(k) = std::polar(1.0, k0 * x(k) * cd);
        out.m.noalias() += paths.gains[l] * rx * tx;
    }
    return out;
}

inline ChannelMatrix channel_at_ports(const PathSet& paths, const SystemConfig& c) {
    return channel_at_positions(paths, port_grid(c), c.rx_antennas, c.rx_spacing, c.wavelength);
}

inline ChannelMatrix channel_at_els(const PathSet& paths, const SystemConfig& c) {
    return channel_at_positions(paths, el_grid(c), c.rx_antennas, c.rx_spacing, c.wavelength);
}

} // namespace l3scr

#endif
