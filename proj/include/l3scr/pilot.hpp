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

#ifndef L3SCR_PILOT_H
#define L3SCR_PILOT_H

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "l3scr/geometry.hpp"

namespace l3scr {

// Column u is user u's pilot sequence; columns are orthonormal.
struct PilotBook {
    Eigen::MatrixXcd seq; // users x users
};

// Unitary DFT pilot book.
inline PilotBook make_pilots(int users) {
    if (users < 1)
        throw std::invalid_argument("make_pilots: users must be positive");
    PilotBook book;
    book.seq.resize(users, users);
    const double amp = 1.0 / std::sqrt(double(users));
    for (int c = 0; c < users; ++c)
        for (int r = 0; r < users; ++r)
            book.seq(r, c) = std::polar(amp, -2.0 * pi * double((long long)(r) * c % users) / double(users));
    return book;
}

// One pilot subframe at one antenna position:
//   Y = sum_u sqrt(p_u) g_u q_u^H + noise_scale * Z,  Z iid CN(0, 1).
// Noise is drawn column major; noise_scale 0 gives the noiseless limit.
inline Eigen::MatrixXcd simulate_pilot_rx(const std::vector<Eigen::VectorXcd>& channels,
                                          const PilotBook& pilots,
                                          const std::vector<double>& powers,
                                          Rng& rng, double noise_scale = 1.0) {
    const int users = int(channels.size());
    if (users == 0 || pilots.seq.rows() != users || int(powers.size()) != users)
        throw std::invalid_argument("simulate_pilot_rx: users, pilots and powers must agree");
    const int m = int(channels[0].size());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(m, users);
    for (int u = 0; u < users; ++u) {
        if (int(channels[u].size()) != m)
            throw std::invalid_argument("simulate_pilot_rx: channel length mismatch");
        y.noalias() += std::sqrt(powers[u]) * channels[u] * pilots.seq.col(u).adjoint();
    }
    if (noise_scale != 0.0)
        for (int t = 0; t < users; ++t)
            for (int i = 0; i < m; ++i)
                y(i, t) += noise_scale * rng.cgaussian(1.0);
    return y;
}

// Least-squares estimate from T received subframes:
//   g_hat_u = 1/(T sqrt(p_u)) * (sum_t Y_t) q_u.
// Pilot orthogonality cancels the other users' contributions exactly.
inline std::vector<Eigen::VectorXcd> ls_estimate(const std::vector<Eigen::MatrixXcd>& received,
                                                 const PilotBook& pilots,
                                                 const std::vector<double>& powers) {
    if (received.empty())
        throw std::invalid_argument("ls_estimate: no subframes");
    const int users = int(pilots.seq.rows());
    if (int(powers.size()) != users)
        throw std::invalid_argument("ls_estimate: one power per user required");
    Eigen::MatrixXcd acc = received[0];
    for (size_t t = 1; t < received.size(); ++t)
        acc += received[t];
    const double reps = double(received.size());
    std::vector<Eigen::VectorXcd> out(users);
    for (int u = 0; u < users; ++u)
        out[u] = acc * pilots.seq.col(u) / (reps * std::sqrt(powers[u]));
    return out;
}

struct LSEstimate {
    ChannelMatrix channel;
    double noise_var; // per-entry estimation error variance, 1/(T p_u)
};

// LS channel estimate across every position of the given true channels.
// fast mode adds the exact error statistics (iid CN(0, 1/(T p_u)) per entry)
// directly; full mode simulates each pilot subframe and runs ls_estimate.
// Both agree in distribution, fast is what Monte-Carlo sweeps use.
inline std::vector<LSEstimate> ls_sweep(const std::vector<ChannelMatrix>& truth,
                                        const SystemConfig& c, Rng& rng,
                                        bool fast = true, double noise_scale = 1.0) {
    const int users = c.users;
    if (int(truth.size()) != users)
        throw std::invalid_argument("ls_sweep: one channel per user required");
    if (int(c.tx_power.size()) != users)
        throw std::invalid_argument("ls_sweep: one power per user required");
    const int m = int(truth[0].m.rows());
    const int np = int(truth[0].m.cols());
    for (const auto& ch : truth)
        if (int(ch.m.rows()) != m || int(ch.m.cols()) != np)
            throw std::invalid_argument("ls_sweep: channel dimensions differ between users");

    std::vector<LSEstimate> out(users);
    for (int u = 0; u < users; ++u) {
        out[u].channel.positions = truth[u].positions;
        out[u].channel.m = truth[u].m;
        out[u].noise_var = 1.0 / (double(c.subframes) * c.tx_power[u]);
    }

    if (fast) {
        for (int u = 0; u < users; ++u) {
            if (noise_scale == 0.0)
                continue;
            auto& est = out[u].channel.m;
            const double var = out[u].noise_var;
            for (int n = 0; n < np; ++n)
                for (int i = 0; i < m; ++i)
                    est(i, n) += noise_scale * rng.cgaussian(var);
        }
        return out;
    }

    const PilotBook pilots = make_pilots(users);
    std::vector<Eigen::VectorXcd> cols(users);
    std::vector<Eigen::MatrixXcd> frames(c.subframes);
    for (int n = 0; n < np; ++n) {
        for (int u = 0; u < users; ++u)
            cols[u] = truth[u].m.col(n);
        for (int t = 0; t < c.subframes; ++t)
            frames[t] = simulate_pilot_rx(cols, pilots, c.tx_power, rng, noise_scale);
        auto est = ls_estimate(frames, pilots, c.tx_power);
        for (int u = 0; u < users; ++u)
            out[u].channel.m.col(n) = est[u];
    }
    return out;
}

} // namespace l3scr

#endif
