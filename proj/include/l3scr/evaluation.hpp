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

#ifndef L3SCR_EVALUATION_H
#define L3SCR_EVALUATION_H

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "l3scr/geometry.hpp"

namespace l3scr {

// Error energy over all users relative to the true energy, one realization:
//   sum_u ||G_u - Ghat_u||_F^2 / sum_u ||G_u||_F^2
inline double nmse(const std::vector<ChannelMatrix>& truth,
                   const std::vector<ChannelMatrix>& estimate) {
    if (truth.size() != estimate.size() || truth.empty())
        throw std::invalid_argument("nmse: need matching nonempty user lists");
    double num = 0.0, den = 0.0;
    for (size_t u = 0; u < truth.size(); ++u) {
        if (truth[u].m.rows() != estimate[u].m.rows() || truth[u].m.cols() != estimate[u].m.cols())
            throw std::invalid_argument("nmse: shape mismatch");
        num += (truth[u].m - estimate[u].m).squaredNorm();
        den += truth[u].m.squaredNorm();
    }
    if (den == 0.0)
        throw std::invalid_argument("nmse: zero-power reference channel");
    return num / den;
}

// Maximum ratio combiner, unit norm.
inline Eigen::VectorXcd mrc_receiver(const Eigen::VectorXcd& g) {
    const double n = g.norm();
    if (n == 0.0)
        throw std::invalid_argument("mrc_receiver: zero channel");
    return g / n;
}

// Uplink sum rate for one port tuple (1-based ports), log base 2, unit noise
// power. Receivers need not be unit norm; the noise term is ||w_u||^2.
// An all-zero receiver contributes a zero-rate term.
inline double sum_rate(const std::vector<ChannelMatrix>& truth,
                       const std::vector<Eigen::VectorXcd>& receivers,
                       const std::vector<int>& ports,
                       const std::vector<double>& powers) {
    const size_t users = truth.size();
    if (receivers.size() != users || ports.size() != users || powers.size() != users || users == 0)
        throw std::invalid_argument("sum_rate: per-user argument lists must agree");
    for (size_t u = 0; u < users; ++u)
        if (ports[u] < 1 || ports[u] > int(truth[u].m.cols()))
            throw std::invalid_argument("sum_rate: port index out of range");
    double rate = 0.0;
    for (size_t u = 0; u < users; ++u) {
        const auto& w = receivers[u];
        const double wn = w.squaredNorm();
        if (wn == 0.0)
            continue;
        const double sig = powers[u] * std::norm(w.dot(truth[u].m.col(ports[u] - 1)));
        double interf = 0.0;
        for (size_t v = 0; v < users; ++v)
            if (v != u)
                interf += powers[v] * std::norm(w.dot(truth[v].m.col(ports[v] - 1)));
        rate += std::log2(1.0 + sig / (interf + wn));
    }
    return rate;
}

struct PortSelection {
    std::vector<int> ports; // 1-based, one per user
    double achieved_rate;   // evaluated against the true channels
};

// Exhaustive search over all N^U port tuples. Ports are chosen on the
// decision channels with MRC receivers derived from them; the returned rate
// re-evaluates that choice (ports and receivers) against the true channels.
// Ties go to the lexicographically smallest tuple. The per-tuple cost is kept
// at O(U^2) by precomputing every cross-port effective gain once.
inline PortSelection best_ports(const std::vector<ChannelMatrix>& decision,
                                const std::vector<ChannelMatrix>& truth,
                                const std::vector<double>& powers) {
    const int users = int(decision.size());
    if (users == 0 || truth.size() != decision.size() || powers.size() != decision.size())
        throw std::invalid_argument("best_ports: per-user argument lists must agree");
    const int nports = int(decision[0].m.cols());
    for (const auto& d : decision)
        if (int(d.m.cols()) != nports)
            throw std::invalid_argument("best_ports: decision port counts differ");

    // self[u](n)        = ||ghat_{u,n}||^2
    // cross[u][v](n,n') = |w_{u,n}^H ghat_{v,n'}|^2 with w the MRC receiver
    std::vector<Eigen::VectorXd> self(users);
    std::vector<std::vector<Eigen::MatrixXd>> cross(users);
    for (int u = 0; u < users; ++u)
        self[u] = decision[u].m.colwise().squaredNorm();
    for (int u = 0; u < users; ++u) {
        cross[u].resize(users);
        for (int v = 0; v < users; ++v) {
            if (v == u)
                continue;
            Eigen::MatrixXd g2 = (decision[u].m.adjoint() * decision[v].m).cwiseAbs2();
            for (int n = 0; n < nports; ++n) {
                if (self[u](n) > 0.0)
                    g2.row(n) /= self[u](n);
                else
                    g2.row(n).setZero();
            }
            cross[u][v] = std::move(g2);
        }
    }

    std::vector<int> tuple(users, 0), best_tuple(users, 0);
    double best = -1.0;
    while (true) {
        double rate = 0.0;
        for (int u = 0; u < users; ++u) {
            if (self[u](tuple[u]) == 0.0)
                continue;
            const double sig = powers[u] * self[u](tuple[u]);
            double interf = 0.0;
            for (int v = 0; v < users; ++v)
                if (v != u)
                    interf += powers[v] * cross[u][v](tuple[u], tuple[v]);
            rate += std::log2(1.0 + sig / (interf + 1.0));
        }
        if (rate > best) {
            best = rate;
            best_tuple = tuple;
        }
        // lexicographic odometer, user 0 most significant
        int digit = users - 1;
        while (digit >= 0 && ++tuple[digit] == nports)
            tuple[digit--] = 0;
        if (digit < 0)
            break;
    }

    PortSelection sel;
    sel.ports.resize(users);
    std::vector<Eigen::VectorXcd> receivers(users);
    for (int u = 0; u < users; ++u) {
        sel.ports[u] = best_tuple[u] + 1;
        const Eigen::VectorXcd col = decision[u].m.col(best_tuple[u]);
        receivers[u] = col.norm() > 0.0 ? Eigen::VectorXcd(col / col.norm())
                                        : Eigen::VectorXcd(Eigen::VectorXcd::Zero(col.size()));
    }
    sel.achieved_rate = sum_rate(truth, receivers, sel.ports, powers);
    return sel;
}

// One Monte-Carlo trial's outcome. Fields stay empty when the method was not
// requested.
struct TrialRecord {
    std::uint64_t seed = 0;
    std::optional<double> nmse_ls, nmse_l3scr;
    std::optional<double> rate_ls, rate_l3scr, rate_perfect;
    std::vector<int> ports_ls, ports_l3scr, ports_perfect;

    static std::string csv_header() {
        return "seed,nmse_ls,nmse_l3scr,rate_ls,rate_l3scr,rate_perfect,"
               "ports_ls,ports_l3scr,ports_perfect";
    }

    std::string csv_row() const {
        auto num = [](const std::optional<double>& v) {
            if (!v)
                return std::string();
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.9g", *v);
            return std::string(buf);
        };
        auto list = [](const std::vector<int>& p) {
            std::string s;
            for (size_t i = 0; i < p.size(); ++i)
                s += (i ? ";" : "") + std::to_string(p[i]);
            return s;
        };
        std::ostringstream os;
        os << seed << ',' << num(nmse_ls) << ',' << num(nmse_l3scr) << ',' << num(rate_ls)
           << ',' << num(rate_l3scr) << ',' << num(rate_perfect) << ',' << list(ports_ls)
           << ',' << list(ports_l3scr) << ',' << list(ports_perfect);
        return os.str();
    }
};

} // namespace l3scr

#endif
