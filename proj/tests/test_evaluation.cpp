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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "l3scr/evaluation.hpp"
#include "l3scr/experiment.hpp"

using namespace l3scr;

namespace {

ChannelMatrix as_channel(const Eigen::MatrixXcd& m) {
    ChannelMatrix ch;
    ch.m = m;
    ch.positions = Eigen::VectorXd::LinSpaced(m.cols(), 0.0, 1.0);
    return ch;
}

Eigen::MatrixXcd random_matrix(int rows, int cols, Rng& rng) {
    Eigen::MatrixXcd m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r)
            m(r, c) = rng.cgaussian(1.0);
    return m;
}

// scalar reimplementation of the rate formula, no shared code with sum_rate
double rate_by_hand(const std::vector<Eigen::MatrixXcd>& truth,
                    const std::vector<Eigen::VectorXcd>& receivers,
                    const std::vector<int>& ports,
                    const std::vector<double>& powers) {
    double total = 0.0;
    for (size_t u = 0; u < truth.size(); ++u) {
        double wnorm2 = 0.0;
        for (int i = 0; i < receivers[u].size(); ++i)
            wnorm2 += std::norm(receivers[u](i));
        if (wnorm2 == 0.0)
            continue;
        auto gain = [&](size_t v) {
            cxd acc(0.0, 0.0);
            for (int i = 0; i < receivers[u].size(); ++i)
                acc += std::conj(receivers[u](i)) * truth[v](i, ports[v] - 1);
            return std::norm(acc);
        };
        double interf = 0.0;
        for (size_t v = 0; v < truth.size(); ++v)
            if (v != u)
                interf += powers[v] * gain(v);
        total += std::log2(1.0 + powers[u] * gain(u) / (interf + wnorm2));
    }
    return total;
}

// exhaustive reference for the two user port search, decision rule included
std::pair<std::vector<int>, double> best_ports_by_hand(
    const std::vector<ChannelMatrix>& decision,
    const std::vector<ChannelMatrix>& truth,
    const std::vector<double>& powers) {
    const int nports = int(decision[0].m.cols());
    std::vector<int> best;
    double best_rate = -1.0;
    for (int a = 1; a <= nports; ++a) {
        for (int b = 1; b <= nports; ++b) {
            std::vector<int> tuple = {a, b};
            std::vector<Eigen::VectorXcd> rx(2);
            for (int u = 0; u < 2; ++u) {
                const Eigen::VectorXcd col = decision[u].m.col(tuple[u] - 1);
                rx[u] = col.norm() > 0.0 ? Eigen::VectorXcd(col / col.norm())
                                         : Eigen::VectorXcd(Eigen::VectorXcd::Zero(col.size()));
            }
            const double rate = sum_rate(decision, rx, tuple, powers);
            if (rate > best_rate) {
                best_rate = rate;
                best = tuple;
            }
        }
    }
    std::vector<Eigen::VectorXcd> rx(2);
    for (int u = 0; u < 2; ++u) {
        const Eigen::VectorXcd col = decision[u].m.col(best[u] - 1);
        rx[u] = col.norm() > 0.0 ? Eigen::VectorXcd(col / col.norm())
                                 : Eigen::VectorXcd(Eigen::VectorXcd::Zero(col.size()));
    }
    return {best, sum_rate(truth, rx, best, powers)};
}

} // namespace

TEST_CASE("error ratio is zero for perfect estimates and one for silence") {
    Rng rng(1);
    std::vector<ChannelMatrix> truth = {as_channel(random_matrix(4, 3, rng)),
                                        as_channel(random_matrix(4, 3, rng))};
    REQUIRE(nmse(truth, truth) == 0.0);
    std::vector<ChannelMatrix> silent = {as_channel(Eigen::MatrixXcd::Zero(4, 3)),
                                         as_channel(Eigen::MatrixXcd::Zero(4, 3))};
    REQUIRE(std::abs(nmse(truth, silent) - 1.0) < 1e-14);
}

TEST_CASE("error ratio equals the hand computed value on a known perturbation") {
    Eigen::MatrixXcd g(2, 2);
    g << cxd(1, 0), cxd(0, 1), cxd(2, 0), cxd(0, 0);
    Eigen::MatrixXcd e(2, 2);
    e << cxd(0.1, 0), cxd(0, 0), cxd(0, 0), cxd(0, -0.2);
    const double expected = (0.01 + 0.04) / 6.0;
    const double got = nmse({as_channel(g)}, {as_channel(g + e)});
    REQUIRE(std::abs(got - expected) < 1e-12);
}

TEST_CASE("error ratio rejects bad inputs") {
    Rng rng(2);
    std::vector<ChannelMatrix> truth = {as_channel(random_matrix(4, 3, rng))};
    std::vector<ChannelMatrix> zero = {as_channel(Eigen::MatrixXcd::Zero(4, 3))};
    std::vector<ChannelMatrix> narrow = {as_channel(random_matrix(4, 2, rng))};
    REQUIRE_THROWS_AS(nmse(zero, truth), std::invalid_argument);
    REQUIRE_THROWS_AS(nmse(truth, narrow), std::invalid_argument);
    REQUIRE_THROWS_AS(nmse({}, {}), std::invalid_argument);
    std::vector<ChannelMatrix> two = {truth[0], truth[0]};
    REQUIRE_THROWS_AS(nmse(truth, two), std::invalid_argument);
}

TEST_CASE("combiner is the normalized channel and rejects silence") {
    Eigen::VectorXcd g(2);
    g << cxd(1, 0), cxd(0, 0);
    const Eigen::VectorXcd w = mrc_receiver(g);
    REQUIRE(std::abs(w(0) - cxd(1, 0)) < 1e-15);
    REQUIRE(std::abs(w(1)) < 1e-15);
    Rng rng(3);
    const Eigen::VectorXcd r = mrc_receiver(random_matrix(8, 1, rng).col(0));
    REQUIRE(std::abs(r.norm() - 1.0) < 1e-12);
    REQUIRE_THROWS_AS(mrc_receiver(Eigen::VectorXcd::Zero(4)), std::invalid_argument);
}

TEST_CASE("single user rate has the matched filter closed form") {
    Rng rng(4);
    const Eigen::VectorXcd g = random_matrix(6, 1, rng).col(0);
    const double p = 10.0;
    std::vector<ChannelMatrix> truth = {as_channel(g)};
    const double rate = sum_rate(truth, {mrc_receiver(g)}, {1}, {p});
    REQUIRE(std::abs(rate - std::log2(1.0 + p * g.squaredNorm())) < 1e-12);
}

TEST_CASE("orthogonal unit channels see no interference") {
    Eigen::MatrixXcd g1 = Eigen::MatrixXcd::Zero(2, 1);
    Eigen::MatrixXcd g2 = Eigen::MatrixXcd::Zero(2, 1);
    g1(0, 0) = 1.0;
    g2(1, 0) = 1.0;
    std::vector<ChannelMatrix> truth = {as_channel(g1), as_channel(g2)};
    std::vector<Eigen::VectorXcd> rx = {g1.col(0), g2.col(0)};
    const double rate = sum_rate(truth, rx, {1, 1}, {10.0, 10.0});
    REQUIRE(std::abs(rate - 2.0 * std::log2(11.0)) < 1e-12);
}

TEST_CASE("rate matches an independent scalar evaluation") {
    Rng rng(5);
    std::vector<Eigen::MatrixXcd> raw = {random_matrix(3, 2, rng), random_matrix(3, 2, rng)};
    std::vector<ChannelMatrix> truth = {as_channel(raw[0]), as_channel(raw[1])};
    std::vector<Eigen::VectorXcd> rx = {mrc_receiver(raw[0].col(1)), mrc_receiver(raw[1].col(0))};
    const std::vector<int> ports = {2, 1};
    const std::vector<double> powers = {10.0, 4.0};
    REQUIRE(std::abs(sum_rate(truth, rx, ports, powers) -
                     rate_by_hand(raw, rx, ports, powers)) < 1e-12);

    // scaling a receiver changes nothing, a silent receiver drops its term
    std::vector<Eigen::VectorXcd> scaled = {2.0 * rx[0], rx[1]};
    REQUIRE(std::abs(sum_rate(truth, scaled, ports, powers) -
                     sum_rate(truth, rx, ports, powers)) < 1e-12);
    std::vector<Eigen::VectorXcd> muted = {rx[0], Eigen::VectorXcd::Zero(3)};
    REQUIRE(std::abs(sum_rate(truth, muted, ports, powers) -
                     rate_by_hand(raw, muted, ports, powers)) < 1e-12);
}

TEST_CASE("rate validates ports and list sizes") {
    Rng rng(6);
    std::vector<ChannelMatrix> truth = {as_channel(random_matrix(3, 2, rng))};
    std::vector<Eigen::VectorXcd> rx = {mrc_receiver(truth[0].m.col(0))};
    REQUIRE_THROWS_AS(sum_rate(truth, rx, {0}, {1.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(sum_rate(truth, rx, {3}, {1.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(sum_rate(truth, rx, {1, 1}, {1.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(sum_rate({}, {}, {}, {}), std::invalid_argument);
}

TEST_CASE("port search with perfect knowledge achieves the true maximum") {
    Rng rng(7);
    std::vector<ChannelMatrix> truth = {as_channel(random_matrix(4, 3, rng)),
                                        as_channel(random_matrix(4, 3, rng))};
    const std::vector<double> p = {10.0, 10.0};
    const PortSelection sel = best_ports(truth, truth, p);
    const auto [tuple, rate] = best_ports_by_hand(truth, truth, p);
    REQUIRE(sel.ports == tuple);
    REQUIRE(std::abs(sel.achieved_rate - rate) < 1e-12);
}

TEST_CASE("a single user picks the strongest port") {
    Eigen::MatrixXcd g(2, 2);
    g << cxd(0.1, 0), cxd(3, 0), cxd(0, 0.1), cxd(0, 2);
    const PortSelection sel = best_ports({as_channel(g)}, {as_channel(g)}, {1.0});
    REQUIRE(sel.ports == std::vector<int>{2});
    REQUIRE(std::abs(sel.achieved_rate - std::log2(1.0 + 13.0)) < 1e-12);
}

TEST_CASE("port search agrees with brute force on random instances") {
    Rng rng(8);
    const std::vector<double> p = {10.0, 5.0};
    for (int inst = 0; inst < 50; ++inst) {
        std::vector<ChannelMatrix> decision = {as_channel(random_matrix(4, 4, rng)),
                                               as_channel(random_matrix(4, 4, rng))};
        std::vector<ChannelMatrix> truth = {as_channel(random_matrix(4, 4, rng)),
                                            as_channel(random_matrix(4, 4, rng))};
        const PortSelection sel = best_ports(decision, truth, p);
        const auto [tuple, rate] = best_ports_by_hand(decision, truth, p);
        REQUIRE(sel.ports == tuple);
        REQUIRE(std::abs(sel.achieved_rate - rate) < 1e-12);
    }
}

TEST_CASE("port search ties resolve to the smallest tuple") {
    Eigen::MatrixXcd same(2, 3);
    same << cxd(1, 0), cxd(1, 0), cxd(1, 0), cxd(0, 1), cxd(0, 1), cxd(0, 1);
    const PortSelection one = best_ports({as_channel(same)}, {as_channel(same)}, {1.0});
    REQUIRE(one.ports == std::vector<int>{1});
    const PortSelection two = best_ports({as_channel(same), as_channel(same)},
                                         {as_channel(same), as_channel(same)}, {1.0, 1.0});
    REQUIRE(two.ports == std::vector<int>{1, 1});
}

TEST_CASE("port decisions ignore a common positive scale") {
    Rng rng(9);
    const std::vector<double> p = {10.0, 5.0};
    std::vector<ChannelMatrix> decision = {as_channel(random_matrix(4, 5, rng)),
                                           as_channel(random_matrix(4, 5, rng))};
    std::vector<ChannelMatrix> truth = {as_channel(random_matrix(4, 5, rng)),
                                        as_channel(random_matrix(4, 5, rng))};
    const PortSelection base = best_ports(decision, truth, p);
    for (double s : {0.5, 2.0}) {
        std::vector<ChannelMatrix> scaled = decision;
        for (auto& ch : scaled)
            ch.m *= s;
        const PortSelection again = best_ports(scaled, truth, p);
        REQUIRE(again.ports == base.ports);
        REQUIRE(std::abs(again.achieved_rate - base.achieved_rate) < 1e-12);
    }
}

TEST_CASE("decision and achieved rates are kept distinct") {
    // decision channels prefer port 2, but the true channel is strong at port 1
    Eigen::MatrixXcd decision(2, 2), truth(2, 2);
    decision << cxd(0.1, 0), cxd(5, 0), cxd(0, 0), cxd(0, 0);
    truth << cxd(4, 0), cxd(0.2, 0), cxd(0, 0), cxd(0, 0);
    const PortSelection sel = best_ports({as_channel(decision)}, {as_channel(truth)}, {1.0});
    REQUIRE(sel.ports == std::vector<int>{2});
    // achieved rate is evaluated on the true channel at the chosen port
    REQUIRE(std::abs(sel.achieved_rate - std::log2(1.0 + 0.04)) < 1e-12);
}

TEST_CASE("port search handles silent decision columns") {
    Eigen::MatrixXcd g(2, 2);
    g.setZero();
    g(0, 1) = cxd(2, 0);
    const PortSelection sel = best_ports({as_channel(g)}, {as_channel(g)}, {1.0});
    REQUIRE(sel.ports == std::vector<int>{2});

    Eigen::MatrixXcd silent = Eigen::MatrixXcd::Zero(2, 2);
    const PortSelection none = best_ports({as_channel(silent)}, {as_channel(silent)}, {1.0});
    REQUIRE(none.ports == std::vector<int>{1});
    REQUIRE(none.achieved_rate == 0.0);
}

TEST_CASE("port search validates list agreement") {
    Rng rng(10);
    std::vector<ChannelMatrix> a = {as_channel(random_matrix(2, 2, rng))};
    std::vector<ChannelMatrix> b = {as_channel(random_matrix(2, 2, rng)),
                                    as_channel(random_matrix(2, 2, rng))};
    REQUIRE_THROWS_AS(best_ports(a, b, {1.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(best_ports({}, {}, {}), std::invalid_argument);
    std::vector<ChannelMatrix> wide = {as_channel(random_matrix(2, 3, rng)),
                                       as_channel(random_matrix(2, 2, rng))};
    REQUIRE_THROWS_AS(best_ports(wide, wide, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("perfect channel knowledge dominates estimates on average") {
    SystemConfig c;
    c.rx_antennas = 16;
    c.ports = 10;
    c.els = 4;
    c.users = 2;
    c.tx_power = {10.0, 10.0};
    c.paths = 2;
    c.dict_size = 500;
    const SystemConfig cfg = c.resolved();
    const EstimatorContext ctx(cfg);
    const MethodMask mm = MethodMask::of({Method::ls, Method::l3scr, Method::perfect});

    const int trials = 200;
    std::vector<double> dls(trials), dl3(trials);
    for (int t = 0; t < trials; ++t) {
        const TrialRecord r = run_single_trial(cfg, &ctx, PeakDetector::threshold(0.05), mm,
                                               trial_seed(5, 0.0, t));
        dls[t] = *r.rate_perfect - *r.rate_ls;
        dl3[t] = *r.rate_perfect - *r.rate_l3scr;
    }
    const auto [mls, sels] = detail::mean_se(dls);
    const auto [ml3, sel3] = detail::mean_se(dl3);
    REQUIRE(mls >= -2.0 * sels);
    REQUIRE(ml3 >= -2.0 * sel3);
}

TEST_CASE("direct sweep error ratios concentrate around their mean") {
    SystemConfig c;
    c.rx_antennas = 32;
    c.ports = 50;
    c.els = 6;
    c.users = 2;
    c.tx_power = {10.0, 10.0};
    c.paths = 20;
    c.dict_size = 100;
    const SystemConfig cfg = c.resolved();
    const MethodMask mm = MethodMask::of({Method::ls});

    const int trials = 500;
    std::vector<double> values(trials);
    double mean = 0.0;
    for (int t = 0; t < trials; ++t) {
        const TrialRecord r = run_single_trial(cfg, nullptr, PeakDetector::threshold(0.05), mm,
                                               trial_seed(6, 0.0, t));
        values[t] = *r.nmse_ls;
        mean += values[t];
    }
    mean /= double(trials);
    int inside = 0;
    for (double v : values)
        if (v >= 0.5 * mean && v <= 2.0 * mean)
            ++inside;
    REQUIRE(inside >= int(0.95 * trials));
}

TEST_CASE("trial records serialize to stable csv rows") {
    REQUIRE(TrialRecord::csv_header() ==
            "seed,nmse_ls,nmse_l3scr,rate_ls,rate_l3scr,rate_perfect,"
            "ports_ls,ports_l3scr,ports_perfect");
    TrialRecord r;
    r.seed = 42;
    r.nmse_ls = 0.125;
    r.rate_l3scr = 17.5;
    r.ports_l3scr = {3, 97};
    REQUIRE(r.csv_row() == "42,0.125,,,17.5,,,3;97,");
}
