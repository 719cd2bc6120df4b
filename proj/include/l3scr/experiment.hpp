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

#ifndef L3SCR_EXPERIMENT_H
#define L3SCR_EXPERIMENT_H

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "l3scr/estimator.hpp"
#include "l3scr/evaluation.hpp"
#include "l3scr/pilot.hpp"

namespace l3scr {

enum class Method { ls, l3scr, perfect };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::ls: return "ls";
        case Method::l3scr: return "l3scr";
        default: return "perfect";
    }
}

inline Method parse_method(const std::string& s) {
    if (s == "ls") return Method::ls;
    if (s == "l3scr") return Method::l3scr;
    if (s == "perfect") return Method::perfect;
    throw ConfigError("methods", "unknown method: " + s);
}

// A sweep of one scenario parameter, everything else taken from base.
struct ExperimentSpec {
    SystemConfig base; // kept unresolved; defaults re-derive per swept value
    std::string sweep_name = "K";
    std::vector<double> sweep_values;
    int trials = 200;
    std::vector<Method> methods = {Method::ls, Method::l3scr, Method::perfect};
    PeakDetector detector = PeakDetector::threshold(0.05);
    std::string output_path = "-";
    std::string format = "csv";
    int workers = 1;
};

inline SystemConfig apply_sweep(const SystemConfig& base, const std::string& name, double value) {
    SystemConfig c = base;
    auto as_int = [&](const char* what) {
        if (value != std::floor(value) || value < -2e9 || value > 2e9)
            throw ConfigError("sweep_value", std::string(what) + " sweep values must be integers");
        return int(value);
    };
    if (name == "K")
        c.els = as_int("K");
    else if (name == "M")
        c.rx_antennas = as_int("M");
    else if (name == "T")
        c.subframes = as_int("T");
    else if (name == "rho_db")
        c.tx_power.assign(size_t(c.users), db_to_linear(value));
    else
        throw ConfigError("sweep_name", "sweep must be one of K, M, T, rho_db");
    return c;
}

inline void validate_spec(const ExperimentSpec& spec) {
    if (spec.sweep_values.empty())
        throw ConfigError("sweep_values", "at least one sweep value required");
    if (spec.trials < 1)
        throw ConfigError("trials", "at least one trial required");
    if (spec.methods.empty())
        throw ConfigError("methods", "at least one method required");
    if (spec.workers < 1)
        throw ConfigError("workers", "worker count must be positive");
    if (spec.format != "csv" && spec.format != "json")
        throw ConfigError("format", "format must be csv or json");
    for (double v : spec.sweep_values)
        validate(apply_sweep(spec.base, spec.sweep_name, v).resolved());
}

// Per-trial seed derivation; every trial of every sweep point gets its own
// deterministic stream.
inline std::uint64_t trial_seed(std::uint64_t master, double swept_value, int trial) {
    return mix_seed(master, std::bit_cast<std::uint64_t>(swept_value), std::uint64_t(trial));
}

struct MethodMask {
    bool ls = false, l3scr = false, perfect = false;

    static MethodMask of(const std::vector<Method>& ms) {
        MethodMask mm;
        for (Method m : ms) {
            if (m == Method::ls) mm.ls = true;
            if (m == Method::l3scr) mm.l3scr = true;
            if (m == Method::perfect) mm.perfect = true;
        }
        return mm;
    }
};

// Everything one trial produced, kept only on demand (diagnostics dumps).
struct TrialDiagnostics {
    std::vector<PathSet> true_paths;
    std::vector<ChannelMatrix> truth_ports;  // per-user true port channels
    std::vector<ChannelMatrix> truth_els;    // per-user true channels at the ELs
    std::vector<ChannelMatrix> ls_est_els;   // LS estimates the pipeline saw
    std::vector<SparseEstimate> estimates;
    std::vector<ChannelMatrix> recon_ports;  // reconstructed port channels
    std::vector<ChannelMatrix> ls_est_ports; // direct LS sweep of all ports
};

// One Monte-Carlo realization. Channel, port-sweep noise and EL-sweep noise
// come from separate derived streams, so each method set sees the same
// channels for a given seed.
inline TrialRecord run_single_trial(const SystemConfig& cfg, const EstimatorContext* ctx,
                                    const PeakDetector& det, MethodMask mm, std::uint64_t seed,
                                    TrialDiagnostics* diag = nullptr) {
    TrialRecord rec;
    rec.seed = seed;
    Rng rng_paths(mix_seed(seed, 1));
    Rng rng_ports(mix_seed(seed, 2));
    Rng rng_els(mix_seed(seed, 3));

    const std::vector<PathSet> paths = generate_paths(cfg, rng_paths);
    std::vector<ChannelMatrix> truth(cfg.users);
    for (int u = 0; u < cfg.users; ++u)
        truth[u] = channel_at_ports(paths[u], cfg);

    if (diag) {
        diag->true_paths = paths;
        diag->truth_ports = truth;
    }

    if (mm.ls) {
        auto est = ls_sweep(truth, cfg, rng_ports, true);
        std::vector<ChannelMatrix> dec(cfg.users);
        for (int u = 0; u < cfg.users; ++u)
            dec[u] = est[u].channel;
        rec.nmse_ls = nmse(truth, dec);
        PortSelection sel = best_ports(dec, truth, cfg.tx_power);
        rec.rate_ls = sel.achieved_rate;
        rec.ports_ls = sel.ports;
        if (diag)
            diag->ls_est_ports = dec;
    }

    if (mm.l3scr) {
        std::optional<EstimatorContext> local;
        if (!ctx) {
            local.emplace(cfg);
            ctx = &*local;
        }
        std::vector<ChannelMatrix> truth_els(cfg.users);
        for (int u = 0; u < cfg.users; ++u)
            truth_els[u] = channel_at_els(paths[u], cfg);
        auto est_els = ls_sweep(truth_els, cfg, rng_els, true);
        std::vector<ChannelMatrix> dec(cfg.users);
        for (int u = 0; u < cfg.users; ++u) {
            auto [sparse, recon] = ctx->run(est_els[u].channel.m, det, diag != nullptr);
            dec[u] = std::move(recon);
            if (diag) {
                diag->truth_els.push_back(truth_els[u]);
                diag->ls_est_els.push_back(est_els[u].channel);
                diag->estimates.push_back(std::move(sparse));
                diag->recon_ports.push_back(dec[u]);
            }
        }
        rec.nmse_l3scr = nmse(truth, dec);
        PortSelection sel = best_ports(dec, truth, cfg.tx_power);
        rec.rate_l3scr = sel.achieved_rate;
        rec.ports_l3scr = sel.ports;
    }

    if (mm.perfect) {
        PortSelection sel = best_ports(truth, truth, cfg.tx_power);
        rec.rate_perfect = sel.achieved_rate;
        rec.ports_perfect = sel.ports;
    }
    return rec;
}

struct MethodStats {
    Method method;
    std::optional<double> mean_nmse, se_nmse; // absent for perfect CSI
    double mean_rate = 0.0, se_rate = 0.0;
};

struct AggregateRow {
    std::string sweep_name;
    double sweep_value = 0.0;
    int trials = 0;
    std::vector<MethodStats> stats; // in ls, l3scr, perfect order, requested only
};

namespace detail {

inline std::pair<double, double> mean_se(const std::vector<double>& xs) {
    const double n = double(xs.size());
    double mean = 0.0;
    for (double x : xs)
        mean += x;
    mean /= n;
    if (xs.size() < 2)
        return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs)
        ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

} // namespace detail

// Runs every trial of every sweep point and aggregates. Trials are
// independent and may execute on several workers; records land in a
// preallocated slot per trial index and aggregation walks them in order, so
// the result does not depend on scheduling.
inline std::vector<AggregateRow> run_experiment(const ExperimentSpec& spec) {
    validate_spec(spec);
    const MethodMask mm = MethodMask::of(spec.methods);
    std::vector<AggregateRow> rows;
    rows.reserve(spec.sweep_values.size());

    for (double value : spec.sweep_values) {
        const SystemConfig cfg = apply_sweep(spec.base, spec.sweep_name, value).resolved();
        validate(cfg);
        std::optional<EstimatorContext> ctx;
        if (mm.l3scr)
            ctx.emplace(cfg);

        std::vector<TrialRecord> records(size_t(spec.trials));
        const int nworkers = std::min(spec.workers, spec.trials);
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto work = [&]() {
            try {
                for (int t = next.fetch_add(1); t < spec.trials; t = next.fetch_add(1))
                    records[size_t(t)] = run_single_trial(
                        cfg, ctx ? &*ctx : nullptr, spec.detector, mm,
                        trial_seed(spec.base.seed, value, t));
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        };
        if (nworkers <= 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(size_t(nworkers));
            for (int i = 0; i < nworkers; ++i)
                pool.emplace_back(work);
            for (auto& th : pool)
                th.join();
        }
        if (failure)
            std::rethrow_exception(failure);

        AggregateRow row;
        row.sweep_name = spec.sweep_name;
        row.sweep_value = value;
        row.trials = spec.trials;
        auto collect = [&](auto field) {
            std::vector<double> xs;
            xs.reserve(records.size());
            for (const auto& r : records)
                if (auto v = field(r))
                    xs.push_back(*v);
            return xs;
        };
        for (Method m : {Method::ls, Method::l3scr, Method::perfect}) {
            if ((m == Method::ls && !mm.ls) || (m == Method::l3scr && !mm.l3scr) ||
                (m == Method::perfect && !mm.perfect))
                continue;
            MethodStats st;
            st.method = m;
            if (m != Method::perfect) {
                auto xs = collect([&](const TrialRecord& r) {
                    return m == Method::ls ? r.nmse_ls : r.nmse_l3scr;
                });
                auto [mean, se] = detail::mean_se(xs);
                st.mean_nmse = mean;
                st.se_nmse = se;
            }
            auto xs = collect([&](const TrialRecord& r) {
                return m == Method::ls ? r.rate_ls : m == Method::l3scr ? r.rate_l3scr : r.rate_perfect;
            });
            auto [mean, se] = detail::mean_se(xs);
            st.mean_rate = mean;
            st.se_rate = se;
            row.stats.push_back(st);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Canned experiment definitions at desk scale.
inline ExperimentSpec preset(const std::string& name) {
    ExperimentSpec s;
    SystemConfig& c = s.base;
    if (name == "fig1") {
        // reconstruction quality against the number of estimating positions
        c.rx_antennas = 128;
        s.sweep_name = "K";
        s.sweep_values = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    } else if (name == "fig2") {
        // against the BS array size
        c.els = 6;
        s.sweep_name = "M";
        s.sweep_values = {32, 64, 128};
    } else if (name == "fig3" || name == "fig3-slope") {
        // direct port sweep noise floor against SNR
        c.rx_antennas = 64;
        c.els = 10;
        s.sweep_name = "rho_db";
        s.sweep_values = {0, 5, 10, 15, 20};
    } else if (name == "smoke") {
        c.rx_antennas = 16;
        c.ports = 20;
        c.els = 4;
        c.paths = 2;
        c.dict_size = 500;
        s.trials = 10;
        s.sweep_name = "K";
        s.sweep_values = {2, 4};
    } else {
        throw ConfigError("preset", "unknown preset: " + name);
    }
    return s;
}

} // namespace l3scr

#endif
