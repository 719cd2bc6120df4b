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

#ifndef L3SCR_IO_H
#define L3SCR_IO_H

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "l3scr/experiment.hpp"

namespace l3scr {

// 9 significant digits everywhere a float lands in a CSV cell
inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string emit_csv(const std::vector<AggregateRow>& rows) {
    std::ostringstream os;
    os << "sweep_name,sweep_value,method,mean_nmse,se_nmse,mean_rate,se_rate,trials\n";
    for (const auto& row : rows)
        for (const auto& st : row.stats) {
            os << row.sweep_name << ',' << fmt9(row.sweep_value) << ',' << method_name(st.method)
               << ',' << (st.mean_nmse ? fmt9(*st.mean_nmse) : "") << ','
               << (st.se_nmse ? fmt9(*st.se_nmse) : "") << ',' << fmt9(st.mean_rate) << ','
               << fmt9(st.se_rate) << ',' << row.trials << '\n';
        }
    return os.str();
}

inline nlohmann::json emit_json(const std::vector<AggregateRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows)
        for (const auto& st : row.stats) {
            nlohmann::json o;
            o["sweep_name"] = row.sweep_name;
            o["sweep_value"] = row.sweep_value;
            o["method"] = method_name(st.method);
            o["mean_nmse"] = st.mean_nmse ? nlohmann::json(*st.mean_nmse) : nlohmann::json();
            o["se_nmse"] = st.se_nmse ? nlohmann::json(*st.se_nmse) : nlohmann::json();
            o["mean_rate"] = st.mean_rate;
            o["se_rate"] = st.se_rate;
            o["trials"] = row.trials;
            arr.push_back(std::move(o));
        }
    return arr;
}

// Writes aggregates as csv or json; path "-" means stdout.
inline void emit(const std::vector<AggregateRow>& rows, const std::string& format,
                 const std::string& path) {
    std::string payload;
    if (format == "csv")
        payload = emit_csv(rows);
    else if (format == "json")
        payload = emit_json(rows).dump(2) + "\n";
    else
        throw ConfigError("format", "format must be csv or json");
    if (path == "-" || path.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open output file: " + path);
    f << payload;
    if (!f)
        throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------- JSON dumps

inline nlohmann::json to_json(const cxd& z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline nlohmann::json to_json(const PathSet& p) {
    nlohmann::json o;
    o["gains"] = nlohmann::json::array();
    for (const auto& g : p.gains)
        o["gains"].push_back(to_json(g));
    o["aoas"] = p.aoas;
    o["aods"] = p.aods;
    return o;
}

inline PathSet paths_from_json(const nlohmann::json& o) {
    PathSet p;
    for (const auto& g : o.at("gains"))
        p.gains.emplace_back(g.at(0).get<double>(), g.at(1).get<double>());
    p.aoas = o.at("aoas").get<std::vector<double>>();
    p.aods = o.at("aods").get<std::vector<double>>();
    if (p.aoas.size() != p.gains.size() || p.aods.size() != p.gains.size())
        throw std::runtime_error("paths_from_json: field lengths differ");
    return p;
}

// entries are [re, im] pairs in row-major order
inline nlohmann::json to_json(const ChannelMatrix& ch) {
    nlohmann::json o;
    o["rows"] = ch.m.rows();
    o["cols"] = ch.m.cols();
    o["positions"] = std::vector<double>(ch.positions.data(), ch.positions.data() + ch.positions.size());
    nlohmann::json entries = nlohmann::json::array();
    for (Eigen::Index r = 0; r < ch.m.rows(); ++r)
        for (Eigen::Index c = 0; c < ch.m.cols(); ++c)
            entries.push_back(to_json(ch.m(r, c)));
    o["entries"] = std::move(entries);
    return o;
}

inline ChannelMatrix channel_from_json(const nlohmann::json& o) {
    ChannelMatrix ch;
    const Eigen::Index rows = o.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = o.at("cols").get<Eigen::Index>();
    auto pos = o.at("positions").get<std::vector<double>>();
    ch.positions = Eigen::Map<Eigen::VectorXd>(pos.data(), Eigen::Index(pos.size()));
    ch.m.resize(rows, cols);
    const auto& entries = o.at("entries");
    if (Eigen::Index(entries.size()) != rows * cols)
        throw std::runtime_error("channel_from_json: entry count mismatch");
    Eigen::Index i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c, ++i)
            ch.m(r, c) = cxd(entries[i].at(0).get<double>(), entries[i].at(1).get<double>());
    return ch;
}

inline nlohmann::json to_json(const SparseEstimate& est) {
    nlohmann::json o;
    o["paths"] = to_json(est.paths);
    o["peak_bins"] = est.peaks.bins;
    o["row_powers"] = std::vector<double>(est.peaks.row_powers.data(),
                                          est.peaks.row_powers.data() + est.peaks.row_powers.size());
    o["psis"] = est.psis;
    o["dict_index"] = est.dict_index;
    if (est.dict_response.size() > 0) {
        nlohmann::json resp = nlohmann::json::array();
        for (Eigen::Index l = 0; l < est.dict_response.cols(); ++l)
            resp.push_back(std::vector<double>(est.dict_response.col(l).data(),
                                               est.dict_response.col(l).data() +
                                                   est.dict_response.rows()));
        o["dict_response"] = std::move(resp);
    }
    return o;
}

inline nlohmann::json to_json(const SystemConfig& c) {
    nlohmann::json o;
    o["M"] = c.rx_antennas;
    o["N"] = c.ports;
    o["K"] = c.els;
    o["U"] = c.users;
    o["W"] = c.aperture;
    o["lambda"] = c.wavelength;
    o["d"] = c.rx_spacing;
    o["delta"] = c.el_spacing;
    o["T"] = c.subframes;
    o["p"] = c.tx_power;
    o["L"] = c.paths;
    o["C"] = c.dict_size;
    o["epsilon"] = c.rot_step;
    o["seed"] = c.seed;
    return o;
}

inline std::string detector_string(const PeakDetector& det) {
    if (det.mode == PeakDetector::Mode::known_count)
        return "known-l";
    char buf[48];
    std::snprintf(buf, sizeof buf, "threshold:%g", det.alpha);
    return buf;
}

// Full single-trial dump: truth, both estimates, and every intermediate the
// pipeline produces, for eyeballing one realization.
inline nlohmann::json diagnostics_json(const SystemConfig& raw, const PeakDetector& det,
                                       std::uint64_t seed) {
    const SystemConfig cfg = raw.resolved();
    validate(cfg);
    TrialDiagnostics diag;
    MethodMask mm;
    mm.ls = mm.l3scr = mm.perfect = true;
    const TrialRecord rec = run_single_trial(cfg, nullptr, det, mm, seed, &diag);

    nlohmann::json o;
    o["config"] = to_json(cfg);
    o["detector"] = detector_string(det);
    o["trial_seed"] = seed;
    nlohmann::json users = nlohmann::json::array();
    for (int u = 0; u < cfg.users; ++u) {
        nlohmann::json ju;
        ju["true_paths"] = to_json(diag.true_paths[size_t(u)]);
        ju["truth_els"] = to_json(diag.truth_els[size_t(u)]);
        ju["ls_est_els"] = to_json(diag.ls_est_els[size_t(u)]);
        ju["estimate"] = to_json(diag.estimates[size_t(u)]);
        ju["truth_ports"] = to_json(diag.truth_ports[size_t(u)]);
        ju["recon_ports"] = to_json(diag.recon_ports[size_t(u)]);
        users.push_back(std::move(ju));
    }
    o["users"] = std::move(users);
    nlohmann::json met;
    met["nmse_ls"] = rec.nmse_ls ? nlohmann::json(*rec.nmse_ls) : nlohmann::json();
    met["nmse_l3scr"] = rec.nmse_l3scr ? nlohmann::json(*rec.nmse_l3scr) : nlohmann::json();
    met["rate_ls"] = rec.rate_ls ? nlohmann::json(*rec.rate_ls) : nlohmann::json();
    met["rate_l3scr"] = rec.rate_l3scr ? nlohmann::json(*rec.rate_l3scr) : nlohmann::json();
    met["rate_perfect"] = rec.rate_perfect ? nlohmann::json(*rec.rate_perfect) : nlohmann::json();
    met["ports_ls"] = rec.ports_ls;
    met["ports_l3scr"] = rec.ports_l3scr;
    met["ports_perfect"] = rec.ports_perfect;
    o["metrics"] = std::move(met);
    return o;
}

// ------------------------------------------------------------- config files

inline PeakDetector parse_detector(const std::string& s) {
    if (s == "known-l")
        return PeakDetector::known(0);
    if (s == "threshold")
        return PeakDetector::threshold(0.05);
    const std::string prefix = "threshold:";
    if (s.rfind(prefix, 0) == 0) {
        size_t used = 0;
        double alpha = 0.0;
        try {
            alpha = std::stod(s.substr(prefix.size()), &used);
        } catch (const std::exception&) {
            throw ConfigError("detector", "bad threshold value in: " + s);
        }
        if (used != s.size() - prefix.size())
            throw ConfigError("detector", "bad threshold value in: " + s);
        return PeakDetector::threshold(alpha);
    }
    throw ConfigError("detector", "detector must be threshold[:ALPHA] or known-l");
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, sep))
        out.push_back(trim(item));
    return out;
}

inline double num(const std::string& key, const std::string& v) {
    size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("config_value", "bad number for " + key + ": " + v);
    }
    if (used != v.size())
        throw ConfigError("config_value", "bad number for " + key + ": " + v);
    return x;
}

inline int integer(const std::string& key, const std::string& v) {
    const double x = num(key, v);
    if (x != std::floor(x) || x < -2e9 || x > 2e9)
        throw ConfigError("config_value", key + " must be an integer, got " + v);
    return int(x);
}

} // namespace detail

// Flat key = value file; # starts a comment. Scenario keys mirror the
// config schema (M N K U W lambda d delta T rho_db L C epsilon seed), the
// rest describe the sweep (sweep, sweep_values, trials, methods, detector,
// out, format, workers).
inline ExperimentSpec parse_experiment_file(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError("config_file", "cannot open config file: " + path);
    ExperimentSpec spec;
    std::optional<double> rho_db;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config_line",
                              "line " + std::to_string(lineno) + " is not key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        SystemConfig& c = spec.base;
        if (key == "M") c.rx_antennas = detail::integer(key, val);
        else if (key == "N") c.ports = detail::integer(key, val);
        else if (key == "K") c.els = detail::integer(key, val);
        else if (key == "U") c.users = detail::integer(key, val);
        else if (key == "W") c.aperture = detail::num(key, val);
        else if (key == "lambda") c.wavelength = detail::num(key, val);
        else if (key == "d") c.rx_spacing = detail::num(key, val);
        else if (key == "delta") c.el_spacing = detail::num(key, val);
        else if (key == "T") c.subframes = detail::integer(key, val);
        else if (key == "rho_db") rho_db = detail::num(key, val);
        else if (key == "L") c.paths = detail::integer(key, val);
        else if (key == "C") c.dict_size = detail::integer(key, val);
        else if (key == "epsilon") c.rot_step = detail::num(key, val);
        else if (key == "seed") c.seed = std::uint64_t(detail::num(key, val));
        else if (key == "sweep") spec.sweep_name = val;
        else if (key == "sweep_values") {
            spec.sweep_values.clear();
            for (const auto& item : detail::split(val, ','))
                spec.sweep_values.push_back(detail::num(key, item));
        } else if (key == "trials") spec.trials = detail::integer(key, val);
        else if (key == "methods") {
            spec.methods.clear();
            for (const auto& item : detail::split(val, ','))
                spec.methods.push_back(parse_method(item));
        } else if (key == "detector") spec.detector = parse_detector(val);
        else if (key == "out") spec.output_path = val;
        else if (key == "format") spec.format = val;
        else if (key == "workers") spec.workers = detail::integer(key, val);
        else throw ConfigError("config_key", "unknown key: " + key);
    }
    if (rho_db)
        spec.base.tx_power.assign(size_t(spec.base.users), db_to_linear(*rho_db));
    return spec;
}

} // namespace l3scr

#endif
