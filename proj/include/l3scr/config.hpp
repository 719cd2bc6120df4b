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

#ifndef L3SCR_CONFIG_H
#define L3SCR_CONFIG_H

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace l3scr {

inline constexpr double speed_of_light = 299792458.0;
inline constexpr double default_carrier_hz = 28.0e9;

// Raised on any rejected configuration. id() is a stable machine-readable
// name for the violated constraint, what() names it for humans.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string id, const std::string& message)
        : std::runtime_error(message), id_(std::move(id)) {}
    const std::string& id() const { return id_; }

  private:
    std::string id_;
};

// Scenario description. Negative values for rx_spacing, el_spacing and
// rot_step mean "derive the default"; call resolved() before use.
// Config file keys are given in quotes.
struct SystemConfig {
    int rx_antennas = 64;  // "M", BS array size
    int ports = 100;       // "N", fluid antenna ports per user
    int els = 6;           // "K", estimating positions used for pilots
    int users = 2;         // "U"
    double aperture = 10.0;             // "W", FAS length in wavelengths
    double wavelength = speed_of_light / default_carrier_hz; // "lambda", meters
    double rx_spacing = -1.0;           // "d", meters; default lambda/2
    double el_spacing = -1.0;           // "delta", meters; default lambda/2
    int subframes = 1;                  // "T", pilot repetitions per position
    std::vector<double> tx_power = {10.0, 10.0}; // "rho_db" resolves to linear power per user
    int paths = 5;         // "L", propagation paths per user
    int dict_size = 10000; // "C", AoD dictionary columns
    double rot_step = -1.0; // "epsilon", rotation grid step; default 1/(100 M)
    std::uint64_t seed = 1;

    SystemConfig resolved() const {
        SystemConfig c = *this;
        if (c.rx_spacing < 0.0) c.rx_spacing = 0.5 * c.wavelength;
        if (c.el_spacing < 0.0) c.el_spacing = 0.5 * c.wavelength;
        if (c.rot_step < 0.0 && c.rx_antennas > 0) c.rot_step = 1.0 / (100.0 * c.rx_antennas);
        return c;
    }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Validates a resolved configuration; throws ConfigError naming the first
// violated constraint.
inline void validate(const SystemConfig& c) {
    if (c.users < 1)
        throw ConfigError("users", "U must be at least 1");
    if (c.rx_antennas < 2)
        throw ConfigError("rx_antennas", "M must be at least 2");
    if (c.ports < 2)
        throw ConfigError("ports", "N must be at least 2");
    // a single estimating position leaves AoD and gain entangled
    if (c.els < 2)
        throw ConfigError("els", "K must be at least 2");
    if (c.subframes < 1)
        throw ConfigError("subframes", "T must be at least 1");
    if (c.paths < 1)
        throw ConfigError("paths", "L must be at least 1");
    if (c.dict_size < 2)
        throw ConfigError("dict_size", "C must be at least 2");
    if (!(c.aperture > 0.0))
        throw ConfigError("aperture", "W must be positive");
    if (!(c.wavelength > 0.0))
        throw ConfigError("wavelength", "lambda must be positive");
    if (!(c.rx_spacing > 0.0) || c.rx_spacing > c.wavelength)
        throw ConfigError("rx_spacing", "d must satisfy 0 < d <= lambda, otherwise beamspace bins alias");
    // el spacing at or beyond one wavelength makes distinct dictionary
    // angles share a response (grating lobes)
    if (!(c.el_spacing > 0.0) || c.el_spacing >= c.wavelength)
        throw ConfigError("el_spacing_alias", "delta must satisfy 0 < delta < lambda");
    if (double(c.els - 1) * c.el_spacing > c.aperture * c.wavelength * (1.0 + 1e-12))
        throw ConfigError("el_spacing_span", "(K-1)*delta must not exceed the aperture W*lambda");
    if (int(c.tx_power.size()) != c.users)
        throw ConfigError("tx_power_count", "one transmit power per user required");
    for (double p : c.tx_power)
        if (!(p > 0.0))
            throw ConfigError("tx_power", "transmit powers must be positive");
    if (!(c.rot_step > 0.0) || c.rot_step > 0.5 / c.rx_antennas)
        throw ConfigError("rot_step", "epsilon must satisfy 0 < epsilon <= 1/(2M)");
}

} // namespace l3scr

#endif
