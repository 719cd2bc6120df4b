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

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "l3scr/io.hpp"

namespace {

struct CommonArgs {
    std::string preset;
    std::string config;
    int trials = 0;
    std::uint64_t seed = 0;
    std::string out;
    std::string format;
    std::string detector;
    int parallel = 0;
    CLI::Option* trials_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* format_opt = nullptr;
    CLI::Option* detector_opt = nullptr;
    CLI::Option* parallel_opt = nullptr;
};

void add_common(CLI::App* sub, CommonArgs& a) {
    sub->add_option("--preset", a.preset, "named scenario: fig1 fig2 fig3 fig3-slope smoke");
    sub->add_option("--config", a.config, "path to a key = value scenario file");
    a.trials_opt = sub->add_option("--trials", a.trials, "Monte Carlo trials per sweep value");
    a.seed_opt = sub->add_option("--seed", a.seed, "master seed");
    a.out_opt = sub->add_option("--out", a.out, "output path, - for stdout");
    a.format_opt = sub->add_option("--format", a.format, "csv or json");
    a.detector_opt = sub->add_option("--detector", a.detector, "threshold[:ALPHA] or known-l");
    a.parallel_opt = sub->add_option("--parallel", a.parallel, "worker threads");
}

l3scr::ExperimentSpec load_spec(const CommonArgs& a) {
    if (a.preset.empty() == a.config.empty())
        throw l3scr::ConfigError("cli", "exactly one of --preset or --config is required");
    l3scr::ExperimentSpec spec =
        a.preset.empty() ? l3scr::parse_experiment_file(a.config) : l3scr::preset(a.preset);
    if (*a.trials_opt)
        spec.trials = a.trials;
    if (*a.seed_opt)
        spec.base.seed = a.seed;
    if (*a.out_opt)
        spec.output_path = a.out;
    if (*a.format_opt)
        spec.format = a.format;
    if (*a.detector_opt)
        spec.detector = l3scr::parse_detector(a.detector);
    if (*a.parallel_opt)
        spec.workers = a.parallel;
    return spec;
}

nlohmann::json spec_json(const l3scr::ExperimentSpec& spec) {
    nlohmann::json o;
    o["config"] = l3scr::to_json(spec.base.resolved());
    o["sweep"] = spec.sweep_name;
    o["sweep_values"] = spec.sweep_values;
    o["trials"] = spec.trials;
    nlohmann::json methods = nlohmann::json::array();
    for (auto m : spec.methods)
        methods.push_back(l3scr::method_name(m));
    o["methods"] = std::move(methods);
    o["detector"] = l3scr::detector_string(spec.detector);
    o["format"] = spec.format;
    o["out"] = spec.output_path;
    o["workers"] = spec.workers;
    return o;
}

void write_text(const std::string& payload, const std::string& path) {
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

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fluid antenna mmWave uplink channel reconstruction testbench"};
    app.require_subcommand(1);

    CommonArgs run_args;
    CLI::App* run = app.add_subcommand("run", "run a Monte Carlo sweep and emit aggregates");
    add_common(run, run_args);

    CommonArgs val_args;
    CLI::App* val = app.add_subcommand("validate", "check a scenario and echo the resolved form");
    add_common(val, val_args);

    CommonArgs ins_args;
    int trial_index = 0;
    CLI::App* ins =
        app.add_subcommand("inspect", "dump one trial with all intermediates as json");
    add_common(ins, ins_args);
    ins->add_option("--trial", trial_index, "trial index within the first sweep value")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) {
            l3scr::ExperimentSpec spec = load_spec(run_args);
            l3scr::validate_spec(spec);
            const auto rows = l3scr::run_experiment(spec);
            l3scr::emit(rows, spec.format, spec.output_path);
        } else if (val->parsed()) {
            l3scr::ExperimentSpec spec = load_spec(val_args);
            l3scr::validate_spec(spec);
            write_text(spec_json(spec).dump(2) + "\n", spec.output_path);
        } else if (ins->parsed()) {
            l3scr::ExperimentSpec spec = load_spec(ins_args);
            l3scr::validate_spec(spec);
            if (trial_index >= spec.trials)
                throw l3scr::ConfigError("trial_index", "trial index out of range");
            const double value = spec.sweep_values.front();
            const l3scr::SystemConfig cfg =
                l3scr::apply_sweep(spec.base, spec.sweep_name, value);
            const std::uint64_t tseed = l3scr::trial_seed(cfg.seed, value, trial_index);
            nlohmann::json doc = l3scr::diagnostics_json(cfg, spec.detector, tseed);
            doc["sweep"] = spec.sweep_name;
            doc["sweep_value"] = value;
            doc["trial"] = trial_index;
            write_text(doc.dump(2) + "\n", spec.output_path);
        }
    } catch (const l3scr::ConfigError& e) {
        std::cerr << "config error [" << e.id() << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
