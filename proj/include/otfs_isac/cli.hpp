// SPDX-License-Identifier: Apache-2.0
//
// otfs-isac: OTFS cell-free MIMO ISAC simulation and power allocation
// Copyright (C) 2026 The otfs-isac Authors
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

#pragma once

// Command-line front end. Exit codes: 0 success, 1 configuration or usage
// error, 2 runtime failure.

#include "results_io.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace otfs_isac
{
    inline std::string defaults_help()
    {
        const ExperimentConfig c;
        const auto &s = c.scenario;
        std::ostringstream os;
        os << "Defaults (config keys):\n"
           << "  num_tx_aps = " << s.num_tx_aps << ", num_rx_aps = " << s.num_rx_aps << ", num_ues = " << s.num_ues
           << ", antennas = " << s.antennas << ", num_paths = " << s.num_paths << "\n"
           << "  area_side = " << s.area_side << " m, M = " << s.frame.M << ", N = " << s.frame.N
           << ", sample_interval = 2.08e-6 s, carrier_frequency = 1.9e9 Hz\n"
           << "  p_max = 1 W, gamma_thresh = 2 dB, noise_power = -94 dBm, rcs_variance = -20 dBsm\n"
           << "  delay_spread_min/max = 2.08e-6 / 10.41e-6 s, doppler_spread_min/max = 0 / 1880 Hz\n"
           << "  target_doppler = 0 Hz, target_path_gain = -105 dB, psi_reg = 0 (sigma_n^2 * N_ue)\n"
           << "  drops = " << c.drops << ", trials_per_drop = " << c.trials_per_drop
           << ", calibration_trials = " << c.calibration_trials << ", p_fa = 1e-2, seed = " << c.seed << "\n"
           << "  ccp_epsilon = 1e-6, ccp_max_iterations = " << c.ccp_max_iterations
           << ", init_push_fraction = 1, threads = " << c.threads << "\n"
           << "  schemes = sensing-centric-with-x0,sensing-centric-without-x0,comm-centric\n"
           << "  sweep_param = rcs_variance, sweep_values = -26 dBsm, -20 dBsm, -12 dBsm\n"
           << "Units: values accept dB, dBm, dBW and dBsm suffixes.\n";
        return os.str();
    }

    namespace cli_detail
    {
        inline ExperimentConfig load_with_overrides(const std::string &path, const std::vector<std::string> &sets)
        {
            ExperimentConfig c;
            if (!path.empty())
                c = load_config(path);
            for (const auto &kv : sets)
            {
                const auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw ConfigError("--set expects key=value, got '" + kv + "'");
                set_config_value(c, config_detail::trim(kv.substr(0, eq)), kv.substr(eq + 1));
            }
            c.validate();
            return c;
        }

        inline void report_drops(const SweepResult &res, const ExperimentConfig &c, std::ostream &log)
        {
            for (std::size_t p = 0; p < res.records.size(); ++p)
            {
                std::int64_t infeasible = 0, failed = 0;
                for (const auto &rec : res.records[p])
                    for (const auto &o : rec.outcomes)
                    {
                        infeasible += o.status == DropStatus::infeasible;
                        failed += o.status == DropStatus::failed;
                    }
                if (infeasible + failed > 0)
                    log << "sweep point " << p << ": " << infeasible << " infeasible and " << failed
                        << " failed scheme evaluations excluded\n";
            }
            if (static_cast<double>(c.calibration_trials) * c.p_fa < 10.0)
                log << "warning: calibration_trials * p_fa < 10, threshold estimate is coarse\n";
        }
    }

    inline int cli_main(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr)
    {
        CLI::App app{"OTFS cell-free MIMO ISAC target detection simulator"};
        app.footer(defaults_help());
        app.require_subcommand(1);

        std::string config_path, out_path, format = "csv", param, values;
        std::vector<std::string> sets;
        std::uint64_t seed = 0;

        auto *run = app.add_subcommand("run", "Run the configured experiment");
        auto *sweep = app.add_subcommand("sweep", "Run a sweep over one parameter");
        auto *validate = app.add_subcommand("validate-config", "Check a configuration file");
        for (auto *sub : {run, sweep})
        {
            sub->add_option("config", config_path, "Configuration file (key = value)")->check(CLI::ExistingFile);
            sub->add_option("--seed", seed, "Override the random seed");
            sub->add_option("--out", out_path, "Output file (default: stdout)");
            sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
            sub->add_option("--set", sets, "Override a configuration key, key=value");
        }
        sweep->add_option("--param", param, "rcs_variance, num_ues or num_rx_aps")->required();
        sweep->add_option("--values", values, "Comma-separated sweep values (unit suffixes allowed)")->required();
        validate->add_option("config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);

        try
        {
            app.parse(argc, argv);
        }
        catch (const CLI::CallForHelp &)
        {
            out << app.help();
            return 0;
        }
        catch (const CLI::ParseError &e)
        {
            err << "error: " << e.what() << "\n" << app.help();
            return 1;
        }

        ExperimentConfig config;
        try
        {
            config = cli_detail::load_with_overrides(config_path, sets);
            if (validate->parsed())
            {
                out << "configuration '" << config_path << "' is valid\n";
                return 0;
            }
            if (run->parsed() || sweep->parsed())
            {
                if (sweep->get_option("--seed")->count() + run->get_option("--seed")->count() > 0)
                    config.seed = seed;
                if (sweep->parsed())
                {
                    config.sweep_param = parse_sweep_param(param);
                    config.sweep_values = parse_quantity_list(values);
                }
                config.validate();
            }
        }
        catch (const ConfigError &e)
        {
            err << "configuration error: " << e.what() << "\n";
            return 1;
        }

        try
        {
            const auto res = run_sweep_detailed(config);
            cli_detail::report_drops(res, config, err);
            const auto fmt = parse_format(format);
            if (out_path.empty())
                out << (fmt == OutputFormat::csv ? to_csv(res.rows) : to_json(res.rows).dump(2) + "\n");
            else
                emit_results(res.rows, fmt, out_path);
        }
        catch (const ConfigError &e)
        {
            err << "configuration error: " << e.what() << "\n";
            return 1;
        }
        catch (const std::exception &e)
        {
            err << "runtime failure: " << e.what() << "\n";
            return 2;
        }
        return 0;
    }
}
