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

// Experiment configuration and its flat `key = value` text format.
//
// Values may carry a unit suffix converted at parse time:
//   dB    power ratio        -> linear
//   dBm   power              -> W
//   dBW   power              -> W
//   dBsm  radar cross section -> m^2
// Lists are comma separated; each element may carry its own suffix.
// '#' starts a comment. Unknown keys are rejected.

#include "channel.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace otfs_isac
{
    enum class Scheme
    {
        sensing_with_x0,
        sensing_without_x0,
        comm_centric
    };

    inline const char *scheme_label(Scheme s)
    {
        switch (s)
        {
        case Scheme::sensing_with_x0:
            return "sensing-centric-with-x0";
        case Scheme::sensing_without_x0:
            return "sensing-centric-without-x0";
        default:
            return "comm-centric";
        }
    }

    inline Scheme parse_scheme(const std::string &label)
    {
        for (auto s : {Scheme::sensing_with_x0, Scheme::sensing_without_x0, Scheme::comm_centric})
            if (label == scheme_label(s))
                return s;
        throw ConfigError("unknown scheme '" + label + "'");
    }

    enum class SweepParam
    {
        none,
        rcs_variance,
        num_ues,
        num_rx_aps
    };

    inline const char *sweep_label(SweepParam p)
    {
        switch (p)
        {
        case SweepParam::rcs_variance:
            return "rcs_variance";
        case SweepParam::num_ues:
            return "num_ues";
        case SweepParam::num_rx_aps:
            return "num_rx_aps";
        default:
            return "none";
        }
    }

    inline SweepParam parse_sweep_param(const std::string &label)
    {
        for (auto p : {SweepParam::none, SweepParam::rcs_variance, SweepParam::num_ues, SweepParam::num_rx_aps})
            if (label == sweep_label(p))
                return p;
        throw ConfigError("unknown sweep parameter '" + label + "' (expected rcs_variance, num_ues, num_rx_aps or none)");
    }

    struct ExperimentConfig
    {
        ScenarioConfig scenario;
        double p_max = 1.0;                       // W
        double gamma_thresh = 1.5848931924611136; // linear, 2 dB
        double psi_reg = 0.0;                     // 0: sigma_n^2 * N_ue
        std::vector<Scheme> schemes{Scheme::sensing_with_x0, Scheme::sensing_without_x0, Scheme::comm_centric};
        SweepParam sweep_param = SweepParam::rcs_variance;
        std::vector<double> sweep_values{0.0025118864315095794, 0.01, 0.063095734448019317}; // -26, -20, -12 dBsm
        std::int64_t drops = 20;
        std::int64_t trials_per_drop = 200;
        std::int64_t calibration_trials = 2000;
        double p_fa = 1e-2;
        std::uint64_t seed = 1;
        double ccp_epsilon = 1e-6;
        std::int64_t ccp_max_iterations = 100;
        double init_push_fraction = 1.0;
        std::int64_t threads = 1;

        double effective_psi_reg() const
        {
            return psi_reg > 0.0 ? psi_reg : scenario.noise_power * static_cast<double>(scenario.num_ues);
        }

        void validate() const
        {
            try
            {
                scenario.validate();
            }
            catch (const std::invalid_argument &e)
            {
                throw ConfigError(e.what());
            }
            if (!(p_max > 0.0))
                throw ConfigError("p_max must be > 0");
            if (!(gamma_thresh > 0.0))
                throw ConfigError("gamma_thresh must be > 0");
            if (psi_reg < 0.0)
                throw ConfigError("psi_reg must be >= 0 (0 selects sigma_n^2 * N_ue)");
            if (schemes.empty())
                throw ConfigError("at least one scheme is required");
            if (drops < 1 || trials_per_drop < 1)
                throw ConfigError("drops and trials_per_drop must be >= 1");
            if (!(p_fa > 0.0 && p_fa < 1.0))
                throw ConfigError("p_fa must lie in (0, 1)");
            if (calibration_trials < 100 || static_cast<double>(calibration_trials) * p_fa < 1.0)
                throw ConfigError("p_fa = " + std::to_string(p_fa) + " is not resolvable with calibration_trials = " +
                                      std::to_string(calibration_trials),
                                  1.0 / static_cast<double>(std::max<std::int64_t>(calibration_trials, 100)));
            if (!(ccp_epsilon > 0.0) || ccp_max_iterations < 1)
                throw ConfigError("ccp_epsilon must be > 0 and ccp_max_iterations >= 1");
            if (!(init_push_fraction >= 0.0 && init_push_fraction <= 1.0))
                throw ConfigError("init_push_fraction must lie in [0, 1]");
            if (threads < 0)
                throw ConfigError("threads must be >= 0 (0 selects all cores)");
            if (sweep_param != SweepParam::none && sweep_values.empty())
                throw ConfigError("sweep_values must not be empty");
            for (double v : sweep_values)
            {
                if (!std::isfinite(v))
                    throw ConfigError("sweep values must be finite");
                if (sweep_param == SweepParam::rcs_variance && !(v > 0.0))
                    throw ConfigError("rcs_variance sweep values must be > 0 (linear m^2)");
                if ((sweep_param == SweepParam::num_ues || sweep_param == SweepParam::num_rx_aps) &&
                    (v < 1.0 || v != std::floor(v)))
                    throw ConfigError(std::string(sweep_label(sweep_param)) + " sweep values must be integers >= 1");
            }
        }

        /// Copy with the sweep parameter set to `value`.
        ExperimentConfig at_sweep_value(double value) const
        {
            ExperimentConfig c = *this;
            switch (sweep_param)
            {
            case SweepParam::rcs_variance:
                c.scenario.rcs_variance = value;
                break;
            case SweepParam::num_ues:
                c.scenario.num_ues = static_cast<Index>(value);
                break;
            case SweepParam::num_rx_aps:
                c.scenario.num_rx_aps = static_cast<Index>(value);
                break;
            default:
                break;
            }
            return c;
        }

        /// Sweep points; a single point (the current value) when not sweeping.
        std::vector<double> sweep_points() const
        {
            switch (sweep_param)
            {
            case SweepParam::rcs_variance:
            case SweepParam::num_ues:
            case SweepParam::num_rx_aps:
                return sweep_values;
            default:
                return {scenario.rcs_variance};
            }
        }
    };

    namespace config_detail
    {
        inline std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        }

        inline std::vector<std::string> split(const std::string &s, char sep)
        {
            std::vector<std::string> out;
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, sep))
                out.push_back(trim(item));
            return out;
        }
    }

    /// Parse one number with an optional unit suffix.
    inline double parse_quantity(const std::string &text)
    {
        const std::string t = config_detail::trim(text);
        std::size_t used = 0;
        double v = 0.0;
        try
        {
            v = std::stod(t, &used);
        }
        catch (const std::exception &)
        {
            throw ConfigError("cannot parse number from '" + text + "'");
        }
        const std::string unit = config_detail::trim(t.substr(used));
        if (unit.empty())
            return v;
        if (unit == "dB" || unit == "dBsm")
            return db_to_linear(v);
        if (unit == "dBm")
            return db_to_linear(v - 30.0);
        if (unit == "dBW")
            return db_to_linear(v);
        throw ConfigError("unknown unit '" + unit + "' in '" + text + "'");
    }

    inline std::int64_t parse_integer(const std::string &text)
    {
        const std::string t = config_detail::trim(text);
        std::size_t used = 0;
        long long v = 0;
        try
        {
            v = std::stoll(t, &used);
        }
        catch (const std::exception &)
        {
            throw ConfigError("cannot parse integer from '" + text + "'");
        }
        if (used != t.size())
            throw ConfigError("trailing characters in integer '" + text + "'");
        return v;
    }

    inline std::vector<double> parse_quantity_list(const std::string &text)
    {
        std::vector<double> out;
        for (const auto &item : config_detail::split(text, ','))
            if (!item.empty())
                out.push_back(parse_quantity(item));
        return out;
    }

    /// Setter table keyed by configuration field name.
    inline std::map<std::string, std::function<void(ExperimentConfig &, const std::string &)>> config_setters()
    {
        using C = ExperimentConfig;
        std::map<std::string, std::function<void(C &, const std::string &)>> m;
        const auto real = [](double C::*f)
        { return [f](C &c, const std::string &v) { c.*f = parse_quantity(v); }; };
        const auto sreal = [](double ScenarioConfig::*f)
        { return [f](C &c, const std::string &v) { c.scenario.*f = parse_quantity(v); }; };
        const auto sint = [](Index ScenarioConfig::*f)
        { return [f](C &c, const std::string &v) { c.scenario.*f = static_cast<Index>(parse_integer(v)); }; };
        const auto integer = [](std::int64_t C::*f)
        { return [f](C &c, const std::string &v) { c.*f = parse_integer(v); }; };

        m["area_side"] = sreal(&ScenarioConfig::area_side);
        m["num_tx_aps"] = sint(&ScenarioConfig::num_tx_aps);
        m["num_rx_aps"] = sint(&ScenarioConfig::num_rx_aps);
        m["num_ues"] = sint(&ScenarioConfig::num_ues);
        m["antennas"] = sint(&ScenarioConfig::antennas);
        m["num_paths"] = sint(&ScenarioConfig::num_paths);
        m["noise_power"] = sreal(&ScenarioConfig::noise_power);
        m["rcs_variance"] = sreal(&ScenarioConfig::rcs_variance);
        m["target_doppler"] = sreal(&ScenarioConfig::target_doppler);
        m["target_path_gain"] = sreal(&ScenarioConfig::target_path_gain);
        m["delay_spread_min"] = [](C &c, const std::string &v) { c.scenario.delay_spread.min = parse_quantity(v); };
        m["delay_spread_max"] = [](C &c, const std::string &v) { c.scenario.delay_spread.max = parse_quantity(v); };
        m["doppler_spread_min"] = [](C &c, const std::string &v) { c.scenario.doppler_spread.min = parse_quantity(v); };
        m["doppler_spread_max"] = [](C &c, const std::string &v) { c.scenario.doppler_spread.max = parse_quantity(v); };
        m["M"] = [](C &c, const std::string &v) { c.scenario.frame.M = static_cast<Index>(parse_integer(v)); };
        m["N"] = [](C &c, const std::string &v) { c.scenario.frame.N = static_cast<Index>(parse_integer(v)); };
        m["sample_interval"] = [](C &c, const std::string &v) { c.scenario.frame.sample_interval = parse_quantity(v); };
        m["carrier_frequency"] = [](C &c, const std::string &v) { c.scenario.frame.carrier_frequency = parse_quantity(v); };
        m["p_max"] = real(&C::p_max);
        m["gamma_thresh"] = real(&C::gamma_thresh);
        m["psi_reg"] = real(&C::psi_reg);
        m["p_fa"] = real(&C::p_fa);
        m["ccp_epsilon"] = real(&C::ccp_epsilon);
        m["init_push_fraction"] = real(&C::init_push_fraction);
        m["drops"] = integer(&C::drops);
        m["trials_per_drop"] = integer(&C::trials_per_drop);
        m["calibration_trials"] = integer(&C::calibration_trials);
        m["ccp_max_iterations"] = integer(&C::ccp_max_iterations);
        m["threads"] = integer(&C::threads);
        m["seed"] = [](C &c, const std::string &v)
        {
            const auto s = parse_integer(v);
            if (s < 0)
                throw ConfigError("seed must be >= 0");
            c.seed = static_cast<std::uint64_t>(s);
        };
        m["schemes"] = [](C &c, const std::string &v)
        {
            c.schemes.clear();
            for (const auto &item : config_detail::split(v, ','))
                if (!item.empty())
                    c.schemes.push_back(parse_scheme(item));
        };
        m["sweep_param"] = [](C &c, const std::string &v) { c.sweep_param = parse_sweep_param(config_detail::trim(v)); };
        m["sweep_values"] = [](C &c, const std::string &v) { c.sweep_values = parse_quantity_list(v); };
        return m;
    }

    /// Apply one `key = value` assignment.
    inline void set_config_value(ExperimentConfig &config, const std::string &key, const std::string &value)
    {
        static const auto setters = config_setters();
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError("unknown configuration key '" + key + "'");
        it->second(config, value);
    }

    inline ExperimentConfig parse_config(std::istream &in, const std::string &source = "<config>")
    {
        ExperimentConfig config;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line.resize(hash);
            line = config_detail::trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
            try
            {
                set_config_value(config, config_detail::trim(line.substr(0, eq)), line.substr(eq + 1));
            }
            catch (const ConfigError &e)
            {
                throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        config.validate();
        return config;
    }

    inline ExperimentConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open configuration file '" + path + "'");
        return parse_config(in, path);
    }
}
