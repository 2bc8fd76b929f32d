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

// CSV and JSON persistence of sweep rows. CSV floats use 17 significant
// digits; a row without a Pd estimate leaves the Pd columns empty (JSON null).

#include "experiment.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace otfs_isac
{
    inline constexpr const char *csv_header =
        "sweep_value,scheme,pd,pd_ci_low,pd_ci_high,mean_sensing_snr_db,mean_min_sinr_margin_db,drops_used,seed";

    enum class OutputFormat
    {
        csv,
        json
    };

    inline OutputFormat parse_format(const std::string &s)
    {
        if (s == "csv")
            return OutputFormat::csv;
        if (s == "json")
            return OutputFormat::json;
        throw ConfigError("unknown output format '" + s + "' (expected csv or json)");
    }

    namespace io_detail
    {
        inline std::string g17(double v)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }
    }

    inline std::string to_csv(const std::vector<ResultRow> &rows)
    {
        using io_detail::g17;
        std::ostringstream os;
        os << csv_header << '\n';
        for (const auto &r : rows)
        {
            os << g17(r.sweep_value) << ',' << r.scheme << ',';
            if (r.has_pd)
                os << g17(r.pd) << ',' << g17(r.pd_ci_low) << ',' << g17(r.pd_ci_high) << ','
                   << g17(r.mean_sensing_snr_db) << ',' << g17(r.mean_min_sinr_margin_db);
            else
                os << ",,,,";
            os << ',' << r.drops_used << ',' << r.seed << '\n';
        }
        return os.str();
    }

    inline nlohmann::json to_json(const std::vector<ResultRow> &rows)
    {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto &r : rows)
        {
            nlohmann::json j;
            j["sweep_value"] = r.sweep_value;
            j["scheme"] = r.scheme;
            if (r.has_pd)
            {
                j["pd"] = r.pd;
                j["pd_ci_low"] = r.pd_ci_low;
                j["pd_ci_high"] = r.pd_ci_high;
                j["mean_sensing_snr_db"] = r.mean_sensing_snr_db;
                j["mean_min_sinr_margin_db"] = r.mean_min_sinr_margin_db;
            }
            else
            {
                for (const char *k : {"pd", "pd_ci_low", "pd_ci_high", "mean_sensing_snr_db", "mean_min_sinr_margin_db"})
                    j[k] = nullptr;
            }
            j["drops_used"] = r.drops_used;
            j["seed"] = r.seed;
            arr.push_back(j);
        }
        return arr;
    }

    inline void emit_results(const std::vector<ResultRow> &rows, OutputFormat format, const std::string &path)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open '" + path + "' for writing");
        if (format == OutputFormat::csv)
            out << to_csv(rows);
        else
            out << to_json(rows).dump(2) << '\n';
        if (!out)
            throw std::runtime_error("failed writing '" + path + "'");
    }

    inline std::vector<ResultRow> parse_csv(std::istream &in)
    {
        std::string line;
        if (!std::getline(in, line) || line != csv_header)
            throw std::runtime_error("CSV header does not match the result schema");
        std::vector<ResultRow> rows;
        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            std::vector<std::string> f;
            std::stringstream ss(line);
            std::string item;
            while (std::getline(ss, item, ','))
                f.push_back(item);
            if (line.back() == ',')
                f.emplace_back();
            if (f.size() != 9)
                throw std::runtime_error("CSV row has " + std::to_string(f.size()) + " fields, expected 9");
            ResultRow r;
            r.sweep_value = std::stod(f[0]);
            r.scheme = f[1];
            r.has_pd = !f[2].empty();
            if (r.has_pd)
            {
                r.pd = std::stod(f[2]);
                r.pd_ci_low = std::stod(f[3]);
                r.pd_ci_high = std::stod(f[4]);
                r.mean_sensing_snr_db = std::stod(f[5]);
                r.mean_min_sinr_margin_db = std::stod(f[6]);
            }
            r.drops_used = std::stoll(f[7]);
            r.seed = std::stoull(f[8]);
            rows.push_back(r);
        }
        return rows;
    }

    inline std::vector<ResultRow> parse_json(const nlohmann::json &arr)
    {
        std::vector<ResultRow> rows;
        for (const auto &j : arr)
        {
            ResultRow r;
            r.sweep_value = j.at("sweep_value").get<double>();
            r.scheme = j.at("scheme").get<std::string>();
            r.has_pd = !j.at("pd").is_null();
            if (r.has_pd)
            {
                r.pd = j.at("pd").get<double>();
                r.pd_ci_low = j.at("pd_ci_low").get<double>();
                r.pd_ci_high = j.at("pd_ci_high").get<double>();
                r.mean_sensing_snr_db = j.at("mean_sensing_snr_db").get<double>();
                r.mean_min_sinr_margin_db = j.at("mean_min_sinr_margin_db").get<double>();
            }
            r.drops_used = j.at("drops_used").get<std::int64_t>();
            r.seed = j.at("seed").get<std::uint64_t>();
            rows.push_back(r);
        }
        return rows;
    }

    inline std::vector<ResultRow> read_results(const std::string &path, OutputFormat format)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw std::runtime_error("cannot open '" + path + "'");
        if (format == OutputFormat::csv)
            return parse_csv(in);
        return parse_json(nlohmann::json::parse(in));
    }
}
