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


#include "fixtures.hpp"

#include <otfs_isac/cli.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace otfs_isac;
using Catch::Approx;

namespace
{
    ExperimentConfig tiny_experiment()
    {
        ExperimentConfig c;
        c.scenario = fixture::small_config(2);
        c.scenario.noise_power = 1e-13;
        c.drops = 2;
        c.trials_per_drop = 40;
        c.calibration_trials = 200;
        c.p_fa = 0.05;
        c.sweep_values = {0.01, 0.1};
        return c;
    }

    std::string temp_path(const std::string &name)
    {
        return (std::filesystem::temp_directory_path() / ("otfs_isac_test_" + name)).string();
    }

    int run_cli(const std::vector<std::string> &args, std::string *out = nullptr, std::string *err = nullptr)
    {
        std::vector<const char *> argv{"otfs_isac_cli"};
        for (const auto &a : args)
            argv.push_back(a.c_str());
        std::ostringstream o, e;
        const int code = cli_main(static_cast<int>(argv.size()), argv.data(), o, e);
        if (out)
            *out = o.str();
        if (err)
            *err = e.str();
        return code;
    }
}

TEST_CASE("quantities accept unit suffixes", "[config]")
{
    CHECK(parse_quantity("3.5") == 3.5);
    CHECK(parse_quantity(" -20 dBsm ") == Approx(0.01));
    CHECK(parse_quantity("-94 dBm") == Approx(3.981071705534973e-13));
    CHECK(parse_quantity("2 dB") == Approx(1.5848931924611136));
    CHECK(parse_quantity("0 dBW") == Approx(1.0));
    CHECK_THROWS_AS(parse_quantity("3 furlongs"), ConfigError);
    CHECK_THROWS_AS(parse_quantity("abc"), ConfigError);
    CHECK(parse_integer("12") == 12);
    CHECK_THROWS_AS(parse_integer("1.5"), ConfigError);
    CHECK(parse_quantity_list("1, 2 dB,3").size() == 3);
}

TEST_CASE("the shipped default config equals the built-in defaults", "[config]")
{
    const ExperimentConfig f = load_config(OTFS_ISAC_DEFAULT_CONFIG);
    const ExperimentConfig d;
    CHECK(f.scenario.num_tx_aps == d.scenario.num_tx_aps);
    CHECK(f.scenario.noise_power == Approx(d.scenario.noise_power));
    CHECK(f.scenario.target_path_gain == Approx(d.scenario.target_path_gain));
    CHECK(f.gamma_thresh == Approx(d.gamma_thresh));
    CHECK(f.scenario.delay_spread.max == d.scenario.delay_spread.max);
    REQUIRE(f.sweep_values.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(f.sweep_values[i] == Approx(d.sweep_values[i]));
    CHECK(f.schemes == d.schemes);
    CHECK(f.drops == d.drops);
    CHECK(f.calibration_trials == d.calibration_trials);
}

TEST_CASE("config parsing errors", "[config]")
{
    std::istringstream unknown("bogus_key = 1\n");
    CHECK_THROWS_AS(parse_config(unknown), ConfigError);
    std::istringstream no_eq("drops 3\n");
    CHECK_THROWS_AS(parse_config(no_eq), ConfigError);
    std::istringstream bad_scheme("schemes = everything\n");
    CHECK_THROWS_AS(parse_config(bad_scheme), ConfigError);
    std::istringstream comments("# comment\n\ndrops = 3 # trailing\n");
    CHECK(parse_config(comments).drops == 3);

    std::istringstream pfa("p_fa = 1e-5\n");
    try
    {
        parse_config(pfa);
        FAIL("expected ConfigError");
    }
    catch (const ConfigError &e)
    {
        CHECK(e.min_feasible_pfa() == Approx(1.0 / 2000));
    }
    CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("sweep configuration", "[config]")
{
    ExperimentConfig c;
    c.sweep_param = SweepParam::num_ues;
    c.sweep_values = {2, 4};
    CHECK(c.at_sweep_value(4).scenario.num_ues == 4);
    c.sweep_values = {2.5};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.sweep_param = SweepParam::rcs_variance;
    c.sweep_values = {-1.0};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.sweep_param = SweepParam::none;
    CHECK(c.sweep_points() == std::vector<double>{c.scenario.rcs_variance});
    CHECK(parse_scheme("comm-centric") == Scheme::comm_centric);
    CHECK_THROWS_AS(parse_sweep_param("antennas"), ConfigError);
}

TEST_CASE("experiment rows are deterministic and thread-independent", "[experiment]")
{
    ExperimentConfig c = tiny_experiment();
    c.sweep_values = {0.1, 0.01}; // unsorted on purpose
    const auto a = run_sweep(c);
    c.threads = 2;
    const auto b = run_sweep(c);
    REQUIRE(a.size() == 6);
    CHECK(to_csv(a) == to_csv(b));
    CHECK(a[0].sweep_value == 0.01);
    CHECK(a[3].sweep_value == 0.1);
    CHECK(a[0].scheme == "sensing-centric-with-x0");
    for (const auto &r : a)
    {
        CHECK(r.seed == 1);
        if (r.has_pd)
        {
            CHECK(r.pd_ci_low <= r.pd);
            CHECK(r.pd <= r.pd_ci_high);
            CHECK(r.trials == r.drops_used * 40);
        }
    }
    c.seed = 2;
    CHECK(to_csv(run_sweep(c)) != to_csv(a));
}

TEST_CASE("a drop record holds one outcome per scheme", "[experiment]")
{
    const ExperimentConfig c = tiny_experiment();
    const DropRecord rec = run_drop(c, 0);
    REQUIRE(rec.outcomes.size() == 3);
    for (const auto &o : rec.outcomes)
    {
        if (o.status != DropStatus::ok)
            continue;
        CHECK(o.min_sinr_margin >= 1.0 - 1e-6);
        CHECK(o.total_power <= 4.0 + 1e-6);
        CHECK(o.pd.trials == 40);
    }
    // the sensing-without-x0 scheme never powers the sensing precoder
    if (rec.outcomes[1].status == DropStatus::ok)
        CHECK(rec.outcomes[1].eta(0) == 0.0);
    // CCP schemes start from a feasible point and only improve it
    if (rec.outcomes[0].status == DropStatus::ok)
        CHECK(rec.outcomes[0].ccp_trace.back() >= rec.outcomes[0].ccp_trace.front());
}

TEST_CASE("aggregation skips infeasible drops", "[experiment]")
{
    std::vector<DropRecord> recs(3);
    for (int i = 0; i < 3; ++i)
    {
        SchemeOutcome o;
        o.status = i == 1 ? DropStatus::infeasible : DropStatus::ok;
        o.pd = make_pd_estimate(i == 0 ? 10 : 30, 40);
        o.sensing_snr = 10.0;
        o.min_sinr_margin = 1.0;
        recs[i].outcomes.push_back(o);
    }
    const auto row = aggregate(recs, 0, 0.5, "x", 9);
    CHECK(row.drops_used == 2);
    CHECK(row.pd == Approx(0.5));
    CHECK(row.mean_sensing_snr_db == Approx(10.0));

    for (auto &r : recs)
        r.outcomes[0].status = DropStatus::infeasible;
    const auto none = aggregate(recs, 0, 0.5, "x", 9);
    CHECK_FALSE(none.has_pd);
    CHECK(none.drops_used == 0);
}

TEST_CASE("CSV and JSON round trip", "[io]")
{
    std::vector<ResultRow> rows(2);
    rows[0].sweep_value = 0.1;
    rows[0].scheme = "comm-centric";
    rows[0].has_pd = true;
    rows[0].pd = 1.0 / 3.0;
    rows[0].pd_ci_low = 0.2;
    rows[0].pd_ci_high = 0.45;
    rows[0].mean_sensing_snr_db = -3.25;
    rows[0].mean_min_sinr_margin_db = 1e-9;
    rows[0].drops_used = 4;
    rows[0].seed = 77;
    rows[1].sweep_value = 0.2;
    rows[1].scheme = "sensing-centric-with-x0";
    rows[1].seed = 77;

    const std::string csv = to_csv(rows);
    CHECK(csv.find("0.33333333333333331") != std::string::npos);
    CHECK(csv.find("sensing-centric-with-x0,,,,,,0,77") != std::string::npos);
    std::istringstream in(csv);
    const auto back = parse_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].pd == rows[0].pd);
    CHECK(back[0].mean_min_sinr_margin_db == rows[0].mean_min_sinr_margin_db);
    CHECK_FALSE(back[1].has_pd);
    CHECK(to_csv(back) == csv);

    const auto j = to_json(rows);
    CHECK(j[1]["pd"].is_null());
    const auto jb = parse_json(j);
    CHECK(jb[0].pd == rows[0].pd);
    CHECK_FALSE(jb[1].has_pd);

    const std::string path = temp_path("rows.json");
    emit_results(rows, OutputFormat::json, path);
    CHECK(read_results(path, OutputFormat::json)[0].seed == 77);
    std::filesystem::remove(path);

    std::istringstream bad("a,b,c\n");
    CHECK_THROWS(parse_csv(bad));
    CHECK_THROWS_AS(parse_format("xml"), ConfigError);
}

TEST_CASE("command line front end", "[cli]")
{
    const std::string cfg = temp_path("tiny.cfg");
    {
        std::ofstream f(cfg);
        f << "M = 4\nN = 2\nnum_tx_aps = 4\nnum_paths = 3\nnoise_power = -100 dBm\n"
          << "drops = 1\ntrials_per_drop = 20\ncalibration_trials = 200\np_fa = 0.05\n"
          << "sweep_values = -20 dBsm\n";
    }
    std::string out, err;

    CHECK(run_cli({"validate-config", cfg}, &out) == 0);
    CHECK(out.find("valid") != std::string::npos);

    CHECK(run_cli({"run", cfg, "--seed", "5"}, &out, &err) == 0);
    CHECK(out.rfind(csv_header, 0) == 0);
    CHECK(out.find(",5\n") != std::string::npos);

    CHECK(run_cli({"sweep", cfg, "--param", "num_rx_aps", "--values", "1,2", "--format", "json"}, &out) == 0);
    CHECK(nlohmann::json::parse(out).size() == 6);

    const std::string csv_out = temp_path("out.csv");
    CHECK(run_cli({"run", cfg, "--out", csv_out}) == 0);
    CHECK(read_results(csv_out, OutputFormat::csv).size() == 3);
    std::filesystem::remove(csv_out);

    CHECK(run_cli({"run", cfg, "--set", "p_fa=1e-4"}, &out, &err) == 1);
    CHECK(err.find("not resolvable") != std::string::npos);
    CHECK(run_cli({"run", cfg, "--set", "nonsense=1"}) == 1);
    CHECK(run_cli({"sweep", cfg, "--param", "antennas", "--values", "1"}) == 1);
    CHECK(run_cli({"validate-config"}) == 1);
    CHECK(run_cli({"frobnicate"}) == 1);
    CHECK(run_cli({"--help"}, &out) == 0);
    CHECK(out.find("Defaults") != std::string::npos);

    // eight UEs fill every transmit dimension: infeasible drops, still exit 0
    CHECK(run_cli({"run", cfg, "--set", "num_ues=8"}, &out, &err) == 0);
    CHECK(err.find("infeasible") != std::string::npos);

    // the installed binary reports exit codes through the process status
    const int status = std::system((std::string(OTFS_ISAC_CLI) + " validate-config /nonexistent >/dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(status) == 1);
    std::filesystem::remove(cfg);
}
