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
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace otfs_isac;
using Catch::Approx;

TEST_CASE("path loss follows the log-distance law with a 1 m floor", "[channel]")
{
    CHECK(linear_to_db(path_loss(1.0)) == Approx(-30.5));
    CHECK(linear_to_db(path_loss(100.0)) == Approx(-30.5 - 73.4));
    CHECK_THROWS_AS(path_loss(0.0), std::invalid_argument);

    ScenarioConfig c = fixture::small_config(1);
    Scenario s = fixture::make_drop(c, 1).scenario;
    s.ue_positions[0] = s.tx_ap_positions[0]; // co-located
    Rng rng(2);
    double power = 0.0;
    const int reps = 4000;
    for (int i = 0; i < reps; ++i)
        for (const auto &p : sample_ue_paths(s, 0, 0, rng))
            power += std::norm(p.gain);
    CHECK(power / reps == Approx(path_loss(1.0)).epsilon(0.05));
}

TEST_CASE("array response is a unit-modulus phase progression", "[channel]")
{
    const CVector a = array_response(4, 0.3, 0.0);
    for (Index l = 0; l < 4; ++l)
        CHECK(std::abs(a(l) - std::polar(1.0, pi * l * std::sin(0.3))) < 1e-15);
    CHECK(std::abs(array_response(3, 0.3, pi / 2)(2) - cdouble(1.0)) < 1e-15);
    CHECK_THROWS_AS(array_response(0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("receive APs are the nearest to the target, ties by index", "[channel]")
{
    const std::vector<Point2> aps{{0, 0}, {1, 0}, {-1, 0}, {5, 5}, {0, 1}};
    const Point2 t{0, 0};
    CHECK(select_receive_aps(aps, t, 1) == std::vector<std::size_t>{0});
    CHECK(select_receive_aps(aps, t, 3) == std::vector<std::size_t>{0, 1, 2});
    CHECK(select_receive_aps(aps, t, 0).empty());
    CHECK_THROWS_AS(select_receive_aps(aps, t, 6), std::invalid_argument);
}

TEST_CASE("scenario geometry", "[channel]")
{
    ScenarioConfig c;
    Rng rng(3);
    const Scenario s = generate_scenario(c, rng);
    CHECK(s.num_tx() == 8);
    CHECK(s.num_rx() == 2);
    CHECK(s.num_ues() == 2);
    CHECK(s.target_position.x == 250.0);
    for (const auto &rx : s.rx_ap_positions)
        for (const auto &tx : s.tx_ap_positions)
            CHECK(distance(rx, s.target_position) <= distance(tx, s.target_position));
    for (const auto &p : s.ue_positions)
    {
        CHECK(p.x >= 0.0);
        CHECK(p.x <= 500.0);
    }

    SECTION("same seed, same drop")
    {
        Rng r2(3);
        const Scenario s2 = generate_scenario(c, r2);
        CHECK(s2.ue_positions[1].y == s.ue_positions[1].y);
        CHECK(s2.tx_ap_positions[7].x == s.tx_ap_positions[7].x);
    }
    SECTION("more UEs only append positions")
    {
        c.num_ues = 5;
        Rng r2(3);
        const Scenario s2 = generate_scenario(c, r2);
        CHECK(s2.ue_positions[0].x == s.ue_positions[0].x);
        CHECK(s2.ue_positions[1].y == s.ue_positions[1].y);
        CHECK(s2.tx_ap_positions[3].x == s.tx_ap_positions[3].x);
    }
    SECTION("invalid counts are rejected")
    {
        c.num_tx_aps = 0;
        Rng r2(3);
        CHECK_THROWS_AS(generate_scenario(c, r2), std::invalid_argument);
    }
}

TEST_CASE("path parameters stay inside the configured spreads", "[channel][property]")
{
    const Scenario s = fixture::make_drop(ScenarioConfig{}, 4).scenario;
    const Interval taps = delay_tap_range(s);
    CHECK(taps.min == 1.0);
    CHECK(taps.max == 5.0);
    const double nmax = 1880.0 * 128 * 2.08e-6;
    Rng rng(5);
    bool negative = false, positive = false;
    for (int i = 0; i < 200; ++i)
        for (const auto &p : sample_ue_paths(s, 1, 3, rng))
        {
            CHECK(p.delay_tap >= 1);
            CHECK(p.delay_tap <= 5);
            CHECK(std::abs(p.doppler_tap) <= nmax + 1e-12);
            CHECK(p.aod >= -pi);
            CHECK(p.aod < pi);
            negative |= p.doppler_tap < 0.0;
            positive |= p.doppler_tap > 0.0;
        }
    CHECK(negative);
    CHECK(positive);
    Rng r2(5);
    CHECK_THROWS_AS(sample_ue_paths(s, 2, 0, r2), std::invalid_argument);
}

TEST_CASE("assembled UE channel matches the naive construction", "[channel]")
{
    ScenarioConfig c = fixture::small_config(2);
    c.frame.M = 8;
    c.frame.N = 4;
    c.num_paths = 5;
    Rng rng(6);
    for (int inst = 0; inst < 5; ++inst)
    {
        const Scenario s = generate_scenario(c, rng);
        std::vector<std::vector<DdPath>> paths;
        for (Index k = 0; k < s.num_tx(); ++k)
            paths.push_back(sample_ue_paths(s, 1, k, rng));
        const UeChannel ch = build_ue_channel(paths, s, 1);
        REQUIRE(ch.assembled.rows() == 32);
        REQUIRE(ch.assembled.cols() == s.num_tx() * 2 * 32);
        for (Index k = 0; k < s.num_tx(); ++k)
            for (Index l = 0; l < 2; ++l)
            {
                const CMatrix ref = oracle::channel_block(paths[static_cast<std::size_t>(k)], l, 32);
                CHECK((CMatrix(ch.block(k, l)) - ref).cwiseAbs().maxCoeff() < 1e-10);
            }
        CHECK((CMatrix(ch.ap_block(1)).leftCols(32) - CMatrix(ch.block(1, 0))).norm() == 0.0);
    }
}

TEST_CASE("channel construction rejects bad inputs", "[channel]")
{
    const auto d = fixture::make_drop(fixture::small_config(1), 7);
    auto paths = d.channels[0].paths;
    paths[0][0].delay_tap = 8; // MN = 8
    CHECK_THROWS_AS(build_ue_channel(paths, d.scenario, 0), std::invalid_argument);
    paths.pop_back();
    CHECK_THROWS_AS(build_ue_channel(paths, d.scenario, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_ue_channel(d.channels[0].paths, d.scenario, 1), std::invalid_argument);
}

TEST_CASE("target links", "[channel]")
{
    ScenarioConfig c;
    c.target_doppler = 300.0;
    const auto d = fixture::make_drop(c, 8);
    const auto &s = d.scenario;
    REQUIRE(d.links.size() == 2);
    REQUIRE(d.links[0].size() == 8);
    for (Index r = 0; r < 2; ++r)
        for (Index k = 0; k < 8; ++k)
        {
            const auto &lk = d.links[r][k];
            const double dist = distance(s.tx_ap_positions[k], s.target_position) +
                                distance(s.target_position, s.rx_ap_positions[r]);
            CHECK(lk.delay_tap == std::llround(dist / speed_of_light / 2.08e-6) % 128);
            CHECK(lk.doppler_tap == Approx(300.0 * 128 * 2.08e-6));
            CHECK((lk.dd_matrix.adjoint() * lk.dd_matrix - CMatrix::Identity(128, 128)).norm() < 1e-12);
            const CMatrix ref = oracle::pi_power(128, lk.delay_tap) * oracle::delta_power(128, lk.doppler_tap);
            CHECK((lk.dd_matrix - ref).norm() < 1e-10);
            CHECK(lk.gain == c.target_path_gain);
            CHECK(lk.tx_steering.size() == 2);
        }
    const auto steer = tx_target_steering(s);
    CHECK((steer[3] - d.links[1][3].tx_steering).norm() == 0.0);
}
