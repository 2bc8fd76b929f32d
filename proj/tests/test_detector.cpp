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

namespace
{
    CMatrix random_omega(Index rows, Index cols, Rng &rng)
    {
        CMatrix om(rows, cols);
        for (Index j = 0; j < cols; ++j)
            om.col(j) = rng.complex_normal_vector(rows, 1.0);
        return om;
    }
}

TEST_CASE("single-column statistic matches the closed form", "[detector]")
{
    Rng rng(1);
    for (int i = 0; i < 10; ++i)
    {
        const CMatrix om = random_omega(12, 1, rng);
        const CVector y = rng.complex_normal_vector(12, 0.3);
        CHECK(maprt_statistic(y, om, 0.3, 2.0) == Approx(oracle::maprt_scalar(y, om.col(0), 0.3, 2.0)).epsilon(1e-12));
    }
}

TEST_CASE("statistic matches an explicit inverse", "[detector][property]")
{
    Rng rng(2);
    for (int i = 0; i < 10; ++i)
    {
        const CMatrix om = random_omega(20, 6, rng);
        const double sn2 = rng.uniform(0.1, 2.0), sr2 = rng.uniform(0.1, 2.0);
        const CVector y = rng.complex_normal_vector(20, 1.0);
        const CMatrix A = om.adjoint() * om + (sn2 / sr2) * CMatrix::Identity(6, 6);
        const CVector b = om.adjoint() * y;
        const double ref = 6.0 * std::log(1.0 / (pi * sr2)) + (b.adjoint() * A.inverse() * b)(0, 0).real() / sn2;
        const MaprtDetector det(om, sn2, sr2);
        CHECK(det(y) == Approx(ref).epsilon(1e-10));
        CHECK(det(y) >= det.constant());
    }
    CHECK_THROWS_AS(MaprtDetector(random_omega(4, 2, rng), 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(MaprtDetector(random_omega(4, 2, rng), 0.0, 1.0), std::invalid_argument);
    const MaprtDetector det(random_omega(4, 2, rng), 1.0, 1.0);
    CHECK_THROWS_AS(det(CVector::Zero(3)), std::invalid_argument);
}

TEST_CASE("empirical quantile is the ceil((1-p)n)-th order statistic", "[detector]")
{
    std::vector<double> s;
    for (int i = 100; i >= 1; --i)
        s.push_back(i);
    CHECK(empirical_upper_quantile(s, 0.05) == 95.0);
    CHECK(empirical_upper_quantile(s, 0.01) == 99.0);
    CHECK(empirical_upper_quantile(s, 0.999) == 1.0);
    CHECK_THROWS_AS(empirical_upper_quantile({}, 0.1), std::invalid_argument);
    CHECK_FALSE(detect(1.0, 1.0).decision);
    CHECK(detect(1.0 + 1e-15, 1.0).decision);
}

TEST_CASE("calibration resolvability", "[detector]")
{
    CHECK(check_calibration_resolvable(2000, 1e-2));
    CHECK_FALSE(check_calibration_resolvable(500, 1e-2));
    try
    {
        check_calibration_resolvable(1000, 1e-5);
        FAIL("expected ConfigError");
    }
    catch (const ConfigError &e)
    {
        CHECK(e.min_feasible_pfa() == Approx(1e-3));
    }
    CHECK_THROWS_AS(check_calibration_resolvable(50, 0.5), ConfigError);
    CHECK_THROWS_AS(check_calibration_resolvable(1000, 0.0), ConfigError);
}

TEST_CASE("Wilson interval", "[detector]")
{
    const auto a = wilson_interval(5, 10);
    CHECK(a.low == Approx(0.2366).margin(1e-4));
    CHECK(a.high == Approx(0.7634).margin(1e-4));
    const auto b = wilson_interval(0, 10);
    CHECK(b.low == 0.0);
    CHECK(b.high == Approx(0.2775).margin(1e-4));
    const auto e = make_pd_estimate(30, 40);
    CHECK(e.pd == 0.75);
    CHECK(e.ci.low < 0.75);
    CHECK(e.ci.high > 0.75);
}

TEST_CASE("calibrated threshold holds the false-alarm rate", "[detector]")
{
    Rng rng(3);
    const CMatrix om = random_omega(16, 4, rng);
    DetectorConfig cfg{0.5, 0.2, 0.05, 20000};
    const double lambda = calibrate_threshold(om, cfg, rng);
    const MaprtDetector det(om, cfg.sigma_n2, cfg.sigma_rcs2);
    const auto h0 = sample_h0_statistics(det, om, cfg.sigma_n2, 20000, rng);
    const auto alarms = std::count_if(h0.begin(), h0.end(), [&](double t) { return detect(t, lambda).decision; });
    const double rate = static_cast<double>(alarms) / 20000.0;
    // threshold and validation draws each contribute binomial spread
    const double sd = std::sqrt(2.0 * 0.05 * 0.95 / 20000.0);
    CHECK(std::abs(rate - 0.05) < 4.0 * sd);

    cfg.calibration_trials = 50;
    CHECK_THROWS_AS(calibrate_threshold(om, cfg, rng), ConfigError);
}

TEST_CASE("Pd grows with echo strength", "[detector][property]")
{
    Rng rng(4);
    const CMatrix om = random_omega(16, 4, rng);
    DetectorConfig cfg{1.0, 0.0, 0.05, 4000};
    double prev = -1.0;
    for (double sr2 : {0.001, 0.01, 0.1, 1.0})
    {
        cfg.sigma_rcs2 = sr2;
        Rng cal(5), det(6);
        const double lambda = calibrate_threshold(om, cfg, cal);
        const auto pd = estimate_pd(om, cfg, lambda, 2000, det);
        CHECK(pd.pd >= prev - 0.03);
        prev = pd.pd;
    }
    CHECK(prev > 0.9);
    Rng r(7);
    CHECK_THROWS_AS(estimate_pd(om, cfg, 0.0, 0, r), std::invalid_argument);
}
