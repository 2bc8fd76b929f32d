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

// MAPRT detector for a target with CN(0, sigma_rcs^2 I) reflection
// coefficients observed through a known Omega:
//
//   T(y) = K ln(1 / (pi sigma_rcs^2))
//        + sigma_n^-2 (Omega^H y)^H (Omega^H Omega + sigma_n^2/sigma_rcs^2 I)^-1 (Omega^H y)
//
// with K = N_tx N_rx. H1 is declared when T(y) > lambda.

#include "isac_signal.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace otfs_isac
{
    struct DetectorConfig
    {
        double sigma_n2 = 3.981071705534973e-13;
        double sigma_rcs2 = 0.01;
        double p_fa = 1e-2;
        std::int64_t calibration_trials = 2000;

        void validate() const
        {
            if (!(sigma_n2 > 0.0))
                throw std::invalid_argument("DetectorConfig: sigma_n2 must be > 0");
            if (!(sigma_rcs2 > 0.0))
                throw std::invalid_argument("DetectorConfig: sigma_rcs2 must be > 0");
            if (!(p_fa > 0.0 && p_fa < 1.0))
                throw std::invalid_argument("DetectorConfig: p_fa must lie in (0, 1)");
        }
    };

    struct DetectionOutcome
    {
        double statistic = 0.0;
        double threshold = 0.0;
        bool decision = false; // true: H1 declared
    };

    /// Smallest p_fa whose (1 - p_fa) quantile is resolvable from `trials` samples.
    inline double min_resolvable_pfa(std::int64_t trials) { return trials > 0 ? 1.0 / static_cast<double>(trials) : 1.0; }

    /// Throws ConfigError when `trials` cannot resolve `p_fa` (fewer than 100
    /// trials, or trials * p_fa < 1). Returns false when the estimate is coarse
    /// (trials * p_fa < 10) so callers can warn.
    inline bool check_calibration_resolvable(std::int64_t trials, double p_fa)
    {
        if (!(p_fa > 0.0 && p_fa < 1.0))
            throw ConfigError("p_fa must lie in (0, 1)");
        if (trials < 100)
            throw ConfigError("calibration needs at least 100 trials, got " + std::to_string(trials),
                              min_resolvable_pfa(std::max<std::int64_t>(trials, 100)));
        if (static_cast<double>(trials) * p_fa < 1.0)
            throw ConfigError("p_fa = " + std::to_string(p_fa) + " is not resolvable with " + std::to_string(trials) +
                                  " calibration trials",
                              min_resolvable_pfa(trials));
        return static_cast<double>(trials) * p_fa >= 10.0;
    }

    /// Statistic evaluator with the inner Hermitian solve factored once per Omega.
    class MaprtDetector
    {
    public:
        MaprtDetector(const CMatrix &omega, double sigma_n2, double sigma_rcs2)
            : omega_(omega), sigma_n2_(sigma_n2)
        {
            if (!(sigma_rcs2 > 0.0))
                throw std::invalid_argument("maprt: sigma_rcs2 must be > 0");
            if (!(sigma_n2 > 0.0))
                throw std::invalid_argument("maprt: sigma_n2 must be > 0");
            const Index K = omega.cols();
            constant_ = static_cast<double>(K) * std::log(1.0 / (pi * sigma_rcs2));
            CMatrix A = omega.adjoint() * omega;
            A.diagonal().array() += sigma_n2 / sigma_rcs2;
            const double herm = (A - A.adjoint()).norm();
            if (herm > 1e-10 * A.norm())
                throw NumericalError("maprt: inner matrix is not Hermitian");
            llt_.compute(A);
            if (llt_.info() != Eigen::Success)
                throw NumericalError("maprt: inner matrix is not positive definite");
        }

        double constant() const { return constant_; }

        double operator()(const CVector &y) const
        {
            if (y.size() != omega_.rows())
                throw std::invalid_argument("maprt: observation length does not match Omega");
            const CVector b = omega_.adjoint() * y;
            const cdouble q = b.dot(llt_.solve(b));
            if (std::abs(q.imag()) > 1e-10 * std::max(std::abs(q.real()), 1e-300))
                throw NumericalError("maprt: quadratic form has a non-negligible imaginary part");
            return constant_ + q.real() / sigma_n2_;
        }

    private:
        CMatrix omega_;
        double sigma_n2_;
        double constant_ = 0.0;
        Eigen::LLT<CMatrix> llt_;
    };

    inline double maprt_statistic(const CVector &y, const CMatrix &omega, double sigma_n2, double sigma_rcs2)
    {
        return MaprtDetector(omega, sigma_n2, sigma_rcs2)(y);
    }

    inline DetectionOutcome detect(double statistic, double threshold)
    {
        // ties go to H0
        return {statistic, threshold, statistic > threshold};
    }

    /// Order statistic T_(ceil((1 - p_fa) n)) of `samples` (1-based rank).
    inline double empirical_upper_quantile(std::vector<double> samples, double p_fa)
    {
        if (samples.empty())
            throw std::invalid_argument("empirical_upper_quantile: no samples");
        const auto n = static_cast<double>(samples.size());
        auto rank = static_cast<std::size_t>(std::ceil((1.0 - p_fa) * n - 1e-9));
        rank = std::clamp<std::size_t>(rank, 1, samples.size());
        std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(rank - 1), samples.end());
        return samples[rank - 1];
    }

    /// H0 statistics for `trials` noise-only observations.
    inline std::vector<double> sample_h0_statistics(const MaprtDetector &det, const CMatrix &omega, double sigma_n2,
                                                    std::int64_t trials, Rng &rng)
    {
        std::vector<double> t;
        t.reserve(static_cast<std::size_t>(trials));
        for (std::int64_t i = 0; i < trials; ++i)
            t.push_back(det(rng.complex_normal_vector(omega.rows(), sigma_n2)));
        return t;
    }

    /// Threshold lambda as the empirical (1 - p_fa) quantile of H0 statistics.
    inline double calibrate_threshold(const CMatrix &omega, const DetectorConfig &config, Rng &rng)
    {
        config.validate();
        check_calibration_resolvable(config.calibration_trials, config.p_fa);
        const MaprtDetector det(omega, config.sigma_n2, config.sigma_rcs2);
        return empirical_upper_quantile(sample_h0_statistics(det, omega, config.sigma_n2, config.calibration_trials, rng),
                                        config.p_fa);
    }

    struct Interval95
    {
        double low = 0.0;
        double high = 1.0;
    };

    /// Wilson score interval for `successes` out of `n` (z = 1.96 by default).
    inline Interval95 wilson_interval(std::int64_t successes, std::int64_t n, double z = 1.959963984540054)
    {
        if (n <= 0)
            return {0.0, 1.0};
        const double nn = static_cast<double>(n);
        const double p = static_cast<double>(successes) / nn;
        const double z2 = z * z;
        const double denom = 1.0 + z2 / nn;
        const double center = (p + z2 / (2.0 * nn)) / denom;
        const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
        // the bounds are exact at the extremes; rounding would otherwise exclude p
        const double low = successes == 0 ? 0.0 : std::max(0.0, center - half);
        const double high = successes == n ? 1.0 : std::min(1.0, center + half);
        return {low, high};
    }

    struct PdEstimate
    {
        std::int64_t detections = 0;
        std::int64_t trials = 0;
        double pd = 0.0;
        Interval95 ci;
    };

    inline PdEstimate make_pd_estimate(std::int64_t detections, std::int64_t trials)
    {
        PdEstimate e;
        e.detections = detections;
        e.trials = trials;
        e.pd = trials > 0 ? static_cast<double>(detections) / static_cast<double>(trials) : 0.0;
        e.ci = wilson_interval(detections, trials);
        return e;
    }

    /// Fraction of `trials` H1 observations (fresh xi and noise each) declared H1.
    inline PdEstimate estimate_pd(const CMatrix &omega, const DetectorConfig &config, double threshold,
                                  std::int64_t trials, Rng &rng)
    {
        config.validate();
        if (trials < 1)
            throw std::invalid_argument("estimate_pd: trials must be >= 1");
        const MaprtDetector det(omega, config.sigma_n2, config.sigma_rcs2);
        std::int64_t hits = 0;
        for (std::int64_t i = 0; i < trials; ++i)
        {
            const auto obs = sample_sensing_received(omega, config.sigma_n2, config.sigma_rcs2, Hypothesis::h1, rng);
            if (detect(det(obs.y), threshold).decision)
                ++hits;
        }
        return make_pd_estimate(hits, trials);
    }
}
