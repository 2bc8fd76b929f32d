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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace otfs_isac
{
    using cdouble = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using RMatrix = Eigen::MatrixXd;
    using RVector = Eigen::VectorXd;
    using Index = Eigen::Index;

    inline constexpr double pi = 3.14159265358979323846;
    inline constexpr double speed_of_light = 299792458.0;
    inline constexpr cdouble imag_unit{0.0, 1.0};

    // Error taxonomy. Invalid inputs use std::invalid_argument directly.

    /// A constraint set (or a precoder nullspace) admits no solution.
    class InfeasibleError : public std::runtime_error
    {
    public:
        enum class Family
        {
            unspecified,
            qos,
            power_budget,
            precoder
        };

        explicit InfeasibleError(const std::string &what, Family family = Family::unspecified)
            : std::runtime_error(what), family_(family) {}

        Family family() const noexcept { return family_; }

    private:
        Family family_;
    };

    /// A linear program direction with unbounded objective.
    class UnboundedError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Numerical breakdown (loss of definiteness, non-finite values).
    class NumericalError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Bad configuration value. `min_feasible_pfa` is set when a false-alarm
    /// target cannot be resolved with the configured number of trials.
    class ConfigError : public std::runtime_error
    {
    public:
        explicit ConfigError(const std::string &what, double min_feasible_pfa = 0.0)
            : std::runtime_error(what), min_feasible_pfa_(min_feasible_pfa) {}

        double min_feasible_pfa() const noexcept { return min_feasible_pfa_; }

    private:
        double min_feasible_pfa_;
    };

    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
}
