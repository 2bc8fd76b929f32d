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

// Small scenarios shared by the unit tests.

#include <otfs_isac/otfs_isac.hpp>

namespace fixture
{
    using namespace otfs_isac;

    inline ScenarioConfig small_config(Index num_ues = 2)
    {
        ScenarioConfig c;
        c.frame.M = 4;
        c.frame.N = 2;
        c.num_tx_aps = 4;
        c.num_rx_aps = 2;
        c.num_ues = num_ues;
        c.antennas = 2;
        c.num_paths = 3;
        return c;
    }

    struct SmallDrop
    {
        Scenario scenario;
        std::vector<UeChannel> channels;
        PrecoderSet precoders;
        FrameSet frames;
        std::vector<std::vector<TargetLink>> links;
    };

    inline SmallDrop make_drop(const ScenarioConfig &config, std::uint64_t seed)
    {
        SmallDrop d;
        Rng rng(seed);
        d.scenario = generate_scenario(config, rng);
        for (Index u = 0; u < d.scenario.num_ues(); ++u)
        {
            std::vector<std::vector<DdPath>> paths;
            for (Index k = 0; k < d.scenario.num_tx(); ++k)
                paths.push_back(sample_ue_paths(d.scenario, u, k, rng));
            d.channels.push_back(build_ue_channel(paths, d.scenario, u));
        }
        d.precoders = build_precoders(d.channels, tx_target_steering(d.scenario),
                                      d.scenario.sigma_n2 * static_cast<double>(d.scenario.num_ues()));
        d.frames = generate_frames(d.scenario.frame, d.scenario.num_ues(), rng);
        d.links = build_target_links(d.scenario);
        return d;
    }

    inline RVector random_eta(Index n, Rng &rng)
    {
        RVector e(n);
        for (Index i = 0; i < n; ++i)
            e(i) = rng.uniform(0.0, 1.0);
        return e;
    }
}

namespace fixture
{
    /// Random SOCP over [0, 1]^n with a strictly feasible point and an
    /// objective of unit l1 norm. Box rows are one-dimensional cones.
    inline SocpProblem random_box_socp(Index n, Rng &rng)
    {
        SocpProblem p;
        RVector xs(n);
        for (Index j = 0; j < n; ++j)
            xs(j) = rng.uniform(0.2, 0.8);
        const Index m = rng.uniform_int(1, 4);
        for (Index i = 0; i < m; ++i)
        {
            SocConstraint c;
            const Index rows = rng.uniform_int(1, 3);
            c.A.resize(rows, n);
            for (Index r = 0; r < rows; ++r)
                for (Index j = 0; j < n; ++j)
                    c.A(r, j) = rng.normal();
            c.b.resize(rows);
            for (Index r = 0; r < rows; ++r)
                c.b(r) = rng.normal();
            c.c.resize(n);
            for (Index j = 0; j < n; ++j)
                c.c(j) = rng.normal();
            c.d = 0.0;
            c.d = -c.margin(xs) + rng.uniform(0.05, 0.5);
            p.constraints.push_back(c);
        }
        for (Index j = 0; j < n; ++j)
        {
            SocConstraint box; // x_j <= 1
            box.A = RMatrix(0, n);
            box.b = RVector(0);
            box.c = -RVector::Unit(n, j);
            box.d = 1.0;
            p.constraints.push_back(box);
        }
        p.objective.resize(n);
        for (Index j = 0; j < n; ++j)
            p.objective(j) = rng.normal();
        p.objective /= p.objective.lpNorm<1>();
        return p;
    }
}
