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

// Scenario geometry and delay-Doppler channels.
//
// UE links are sums of P paths, each a cyclic delay Pi^m times a Doppler ramp
// Delta^n, with an explicit ULA phase per transmit antenna. The target link
// between transmit AP k and receive AP r is a single bistatic path.
//
// Column layout of an assembled UE channel H_u (MN x N_tx*L*MN): block
// (k, l) occupies columns [(k*L + l)*MN, (k*L + l + 1)*MN).

#include "otfs.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace otfs_isac
{
    struct Point2
    {
        double x = 0.0;
        double y = 0.0;
    };

    inline double distance(const Point2 &a, const Point2 &b) { return std::hypot(a.x - b.x, a.y - b.y); }

    /// Azimuth of the direction from `from` towards `to`.
    inline double azimuth(const Point2 &from, const Point2 &to) { return std::atan2(to.y - from.y, to.x - from.x); }

    struct Interval
    {
        double min = 0.0;
        double max = 0.0;
    };

    /// Inputs to scenario generation. All quantities in linear SI units.
    struct ScenarioConfig
    {
        double area_side = 500.0;                  // m
        Index num_tx_aps = 8;
        Index num_rx_aps = 2;
        Index num_ues = 2;
        Index antennas = 2;                        // L, per AP
        Index num_paths = 5;                       // P, per UE link
        double noise_power = 3.981071705534973e-13; // W, -94 dBm
        double rcs_variance = 0.01;                // m^2, -20 dBsm
        Interval delay_spread{2.08e-6, 10.41e-6};  // s
        Interval doppler_spread{0.0, 1880.0};      // Hz
        double target_doppler = 0.0;               // Hz, bistatic Doppler of the target echo
        double target_path_gain = 3.1622776601683795e-11; // linear, -105 dB
        FrameParams frame{};

        void validate() const
        {
            frame.validate();
            if (!(area_side > 0.0))
                throw std::invalid_argument("area_side must be > 0");
            if (num_tx_aps < 1 || num_rx_aps < 1 || num_ues < 1 || antennas < 1 || num_paths < 1)
                throw std::invalid_argument("AP, UE, antenna and path counts must be >= 1");
            if (!(noise_power > 0.0))
                throw std::invalid_argument("noise_power must be > 0");
            if (!(rcs_variance >= 0.0))
                throw std::invalid_argument("rcs_variance must be >= 0");
            if (!(target_path_gain > 0.0))
                throw std::invalid_argument("target_path_gain must be > 0");
            if (delay_spread.min < 0.0 || delay_spread.max < delay_spread.min)
                throw std::invalid_argument("delay_spread must satisfy 0 <= min <= max");
            if (doppler_spread.min < 0.0 || doppler_spread.max < doppler_spread.min)
                throw std::invalid_argument("doppler_spread must satisfy 0 <= min <= max");
        }
    };

    struct Scenario
    {
        double area_side = 500.0;
        std::vector<Point2> tx_ap_positions;
        std::vector<Point2> rx_ap_positions;
        std::vector<Point2> ue_positions;
        Point2 target_position;
        Index antennas = 2;
        double sigma_n2 = 0.0;
        double sigma_rcs2 = 0.0;
        Index num_paths = 5;
        Interval delay_spread;
        Interval doppler_spread;
        double target_doppler = 0.0;
        double target_path_gain = 1.0;
        FrameParams frame;

        Index num_tx() const { return static_cast<Index>(tx_ap_positions.size()); }
        Index num_rx() const { return static_cast<Index>(rx_ap_positions.size()); }
        Index num_ues() const { return static_cast<Index>(ue_positions.size()); }
    };

    /// Indices of the `n_rx` points closest to `target` (ties broken by index).
    inline std::vector<std::size_t> select_receive_aps(const std::vector<Point2> &aps, const Point2 &target, Index n_rx)
    {
        if (n_rx < 0 || static_cast<std::size_t>(n_rx) > aps.size())
            throw std::invalid_argument("select_receive_aps: requested " + std::to_string(n_rx) +
                                        " receive APs out of " + std::to_string(aps.size()));
        std::vector<std::size_t> order(aps.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b)
                         { return distance(aps[a], target) < distance(aps[b], target); });
        order.resize(static_cast<std::size_t>(n_rx));
        std::sort(order.begin(), order.end());
        return order;
    }

    /// APs and UEs uniform in the square, target at its center. The AP pool holds
    /// N_tx + N_rx points; the N_rx nearest to the target become receive APs.
    ///
    /// AP and UE coordinates come from two child streams of `rng`, each drawn
    /// sequentially, so growing a count only appends points.
    inline Scenario generate_scenario(const ScenarioConfig &config, Rng &rng)
    {
        config.validate();
        Rng ap_rng = rng.split();
        Rng ue_rng = rng.split();

        Scenario s;
        s.area_side = config.area_side;
        s.target_position = {config.area_side / 2.0, config.area_side / 2.0};
        s.antennas = config.antennas;
        s.sigma_n2 = config.noise_power;
        s.sigma_rcs2 = config.rcs_variance;
        s.num_paths = config.num_paths;
        s.delay_spread = config.delay_spread;
        s.doppler_spread = config.doppler_spread;
        s.target_doppler = config.target_doppler;
        s.target_path_gain = config.target_path_gain;
        s.frame = config.frame;

        std::vector<Point2> pool(static_cast<std::size_t>(config.num_tx_aps + config.num_rx_aps));
        for (auto &p : pool)
        {
            p.x = ap_rng.uniform(0.0, config.area_side);
            p.y = ap_rng.uniform(0.0, config.area_side);
        }
        const auto rx = select_receive_aps(pool, s.target_position, config.num_rx_aps);
        std::vector<bool> is_rx(pool.size(), false);
        for (auto i : rx)
        {
            is_rx[i] = true;
            s.rx_ap_positions.push_back(pool[i]);
        }
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (!is_rx[i])
                s.tx_ap_positions.push_back(pool[i]);

        s.ue_positions.resize(static_cast<std::size_t>(config.num_ues));
        for (auto &p : s.ue_positions)
        {
            p.x = ue_rng.uniform(0.0, config.area_side);
            p.y = ue_rng.uniform(0.0, config.area_side);
        }
        return s;
    }

    /// Large-scale gain, beta[dB] = -30.5 - 36.7 log10(d / 1 m).
    inline double path_loss(double distance_m)
    {
        if (!(distance_m > 0.0))
            throw std::invalid_argument("path_loss: distance must be > 0");
        return db_to_linear(-30.5 - 36.7 * std::log10(distance_m));
    }

    /// ULA response, entry l = exp(j pi l sin(azimuth) cos(elevation)), l = 0..L-1.
    inline CVector array_response(Index L, double azimuth_rad, double elevation_rad)
    {
        if (L < 1)
            throw std::invalid_argument("array_response: L must be >= 1");
        CVector a(L);
        const double phase = pi * std::sin(azimuth_rad) * std::cos(elevation_rad);
        for (Index l = 0; l < L; ++l)
            a(l) = std::polar(1.0, phase * static_cast<double>(l));
        return a;
    }

    struct DdPath
    {
        cdouble gain;
        Index delay_tap = 0;
        double doppler_tap = 0.0;
        double aod = 0.0; // rad
    };

    /// Integer delay taps spanned by a delay-spread interval at sample interval T_s.
    inline Interval delay_tap_range(const Scenario &s)
    {
        const double lo = std::round(s.delay_spread.min / s.frame.sample_interval);
        const double hi = std::round(s.delay_spread.max / s.frame.sample_interval);
        const double cap = static_cast<double>(s.frame.size() - 1);
        return {std::clamp(lo, 0.0, cap), std::clamp(hi, 0.0, cap)};
    }

    /// Draw the P paths of the link from transmit AP k to UE u.
    ///
    /// Path gains are CN(0, beta/P) with beta from the link distance (floored at
    /// the 1 m reference distance of the path-loss model). The same gain is used
    /// on every antenna of the AP; the array phase enters through the AoD.
    inline std::vector<DdPath> sample_ue_paths(const Scenario &s, Index u, Index k, Rng &rng)
    {
        if (u < 0 || u >= s.num_ues() || k < 0 || k >= s.num_tx())
            throw std::invalid_argument("sample_ue_paths: index out of range");
        const double d = std::max(1.0, distance(s.ue_positions[static_cast<std::size_t>(u)],
                                                s.tx_ap_positions[static_cast<std::size_t>(k)]));
        const double beta = path_loss(d);
        const Interval taps = delay_tap_range(s);
        const double doppler_scale = static_cast<double>(s.frame.size()) * s.frame.sample_interval;

        std::vector<DdPath> paths(static_cast<std::size_t>(s.num_paths));
        for (auto &p : paths)
        {
            p.delay_tap = static_cast<Index>(rng.uniform_int(static_cast<std::int64_t>(taps.min),
                                                             static_cast<std::int64_t>(taps.max)));
            double nu = rng.uniform(s.doppler_spread.min, s.doppler_spread.max);
            if (rng.coin())
                nu = -nu;
            p.doppler_tap = nu * doppler_scale;
            p.aod = rng.uniform(-pi, pi);
            p.gain = rng.complex_normal(beta / static_cast<double>(s.num_paths));
        }
        return paths;
    }

    struct UeChannel
    {
        std::vector<std::vector<DdPath>> paths; // one list per transmit AP
        CMatrix assembled;                      // MN x (N_tx * L * MN)
        Index antennas = 1;
        Index frame_size = 1;

        Index num_tx() const { return static_cast<Index>(paths.size()); }

        /// H_{u,k}^{(l)}
        auto block(Index k, Index l) const
        {
            return assembled.middleCols((k * antennas + l) * frame_size, frame_size);
        }

        /// H_{u,k} = [H_{u,k}^{(1)}, ..., H_{u,k}^{(L)}]
        auto ap_block(Index k) const
        {
            return assembled.middleCols(k * antennas * frame_size, antennas * frame_size);
        }
    };

    /// Accumulate sum_p g_p e^{j pi l sin(aod_p)} Pi^{m_p} Delta^{n_p} into `out`.
    template <typename Block>
    void accumulate_dd_paths(Block &&out, const std::vector<DdPath> &paths, Index antenna)
    {
        const Index MN = out.rows();
        for (const auto &p : paths)
        {
            const cdouble coeff = p.gain * std::polar(1.0, pi * static_cast<double>(antenna) * std::sin(p.aod));
            const CVector ramp = doppler_phase_ramp(MN, p.doppler_tap);
            const Index shift = ((p.delay_tap % MN) + MN) % MN;
            for (Index j = 0; j < MN; ++j)
                out((j + shift) % MN, j) += coeff * ramp(j);
        }
    }

    inline UeChannel build_ue_channel(const std::vector<std::vector<DdPath>> &paths_per_ap, const Scenario &s, Index u)
    {
        if (u < 0 || u >= s.num_ues())
            throw std::invalid_argument("build_ue_channel: UE index out of range");
        if (static_cast<Index>(paths_per_ap.size()) != s.num_tx())
            throw std::invalid_argument("build_ue_channel: need one path list per transmit AP");
        const Index MN = s.frame.size();
        const Index L = s.antennas;
        for (const auto &list : paths_per_ap)
            for (const auto &p : list)
                if (p.delay_tap < 0 || p.delay_tap >= MN)
                    throw std::invalid_argument("build_ue_channel: delay tap outside [0, MN)");

        UeChannel ch;
        ch.paths = paths_per_ap;
        ch.antennas = L;
        ch.frame_size = MN;
        ch.assembled = CMatrix::Zero(MN, s.num_tx() * L * MN);
        for (Index k = 0; k < s.num_tx(); ++k)
            for (Index l = 0; l < L; ++l)
                accumulate_dd_paths(ch.assembled.middleCols((k * L + l) * MN, MN),
                                    paths_per_ap[static_cast<std::size_t>(k)], l);
        return ch;
    }

    struct TargetLink
    {
        CVector tx_steering; // a(phi_k, theta_k), length L
        CVector rx_steering; // a(phi_r, theta_r), length L
        Index delay_tap = 0;
        double doppler_tap = 0.0;
        CMatrix dd_matrix;   // Pi^m Delta^n, unitary
        double gain = 1.0;   // deterministic power gain of the reflected path
    };

    /// Bistatic single-path link transmit AP k -> target -> receive AP r.
    ///
    /// The delay is the bistatic path length over c, rounded to the nearest tap
    /// and wrapped mod MN. The random reflection coefficient (RCS) is not part of
    /// the link; `gain` scales the echo power deterministically.
    inline TargetLink build_target_link(const Scenario &s, Index r, Index k)
    {
        if (r < 0 || r >= s.num_rx() || k < 0 || k >= s.num_tx())
            throw std::invalid_argument("build_target_link: index out of range");
        const Point2 &tx = s.tx_ap_positions[static_cast<std::size_t>(k)];
        const Point2 &rx = s.rx_ap_positions[static_cast<std::size_t>(r)];
        const Point2 &t = s.target_position;
        const Index MN = s.frame.size();

        TargetLink link;
        link.tx_steering = array_response(s.antennas, azimuth(tx, t), 0.0);
        link.rx_steering = array_response(s.antennas, azimuth(rx, t), 0.0);
        const double delay = (distance(tx, t) + distance(t, rx)) / speed_of_light;
        const auto taps = static_cast<Index>(std::llround(delay / s.frame.sample_interval));
        link.delay_tap = ((taps % MN) + MN) % MN;
        link.doppler_tap = s.target_doppler * static_cast<double>(MN) * s.frame.sample_interval;
        link.dd_matrix = delay_shift_power(MN, link.delay_tap) * doppler_shift_power(MN, link.doppler_tap);
        link.gain = s.target_path_gain;
        return link;
    }

    /// All target links, indexed [r][k].
    inline std::vector<std::vector<TargetLink>> build_target_links(const Scenario &s)
    {
        std::vector<std::vector<TargetLink>> links(static_cast<std::size_t>(s.num_rx()));
        for (Index r = 0; r < s.num_rx(); ++r)
            for (Index k = 0; k < s.num_tx(); ++k)
                links[static_cast<std::size_t>(r)].push_back(build_target_link(s, r, k));
        return links;
    }

    /// Transmit-AP steering vectors towards the target, one per transmit AP.
    inline std::vector<CVector> tx_target_steering(const Scenario &s)
    {
        std::vector<CVector> out;
        for (const auto &p : s.tx_ap_positions)
            out.push_back(array_response(s.antennas, azimuth(p, s.target_position), 0.0));
        return out;
    }
}
