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

#include "common.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace otfs_isac
{
    /// Seeded random source. One instance per consumer; never shared across threads.
    ///
    /// Independent streams are derived with `Rng::substream(seed, {tags...})`, which
    /// hashes the tag path so that e.g. (seed, drop 3, "frames") always yields the
    /// same sequence regardless of how many other streams were consumed before it.
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : engine_(seed) {}

        static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags)
        {
            std::uint64_t h = mix(seed ^ 0x6a09e667f3bcc909ULL);
            for (auto t : tags)
                h = mix(h ^ mix(t + 0x9e3779b97f4a7c15ULL));
            return Rng(h);
        }

        /// Derive a child stream from this one (consumes one draw).
        Rng split() { return Rng(mix(engine_())); }

        double uniform(double lo, double hi)
        {
            return std::uniform_real_distribution<double>(lo, hi)(engine_);
        }

        /// Uniform integer in [lo, hi].
        std::int64_t uniform_int(std::int64_t lo, std::int64_t hi)
        {
            return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
        }

        bool coin() { return (engine_() >> 63) != 0; }

        double normal() { return normal_(engine_); }

        /// Circularly-symmetric complex Gaussian CN(0, variance).
        cdouble complex_normal(double variance)
        {
            const double s = std::sqrt(0.5 * variance);
            const double re = normal_(engine_);
            const double im = normal_(engine_);
            return {s * re, s * im};
        }

        CVector complex_normal_vector(Index n, double variance)
        {
            CVector v(n);
            for (Index i = 0; i < n; ++i)
                v(i) = complex_normal(variance);
            return v;
        }

        std::mt19937_64 &engine() { return engine_; }

    private:
        // splitmix64 finalizer
        static std::uint64_t mix(std::uint64_t z)
        {
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            return z ^ (z >> 31);
        }

        std::mt19937_64 engine_;
        std::normal_distribution<double> normal_{0.0, 1.0};
    };

    /// Stream tags used by the simulation pipeline.
    namespace stream
    {
        inline constexpr std::uint64_t access_points = 1;
        inline constexpr std::uint64_t user_positions = 2;
        inline constexpr std::uint64_t ue_paths = 3;
        inline constexpr std::uint64_t frames = 4;
        inline constexpr std::uint64_t calibration = 5;
        inline constexpr std::uint64_t detection = 6;
        inline constexpr std::uint64_t ue_noise = 7;
    }
}
