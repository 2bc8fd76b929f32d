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

// OTFS delay-Doppler <-> time-domain maps and the cyclic delay / Doppler
// shift operators used by the channel model.
//
// Conventions: vec() is column-major, so a DD frame V (M x N) maps to
// v = vec(V) with v[m + M*n] = V(m, n). All DFT matrices are unitary.

#include "common.hpp"
#include "random.hpp"

namespace otfs_isac
{
    struct FrameParams
    {
        Index M = 16;               // delay bins (subcarriers)
        Index N = 8;                // Doppler bins (symbols)
        double sample_interval = 2.08e-6; // T_s [s]
        double carrier_frequency = 1.9e9; // f_c [Hz]

        Index size() const { return M * N; }

        void validate() const
        {
            if (M < 1 || N < 1)
                throw std::invalid_argument("FrameParams: M and N must be >= 1");
            if (!(sample_interval > 0.0) || !(carrier_frequency > 0.0))
                throw std::invalid_argument("FrameParams: sample interval and carrier frequency must be > 0");
        }
    };

    /// DD-domain symbol matrix (M x N).
    struct DdFrame
    {
        CMatrix values;

        CVector vec() const { return values.reshaped(); }
    };

    /// Unitary DFT matrix, entry (r,c) = exp(-j 2 pi r c / n) / sqrt(n).
    inline CMatrix dft_matrix(Index n)
    {
        if (n < 1)
            throw std::invalid_argument("dft_matrix: n must be >= 1");
        CMatrix F(n, n);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (Index r = 0; r < n; ++r)
            for (Index c = 0; c < n; ++c)
            {
                // reduce r*c mod n first to keep the phase argument small
                const double k = static_cast<double>((r * c) % n);
                F(r, c) = std::polar(scale, -2.0 * pi * k / static_cast<double>(n));
            }
        return F;
    }

    namespace detail
    {
        inline void check_frame_length(const CVector &v, const FrameParams &params, const char *who)
        {
            if (v.size() != params.size())
                throw std::invalid_argument(std::string(who) + ": vector length " + std::to_string(v.size()) +
                                            " does not match M*N = " + std::to_string(params.size()));
        }
    }

    /// x = (F_N^H kron I_M) v, i.e. vec(V F_N^H).
    inline CVector dd_to_time(const CVector &v, const FrameParams &params)
    {
        detail::check_frame_length(v, params, "dd_to_time");
        const CMatrix FN = dft_matrix(params.N);
        const CMatrix V = v.reshaped(params.M, params.N);
        const CMatrix X = V * FN.adjoint();
        return X.reshaped();
    }

    /// Inverse of dd_to_time: (F_N kron I_M) x.
    inline CVector time_to_dd(const CVector &x, const FrameParams &params)
    {
        detail::check_frame_length(x, params, "time_to_dd");
        const CMatrix FN = dft_matrix(params.N);
        const CMatrix X = x.reshaped(params.M, params.N);
        const CMatrix V = X * FN.transpose(); // (F_N kron I) vec(X) = vec(X F_N^T)
        return V.reshaped();
    }

    /// Pi^m with Pi = circ{[0,1,0,...]^T}: forward cyclic shift, Pi e_i = e_{i+1}.
    inline CMatrix delay_shift_power(Index size, Index m)
    {
        if (size < 1)
            throw std::invalid_argument("delay_shift_power: size must be >= 1");
        const Index shift = ((m % size) + size) % size;
        CMatrix P = CMatrix::Zero(size, size);
        for (Index j = 0; j < size; ++j)
            P((j + shift) % size, j) = 1.0;
        return P;
    }

    /// Phase ramp exp(j 2 pi k n / size), k = 0..size-1 (the diagonal of Delta^n).
    inline CVector doppler_phase_ramp(Index size, double n)
    {
        CVector d(size);
        for (Index k = 0; k < size; ++k)
        {
            // fmod keeps the argument in [0, 1) turns for large k*n
            const double turns = std::fmod(static_cast<double>(k) * n, static_cast<double>(size)) / static_cast<double>(size);
            d(k) = std::polar(1.0, 2.0 * pi * turns);
        }
        return d;
    }

    /// Delta^n = diag{exp(j 2 pi k n / size)}. n may be fractional.
    inline CMatrix doppler_shift_power(Index size, double n)
    {
        if (size < 1)
            throw std::invalid_argument("doppler_shift_power: size must be >= 1");
        return doppler_phase_ramp(size, n).asDiagonal();
    }

    /// Unit-modulus QPSK frame, (+-1 +- j)/sqrt(2) per entry.
    inline DdFrame generate_dd_frame(const FrameParams &params, Rng &rng)
    {
        const double a = 1.0 / std::sqrt(2.0);
        DdFrame f{CMatrix(params.M, params.N)};
        for (Index n = 0; n < params.N; ++n)
            for (Index m = 0; m < params.M; ++m)
            {
                const double re = rng.coin() ? a : -a;
                const double im = rng.coin() ? a : -a;
                f.values(m, n) = {re, im};
            }
        return f;
    }

    /// Time-domain transmit vector of a freshly drawn QPSK frame.
    inline CVector generate_time_frame(const FrameParams &params, Rng &rng)
    {
        return dd_to_time(generate_dd_frame(params, rng).vec(), params);
    }
}
