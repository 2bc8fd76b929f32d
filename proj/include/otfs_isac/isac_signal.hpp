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

// Transmit signals, UE link quality and the sensing observation model.
//
// Frames are time-domain vectors x_0..x_{N_ue} (x_0 the sensing symbol).
// `eta` is the square-root power vector: eta(u) multiplies W_u^H x_u, and
// eta(u)^2 is the power coefficient.

#include "precoding.hpp"

#include <vector>

namespace otfs_isac
{
    /// Square-root power coefficients, entry 0 sensing, entries 1..N_ue UEs.
    using SqrtPowerVector = RVector;

    using FrameSet = std::vector<CVector>;

    enum class Hypothesis
    {
        h0, // target absent
        h1  // target present
    };

    namespace detail
    {
        inline void check_eta(const SqrtPowerVector &eta, Index expected, const char *who)
        {
            if (eta.size() != expected)
                throw std::invalid_argument(std::string(who) + ": eta has length " + std::to_string(eta.size()) +
                                            ", expected " + std::to_string(expected));
            if (!eta.allFinite() || (eta.array() < 0.0).any())
                throw std::invalid_argument(std::string(who) + ": eta entries must be finite and >= 0");
        }

        inline void check_frames(const FrameSet &frames, const PrecoderSet &p, const char *who)
        {
            if (static_cast<Index>(frames.size()) != p.num_ues() + 1)
                throw std::invalid_argument(std::string(who) + ": need N_ue + 1 frames");
            for (const auto &x : frames)
                if (x.size() != p.frame_size)
                    throw std::invalid_argument(std::string(who) + ": frame length does not match MN");
        }
    }

    /// Draw x_0..x_{N_ue} as independent QPSK OTFS frames.
    inline FrameSet generate_frames(const FrameParams &params, Index num_ues, Rng &rng)
    {
        FrameSet f;
        for (Index u = 0; u <= num_ues; ++u)
            f.push_back(generate_time_frame(params, rng));
        return f;
    }

    /// d_k = sum_u eta_u W_{u,k}^H x_u, length L*MN.
    inline CVector assemble_transmit(const PrecoderSet &p, Index k, const FrameSet &frames, const SqrtPowerVector &eta)
    {
        detail::check_frames(frames, p, "assemble_transmit");
        detail::check_eta(eta, p.num_ues() + 1, "assemble_transmit");
        CVector d = CVector::Zero(p.antennas * p.frame_size);
        for (Index u = 0; u <= p.num_ues(); ++u)
            if (eta(u) != 0.0)
                d.noalias() += eta(u) * (p.slice(u, k).adjoint() * frames[static_cast<std::size_t>(u)]);
        return d;
    }

    /// Same signal via the stacked form W_k^H D eta with W_k = [W_{0,k}; ...; W_{N_ue,k}]
    /// and D = blkdiag(x_0, ..., x_{N_ue}).
    inline CVector assemble_transmit_block_form(const PrecoderSet &p, Index k, const FrameSet &frames,
                                                const SqrtPowerVector &eta)
    {
        detail::check_frames(frames, p, "assemble_transmit_block_form");
        detail::check_eta(eta, p.num_ues() + 1, "assemble_transmit_block_form");
        const Index U = p.num_ues() + 1;
        const Index MN = p.frame_size;
        CMatrix Wk(U * MN, p.antennas * MN);
        CMatrix D = CMatrix::Zero(U * MN, U);
        for (Index u = 0; u < U; ++u)
        {
            Wk.middleRows(u * MN, MN) = p.slice(u, k);
            D.block(u * MN, u, MN, 1) = frames[static_cast<std::size_t>(u)];
        }
        return Wk.adjoint() * (D * eta.cast<cdouble>());
    }

    /// All d_k, k = 0..N_tx-1.
    inline std::vector<CVector> assemble_all_transmit(const PrecoderSet &p, const FrameSet &frames, const SqrtPowerVector &eta)
    {
        std::vector<CVector> d;
        for (Index k = 0; k < p.num_tx; ++k)
            d.push_back(assemble_transmit(p, k, frames, eta));
        return d;
    }

    /// ||W_{u,k}||_F for u = 0..N_ue (the diagonal of G_k).
    inline RVector slice_norms(const PrecoderSet &p, Index k)
    {
        RVector g(p.num_ues() + 1);
        for (Index u = 0; u <= p.num_ues(); ++u)
            g(u) = p.slice(u, k).norm();
        return g;
    }

    /// P_k = sum_u eta_u^2 ||W_{u,k}||_F^2 (expected frame energy of d_k).
    inline double ap_power(const PrecoderSet &p, Index k, const SqrtPowerVector &eta)
    {
        detail::check_eta(eta, p.num_ues() + 1, "ap_power");
        return (slice_norms(p, k).array() * eta.array()).square().sum();
    }

    struct UeReceived
    {
        CVector desired;
        CVector sensing_interference;
        CVector inter_user;
        CVector noise;
        CVector total;
    };

    /// Received frame of UE `ue` (0-based; its precoder index is ue + 1).
    inline UeReceived ue_received(const UeChannel &channel, Index ue, const PrecoderSet &p, const FrameSet &frames,
                                  const SqrtPowerVector &eta, double sigma_n2, Rng &rng)
    {
        detail::check_frames(frames, p, "ue_received");
        detail::check_eta(eta, p.num_ues() + 1, "ue_received");
        if (ue < 0 || ue >= p.num_ues())
            throw std::invalid_argument("ue_received: UE index out of range");
        const CMatrix &H = channel.assembled;
        const auto term = [&](Index v) -> CVector
        { return eta(v) * (H * (p.full(v).adjoint() * frames[static_cast<std::size_t>(v)])); };

        UeReceived r;
        r.desired = term(ue + 1);
        r.sensing_interference = term(0);
        r.inter_user = CVector::Zero(H.rows());
        for (Index v = 1; v <= p.num_ues(); ++v)
            if (v != ue + 1)
                r.inter_user += term(v);
        r.noise = rng.complex_normal_vector(H.rows(), sigma_n2);
        r.total = r.desired + r.sensing_interference + r.inter_user + r.noise;
        return r;
    }

    struct SinrTerms
    {
        RVector ds;  // |DS_u|, per UE
        RMatrix iui; // |IUI_{u,v}|, zero diagonal
        RVector si;  // |SI_u|
    };

    inline SinrTerms sinr_terms(const std::vector<UeChannel> &channels, const PrecoderSet &p, const FrameSet &frames)
    {
        detail::check_frames(frames, p, "sinr_terms");
        const Index U = p.num_ues();
        if (static_cast<Index>(channels.size()) != U)
            throw std::invalid_argument("sinr_terms: channel count does not match precoders");

        std::vector<CVector> s; // W_v^H x_v
        for (Index v = 0; v <= U; ++v)
            s.push_back(p.full(v).adjoint() * frames[static_cast<std::size_t>(v)]);

        SinrTerms t{RVector(U), RMatrix::Zero(U, U), RVector(U)};
        for (Index u = 0; u < U; ++u)
        {
            const CMatrix &H = channels[static_cast<std::size_t>(u)].assembled;
            t.si(u) = (H * s[0]).norm();
            for (Index v = 0; v < U; ++v)
            {
                const double n = (H * s[static_cast<std::size_t>(v + 1)]).norm();
                if (u == v)
                    t.ds(u) = n;
                else
                    t.iui(u, v) = n;
            }
        }
        return t;
    }

    /// SINR_u = eta_u^2 DS_u^2 / (sum_{v!=u} eta_v^2 IUI_uv^2 + eta_0^2 SI_u^2 + MN sigma_n^2).
    inline RVector ue_sinr(const SinrTerms &t, const SqrtPowerVector &eta, double sigma_n2, Index MN)
    {
        const Index U = t.ds.size();
        detail::check_eta(eta, U + 1, "ue_sinr");
        RVector sinr(U);
        for (Index u = 0; u < U; ++u)
        {
            double interference = eta(0) * eta(0) * t.si(u) * t.si(u) + static_cast<double>(MN) * sigma_n2;
            for (Index v = 0; v < U; ++v)
                if (v != u)
                    interference += eta(v + 1) * eta(v + 1) * t.iui(u, v) * t.iui(u, v);
            sinr(u) = eta(u + 1) * eta(u + 1) * t.ds(u) * t.ds(u) / interference;
        }
        return sinr;
    }

    struct SensingObservation
    {
        CMatrix omega; // (N_rx*L*MN) x (N_tx*N_rx), block diagonal
        CVector xi;    // length N_tx*N_rx, index r*N_tx + k
        CVector y;     // length N_rx*L*MN
    };

    /// Echo of d_k through link (r, k) without the reflection coefficient:
    /// sqrt(gain) (a_r a_k^T kron H_rk) d_k.
    inline CVector echo_column(const TargetLink &link, const CVector &d_k)
    {
        const Index L = link.tx_steering.size();
        const Index MN = link.dd_matrix.rows();
        if (d_k.size() != L * MN || link.rx_steering.size() != L)
            throw std::invalid_argument("echo_column: dimension mismatch");
        // (a_k^T kron I) d_k, then H_rk
        CVector combined = CVector::Zero(MN);
        for (Index l = 0; l < L; ++l)
            combined += link.tx_steering(l) * d_k.segment(l * MN, MN);
        const CVector h = std::sqrt(link.gain) * (link.dd_matrix * combined);
        CVector out(L * MN);
        for (Index l = 0; l < L; ++l)
            out.segment(l * MN, MN) = link.rx_steering(l) * h;
        return out;
    }

    /// Omega = blkdiag(Omega_1, ..., Omega_{N_rx}), Omega_r = [omega_{r,1}, ..., omega_{r,N_tx}].
    inline CMatrix build_omega(const std::vector<std::vector<TargetLink>> &links, const std::vector<CVector> &d_all)
    {
        const Index Nrx = static_cast<Index>(links.size());
        const Index Ntx = static_cast<Index>(d_all.size());
        if (Nrx == 0 || Ntx == 0)
            throw std::invalid_argument("build_omega: need at least one transmit and one receive AP");
        const Index L = links.front().front().tx_steering.size();
        const Index MN = links.front().front().dd_matrix.rows();
        CMatrix omega = CMatrix::Zero(Nrx * L * MN, Ntx * Nrx);
        for (Index r = 0; r < Nrx; ++r)
        {
            if (static_cast<Index>(links[static_cast<std::size_t>(r)].size()) != Ntx)
                throw std::invalid_argument("build_omega: link table does not match transmit AP count");
            for (Index k = 0; k < Ntx; ++k)
                omega.block(r * L * MN, r * Ntx + k, L * MN, 1) =
                    echo_column(links[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)],
                                d_all[static_cast<std::size_t>(k)]);
        }
        return omega;
    }

    /// y = Omega xi + n under H1, y = n under H0.
    inline SensingObservation sample_sensing_received(const CMatrix &omega, double sigma_n2, double sigma_rcs2,
                                                      Hypothesis hypothesis, Rng &rng)
    {
        SensingObservation obs;
        obs.omega = omega;
        if (hypothesis == Hypothesis::h1)
        {
            obs.xi = rng.complex_normal_vector(omega.cols(), sigma_rcs2);
            obs.y = omega * obs.xi;
        }
        else
        {
            obs.xi = CVector::Zero(omega.cols());
            obs.y = CVector::Zero(omega.rows());
        }
        obs.y += rng.complex_normal_vector(omega.rows(), sigma_n2);
        return obs;
    }

    /// Psi_{uv} = sigma_rcs^2 sum_{r,k} gain_rk ||a_r||^2 s_{u,k}^H s_{v,k},
    /// s_{u,k} = (a_k^T kron I_MN) W_{u,k}^H x_u.
    ///
    /// Uses unitarity of the link DD matrices, so that
    /// eta^T Psi eta = E ||Omega xi||^2 for real eta.
    inline CMatrix psi_matrix(const PrecoderSet &p, const FrameSet &frames,
                              const std::vector<std::vector<TargetLink>> &links, double sigma_rcs2)
    {
        detail::check_frames(frames, p, "psi_matrix");
        const Index U = p.num_ues() + 1;
        const Index MN = p.frame_size;
        const Index L = p.antennas;
        CMatrix psi = CMatrix::Zero(U, U);
        for (Index k = 0; k < p.num_tx; ++k)
        {
            double weight = 0.0;
            for (const auto &row : links)
            {
                const auto &link = row.at(static_cast<std::size_t>(k));
                weight += link.gain * link.rx_steering.squaredNorm();
            }
            const CVector &ak = links.front().at(static_cast<std::size_t>(k)).tx_steering;
            CMatrix S(MN, U);
            for (Index u = 0; u < U; ++u)
            {
                const CVector w = p.slice(u, k).adjoint() * frames[static_cast<std::size_t>(u)];
                CVector s = CVector::Zero(MN);
                for (Index l = 0; l < L; ++l)
                    s += ak(l) * w.segment(l * MN, MN);
                S.col(u) = s;
            }
            psi.noalias() += (sigma_rcs2 * weight) * (S.adjoint() * S);
        }
        return psi;
    }

    /// eta^T Psi eta / (L MN N_rx sigma_n^2).
    inline double sensing_snr(const CMatrix &psi, const SqrtPowerVector &eta, Index L, Index MN, Index num_rx, double sigma_n2)
    {
        if (psi.rows() != eta.size() || psi.cols() != eta.size())
            throw std::invalid_argument("sensing_snr: Psi and eta dimensions differ");
        const cdouble q = eta.cast<cdouble>().dot(psi * eta.cast<cdouble>());
        return q.real() / (static_cast<double>(L * MN * num_rx) * sigma_n2);
    }
}
