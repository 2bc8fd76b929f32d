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

// RZF communication precoders and the nullspace sensing precoder.
//
// Precoder index 0 is the sensing precoder W_0; index u = 1..N_ue is the RZF
// precoder of UE u (whose channel is channels[u-1]). Every precoder is
// MN x (N_tx*L*MN) with unit Frobenius norm.

#include "channel.hpp"

#include <limits>
#include <vector>

namespace otfs_isac
{
    struct PrecoderSet
    {
        CMatrix sense;             // W_0
        std::vector<CMatrix> comm; // W_1 .. W_{N_ue}
        double psi_reg = 0.0;
        Index num_tx = 1;
        Index antennas = 1;
        Index frame_size = 1;

        Index num_ues() const { return static_cast<Index>(comm.size()); }

        /// Full precoder W_u, u = 0..N_ue.
        const CMatrix &full(Index u) const
        {
            if (u < 0 || u > num_ues())
                throw std::invalid_argument("PrecoderSet: precoder index out of range");
            return u == 0 ? sense : comm[static_cast<std::size_t>(u - 1)];
        }

        /// Per-AP slice W_{u,k} (MN x L*MN).
        auto slice(Index u, Index k) const
        {
            if (k < 0 || k >= num_tx)
                throw std::invalid_argument("PrecoderSet: AP index out of range");
            return full(u).middleCols(k * antennas * frame_size, antennas * frame_size);
        }
    };

    namespace detail
    {
        inline void check_channels(const std::vector<UeChannel> &channels, const char *who)
        {
            if (channels.empty())
                throw std::invalid_argument(std::string(who) + ": no UE channels");
            const auto &ref = channels.front().assembled;
            for (const auto &ch : channels)
            {
                if (ch.assembled.rows() != ref.rows() || ch.assembled.cols() != ref.cols())
                    throw std::invalid_argument(std::string(who) + ": UE channels differ in shape");
                if (!ch.assembled.allFinite())
                    throw std::invalid_argument(std::string(who) + ": non-finite channel entries");
            }
        }
    }

    /// W_u = Z^{-1} H_u / ||Z^{-1} H_u||_F with Z = sum_v H_v H_v^H + psi I.
    inline std::vector<CMatrix> rzf_precoders(const std::vector<UeChannel> &channels, double psi_reg)
    {
        if (!(psi_reg > 0.0) || !std::isfinite(psi_reg))
            throw std::invalid_argument("rzf_precoders: psi_reg must be finite and > 0");
        detail::check_channels(channels, "rzf_precoders");
        const Index MN = channels.front().assembled.rows();

        CMatrix Z = psi_reg * CMatrix::Identity(MN, MN);
        for (const auto &ch : channels)
            Z.selfadjointView<Eigen::Lower>().rankUpdate(ch.assembled);
        Eigen::LLT<CMatrix> llt(Z.selfadjointView<Eigen::Lower>());
        if (llt.info() != Eigen::Success)
            throw NumericalError("rzf_precoders: regularized Gram matrix is not positive definite");

        std::vector<CMatrix> W;
        W.reserve(channels.size());
        for (const auto &ch : channels)
        {
            CMatrix X = llt.solve(ch.assembled);
            const double n = X.norm();
            if (!(n > 0.0))
                throw NumericalError("rzf_precoders: zero precoder (all-zero channel)");
            W.push_back(X / n);
        }
        return W;
    }

    /// Stacked steering a = [a_1; ...; a_{N_tx}] Kronecker I_MN, (N_tx*L*MN) x MN.
    inline CMatrix steered_identity(const std::vector<CVector> &steering, Index MN)
    {
        const Index L = steering.empty() ? 0 : steering.front().size();
        CMatrix B = CMatrix::Zero(static_cast<Index>(steering.size()) * L * MN, MN);
        for (std::size_t k = 0; k < steering.size(); ++k)
        {
            if (steering[k].size() != L)
                throw std::invalid_argument("steered_identity: steering vectors differ in length");
            for (Index l = 0; l < L; ++l)
                for (Index i = 0; i < MN; ++i)
                    B((static_cast<Index>(k) * L + l) * MN + i, i) = steering[k](l);
        }
        return B;
    }

    /// Orthonormal basis of the joint row space of all UE channels, as columns.
    ///
    /// Column-pivoted QR of H_s^H; diagonal entries of R below
    /// max(rows, cols) * eps * |R_00| are treated as zero.
    inline CMatrix joint_row_space_basis(const std::vector<UeChannel> &channels)
    {
        detail::check_channels(channels, "joint_row_space_basis");
        const Index MN = channels.front().assembled.rows();
        const Index D = channels.front().assembled.cols();
        CMatrix HsH(D, MN * static_cast<Index>(channels.size()));
        for (std::size_t u = 0; u < channels.size(); ++u)
            HsH.middleCols(static_cast<Index>(u) * MN, MN) = channels[u].assembled.adjoint();

        Eigen::ColPivHouseholderQR<CMatrix> qr(HsH);
        // rank() keeps |R_ii| > threshold * maxPivot
        qr.setThreshold(static_cast<double>(std::max(HsH.rows(), HsH.cols())) * std::numeric_limits<double>::epsilon());
        const Index rank = qr.rank();
        CMatrix Q = qr.householderQ() * CMatrix::Identity(D, rank);
        return Q;
    }

    /// Orthogonal projector onto the joint right-nullspace of all UE channels.
    inline CMatrix joint_nullspace_projector(const std::vector<UeChannel> &channels)
    {
        const CMatrix Q = joint_row_space_basis(channels);
        return CMatrix::Identity(Q.rows(), Q.rows()) - Q * Q.adjoint();
    }

    /// W_0 with W_0^H = Proj (a kron I_MN), normalized to unit Frobenius norm.
    inline CMatrix nullspace_sensing_precoder(const std::vector<UeChannel> &channels, const std::vector<CVector> &steering)
    {
        detail::check_channels(channels, "nullspace_sensing_precoder");
        const Index MN = channels.front().assembled.rows();
        const Index D = channels.front().assembled.cols();
        const Index rows = MN * static_cast<Index>(channels.size());
        if (rows >= D)
            throw InfeasibleError("nullspace_sensing_precoder: " + std::to_string(rows) + " stacked UE rows leave no "
                                  "nullspace in " + std::to_string(D) + " transmit dimensions",
                                  InfeasibleError::Family::precoder);
        const CMatrix B = steered_identity(steering, MN);
        if (B.rows() != D)
            throw std::invalid_argument("nullspace_sensing_precoder: steering does not match channel width");

        const CMatrix Q = joint_row_space_basis(channels);
        CMatrix W0H = B - Q * (Q.adjoint() * B);
        const double n = W0H.norm();
        if (!(n > 0.0))
            throw InfeasibleError("nullspace_sensing_precoder: steered signal lies in the UE row space",
                                  InfeasibleError::Family::precoder);
        return W0H.adjoint() / n;
    }

    /// Column slices [k*L*MN, (k+1)*L*MN) of a full-width precoder.
    inline std::vector<CMatrix> slice_per_ap(const CMatrix &W, Index num_tx, Index L)
    {
        if (num_tx < 1 || L < 1)
            throw std::invalid_argument("slice_per_ap: counts must be >= 1");
        if (W.cols() % (num_tx * L) != 0 || W.cols() / (num_tx * L) != W.rows())
            throw std::invalid_argument("slice_per_ap: width " + std::to_string(W.cols()) +
                                        " is not N_tx*L*MN for MN = " + std::to_string(W.rows()));
        const Index w = L * W.rows();
        std::vector<CMatrix> out;
        for (Index k = 0; k < num_tx; ++k)
            out.push_back(W.middleCols(k * w, w));
        return out;
    }

    /// RZF and nullspace precoders for one drop.
    inline PrecoderSet build_precoders(const std::vector<UeChannel> &channels, const std::vector<CVector> &steering,
                                       double psi_reg)
    {
        PrecoderSet p;
        p.comm = rzf_precoders(channels, psi_reg);
        p.sense = nullspace_sensing_precoder(channels, steering);
        p.psi_reg = psi_reg;
        p.num_tx = channels.front().num_tx();
        p.antennas = channels.front().antennas;
        p.frame_size = channels.front().frame_size;
        return p;
    }
}
