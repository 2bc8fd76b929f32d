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

// Small dense second-order cone program solver.
//
//   minimize    c^T x
//   subject to  ||A_i x + b_i|| <= c_i^T x + d_i,   i = 1..p
//               x >= 0                             (optional)
//
// Internally the problem is put in conic form G x + s = h, s in K, where K is
// a product of a nonnegative orthant and second-order cones, and solved by a
// homogeneous self-dual primal-dual interior-point method with
// Nesterov-Todd scaling and Mehrotra predictor-corrector steps.

#include "common.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <vector>

namespace otfs_isac
{
    /// ||A x + b|| <= c^T x + d
    struct SocConstraint
    {
        RMatrix A;
        RVector b;
        RVector c;
        double d = 0.0;

        Index dimension() const { return c.size(); }

        /// c^T x + d - ||A x + b||; >= 0 when satisfied.
        double margin(const RVector &x) const
        {
            const double lhs = A.rows() > 0 ? (A * x + b).norm() : 0.0;
            return c.dot(x) + d - lhs;
        }

        bool satisfied(const RVector &x, double slack = 0.0) const { return margin(x) >= -slack; }

        void validate(Index n) const
        {
            if (c.size() != n || (A.rows() > 0 && A.cols() != n) || A.rows() != b.size())
                throw std::invalid_argument("SocConstraint: inconsistent dimensions");
            if (!A.allFinite() || !b.allFinite() || !c.allFinite() || !std::isfinite(d))
                throw std::invalid_argument("SocConstraint: non-finite data");
        }
    };

    struct SocpProblem
    {
        RVector objective;
        std::vector<SocConstraint> constraints;
        bool nonneg = true;

        Index dimension() const { return objective.size(); }
    };

    enum class SolveStatus
    {
        optimal,
        infeasible,
        max_iterations
    };

    inline const char *to_string(SolveStatus s)
    {
        switch (s)
        {
        case SolveStatus::optimal:
            return "optimal";
        case SolveStatus::infeasible:
            return "infeasible";
        default:
            return "max-iterations";
        }
    }

    struct SolveResult
    {
        RVector x;
        SolveStatus status = SolveStatus::max_iterations;
        double objective = 0.0;
        double primal_residual = 0.0; // largest constraint violation, absolute
        double dual_residual = 0.0;   // ||c + G^T z|| / max(1, ||c||)
        double gap = 0.0;             // |s^T z| / max(1, |c^T x|)
        int iterations = 0;
        std::vector<RVector> soc_duals; // one per constraint, (z_0, z_1)
        RVector nonneg_duals;
    };

    struct SocpSettings
    {
        double tolerance = 1e-8;
        double reduced_tolerance = 1e-6; // accepted on stall
        int max_iterations = 100;
        double step_factor = 0.99;
        bool verbose = false; // per-iteration trace on stderr
    };

    namespace socp_detail
    {
        struct Cones
        {
            Index orthant = 0;
            std::vector<Index> soc_start;
            std::vector<Index> soc_size;
            Index dim = 0;

            double degree() const { return static_cast<double>(orthant + static_cast<Index>(soc_size.size())); }
        };

        inline RVector identity_element(const Cones &K)
        {
            RVector e = RVector::Zero(K.dim);
            e.head(K.orthant).setOnes();
            for (auto st : K.soc_start)
                e(st) = 1.0;
            return e;
        }

        /// u o v
        inline RVector jordan_product(const Cones &K, const RVector &u, const RVector &v)
        {
            RVector w(K.dim);
            w.head(K.orthant) = u.head(K.orthant).cwiseProduct(v.head(K.orthant));
            for (std::size_t i = 0; i < K.soc_start.size(); ++i)
            {
                const Index st = K.soc_start[i], n = K.soc_size[i];
                w(st) = u.segment(st, n).dot(v.segment(st, n));
                w.segment(st + 1, n - 1) = u(st) * v.segment(st + 1, n - 1) + v(st) * u.segment(st + 1, n - 1);
            }
            return w;
        }

        /// x with lambda o x = w
        inline RVector jordan_divide(const Cones &K, const RVector &lambda, const RVector &w)
        {
            RVector x(K.dim);
            x.head(K.orthant) = w.head(K.orthant).cwiseQuotient(lambda.head(K.orthant));
            for (std::size_t i = 0; i < K.soc_start.size(); ++i)
            {
                const Index st = K.soc_start[i], n = K.soc_size[i];
                const double l0 = lambda(st);
                const auto l1 = lambda.segment(st + 1, n - 1);
                const auto w1 = w.segment(st + 1, n - 1);
                const double det = l0 * l0 - l1.squaredNorm();
                const double x0 = (l0 * w(st) - l1.dot(w1)) / det;
                x(st) = x0;
                x.segment(st + 1, n - 1) = (w1 - x0 * l1) / l0;
            }
            return x;
        }

        /// Largest alpha with u + alpha du in K (infinity when unrestricted).
        inline double max_step(const Cones &K, const RVector &u, const RVector &du)
        {
            double alpha = std::numeric_limits<double>::infinity();
            for (Index j = 0; j < K.orthant; ++j)
                if (du(j) < 0.0)
                    alpha = std::min(alpha, -u(j) / du(j));
            for (std::size_t i = 0; i < K.soc_start.size(); ++i)
            {
                const Index st = K.soc_start[i], n = K.soc_size[i];
                const double u0 = u(st), du0 = du(st);
                if (n == 1)
                {
                    if (du0 < 0.0)
                        alpha = std::min(alpha, -u0 / du0);
                    continue;
                }
                const auto u1 = u.segment(st + 1, n - 1);
                const auto du1 = du.segment(st + 1, n - 1);
                // q(a) = A a^2 + 2 B a + C; the first positive root is the boundary hit
                const double A = du0 * du0 - du1.squaredNorm();
                const double B = u0 * du0 - u1.dot(du1);
                const double C = std::max(u0 * u0 - u1.squaredNorm(), 0.0);
                const double disc = B * B - A * C;
                if (disc < 0.0)
                    continue;
                const double sq = std::sqrt(disc);
                const double q = -(B + (B >= 0.0 ? sq : -sq));
                for (double r : {q != 0.0 ? C / q : std::numeric_limits<double>::infinity(),
                                 A != 0.0 ? q / A : std::numeric_limits<double>::infinity()})
                    if (r > 0.0)
                        alpha = std::min(alpha, r);
            }
            return alpha;
        }

        /// Nesterov-Todd scaling W with W z = W^{-1} s = lambda, per block.
        struct Scaling
        {
            RVector orth; // sqrt(s / z)
            std::vector<double> beta;
            std::vector<RVector> wbar; // J-normalized, wbar^T J wbar = 1

            Scaling(const Cones &K, const RVector &s, const RVector &z)
            {
                orth = (s.head(K.orthant).array() / z.head(K.orthant).array()).sqrt();
                for (std::size_t i = 0; i < K.soc_start.size(); ++i)
                {
                    const Index st = K.soc_start[i], n = K.soc_size[i];
                    const auto sb = s.segment(st, n);
                    const auto zb = z.segment(st, n);
                    const double sn = std::sqrt(std::max(sb(0) * sb(0) - sb.tail(n - 1).squaredNorm(), 1e-300));
                    const double zn = std::sqrt(std::max(zb(0) * zb(0) - zb.tail(n - 1).squaredNorm(), 1e-300));
                    const RVector ss = sb / sn;
                    RVector zs = zb / zn;
                    const double gamma = std::sqrt(std::max((1.0 + ss.dot(zs)) / 2.0, 1e-300));
                    zs.tail(n - 1) = -zs.tail(n - 1); // J zbar
                    wbar.push_back((ss + zs) / (2.0 * gamma));
                    beta.push_back(std::sqrt(sn / zn));
                }
            }

            /// Dense block for SOC i: beta [w0, w1^T; w1, I + w1 w1^T / (1 + w0)].
            static RMatrix soc_matrix(double beta, const RVector &w, bool inverse)
            {
                const Index n = w.size();
                RMatrix M = RMatrix::Identity(n, n);
                const double w0 = w(0);
                const RVector w1 = w.tail(n - 1);
                const double sign = inverse ? -1.0 : 1.0;
                M(0, 0) = w0;
                M.block(0, 1, 1, n - 1) = sign * w1.transpose();
                M.block(1, 0, n - 1, 1) = sign * w1;
                M.block(1, 1, n - 1, n - 1) += w1 * w1.transpose() / (1.0 + w0);
                return (inverse ? 1.0 / beta : beta) * M;
            }

            RVector apply(const Cones &K, const RVector &v, bool inverse) const
            {
                RVector out(K.dim);
                if (inverse)
                    out.head(K.orthant) = v.head(K.orthant).cwiseQuotient(orth);
                else
                    out.head(K.orthant) = v.head(K.orthant).cwiseProduct(orth);
                for (std::size_t i = 0; i < K.soc_start.size(); ++i)
                {
                    const Index st = K.soc_start[i], n = K.soc_size[i];
                    out.segment(st, n) = soc_matrix(beta[i], wbar[i], inverse) * v.segment(st, n);
                }
                return out;
            }

            RMatrix squared(const Cones &K) const
            {
                RMatrix W2 = RMatrix::Zero(K.dim, K.dim);
                W2.diagonal().head(K.orthant) = orth.array().square();
                for (std::size_t i = 0; i < K.soc_start.size(); ++i)
                {
                    const Index st = K.soc_start[i], n = K.soc_size[i];
                    const RMatrix Wb = soc_matrix(beta[i], wbar[i], false);
                    W2.block(st, st, n, n) = Wb * Wb;
                }
                return W2;
            }
        };
    }

    /// Solve a SocpProblem. Throws UnboundedError on a certificate of
    /// unboundedness; infeasibility is reported through the status.
    inline SolveResult solve_socp(const SocpProblem &problem, const SocpSettings &settings = {})
    {
        using namespace socp_detail;
        const Index n = problem.dimension();
        if (n < 1)
            throw std::invalid_argument("solve_socp: empty decision vector");
        if (!problem.objective.allFinite())
            throw std::invalid_argument("solve_socp: non-finite objective");
        for (const auto &con : problem.constraints)
            con.validate(n);

        // Conic form with per-block normalization.
        Cones K;
        K.orthant = problem.nonneg ? n : 0;
        Index m = K.orthant;
        for (const auto &con : problem.constraints)
        {
            K.soc_start.push_back(m);
            K.soc_size.push_back(1 + con.A.rows());
            m += 1 + con.A.rows();
        }
        K.dim = m;

        RMatrix G = RMatrix::Zero(m, n);
        RVector h = RVector::Zero(m);
        std::vector<double> block_scale;
        if (problem.nonneg)
            G.topRows(n) = -RMatrix::Identity(n, n);
        for (std::size_t i = 0; i < problem.constraints.size(); ++i)
        {
            const auto &con = problem.constraints[i];
            const Index st = K.soc_start[i], rows = con.A.rows();
            G.row(st) = -con.c.transpose();
            h(st) = con.d;
            if (rows > 0)
            {
                G.block(st + 1, 0, rows, n) = -con.A;
                h.segment(st + 1, rows) = con.b;
            }
            double scale = std::sqrt(G.middleRows(st, rows + 1).squaredNorm() + h.segment(st, rows + 1).squaredNorm());
            scale = scale > 0.0 ? 1.0 / scale : 1.0;
            G.middleRows(st, rows + 1) *= scale;
            h.segment(st, rows + 1) *= scale;
            block_scale.push_back(scale);
        }
        const double cnorm = problem.objective.norm();
        const double cscale = cnorm > 0.0 ? 1.0 / cnorm : 1.0;
        const RVector c = problem.objective * cscale;

        const RVector e = identity_element(K);
        RVector x = RVector::Zero(n), s = e, z = e;
        double tau = 1.0, kappa = 1.0;

        const double hnorm = std::max(1.0, h.norm());
        const double cn = std::max(1.0, c.norm());
        const Index N = n + m + 1;

        SolveResult result;
        result.status = SolveStatus::max_iterations;
        double best_merit = std::numeric_limits<double>::infinity();
        RVector best_x = x, best_z = z, best_s = s;
        double best_tau = tau;

        const auto finish = [&](const RVector &xs, const RVector &ss, const RVector &zs, double ts)
        {
            result.x = xs / ts;
            const RVector zz = zs / ts;
            result.objective = problem.objective.dot(result.x);
            // residuals in original units
            double viol = 0.0;
            if (problem.nonneg)
                viol = std::max(viol, -result.x.minCoeff());
            for (const auto &con : problem.constraints)
                viol = std::max(viol, -con.margin(result.x));
            result.primal_residual = viol;
            RVector grad = problem.objective;
            RVector zorth = problem.nonneg ? RVector(zz.head(n) * cnorm) : RVector();
            if (problem.nonneg)
                grad -= zorth;
            result.soc_duals.clear();
            for (std::size_t i = 0; i < problem.constraints.size(); ++i)
            {
                const auto &con = problem.constraints[i];
                const Index st = K.soc_start[i], sz = K.soc_size[i];
                const RVector zi = zz.segment(st, sz) * (block_scale[i] * (cnorm > 0.0 ? cnorm : 1.0));
                grad -= zi(0) * con.c;
                if (sz > 1)
                    grad -= con.A.transpose() * zi.tail(sz - 1);
                result.soc_duals.push_back(zi);
            }
            result.nonneg_duals = zorth;
            result.dual_residual = grad.norm() / std::max(1.0, problem.objective.norm());
            result.gap = std::abs((ss / ts).dot(zz)) * (cnorm > 0.0 ? cnorm : 1.0) / std::max(1.0, std::abs(result.objective));
        };

        for (int it = 0; it <= settings.max_iterations; ++it)
        {
            result.iterations = it;
            const RVector rx = G.transpose() * z + c * tau;
            const RVector rz = G * x + s - h * tau;
            const double rt = kappa + c.dot(x) + h.dot(z);

            const double pres = rz.norm() / tau / hnorm;
            const double dres = rx.norm() / tau / cn;
            const double pcost = c.dot(x) / tau;
            const double dcost = -h.dot(z) / tau;
            const double gap = s.dot(z) / (tau * tau);
            double relgap = std::numeric_limits<double>::infinity();
            if (pcost < 0.0)
                relgap = gap / -pcost;
            else if (dcost > 0.0)
                relgap = gap / dcost;

            const double merit = std::max({pres, dres, std::min(gap, relgap)});
            if (settings.verbose)
                std::fprintf(stderr, "socp %3d  pcost % .6e  dcost % .6e  gap %.2e  pres %.2e  dres %.2e  tau %.2e  kappa %.2e\n",
                             it, pcost, dcost, gap, pres, dres, tau, kappa);
            if (merit < best_merit)
            {
                best_merit = merit;
                best_x = x;
                best_z = z;
                best_s = s;
                best_tau = tau;
            }

            if (pres < settings.tolerance && dres < settings.tolerance &&
                (gap < settings.tolerance || relgap < settings.tolerance))
            {
                result.status = SolveStatus::optimal;
                finish(x, s, z, tau);
                return result;
            }
            const double hz = h.dot(z);
            if (hz < 0.0 && (G.transpose() * z).norm() / -hz < settings.tolerance)
            {
                result.status = SolveStatus::infeasible;
                finish(x, s, z, std::max(tau, 1e-300));
                return result;
            }
            const double cx = c.dot(x);
            if (cx < 0.0 && (G * x + s).norm() / -cx < settings.tolerance)
                throw UnboundedError("solve_socp: problem is unbounded below");
            if (it == settings.max_iterations)
                break;

            const Scaling W(K, s, z);
            const RVector lambda = W.apply(K, z, false);
            const RMatrix W2 = W.squared(K);

            RMatrix KKT = RMatrix::Zero(N, N);
            KKT.block(0, n, n, m) = G.transpose();
            KKT.block(0, n + m, n, 1) = c;
            KKT.block(n, 0, m, n) = G;
            KKT.block(n, n, m, m) = -W2;
            KKT.block(n, n + m, m, 1) = -h;
            KKT.block(n + m, 0, 1, n) = c.transpose();
            KKT.block(n + m, n, 1, m) = h.transpose();
            KKT(n + m, n + m) = -kappa / tau;
            const Eigen::PartialPivLU<RMatrix> lu(KKT);

            const auto solve = [&](const RVector &rhs)
            {
                RVector sol = lu.solve(rhs);
                sol += lu.solve(rhs - KKT * sol);
                return sol;
            };

            struct Direction
            {
                RVector dx, dz, ds;
                double dtau, dkappa;
            };
            const auto direction = [&](double eta, const RVector &xi_c, double xi_tau)
            {
                const RVector wl = W.apply(K, jordan_divide(K, lambda, xi_c), false);
                RVector rhs(N);
                rhs.head(n) = -eta * rx;
                rhs.segment(n, m) = -eta * rz - wl;
                rhs(n + m) = -eta * rt - xi_tau / tau;
                const RVector sol = solve(rhs);
                Direction d;
                d.dx = sol.head(n);
                d.dz = sol.segment(n, m);
                d.dtau = sol(n + m);
                d.ds = wl - W2 * d.dz;
                d.dkappa = (xi_tau - kappa * d.dtau) / tau;
                return d;
            };
            const auto step_length = [&](const Direction &d)
            {
                double a = std::min(max_step(K, s, d.ds), max_step(K, z, d.dz));
                if (d.dtau < 0.0)
                    a = std::min(a, -tau / d.dtau);
                if (d.dkappa < 0.0)
                    a = std::min(a, -kappa / d.dkappa);
                return a;
            };

            // predictor
            const RVector ll = jordan_product(K, lambda, lambda);
            const Direction aff = direction(1.0, -ll, -tau * kappa);
            const double alpha_aff = std::min(1.0, step_length(aff));
            const double sigma = std::pow(1.0 - alpha_aff, 3);
            const double mu = (s.dot(z) + tau * kappa) / (K.degree() + 1.0);

            // corrector
            const RVector corr = jordan_product(K, W.apply(K, aff.ds, true), W.apply(K, aff.dz, false));
            const Direction dir = direction(1.0 - sigma, -ll + sigma * mu * e - corr,
                                            -tau * kappa + sigma * mu - aff.dtau * aff.dkappa);
            const double alpha = std::min(1.0, settings.step_factor * step_length(dir));
            if (settings.verbose)
                std::fprintf(stderr, "socp      alpha_aff %.3e  sigma %.3e  alpha %.3e\n", alpha_aff, sigma, alpha);
            if (!(alpha > 1e-12) || !dir.dx.allFinite() || !dir.dz.allFinite())
                break;

            x += alpha * dir.dx;
            z += alpha * dir.dz;
            s += alpha * dir.ds;
            tau += alpha * dir.dtau;
            kappa += alpha * dir.dkappa;
        }

        // stalled or out of iterations: accept the best iterate at reduced accuracy
        finish(best_x, best_s, best_z, best_tau);
        if (best_merit < settings.reduced_tolerance)
            result.status = SolveStatus::optimal;
        return result;
    }
}
