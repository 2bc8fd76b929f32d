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

// Power allocation over the square-root power vector eta (entry 0 sensing).
//
// QoS:   ||[A_u eta; sigma_n sqrt(MN)]|| <= (DS_u / sqrt(gamma)) eta_u
// Power: ||G_k eta|| <= sqrt(P_max),  G_k = diag(||W_{0,k}||_F, ..., ||W_{N_ue,k}||_F)
//
// The sensing-centric scheme maximizes eta^T Re{Psi} eta over this set by the
// concave-convex procedure; the comm-centric baseline minimizes sum_k ||G_k eta||.

#include "isac_signal.hpp"
#include "socp.hpp"

#include <vector>

namespace otfs_isac
{
    /// Constraint family tag, used to report which family blocks feasibility.
    enum class ConstraintFamily
    {
        qos,
        power_budget,
        other
    };

    struct TaggedConstraints
    {
        std::vector<SocConstraint> constraints;
        std::vector<ConstraintFamily> families;

        void add(SocConstraint c, ConstraintFamily f)
        {
            constraints.push_back(std::move(c));
            families.push_back(f);
        }

        Index dimension() const { return constraints.empty() ? 0 : constraints.front().dimension(); }
    };

    /// SINR_u >= gamma as a second-order cone over eta; `ue` is 0-based.
    inline SocConstraint build_sinr_soc(const SinrTerms &t, Index ue, double gamma_thresh, double sigma_n2, Index MN)
    {
        const Index U = t.ds.size();
        if (ue < 0 || ue >= U)
            throw std::invalid_argument("build_sinr_soc: UE index out of range");
        if (!(gamma_thresh > 0.0))
            throw std::invalid_argument("build_sinr_soc: gamma_thresh must be > 0");
        if (!(t.ds(ue) > 0.0))
            throw InfeasibleError("build_sinr_soc: UE " + std::to_string(ue) + " has zero desired signal",
                                  InfeasibleError::Family::qos);
        SocConstraint c;
        c.A = RMatrix::Zero(U + 2, U + 1);
        c.A(0, 0) = t.si(ue);
        for (Index v = 0; v < U; ++v)
            if (v != ue)
                c.A(v + 1, v + 1) = t.iui(ue, v);
        c.b = RVector::Zero(U + 2);
        c.b(U + 1) = std::sqrt(sigma_n2 * static_cast<double>(MN));
        c.c = RVector::Zero(U + 1);
        c.c(ue + 1) = t.ds(ue) / std::sqrt(gamma_thresh);
        c.d = 0.0;
        return c;
    }

    /// P_k <= p_max as a second-order cone over eta.
    inline SocConstraint build_power_soc(const PrecoderSet &p, Index k, double p_max)
    {
        if (!(p_max > 0.0))
            throw std::invalid_argument("build_power_soc: p_max must be > 0");
        SocConstraint c;
        c.A = slice_norms(p, k).asDiagonal();
        c.b = RVector::Zero(p.num_ues() + 1);
        c.c = RVector::Zero(p.num_ues() + 1);
        c.d = std::sqrt(p_max);
        return c;
    }

    /// All QoS and per-AP power constraints of one drop.
    inline TaggedConstraints build_constraints(const SinrTerms &t, const PrecoderSet &p, double gamma_thresh,
                                               double sigma_n2, double p_max)
    {
        TaggedConstraints tc;
        for (Index u = 0; u < t.ds.size(); ++u)
            tc.add(build_sinr_soc(t, u, gamma_thresh, sigma_n2, p.frame_size), ConstraintFamily::qos);
        for (Index k = 0; k < p.num_tx; ++k)
            tc.add(build_power_soc(p, k, p_max), ConstraintFamily::power_budget);
        return tc;
    }

    /// Drop decision variable `index` (fixing it to zero).
    inline SocConstraint remove_variable(const SocConstraint &c, Index index)
    {
        const Index n = c.dimension();
        if (index < 0 || index >= n)
            throw std::invalid_argument("remove_variable: index out of range");
        const auto keep = [&](const auto &M)
        {
            using M_t = std::decay_t<decltype(M)>;
            M_t out(M.rows(), n - 1);
            out << M.leftCols(index), M.rightCols(n - 1 - index);
            return out;
        };
        SocConstraint r;
        r.A = c.A.rows() > 0 ? keep(c.A) : RMatrix(0, n - 1);
        r.b = c.b;
        RMatrix ct = c.c.transpose();
        r.c = keep(ct).transpose();
        r.d = c.d;
        return r;
    }

    inline TaggedConstraints remove_variable(const TaggedConstraints &tc, Index index)
    {
        TaggedConstraints out;
        for (std::size_t i = 0; i < tc.constraints.size(); ++i)
            out.add(remove_variable(tc.constraints[i], index), tc.families[i]);
        return out;
    }

    /// Re-embed a reduced vector with a zero at `index`.
    inline RVector insert_zero(const RVector &x, Index index)
    {
        RVector out(x.size() + 1);
        out << x.head(index), 0.0, x.tail(x.size() - index);
        return out;
    }

    /// Psi with row and column `index` removed.
    inline CMatrix remove_index(const CMatrix &psi, Index index)
    {
        const Index n = psi.rows();
        CMatrix out(n - 1, n - 1);
        Index oi = 0;
        for (Index i = 0; i < n; ++i)
        {
            if (i == index)
                continue;
            Index oj = 0;
            for (Index j = 0; j < n; ++j)
            {
                if (j == index)
                    continue;
                out(oi, oj++) = psi(i, j);
            }
            ++oi;
        }
        return out;
    }

    /// Smallest margin over constraints and nonnegativity.
    inline double min_margin(const std::vector<SocConstraint> &cons, const RVector &x)
    {
        double m = x.size() > 0 ? x.minCoeff() : 0.0;
        for (const auto &c : cons)
            m = std::min(m, c.margin(x));
        return m;
    }

    namespace alloc_detail
    {
        /// Constraint scaled to unit norm of its data, so margins are comparable.
        inline SocConstraint normalized(const SocConstraint &c)
        {
            const double s = std::sqrt(c.A.squaredNorm() + c.b.squaredNorm() + c.c.squaredNorm() + c.d * c.d);
            if (!(s > 0.0))
                return c;
            return {c.A / s, c.b / s, c.c / s, c.d / s};
        }

        inline SocConstraint with_extra_columns(const SocConstraint &c, Index extra)
        {
            const Index n = c.dimension();
            SocConstraint r;
            r.A = RMatrix::Zero(c.A.rows(), n + extra);
            if (c.A.rows() > 0)
                r.A.leftCols(n) = c.A;
            r.b = c.b;
            r.c = RVector::Zero(n + extra);
            r.c.head(n) = c.c;
            r.d = c.d;
            return r;
        }

        inline InfeasibleError::Family to_error_family(ConstraintFamily f)
        {
            switch (f)
            {
            case ConstraintFamily::qos:
                return InfeasibleError::Family::qos;
            case ConstraintFamily::power_budget:
                return InfeasibleError::Family::power_budget;
            default:
                return InfeasibleError::Family::unspecified;
            }
        }

        inline bool feasible_subset(const TaggedConstraints &tc, ConstraintFamily family, const SocpSettings &settings)
        {
            SocpProblem p;
            p.objective = RVector::Zero(tc.dimension());
            for (std::size_t i = 0; i < tc.constraints.size(); ++i)
                if (tc.families[i] == family)
                    p.constraints.push_back(tc.constraints[i]);
            if (p.constraints.empty())
                return true;
            return solve_socp(p, settings).status == SolveStatus::optimal;
        }

        /// Infeasibility report naming the first family that is infeasible on its own,
        /// or the power budget when QoS alone is satisfiable.
        [[noreturn]] inline void report_infeasible(const TaggedConstraints &tc, const std::string &who,
                                                   const SocpSettings &settings)
        {
            ConstraintFamily family = ConstraintFamily::power_budget;
            if (!feasible_subset(tc, ConstraintFamily::qos, settings))
                family = ConstraintFamily::qos;
            const char *name = family == ConstraintFamily::qos ? "QoS" : "power budget";
            throw InfeasibleError(who + ": constraint set is infeasible (" + name + " constraints cannot be met)",
                                  to_error_family(family));
        }
    }

    /// Minimizes sum_k ||G_k eta|| subject to the QoS and power constraints.
    /// `g_diagonals[k]` holds the diagonal of G_k.
    inline RVector comm_centric_baseline(const TaggedConstraints &tc, const std::vector<RVector> &g_diagonals,
                                         const SocpSettings &settings = {})
    {
        const Index n = tc.dimension();
        const Index K = static_cast<Index>(g_diagonals.size());
        SocpProblem p;
        p.objective = RVector::Zero(n + K);
        p.objective.tail(K).setOnes();
        for (const auto &c : tc.constraints)
            p.constraints.push_back(alloc_detail::with_extra_columns(c, K));
        for (Index k = 0; k < K; ++k)
        {
            const RVector &g = g_diagonals[static_cast<std::size_t>(k)];
            if (g.size() != n)
                throw std::invalid_argument("comm_centric_baseline: G_k size does not match eta");
            SocConstraint e;
            e.A = RMatrix::Zero(n, n + K);
            e.A.leftCols(n) = g.asDiagonal();
            e.b = RVector::Zero(n);
            e.c = RVector::Zero(n + K);
            e.c(n + k) = 1.0;
            p.constraints.push_back(e);
        }
        const auto r = solve_socp(p, settings);
        if (r.status == SolveStatus::infeasible)
            alloc_detail::report_infeasible(tc, "comm_centric_baseline", settings);
        if (r.status != SolveStatus::optimal)
            throw NumericalError("comm_centric_baseline: solver did not converge");
        return r.x.head(n).cwiseMax(0.0);
    }

    /// Strictly feasible point maximizing the smallest normalized margin (capped at 1).
    inline RVector max_margin_point(const TaggedConstraints &tc, const SocpSettings &settings = {})
    {
        const Index n = tc.dimension();
        SocpProblem p;
        p.nonneg = false;
        p.objective = RVector::Zero(n + 1);
        p.objective(n) = -1.0;
        for (const auto &c0 : tc.constraints)
        {
            SocConstraint c = alloc_detail::with_extra_columns(alloc_detail::normalized(c0), 1);
            c.c(n) = -1.0;
            p.constraints.push_back(c);
        }
        for (Index j = 0; j < n; ++j)
        {
            SocConstraint c; // x_j - s >= 0
            c.A = RMatrix(0, n + 1);
            c.b = RVector(0);
            c.c = RVector::Zero(n + 1);
            c.c(j) = 1.0;
            c.c(n) = -1.0;
            p.constraints.push_back(c);
        }
        SocConstraint cap; // s <= 1
        cap.A = RMatrix(0, n + 1);
        cap.b = RVector(0);
        cap.c = RVector::Zero(n + 1);
        cap.c(n) = -1.0;
        cap.d = 1.0;
        p.constraints.push_back(cap);

        const auto r = solve_socp(p, settings);
        if (r.status != SolveStatus::optimal)
            throw NumericalError("max_margin_point: phase-one solve did not converge");
        if (!(r.x(n) > 1e-9))
            alloc_detail::report_infeasible(tc, "max_margin_point", settings);
        return r.x.head(n);
    }

    /// Analytic center of {eta >= 0} intersected with the constraints:
    /// the minimizer of -sum log(t_i^2 - ||r_i||^2) - sum log eta_j, by damped
    /// Newton from the max-margin point.
    inline RVector analytic_center(const TaggedConstraints &tc, const SocpSettings &settings = {})
    {
        std::vector<SocConstraint> cons;
        for (const auto &c : tc.constraints)
            cons.push_back(alloc_detail::normalized(c));
        RVector x = max_margin_point(tc, settings);
        const Index n = x.size();

        const auto barrier = [&](const RVector &v, RVector *grad, RMatrix *hess)
        {
            double f = 0.0;
            if (grad)
                grad->setZero(n);
            if (hess)
                hess->setZero(n, n);
            for (Index j = 0; j < n; ++j)
            {
                if (!(v(j) > 0.0))
                    return std::numeric_limits<double>::infinity();
                f -= std::log(v(j));
                if (grad)
                    (*grad)(j) -= 1.0 / v(j);
                if (hess)
                    (*hess)(j, j) += 1.0 / (v(j) * v(j));
            }
            for (const auto &c : cons)
            {
                const double t = c.c.dot(v) + c.d;
                const RVector r = c.A.rows() > 0 ? RVector(c.A * v + c.b) : RVector(0);
                const double q = t * t - r.squaredNorm();
                if (!(t > 0.0) || !(q > 0.0))
                    return std::numeric_limits<double>::infinity();
                f -= std::log(q);
                if (grad || hess)
                {
                    RVector dq = 2.0 * t * c.c;
                    if (c.A.rows() > 0)
                        dq -= 2.0 * c.A.transpose() * r;
                    if (grad)
                        *grad -= dq / q;
                    if (hess)
                    {
                        RMatrix d2q = 2.0 * c.c * c.c.transpose();
                        if (c.A.rows() > 0)
                            d2q -= 2.0 * c.A.transpose() * c.A;
                        *hess += -d2q / q + dq * dq.transpose() / (q * q);
                    }
                }
            }
            return f;
        };

        RVector g(n);
        RMatrix H(n, n);
        for (int it = 0; it < 100; ++it)
        {
            const double f = barrier(x, &g, &H);
            const Eigen::LDLT<RMatrix> ldlt(H);
            const RVector dx = -ldlt.solve(g);
            const double dec2 = -g.dot(dx);
            if (!dx.allFinite() || dec2 < 1e-20)
                break;
            double step = 1.0;
            while (step > 1e-12)
            {
                const double fn = barrier(x + step * dx, nullptr, nullptr);
                if (fn <= f - 0.25 * step * dec2)
                    break;
                step *= 0.5;
            }
            if (step <= 1e-12)
                break;
            x += step * dx;
            if (dec2 < 1e-14)
                break;
        }
        return x;
    }

    struct InitialPointOptions
    {
        /// Fraction of the way from the comm-centric solution to the analytic
        /// center (1 = the analytic center itself).
        double push_fraction = 1.0;
    };

    /// Strictly feasible starting point for the concave-convex procedure.
    inline RVector find_feasible_initial(const TaggedConstraints &tc, const std::vector<RVector> &g_diagonals,
                                         const InitialPointOptions &options = {}, const SocpSettings &settings = {})
    {
        if (tc.constraints.empty())
            throw std::invalid_argument("find_feasible_initial: no constraints");
        if (!(options.push_fraction >= 0.0 && options.push_fraction <= 1.0))
            throw std::invalid_argument("find_feasible_initial: push_fraction must lie in [0, 1]");
        const RVector center = analytic_center(tc, settings);
        RVector x = center;
        if (options.push_fraction < 1.0)
        {
            const RVector base = comm_centric_baseline(tc, g_diagonals, settings);
            x = base + options.push_fraction * (center - base);
        }
        if (min_margin(tc.constraints, x) < -1e-8)
            throw NumericalError("find_feasible_initial: starting point violates a constraint");
        return x;
    }

    struct CcpOptions
    {
        double epsilon = 1e-6; // relative to ||Re Psi||_F
        int max_iterations = 100;
        // inner SOCP accuracy; a looser solve can show up as small descents in the trace
        double inner_tolerance = 1e-10;
    };

    struct CcpResult
    {
        RVector eta;
        std::vector<double> objective_trace; // eta^T Re{Psi} eta, starting with eta0
        int iterations = 0;
        bool converged = false;
    };

    /// Concave-convex procedure for max eta^T Re{Psi} eta over the constraints:
    /// each step solves min -(Re{Psi} eta_prev)^T eta as an SOCP.
    inline CcpResult ccp_sensing_centric(const CMatrix &psi, const TaggedConstraints &tc, const RVector &eta0,
                                         const CcpOptions &options = {}, const SocpSettings &settings = {})
    {
        const Index n = eta0.size();
        if (psi.rows() != n || psi.cols() != n || tc.dimension() != n)
            throw std::invalid_argument("ccp_sensing_centric: dimension mismatch");
        if (!(options.epsilon > 0.0) || options.max_iterations < 1 || !(options.inner_tolerance > 0.0))
            throw std::invalid_argument(
                "ccp_sensing_centric: epsilon and inner_tolerance must be > 0 and max_iterations >= 1");
        if (min_margin(tc.constraints, eta0) < -1e-8)
            throw std::invalid_argument("ccp_sensing_centric: eta0 is not feasible");

        const RMatrix R = psi.real();
        const double rnorm = R.norm();
        CcpResult res;
        res.eta = eta0;
        res.objective_trace.push_back(eta0.dot(R * eta0));

        SocpSettings inner = settings;
        inner.tolerance = std::min(settings.tolerance, options.inner_tolerance);
        SocpProblem p;
        p.constraints = tc.constraints;
        p.nonneg = true;
        for (int t = 1; t <= options.max_iterations; ++t)
        {
            p.objective = -(R * res.eta);
            const auto r = solve_socp(p, inner);
            if (r.status != SolveStatus::optimal)
                throw NumericalError("ccp_sensing_centric: inner solve failed at iteration " + std::to_string(t) +
                                     " (" + to_string(r.status) + ")");
            const RVector next = r.x.cwiseMax(0.0);
            const double change = (R * (next - res.eta)).norm();
            res.eta = next;
            res.iterations = t;
            res.objective_trace.push_back(next.dot(R * next));
            if (change <= options.epsilon * rnorm)
            {
                res.converged = true;
                break;
            }
        }
        return res;
    }
}
