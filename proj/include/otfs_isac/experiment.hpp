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

// Monte Carlo drops and sweeps.
//
// Every random quantity of drop d is drawn from a stream derived from
// (seed, purpose, d, ...), so a drop's result does not depend on execution
// order, and all schemes of a drop share channels, frames and detector noise.

#include "config.hpp"
#include "detector.hpp"
#include "power_allocation.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace otfs_isac
{
    enum class DropStatus
    {
        ok,
        infeasible,
        failed
    };

    inline const char *to_string(DropStatus s)
    {
        switch (s)
        {
        case DropStatus::ok:
            return "ok";
        case DropStatus::infeasible:
            return "infeasible";
        default:
            return "failed";
        }
    }

    struct SchemeOutcome
    {
        Scheme scheme = Scheme::sensing_with_x0;
        DropStatus status = DropStatus::ok;
        std::string message;
        SqrtPowerVector eta;
        PdEstimate pd;
        double threshold = 0.0;
        double sensing_snr = 0.0;         // linear
        double min_sinr_margin = 0.0;     // min_u SINR_u / gamma, linear
        double total_power = 0.0;         // sum_k P_k
        double total_sqrt_power = 0.0;    // sum_k sqrt(P_k)
        int ccp_iterations = 0;
        std::vector<double> ccp_trace;
    };

    struct DropRecord
    {
        std::int64_t drop_index = 0;
        std::vector<SchemeOutcome> outcomes; // in config.schemes order
    };

    /// Channels, precoders and frames of one drop.
    struct DropState
    {
        Scenario scenario;
        std::vector<UeChannel> channels;
        PrecoderSet precoders;
        FrameSet frames;
        SinrTerms terms;
        std::vector<std::vector<TargetLink>> links;
        CMatrix psi;
        TaggedConstraints constraints;
        std::vector<RVector> g_diagonals;
    };

    inline DropState prepare_drop(const ExperimentConfig &config, std::int64_t drop_index)
    {
        const auto d = static_cast<std::uint64_t>(drop_index);
        DropState st;
        Rng geo = Rng::substream(config.seed, {stream::access_points, d});
        st.scenario = generate_scenario(config.scenario, geo);
        const Index U = st.scenario.num_ues();
        const Index K = st.scenario.num_tx();
        for (Index u = 0; u < U; ++u)
        {
            std::vector<std::vector<DdPath>> paths;
            for (Index k = 0; k < K; ++k)
            {
                Rng pr = Rng::substream(config.seed, {stream::ue_paths, d, static_cast<std::uint64_t>(u),
                                                      static_cast<std::uint64_t>(k)});
                paths.push_back(sample_ue_paths(st.scenario, u, k, pr));
            }
            st.channels.push_back(build_ue_channel(paths, st.scenario, u));
        }
        st.precoders = build_precoders(st.channels, tx_target_steering(st.scenario), config.effective_psi_reg());
        for (Index u = 0; u <= U; ++u)
        {
            Rng fr = Rng::substream(config.seed, {stream::frames, d, static_cast<std::uint64_t>(u)});
            st.frames.push_back(generate_time_frame(st.scenario.frame, fr));
        }
        st.terms = sinr_terms(st.channels, st.precoders, st.frames);
        st.links = build_target_links(st.scenario);
        st.psi = psi_matrix(st.precoders, st.frames, st.links, st.scenario.sigma_rcs2);
        st.constraints = build_constraints(st.terms, st.precoders, config.gamma_thresh, st.scenario.sigma_n2, config.p_max);
        for (Index k = 0; k < K; ++k)
            st.g_diagonals.push_back(slice_norms(st.precoders, k));
        return st;
    }

    /// Power allocation of one scheme on a prepared drop.
    inline SqrtPowerVector allocate_power(const ExperimentConfig &config, const DropState &st, Scheme scheme,
                                          CcpResult *trace = nullptr)
    {
        const CcpOptions ccp{config.ccp_epsilon, static_cast<int>(config.ccp_max_iterations)};
        const InitialPointOptions init{config.init_push_fraction};
        switch (scheme)
        {
        case Scheme::comm_centric:
            return comm_centric_baseline(st.constraints, st.g_diagonals);
        case Scheme::sensing_with_x0:
        {
            const RVector eta0 = find_feasible_initial(st.constraints, st.g_diagonals, init);
            auto r = ccp_sensing_centric(st.psi, st.constraints, eta0, ccp);
            if (trace)
                *trace = r;
            return r.eta;
        }
        default:
        {
            const auto reduced = remove_variable(st.constraints, 0);
            std::vector<RVector> g;
            for (const auto &gk : st.g_diagonals)
                g.push_back(gk.tail(gk.size() - 1));
            const RVector eta0 = find_feasible_initial(reduced, g, init);
            auto r = ccp_sensing_centric(remove_index(st.psi, 0), reduced, eta0, ccp);
            r.eta = insert_zero(r.eta, 0);
            if (trace)
                *trace = r;
            return r.eta;
        }
        }
    }

    /// Evaluate one scheme's allocation: link metrics, threshold and Pd.
    inline SchemeOutcome evaluate_scheme(const ExperimentConfig &config, const DropState &st, Scheme scheme,
                                         std::int64_t drop_index)
    {
        const auto d = static_cast<std::uint64_t>(drop_index);
        SchemeOutcome out;
        out.scheme = scheme;
        CcpResult trace;
        out.eta = allocate_power(config, st, scheme, &trace);
        out.ccp_iterations = trace.iterations;
        out.ccp_trace = trace.objective_trace;

        const auto &s = st.scenario;
        const Index MN = s.frame.size();
        const RVector sinr = ue_sinr(st.terms, out.eta, s.sigma_n2, MN);
        out.min_sinr_margin = sinr.minCoeff() / config.gamma_thresh;
        out.sensing_snr = sensing_snr(st.psi, out.eta, s.antennas, MN, s.num_rx(), s.sigma_n2);
        for (Index k = 0; k < s.num_tx(); ++k)
        {
            const double pk = ap_power(st.precoders, k, out.eta);
            out.total_power += pk;
            out.total_sqrt_power += std::sqrt(pk);
        }

        const CMatrix omega = build_omega(st.links, assemble_all_transmit(st.precoders, st.frames, out.eta));
        DetectorConfig det{s.sigma_n2, s.sigma_rcs2, config.p_fa, config.calibration_trials};
        Rng cal = Rng::substream(config.seed, {stream::calibration, d});
        out.threshold = calibrate_threshold(omega, det, cal);
        Rng trials = Rng::substream(config.seed, {stream::detection, d});
        out.pd = estimate_pd(omega, det, out.threshold, config.trials_per_drop, trials);
        return out;
    }

    inline DropRecord run_drop(const ExperimentConfig &config, std::int64_t drop_index)
    {
        DropRecord rec;
        rec.drop_index = drop_index;
        const auto fail_all = [&](DropStatus status, const std::string &msg)
        {
            rec.outcomes.clear();
            for (auto sch : config.schemes)
            {
                SchemeOutcome o;
                o.scheme = sch;
                o.status = status;
                o.message = msg;
                rec.outcomes.push_back(o);
            }
        };

        DropState st;
        try
        {
            st = prepare_drop(config, drop_index);
        }
        catch (const InfeasibleError &e)
        {
            fail_all(DropStatus::infeasible, e.what());
            return rec;
        }
        catch (const std::exception &e)
        {
            fail_all(DropStatus::failed, e.what());
            return rec;
        }

        for (auto sch : config.schemes)
        {
            try
            {
                rec.outcomes.push_back(evaluate_scheme(config, st, sch, drop_index));
            }
            catch (const InfeasibleError &e)
            {
                SchemeOutcome o;
                o.scheme = sch;
                o.status = DropStatus::infeasible;
                o.message = e.what();
                rec.outcomes.push_back(o);
            }
            catch (const std::exception &e)
            {
                SchemeOutcome o;
                o.scheme = sch;
                o.status = DropStatus::failed;
                o.message = e.what();
                rec.outcomes.push_back(o);
            }
        }
        return rec;
    }

    /// Run drops 0..drops-1, optionally on several threads; output is in drop order.
    inline std::vector<DropRecord> run_drops(const ExperimentConfig &config)
    {
        const auto n = static_cast<std::size_t>(config.drops);
        std::vector<DropRecord> records(n);
        std::size_t workers = config.threads > 0 ? static_cast<std::size_t>(config.threads)
                                                 : std::max(1u, std::thread::hardware_concurrency());
        workers = std::min(workers, n);
        if (workers <= 1)
        {
            for (std::size_t i = 0; i < n; ++i)
                records[i] = run_drop(config, static_cast<std::int64_t>(i));
            return records;
        }
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&]
                              {
                                  for (std::size_t i = next++; i < n; i = next++)
                                      records[i] = run_drop(config, static_cast<std::int64_t>(i)); });
        for (auto &t : pool)
            t.join();
        return records;
    }

    struct ResultRow
    {
        double sweep_value = 0.0;
        std::string scheme;
        bool has_pd = false; // false when every drop was infeasible
        double pd = 0.0;
        double pd_ci_low = 0.0;
        double pd_ci_high = 0.0;
        double mean_sensing_snr_db = 0.0;
        double mean_min_sinr_margin_db = 0.0;
        std::int64_t drops_used = 0;
        std::uint64_t seed = 0;
        std::int64_t detections = 0;
        std::int64_t trials = 0;
    };

    /// Pool the feasible drops of one scheme into a row.
    inline ResultRow aggregate(const std::vector<DropRecord> &records, std::size_t scheme_slot, double sweep_value,
                               const std::string &label, std::uint64_t seed)
    {
        ResultRow row;
        row.sweep_value = sweep_value;
        row.scheme = label;
        row.seed = seed;
        double snr_db = 0.0, margin_db = 0.0;
        for (const auto &rec : records)
        {
            const auto &o = rec.outcomes.at(scheme_slot);
            if (o.status != DropStatus::ok)
                continue;
            ++row.drops_used;
            row.detections += o.pd.detections;
            row.trials += o.pd.trials;
            snr_db += linear_to_db(o.sensing_snr);
            margin_db += linear_to_db(o.min_sinr_margin);
        }
        if (row.drops_used > 0)
        {
            const auto est = make_pd_estimate(row.detections, row.trials);
            row.has_pd = true;
            row.pd = est.pd;
            row.pd_ci_low = est.ci.low;
            row.pd_ci_high = est.ci.high;
            row.mean_sensing_snr_db = snr_db / static_cast<double>(row.drops_used);
            row.mean_min_sinr_margin_db = margin_db / static_cast<double>(row.drops_used);
        }
        return row;
    }

    struct SweepResult
    {
        std::vector<ResultRow> rows;
        std::vector<std::vector<DropRecord>> records; // per sweep point
    };

    /// All sweep points and schemes; rows sorted by sweep value, then scheme order.
    inline SweepResult run_sweep_detailed(const ExperimentConfig &config)
    {
        config.validate();
        std::vector<double> points = config.sweep_points();
        std::stable_sort(points.begin(), points.end());
        SweepResult out;
        for (double v : points)
        {
            const ExperimentConfig c = config.at_sweep_value(v);
            c.validate();
            auto recs = run_drops(c);
            for (std::size_t s = 0; s < c.schemes.size(); ++s)
                out.rows.push_back(aggregate(recs, s, v, scheme_label(c.schemes[s]), c.seed));
            out.records.push_back(std::move(recs));
        }
        return out;
    }

    inline std::vector<ResultRow> run_sweep(const ExperimentConfig &config) { return run_sweep_detailed(config).rows; }
}
