// SPDX-License-Identifier: Apache-2.0
//
// rislink - joint subcarrier matching and RIS passive beamforming for
// OFDM decode-and-forward relaying.
// ------------------------------------------------------------------------

#pragma once

#include "beamforming.hpp"
#include "matching.hpp"

#include <chrono>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace rislink
{

enum class Matcher
{
    Exact, // branch and bound
    Dcp    // difference-of-convex penalty
};

struct OptimizationResult
{
    Matching matching;
    BeamformingSolution beamforming;
    SnrTable snr;
    double sum_rate_bps = 0.0;
    std::vector<double> objective_trace; // accepted objective after each round
    std::size_t rounds = 0;
    std::size_t bnb_nodes = 0;
    std::size_t dcp_iterations = 0;
    std::size_t sdp_iterations = 0;
    double wall_time_s = 0.0;
};

/// A solver failure inside the alternation, with the best result reached so far.
class OptimizationError : public std::runtime_error
{
public:
    OptimizationError(const std::string &what, OptimizationResult partial)
        : std::runtime_error(what), partial_(std::make_shared<OptimizationResult>(std::move(partial)))
    {
    }

    const OptimizationResult &partial() const { return *partial_; }

private:
    std::shared_ptr<const OptimizationResult> partial_;
};

/// True when the last step of the trace increased the objective by less than
/// `threshold` relative to the previous value.
inline bool converged(const std::vector<double> &trace, double threshold)
{
    if (trace.size() < 2)
        return false;
    const double prev = trace[trace.size() - 2];
    const double last = trace.back();
    return last - prev < threshold * std::max(std::abs(prev), std::numeric_limits<double>::min());
}

/// Salt of the optimizer RNG stream, mixed into the config seed.
inline constexpr std::uint64_t phase_stream = 0x5048415345ULL;

/// Uniform phases in [0, 2 pi) for both slots.
inline BeamformingSolution random_phases(std::size_t n_elements, Rng &rng)
{
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    BeamformingSolution bf;
    bf.v1.resize(static_cast<Eigen::Index>(n_elements));
    bf.v2.resize(static_cast<Eigen::Index>(n_elements));
    for (Eigen::Index m = 0; m < bf.v1.size(); ++m)
        bf.v1(m) = std::polar(1.0, angle(rng));
    for (Eigen::Index m = 0; m < bf.v2.size(); ++m)
        bf.v2(m) = std::polar(1.0, angle(rng));
    return bf;
}

/// The initial phases alternating_optimize starts from for this config.
inline BeamformingSolution initial_phases(const ScenarioConfig &cfg, std::size_t n_elements)
{
    Rng rng(mix_seed(cfg.rng_seed, phase_stream));
    return random_phases(n_elements, rng);
}

inline MatchResult run_matcher(Matcher matcher, const SnrTable &snr, const ScenarioConfig &cfg)
{
    return matcher == Matcher::Exact ? bnb_match(snr, cfg) : dcp_match(snr, cfg);
}

/// Alternates the matcher and SDR beamforming with Gaussian randomization from
/// random initial phases. A new matching or beamformer is kept only when it does not
/// lower the true sum rate, so the trace is non-decreasing. With
/// `cfg.quantization_bits` set, the final phases are quantized and re-evaluated.
inline OptimizationResult alternating_optimize(const ChannelRealization &ch, const ScenarioConfig &cfg,
                                               Matcher matcher)
{
    const auto start = std::chrono::steady_clock::now();
    const int k = cfg.case_indicator;
    const std::size_t M = ch.n_elements();
    const std::size_t N = ch.n_subcarriers();

    Rng rng(mix_seed(cfg.rng_seed, phase_stream));
    OptimizationResult res;
    res.beamforming = random_phases(M, rng);
    const LiftedMatrices lifted = M > 0 ? build_lifted_matrices(ch) : LiftedMatrices{};

    auto rate_of = [&](const Matching &m, const BeamformingSolution &bf)
    { return sum_rate(m, bf.v1, bf.v2, k, ch, cfg); };
    auto finish = [&]
    {
        if (cfg.quantization_bits)
            res.beamforming = quantize(res.beamforming, *cfg.quantization_bits);
        res.snr = snr_table(ch, res.beamforming, k, cfg);
        res.sum_rate_bps = rate_of(res.matching, res.beamforming);
        res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    bool have_matching = false;
    double objective = 0.0;
    const std::size_t cap = std::max<std::size_t>(1, cfg.solver.max_rounds);
    for (std::size_t round = 0; round < cap; ++round)
    {
        ++res.rounds;
        const auto mr = run_matcher(matcher, snr_table(ch, res.beamforming, k, cfg), cfg);
        res.bnb_nodes += mr.nodes;
        res.dcp_iterations += mr.iterations;
        const double matched = rate_of(mr.matching, res.beamforming);
        if (!have_matching || matched >= objective)
        {
            res.matching = mr.matching;
            objective = matched;
            have_matching = true;
        }

        if (M > 0 && !res.matching.empty())
        {
            SdpSolution sdp;
            try
            {
                sdp = solve_sdr(res.matching, lifted, k, cfg);
            }
            catch (const SdpError &e)
            {
                res.objective_trace.push_back(objective);
                finish();
                throw OptimizationError(e.what(), res);
            }
            res.sdp_iterations += sdp.iterations;
            auto bf = gaussian_randomization(sdp, cfg.solver.randomization_draws, res.matching, ch, k, cfg, rng);
            const double shaped = rate_of(res.matching, bf);
            if (shaped >= objective)
            {
                res.beamforming = std::move(bf);
                objective = shaped;
            }
        }
        res.objective_trace.push_back(objective);
        if (M == 0 || N == 0 || converged(res.objective_trace, cfg.solver.outer_threshold))
            break;
    }
    finish();
    return res;
}

} // namespace rislink
