// SPDX-License-Identifier: Apache-2.0
//
// rislink - joint subcarrier matching and RIS passive beamforming for
// OFDM decode-and-forward relaying.
// ------------------------------------------------------------------------

#include <catch_amalgamated.hpp>

#include <rislink/optimizer.hpp>

using namespace rislink;
using Catch::Matchers::WithinRel;

static ScenarioConfig small_config(std::size_t n, std::size_t m, std::uint64_t seed)
{
    ScenarioConfig c;
    c.n_subcarriers = n;
    c.n_taps = std::min<std::size_t>(2, n);
    c.n_elements = m;
    c.rng_seed = seed;
    return c;
}

static bool trace_monotone(const std::vector<double> &trace)
{
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i] < trace[i - 1] * (1.0 - 1e-6))
            return false;
    return true;
}

TEST_CASE("Optimizer - Convergence test")
{
    CHECK_FALSE(converged({1.0}, 1e-6));
    CHECK(converged({1.0, 1.0}, 1e-6));
    CHECK_FALSE(converged({1.0, 2.0}, 1e-6));
    CHECK(converged({1.0, 1.0 + 1e-7}, 1e-6));
    CHECK_FALSE(converged({}, 1e-6));
}

TEST_CASE("Optimizer - No RIS")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        auto cfg = small_config(4, 0, seed);
        auto ch = generate_channel(cfg);
        for (auto matcher : {Matcher::Exact, Matcher::Dcp})
        {
            auto res = alternating_optimize(ch, cfg, matcher);
            CHECK(res.rounds == 1);
            CHECK(res.objective_trace.size() == 1);
            if (matcher == Matcher::Exact)
            {
                Eigen::VectorXcd none(0);
                const auto w = pair_weights(snr_table(ch, none, none, 0, cfg), cfg);
                CHECK_THAT(res.sum_rate_bps, WithinRel(assignment_oracle(w).value, 1e-9));
            }
        }
    }
}

TEST_CASE("Optimizer - Single pair, single element")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        auto cfg = small_config(1, 1, 300 + seed);
        auto ch = generate_channel(cfg);
        auto res = alternating_optimize(ch, cfg, Matcher::Exact);
        CHECK(res.matching == Matching::diagonal(1));
        auto grid = phase_sweep_oracle(res.matching, ch, 0, cfg, 720);
        CHECK_THAT(res.sum_rate_bps, WithinRel(sum_rate(res.matching, grid.v1, grid.v2, 0, ch, cfg), 1e-3));
    }
}

TEST_CASE("Optimizer - Result invariants")
{
    for (std::uint64_t seed = 0; seed < 8; ++seed)
        for (auto matcher : {Matcher::Exact, Matcher::Dcp})
            for (int k : {0, 1})
            {
                auto cfg = small_config(4, 4, 40 + seed);
                cfg.case_indicator = k;
                auto ch = generate_channel(cfg);
                auto res = alternating_optimize(ch, cfg, matcher);
                CHECK(trace_monotone(res.objective_trace));
                CHECK(res.objective_trace.size() == res.rounds);
                CHECK(res.rounds <= cfg.solver.max_rounds);
                CHECK(res.matching.is_valid(4));
                CHECK(res.beamforming.is_unit_modulus(1e-12));
                CHECK_THAT(res.sum_rate_bps,
                           WithinRel(sum_rate(res.matching, res.beamforming.v1, res.beamforming.v2, k, ch, cfg), 1e-9));
                CHECK_THAT(res.sum_rate_bps, WithinRel(res.objective_trace.back(), 1e-12));
                CHECK(res.snr.relay == snr_table(ch, res.beamforming, k, cfg).relay);
                if (matcher == Matcher::Exact)
                    CHECK(res.bnb_nodes > 0);
                else
                    CHECK(res.dcp_iterations > 0);
                CHECK(res.sdp_iterations > 0);
                CHECK(res.wall_time_s >= 0.0);
            }
}

TEST_CASE("Optimizer - Stops at the round cap")
{
    auto cfg = small_config(4, 4, 3);
    cfg.solver.max_rounds = 1;
    auto res = alternating_optimize(generate_channel(cfg), cfg, Matcher::Exact);
    CHECK(res.rounds == 1);
}

TEST_CASE("Optimizer - Reproducible")
{
    auto cfg = small_config(4, 8, 17);
    auto ch = generate_channel(cfg);
    auto a = alternating_optimize(ch, cfg, Matcher::Exact);
    auto b = alternating_optimize(ch, cfg, Matcher::Exact);
    CHECK(a.objective_trace == b.objective_trace);
    CHECK(a.matching == b.matching);
    CHECK(a.beamforming.v1 == b.beamforming.v1);
    CHECK(a.beamforming.v2 == b.beamforming.v2);
    CHECK(a.sum_rate_bps == b.sum_rate_bps);
    CHECK(a.bnb_nodes == b.bnb_nodes);

    auto first = initial_phases(cfg, 8);
    CHECK(first.is_unit_modulus(1e-12));
    CHECK(first.v1 == initial_phases(cfg, 8).v1);
}

TEST_CASE("Optimizer - Quantized output")
{
    auto cfg = small_config(4, 8, 23);
    auto ch = generate_channel(cfg);
    auto cont = alternating_optimize(ch, cfg, Matcher::Exact);
    cfg.quantization_bits = 2;
    auto quant = alternating_optimize(ch, cfg, Matcher::Exact);
    const double levels = 4.0;
    for (Eigen::Index m = 0; m < quant.beamforming.v1.size(); ++m)
    {
        const double step = std::arg(quant.beamforming.v1(m)) / (2.0 * std::numbers::pi / levels);
        CHECK(std::abs(step - std::round(step)) < 1e-9);
    }
    CHECK_THAT(quant.sum_rate_bps,
               WithinRel(sum_rate(quant.matching, quant.beamforming.v1, quant.beamforming.v2, 0, ch, cfg), 1e-9));
    CHECK(quant.matching == cont.matching);
}

TEST_CASE("Optimizer - Case II on average")
{
    double case1 = 0.0, case2 = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        auto cfg = small_config(4, 8, 800 + seed);
        auto ch = generate_channel(cfg);
        case1 += alternating_optimize(ch, cfg, Matcher::Exact).sum_rate_bps;
        cfg.case_indicator = 1;
        case2 += alternating_optimize(ch, cfg, Matcher::Exact).sum_rate_bps;
    }
    CHECK(case2 >= case1);
}

TEST_CASE("Optimizer - Solver failure carries the partial result")
{
    auto cfg = small_config(4, 8, 5);
    cfg.solver.sdp_max_iterations = 2;
    auto ch = generate_channel(cfg);
    try
    {
        alternating_optimize(ch, cfg, Matcher::Exact);
        FAIL("expected an OptimizationError");
    }
    catch (const OptimizationError &e)
    {
        const auto &partial = e.partial();
        CHECK(partial.matching.is_valid(4));
        CHECK(partial.objective_trace.size() == 1);
        CHECK(partial.sum_rate_bps > 0.0);
    }
}
