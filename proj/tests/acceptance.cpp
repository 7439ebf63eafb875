// SPDX-License-Identifier: Apache-2.0
//
// rislink - joint subcarrier matching and RIS passive beamforming for
// OFDM decode-and-forward relaying.
// ------------------------------------------------------------------------
//
// Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero if
// any criterion fails.

#include <rislink/rislink.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

using namespace rislink;

namespace
{

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Eigen::VectorXcd unit_phases(Eigen::Index m, Rng &rng)
{
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    Eigen::VectorXcd v(m);
    for (Eigen::Index i = 0; i < m; ++i)
        v(i) = std::polar(1.0, u(rng));
    return v;
}

ScenarioConfig sized(std::size_t n, std::size_t m, std::uint64_t seed)
{
    ScenarioConfig c;
    c.n_subcarriers = n;
    c.n_taps = std::min<std::size_t>(2, n);
    c.n_elements = m;
    c.rng_seed = seed;
    return c;
}

// SNR table of a seeded channel under random phases.
SnrTable matching_instance(std::size_t n, std::uint64_t seed)
{
    auto cfg = sized(n, 8, seed);
    auto ch = generate_channel(cfg);
    return snr_table(ch, initial_phases(cfg, 8), static_cast<int>(seed % 2), cfg);
}

// Best binary completion of a node: permutations consistent with the fixings, a
// pair fixed to zero counting as unmatched.
double best_completion(const Eigen::MatrixXd &w, const PartialAssignment &fixed)
{
    const std::size_t n = fixed.n;
    std::vector<std::size_t> sigma(n);
    std::iota(sigma.begin(), sigma.end(), 0);
    double best = -std::numeric_limits<double>::infinity();
    do
    {
        bool ok = true;
        for (std::size_t p = 0; p < n && ok; ++p)
            for (std::size_t q = 0; q < n && ok; ++q)
                if (fixed.at(p, q) == Fix::One && sigma[p] != q)
                    ok = false;
        if (!ok)
            continue;
        double v = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            if (fixed.at(p, sigma[p]) != Fix::Zero)
                v += w(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(sigma[p]));
        best = std::max(best, v);
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    return best;
}

// Mean rate per scheme over `trials` seeded channels of cfg.
std::vector<double> scheme_means(const ScenarioConfig &cfg, const std::vector<Scheme> &schemes, std::size_t trials,
                                 std::vector<std::vector<double>> *per_trial = nullptr)
{
    std::vector<double> mean(schemes.size(), 0.0);
    if (per_trial)
        per_trial->assign(schemes.size(), {});
    for (std::size_t s = 0; s < schemes.size(); ++s)
        for (std::size_t t = 0; t < trials; ++t)
        {
            const double r = run_scheme(schemes[s], cfg, trial_seed(cfg.rng_seed, t)).sum_rate_bps;
            mean[s] += r / static_cast<double>(trials);
            if (per_trial)
                (*per_trial)[s].push_back(r);
        }
    return mean;
}

bool sdp_valid(const SdpSolution &sdp)
{
    for (const auto *phi : {&sdp.phi1, &sdp.phi2})
    {
        if ((phi->diagonal().array() - 1.0).abs().maxCoeff() > 1e-7)
            return false;
        if (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(*phi).eigenvalues().minCoeff() < -1e-7)
            return false;
    }
    return true;
}

// ---------- criteria ----------

Outcome matching_optimality()
{
    ScenarioConfig cfg;
    std::size_t mismatches = 0, instances = 0;
    double solve_time = 0.0;
    for (std::size_t n : {2u, 3u, 4u, 5u})
        for (std::uint64_t s = 0; s < 100; ++s)
        {
            const auto t = matching_instance(n, 1000 * n + s);
            const auto t0 = std::chrono::steady_clock::now();
            const auto res = bnb_match(t, cfg);
            solve_time += seconds_since(t0);
            const double oracle = assignment_oracle(pair_weights(t, cfg)).value;
            if (!res.complete || std::abs(res.value - oracle) > 1e-9 * std::max(oracle, 1.0))
                ++mismatches;
            ++instances;
        }
    return {mismatches == 0 && solve_time < 60.0,
            fmt("%zu/%zu instances differ from the assignment oracle; BnB time %.2f s (limit 60 s)", mismatches,
                instances, solve_time)};
}

Outcome relaxation_soundness()
{
    ScenarioConfig cfg;
    std::size_t nodes = 0, violations = 0;
    for (std::size_t n : {2u, 3u, 4u, 5u})
        for (std::uint64_t s = 0; s < 100; ++s)
        {
            const auto t = matching_instance(n, 1000 * n + s);
            const auto w = pair_weights(t, cfg);
            const double optimum = assignment_oracle(w).value;
            if (relaxed_bound(PartialAssignment(n), t, cfg).objective < optimum)
                ++violations;
            bnb_match(t, cfg,
                      [&](const BnbNode &node)
                      {
                          ++nodes;
                          if (node.fixed.feasible() && node.bound < best_completion(w, node.fixed))
                              ++violations;
                      });
        }
    return {violations == 0, fmt("%zu violations over 400 root bounds and %zu explored nodes", violations, nodes)};
}

Outcome dcp_quality()
{
    auto cfg = sized(4, 8, 0xACCE97);
    std::vector<std::vector<double>> rates;
    const auto mean = scheme_means(cfg, {Scheme::BnbI, Scheme::DcpI}, 50, &rates);
    std::size_t above = 0;
    double worst = 0.0;
    for (std::size_t t = 0; t < 50; ++t)
    {
        const double rel = (rates[1][t] - rates[0][t]) / rates[0][t];
        if (rel > 1e-9)
        {
            ++above;
            worst = std::max(worst, rel);
        }
    }
    const double ratio = mean[1] / mean[0];
    return {ratio >= 0.95 && above == 0,
            fmt("mean DCP/BnB %.4f (need >= 0.95); DCP above BnB on %zu/50 seeds, largest excess %.2e relative",
                ratio, above, worst)};
}

Outcome dc_surrogate()
{
    Rng rng(0xDC);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t bad = 0;
    for (int i = 0; i < 100000; ++i)
    {
        const double x = u(rng);
        const double xp = i % 100 == 0 ? x : u(rng);
        const Eigen::MatrixXd X = Eigen::MatrixXd::Constant(1, 1, x);
        const Eigen::MatrixXd XP = Eigen::MatrixXd::Constant(1, 1, xp);
        // surrogate minus true penalty is (x' - x)^2 when the majorant holds
        const double gap = dc_penalty(X, XP, 1.0) - x * (1.0 - x);
        const bool holds = gap >= -1e-12;
        const bool tight = std::abs(gap) <= 1e-12;
        const bool should_be_tight = (x - xp) * (x - xp) <= 1e-12;
        if (!holds || tight != should_be_tight)
            ++bad;
    }
    return {bad == 0, fmt("%zu/100000 pairs violate x'^2 - 2x'x >= -x^2 or its equality case", bad)};
}

Outcome small_m_optimality(std::vector<SdpSolution> &solved)
{
    std::size_t off = 0;
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s)
    {
        auto cfg = sized(1, 1, 500 + s);
        auto ch = generate_channel(cfg);
        const auto res = alternating_optimize(ch, cfg, Matcher::Exact);
        const auto grid = phase_sweep_oracle(res.matching, ch, 0, cfg, 3600);
        const double ref = sum_rate(res.matching, grid.v1, grid.v2, 0, ch, cfg);
        const double rel = std::abs(res.sum_rate_bps - ref) / ref;
        worst = std::max(worst, rel);
        if (rel > 1e-3)
            ++off;
    }

    std::size_t close = 0;
    for (std::uint64_t s = 0; s < 100; ++s)
    {
        auto cfg = sized(4, 2, 7000 + s);
        auto ch = generate_channel(cfg);
        const auto m = Matching::diagonal(4);
        const int k = static_cast<int>(s % 2);
        Rng rng(mix_seed(s, 1));
        const auto sdp = solve_sdr(m, ch, k, cfg);
        solved.push_back(sdp);
        const auto bf = gaussian_randomization(sdp, 1000, m, ch, k, cfg, rng);
        const auto grid = phase_sweep_oracle(m, ch, k, cfg, 64);
        if (sum_rate(m, bf.v1, bf.v2, k, ch, cfg) >= 0.95 * sum_rate(m, grid.v1, grid.v2, k, ch, cfg))
            ++close;
    }
    return {off == 0 && close >= 90,
            fmt("M=1: %zu/50 seeds off the phase sweep by > 1e-3 (worst %.2e); M=2: %zu/100 within 5%% of the "
                "64-level grid (need 90)",
                off, worst, close)};
}

Outcome sdp_validity(std::vector<SdpSolution> &solved)
{
    std::size_t invalid = 0, above = 0, count = 0;
    Rng rng(0x5D9);
    for (std::size_t M : {1u, 2u, 4u, 8u, 16u})
        for (int k : {0, 1})
            for (std::uint64_t s = 0; s < 20; ++s)
            {
                auto cfg = sized(4, M, 40000 + 100 * M + s);
                auto ch = generate_channel(cfg);
                auto m = bnb_match(snr_table(ch, initial_phases(cfg, M), k, cfg), cfg).matching;
                const auto sdp = solve_sdr(m, ch, k, cfg);
                const auto bf = gaussian_randomization(sdp, cfg.solver.randomization_draws, m, ch, k, cfg, rng);
                ++count;
                if (!sdp_valid(sdp))
                    ++invalid;
                if (sum_rate(m, bf.v1, bf.v2, k, ch, cfg) > sdp.upper_bound)
                    ++above;
            }
    for (const auto &sdp : solved)
    {
        ++count;
        if (!sdp_valid(sdp))
            ++invalid;
    }
    return {invalid == 0 && above == 0,
            fmt("%zu/%zu solutions off unit diagonal or PSD at 1e-7; %zu extracted rates above the bound", invalid,
                count, above)};
}

Outcome monotone_convergence()
{
    std::size_t runs = 0, violations = 0, rounds = 0;
    for (auto matcher : {Matcher::Exact, Matcher::Dcp})
        for (int k : {0, 1})
            for (std::uint64_t s = 0; s < 50; ++s)
            {
                auto cfg = sized(4, 8, trial_seed(0x7EACE, s));
                cfg.case_indicator = k;
                const auto res = alternating_optimize(generate_channel(cfg), cfg, matcher);
                ++runs;
                rounds += res.rounds;
                for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
                    if (res.objective_trace[i] < res.objective_trace[i - 1] * (1.0 - 1e-6))
                    {
                        ++violations;
                        break;
                    }
            }
    return {runs == 200 && violations == 0,
            fmt("%zu/%zu runs with a decreasing trace; %.2f rounds on average", violations, runs,
                static_cast<double>(rounds) / static_cast<double>(runs))};
}

Outcome case_two_blockage()
{
    auto cfg = sized(4, 16, ScenarioConfig{}.rng_seed);
    const auto open = scheme_means(cfg, {Scheme::BnbI, Scheme::BnbII}, 50);
    for (auto l : {Link::SourceRelay, Link::RelayDest, Link::RisRelay, Link::RelayRis})
        cfg.shadow(l) = -20.0;
    const auto blocked = scheme_means(cfg, {Scheme::BnbI, Scheme::BnbII}, 50);
    const double gain = (blocked[1] - blocked[0]) / blocked[0];
    const double gap = std::abs(open[1] - open[0]) / open[0];
    return {blocked[1] > blocked[0] && gap < 0.02,
            fmt("blockage: BnB-II %.6g vs BnB-I %.6g bps (%+.3f%%); no blockage gap %.3f%% (limit 2%%)", blocked[1],
                blocked[0], 100.0 * gain, 100.0 * gap)};
}

Outcome element_scaling()
{
    std::vector<double> bnb;
    for (std::size_t M : {4u, 8u, 16u})
        bnb.push_back(scheme_means(sized(4, M, ScenarioConfig{}.rng_seed), {Scheme::BnbI}, 50)[0]);
    const auto at16 = scheme_means(sized(4, 16, ScenarioConfig{}.rng_seed), {Scheme::BnbI, Scheme::RandomI, Scheme::RelayOnly}, 50);
    const bool increasing = bnb[0] < bnb[1] && bnb[1] < bnb[2];
    const bool ordered = at16[0] > at16[1] && at16[1] > at16[2];
    return {increasing && ordered,
            fmt("BnB-I at M=4,8,16: %.6g, %.6g, %.6g; at M=16 BnB-I %.6g, Random-I %.6g, RelayOnly %.6g", bnb[0],
                bnb[1], bnb[2], at16[0], at16[1], at16[2])};
}

Outcome balanced_snr()
{
    // first pinned-seed run of this gate gave 0.824059 / 0.546565; frozen here
    constexpr double frozen_factor = 1.5077;
    auto cfg = sized(4, 16, ScenarioConfig{}.rng_seed);
    cfg.d_source_relay_m = cfg.d_relay_dest_m = 10.0;
    cfg.fading_exponent = 3.0;
    double with_ris = 0.0, without = 0.0;
    for (std::size_t t = 0; t < 50; ++t)
    {
        const auto seed = trial_seed(cfg.rng_seed, t);
        with_ris += snr_balance_report(run_scheme(Scheme::BnbI, cfg, seed)).mean_ratio / 50.0;
        without += snr_balance_report(run_scheme(Scheme::RelayOnly, cfg, seed)).mean_ratio / 50.0;
    }
    const double factor = with_ris / without;
    const bool regression = std::abs(factor - frozen_factor) <= 1e-3 * frozen_factor;
    return {factor >= 1.5 && regression,
            fmt("mean min/max ratio BnB-I %.6f vs RelayOnly %.6f: factor %.4f (need >= 1.5, frozen %.4f)", with_ris,
                without, factor, frozen_factor)};
}

Outcome quantization()
{
    auto cfg = sized(4, 16, 0x0B175);
    cfg.d_source_relay_m = cfg.d_relay_dest_m = 10.0;
    std::vector<double> mean;
    for (int bits : {0, 1, 4})
    {
        auto c = cfg;
        if (bits > 0)
            c.quantization_bits = bits;
        mean.push_back(scheme_means(c, {Scheme::DcpI}, 50)[0]);
    }
    const double r4 = mean[2] / mean[0], r1 = mean[1] / mean[0];
    return {r4 >= 0.98 && mean[1] < mean[2],
            fmt("DCP-I 4-bit/continuous %.4f (need >= 0.98); 1-bit/continuous %.4f", r4, r1)};
}

Outcome runtime_ordering()
{
    SweepSpec spec;
    spec.base.rng_seed = 0xBE4C;
    spec.parameter = SweepParameter::NSubcarriers;
    spec.values = {2, 3, 4, 5};
    spec.trials = 10;
    spec.schemes = {Scheme::BnbI, Scheme::DcpI};
    const auto rows = timing_table(spec, 1);
    auto time_of = [&](Scheme s, double n)
    {
        for (const auto &r : rows)
            if (r.scheme == s && r.value == n)
                return r.mean_time_s;
        return std::numeric_limits<double>::quiet_NaN();
    };
    bool ordered = true;
    std::string cells;
    for (double n : spec.values)
    {
        const double b = time_of(Scheme::BnbI, n), d = time_of(Scheme::DcpI, n);
        if (n >= 3 && !(b > d))
            ordered = false;
        cells += fmt("N=%g %.4f/%.4f s; ", n, b, d);
    }
    const double bnb_growth = time_of(Scheme::BnbI, 5) / time_of(Scheme::BnbI, 2);
    const double dcp_growth = time_of(Scheme::DcpI, 5) / time_of(Scheme::DcpI, 2);
    const bool shapes = bnb_growth > 2.5 && dcp_growth < 6.25 && bnb_growth > dcp_growth;
    return {ordered && shapes,
            fmt("BnB/DCP %sgrowth N=2->5 BnB x%.2f (need > 2.5), DCP x%.2f (need < 6.25)", cells.c_str(),
                bnb_growth, dcp_growth)};
}

} // namespace

int main()
{
    std::vector<SdpSolution> solved;
    const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
        {"Matching optimality", matching_optimality},
        {"Relaxation soundness", relaxation_soundness},
        {"DCP quality", dcp_quality},
        {"DC surrogate", dc_surrogate},
        {"Beamforming optimality at small M", [&] { return small_m_optimality(solved); }},
        {"SDP validity", [&] { return sdp_validity(solved); }},
        {"Monotone convergence", monotone_convergence},
        {"Case-II under blockage", case_two_blockage},
        {"Element scaling", element_scaling},
        {"Balanced SNR", balanced_snr},
        {"Quantization", quantization},
        {"Runtime ordering", runtime_ordering},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = criteria[i].second();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
