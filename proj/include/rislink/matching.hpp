// SPDX-License-Identifier: Apache-2.0
//
// rislink - joint subcarrier matching and RIS passive beamforming for
// OFDM decode-and-forward relaying.
// ------------------------------------------------------------------------

#pragma once

#include "assignment.hpp"
#include "relaxation.hpp"
#include "snr_model.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

namespace rislink
{

enum class Fix : std::uint8_t
{
    Free,
    Zero,
    One
};

/// Row-major fixing state of the N x N matching variables x(p, q).
struct PartialAssignment
{
    std::size_t n = 0;
    std::vector<Fix> state;

    explicit PartialAssignment(std::size_t n_ = 0) : n(n_), state(n_ * n_, Fix::Free) {}

    Fix at(std::size_t p, std::size_t q) const { return state[p * n + q]; }
    Fix &at(std::size_t p, std::size_t q) { return state[p * n + q]; }

    /// No row or column holds more than one variable fixed to one.
    bool feasible() const
    {
        std::vector<int> row(n, 0), col(n, 0);
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = 0; q < n; ++q)
                if (at(p, q) == Fix::One && (++row[p] > 1 || ++col[q] > 1))
                    return false;
        return true;
    }

    Matching ones() const
    {
        Matching m;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = 0; q < n; ++q)
                if (at(p, q) == Fix::One)
                    m.pairs.emplace_back(p, q);
        return m;
    }
};

/// BnB subproblem: the fixings, its depth in the tree and the relaxation bound.
struct BnbNode
{
    PartialAssignment fixed;
    std::size_t depth = 0;
    double bound = 0.0;
};

struct FractionalMatching
{
    Eigen::MatrixXd x;          // N x N, entries in [0, 1]
    double objective = 0.0;     // certified upper bound in bits/s; -inf when infeasible
    double primal_objective = 0.0;
    bool feasible = true;
};

struct MatchResult
{
    Matching matching;
    double value = 0.0;            // true sum rate of `matching`, bits/s
    std::size_t nodes = 0;         // BnB relaxations solved
    std::size_t iterations = 0;    // DC inner iterations
    std::vector<double> trace;     // DC: surrogate optimum per inner iteration
    bool complete = true;          // false if the BnB node limit was hit
};

namespace detail
{
inline double nats_to_bps(const ScenarioConfig &c) { return c.rate_prefactor() / std::numbers::ln2; }
} // namespace detail

/// Box relaxation of the matching subproblem with the given fixings. The returned
/// objective is the Lagrangian dual value, so it bounds every binary completion.
inline FractionalMatching relaxed_bound(const PartialAssignment &fixed, const SnrTable &snr,
                                        const ScenarioConfig &c)
{
    const std::size_t n = snr.n();
    if (fixed.n != n)
        throw std::invalid_argument("relaxed_bound: fixing size does not match the SNR table.");
    FractionalMatching out;
    out.x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    if (!fixed.feasible())
    {
        out.feasible = false;
        out.objective = -std::numeric_limits<double>::infinity();
        out.primal_objective = out.objective;
        return out;
    }

    std::vector<char> row_blocked(n, 0), col_blocked(n, 0);
    double constant = 0.0;
    for (auto [p, q] : fixed.ones().pairs)
    {
        row_blocked[p] = col_blocked[q] = 1;
        out.x(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = 1.0;
        constant += pair_rate(snr.relay(static_cast<Eigen::Index>(p)),
                              snr.dest(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)), c);
    }

    BipartiteProgram prog;
    prog.n = n;
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q)
        {
            const double r = snr.relay(static_cast<Eigen::Index>(p));
            const double d = snr.dest(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
            if (fixed.at(p, q) == Fix::Free && !row_blocked[p] && !col_blocked[q] && r > 0.0 && d > 0.0)
                prog.pairs.push_back({p, q, r, d, 0.0});
        }

    const auto sol = solve_bipartite_program(prog, c.solver.relaxation_gap);
    for (std::size_t i = 0; i < prog.pairs.size(); ++i)
        out.x(static_cast<Eigen::Index>(prog.pairs[i].p), static_cast<Eigen::Index>(prog.pairs[i].q)) =
            sol.x(static_cast<Eigen::Index>(i));
    const double scale = detail::nats_to_bps(c);
    // a few ulps of headroom so summation order cannot put the bound below a completion
    const double dual = constant + scale * bipartite_dual_bound(prog, sol.row_dual, sol.col_dual);
    out.objective = dual + 64.0 * std::numeric_limits<double>::epsilon() * std::abs(dual);
    out.primal_objective = constant + scale * sol.objective;
    return out;
}

/// The binary matching a relaxed solution already represents, if any. A free entry
/// counts as one when it reaches the saturation point min(1, relay/dest) beyond which
/// its term is flat, and as zero when it vanishes.
inline std::optional<Matching> integral_matching(const FractionalMatching &fm, const PartialAssignment &fixed,
                                                 const SnrTable &snr, double tol = 1e-6)
{
    const std::size_t n = snr.n();
    Matching m = fixed.ones();
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q)
        {
            if (fixed.at(p, q) != Fix::Free)
                continue;
            const double x = fm.x(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
            const double r = snr.relay(static_cast<Eigen::Index>(p));
            const double d = snr.dest(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
            if (x <= tol)
                continue;
            const double cap = d > 0.0 ? std::min(1.0, r / d) : 1.0;
            if (x >= cap * (1.0 - tol))
                m.pairs.emplace_back(p, q);
            else
                return std::nullopt;
        }
    if (!m.is_valid(n))
        return std::nullopt;
    return m.normalized();
}

using BnbObserver = std::function<void(const BnbNode &)>;

/// Exact matching by depth-first branch and bound. Variables are branched from the
/// last one, x(N-1, N-1), towards x(0, 0), the zero child first. The incumbent starts
/// at the diagonal matching.
inline MatchResult bnb_match(const SnrTable &snr, const ScenarioConfig &c, const BnbObserver &observe = {})
{
    const std::size_t n = snr.n();
    const Eigen::MatrixXd w = pair_weights(snr, c);
    MatchResult res;

    auto drop_zero = [&w](Matching m)
    {
        Matching out;
        for (auto pq : m.pairs)
            if (w(static_cast<Eigen::Index>(pq.first), static_cast<Eigen::Index>(pq.second)) > 0.0)
                out.pairs.push_back(pq);
        return out.normalized();
    };

    res.matching = drop_zero(Matching::diagonal(n));
    res.value = matching_weight(res.matching, w);

    auto offer = [&](const Matching &m)
    {
        const Matching clean = drop_zero(m);
        const double v = matching_weight(clean, w);
        if (v > res.value)
        {
            res.value = v;
            res.matching = clean;
        }
    };

    auto evaluate = [&](BnbNode &node) -> FractionalMatching
    {
        auto fm = relaxed_bound(node.fixed, snr, c);
        node.bound = fm.objective;
        ++res.nodes;
        if (observe)
            observe(node);
        return fm;
    };

    BnbNode root{PartialAssignment(n), 0, 0.0};
    const auto root_fm = evaluate(root);
    if (!root_fm.feasible || root_fm.objective <= res.value)
        return res;
    if (auto m = integral_matching(root_fm, root.fixed, snr))
        offer(*m);

    std::function<void(const BnbNode &, std::size_t)> explore = [&](const BnbNode &node, std::size_t pos)
    {
        if (res.nodes >= c.solver.bnb_node_limit)
        {
            res.complete = false;
            return;
        }
        std::vector<char> row_one(n, 0), col_one(n, 0);
        for (auto [p, q] : node.fixed.ones().pairs)
            row_one[p] = col_one[q] = 1;

        // rightmost remaining variable not already forced to zero by a fixed one
        std::optional<std::size_t> pick;
        for (std::size_t j = pos; j-- > 0;)
        {
            const std::size_t p = j / n, q = j % n;
            if (node.fixed.state[j] == Fix::Free && !row_one[p] && !col_one[q])
            {
                pick = j;
                break;
            }
        }
        if (!pick)
        {
            offer(node.fixed.ones());
            return;
        }
        for (Fix value : {Fix::Zero, Fix::One})
        {
            BnbNode child{node.fixed, node.depth + 1, 0.0};
            child.fixed.state[*pick] = value;
            const auto fm = evaluate(child);
            if (!fm.feasible || fm.objective <= res.value)
                continue;
            if (auto m = integral_matching(fm, child.fixed, snr))
                offer(*m);
            explore(child, *pick);
        }
    };
    explore(root, n * n);
    return res;
}

/// eta * sum(x + x_prev^2 - 2 x_prev x): the penalty eta * sum x (1 - x) with -x^2
/// replaced by its tangent majorant at x_prev.
inline double dc_penalty(const Eigen::MatrixXd &x, const Eigen::MatrixXd &x_prev, double eta)
{
    return eta * (x.array() + x_prev.array().square() - 2.0 * x_prev.array() * x.array()).sum();
}

/// Default penalty weight: the largest single-pair rate the second hop supports.
inline double default_dcp_eta(const SnrTable &snr, const ScenarioConfig &c)
{
    const double d_max = snr.dest.size() > 0 ? snr.dest.maxCoeff() : 0.0;
    return c.rate_prefactor() * std::log2(1.0 + std::max(0.0, d_max));
}

/// Rounds a fractional matching: entries above one half, or an assignment on x
/// itself when the threshold leaves a row or column conflict.
inline Matching round_fractional(const Eigen::MatrixXd &x)
{
    const auto n = static_cast<std::size_t>(x.rows());
    Matching m;
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q)
            if (x(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) > 0.5)
                m.pairs.emplace_back(p, q);
    if (m.is_valid(n))
        return m.normalized();
    return assignment_oracle(x.cwiseMax(0.0)).matching;
}

/// Difference-of-convex penalty matching: repeatedly solves the relaxed program with
/// the linearized penalty, starting from the diagonal, then rounds.
inline MatchResult dcp_match(const SnrTable &snr, const ScenarioConfig &c)
{
    const std::size_t n = snr.n();
    const auto N = static_cast<Eigen::Index>(n);
    const Eigen::MatrixXd w = pair_weights(snr, c);
    const double eta = c.solver.dcp_eta.value_or(default_dcp_eta(snr, c));
    const double scale = detail::nats_to_bps(c);

    MatchResult res;
    Eigen::MatrixXd x_prev = Eigen::MatrixXd::Identity(N, N);
    Eigen::MatrixXd x = x_prev;
    for (std::size_t it = 0; it < c.solver.dcp_max_iterations; ++it)
    {
        BipartiteProgram prog;
        prog.n = n;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = 0; q < n; ++q)
            {
                const double r = snr.relay(static_cast<Eigen::Index>(p));
                const double d = snr.dest(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
                if (r > 0.0 && d > 0.0)
                {
                    const double slope = eta * (2.0 * x_prev(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) - 1.0);
                    prog.pairs.push_back({p, q, r, d, slope / scale});
                }
            }
        const auto sol = solve_bipartite_program(prog, c.solver.relaxation_gap);
        x.setZero();
        double rate_part = 0.0;
        for (std::size_t i = 0; i < prog.pairs.size(); ++i)
        {
            const auto &pr = prog.pairs[i];
            const double xi = sol.x(static_cast<Eigen::Index>(i));
            x(static_cast<Eigen::Index>(pr.p), static_cast<Eigen::Index>(pr.q)) = xi;
            rate_part += std::log1p(std::min(pr.relay, xi * pr.dest));
        }
        const double value = scale * rate_part - dc_penalty(x, x_prev, eta);
        ++res.iterations;
        const bool stop = !res.trace.empty() &&
                          value - res.trace.back() <= c.solver.dcp_threshold * std::max(std::abs(res.trace.back()), 1e-300);
        res.trace.push_back(value);
        x_prev = x;
        if (stop)
            break;
    }

    Matching m = round_fractional(x);
    Matching clean;
    for (auto pq : m.pairs)
        if (w(static_cast<Eigen::Index>(pq.first), static_cast<Eigen::Index>(pq.second)) > 0.0)
            clean.pairs.push_back(pq);
    res.matching = clean.normalized();
    res.value = matching_weight(res.matching, w);
    return res;
}

} // namespace rislink
