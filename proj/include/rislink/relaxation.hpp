// SPDX-License-Identifier: Apache-2.0
//
// rislink - joint subcarrier matching and RIS passive beamforming for
// OFDM decode-and-forward relaying.
// ------------------------------------------------------------------------

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rislink
{

/// One free pair (p, q) of a box-relaxed matching program. `relay` and `dest` are
/// the linear SNRs (both > 0); `linear` is an extra objective slope on x in nats.
struct RelaxedPair
{
    std::size_t p = 0, q = 0;
    double relay = 0.0, dest = 0.0;
    double linear = 0.0;
};

/// maximize  sum_i log(1 + min(relay_i, x_i dest_i)) + linear_i x_i
/// s.t.      0 <= x_i <= 1, row sums <= 1, column sums <= 1.
///
/// The min is carried by a slack beta_i = alpha_i / dest_i with beta_i <= relay_i/dest_i
/// and beta_i <= x_i, which keeps every variable O(1).
struct BipartiteProgram
{
    std::size_t n = 0;
    std::vector<RelaxedPair> pairs;
};

struct BipartiteSolution
{
    Eigen::VectorXd x;        // per pair, same order as the program
    Eigen::VectorXd row_dual; // length n; zero for rows without pairs
    Eigen::VectorXd col_dual;
    double objective = 0.0;   // nats, evaluated at x
    std::size_t newton_steps = 0;
    double barrier_gap = 0.0; // m / t at exit
};

namespace detail
{
struct BarrierState
{
    Eigen::VectorXd x, beta;
};
} // namespace detail

/// Primal log-barrier method. Each Newton system is eliminated down to the 2n row and
/// column constraints (pair blocks are 2 x 2), which keeps a step at O(pairs + n^3).
inline BipartiteSolution solve_bipartite_program(const BipartiteProgram &prog, double gap_tol = 1e-9,
                                                 std::size_t max_newton = 2000)
{
    const std::size_t P = prog.pairs.size();
    const std::size_t n = prog.n;
    BipartiteSolution sol;
    sol.x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(P));
    sol.row_dual = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    sol.col_dual = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    if (P == 0)
        return sol;

    // constraint index: rows [0, n), cols [n, 2n); only used ones appear in K
    std::vector<std::size_t> row_deg(n, 0), col_deg(n, 0);
    Eigen::ArrayXd D(static_cast<Eigen::Index>(P)), tau(static_cast<Eigen::Index>(P)), lin(static_cast<Eigen::Index>(P));
    for (std::size_t i = 0; i < P; ++i)
    {
        const auto &pr = prog.pairs[i];
        if (pr.p >= n || pr.q >= n)
            throw std::invalid_argument("solve_bipartite_program: pair index out of range.");
        if (!(pr.relay > 0.0) || !(pr.dest > 0.0))
            throw std::invalid_argument("solve_bipartite_program: pair SNRs must be positive.");
        ++row_deg[pr.p];
        ++col_deg[pr.q];
        const auto ii = static_cast<Eigen::Index>(i);
        D(ii) = pr.dest;
        tau(ii) = pr.relay / pr.dest;
        lin(ii) = pr.linear;
    }
    std::vector<Eigen::Index> con_of_row(n, -1), con_of_col(n, -1);
    Eigen::Index n_con = 0;
    std::size_t max_deg = 1;
    for (std::size_t r = 0; r < n; ++r)
        if (row_deg[r] > 0)
        {
            con_of_row[r] = n_con++;
            max_deg = std::max(max_deg, row_deg[r]);
        }
    for (std::size_t c = 0; c < n; ++c)
        if (col_deg[c] > 0)
        {
            con_of_col[c] = n_con++;
            max_deg = std::max(max_deg, col_deg[c]);
        }
    std::vector<Eigen::Index> rc(P), cc(P);
    for (std::size_t i = 0; i < P; ++i)
    {
        rc[i] = con_of_row[prog.pairs[i].p];
        cc[i] = con_of_col[prog.pairs[i].q];
    }
    const double m_total = 4.0 * static_cast<double>(P) + static_cast<double>(n_con);

    detail::BarrierState z;
    z.x = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(P), 0.5 / static_cast<double>(max_deg));
    z.beta = 0.5 * z.x.array().min(tau.matrix().array()).matrix();

    auto con_slack = [&](const Eigen::VectorXd &x)
    {
        Eigen::VectorXd s = Eigen::VectorXd::Ones(n_con);
        for (std::size_t i = 0; i < P; ++i)
        {
            const auto ii = static_cast<Eigen::Index>(i);
            s(rc[i]) -= x(ii);
            s(cc[i]) -= x(ii);
        }
        return s;
    };

    const double inf = std::numeric_limits<double>::infinity();
    auto barrier = [&](double t, const detail::BarrierState &s) -> double
    {
        double f = 0.0;
        for (std::size_t i = 0; i < P; ++i)
        {
            const auto ii = static_cast<Eigen::Index>(i);
            const double x = s.x(ii), b = s.beta(ii);
            const double e = 1.0 + D(ii) * b, s1 = tau(ii) - b, s2 = x - b, s4 = 1.0 - x;
            if (!(e > 0.0 && s1 > 0.0 && s2 > 0.0 && x > 0.0 && s4 > 0.0))
                return inf;
            f += -t * (std::log(e) + lin(ii) * x) - std::log(s1) - std::log(s2) - std::log(x) - std::log(s4);
        }
        const Eigen::VectorXd cs = con_slack(s.x);
        for (Eigen::Index k = 0; k < n_con; ++k)
        {
            if (!(cs(k) > 0.0))
                return inf;
            f -= std::log(cs(k));
        }
        return f;
    };

    Eigen::VectorXd gx(static_cast<Eigen::Index>(P)), gb(static_cast<Eigen::Index>(P));
    Eigen::VectorXd hbb(static_cast<Eigen::Index>(P)), hxb(static_cast<Eigen::Index>(P)), d(static_cast<Eigen::Index>(P));
    Eigen::MatrixXd K(n_con, n_con);

    double t = 1.0;
    std::size_t steps = 0;
    const double mu = 100.0;
    while (true)
    {
        // centering
        double prev_dec2 = inf;
        for (std::size_t it = 0; it < 200; ++it)
        {
            const Eigen::VectorXd cs = con_slack(z.x);
            for (std::size_t i = 0; i < P; ++i)
            {
                const auto ii = static_cast<Eigen::Index>(i);
                const double x = z.x(ii), b = z.beta(ii);
                const double e = 1.0 + D(ii) * b, s1 = tau(ii) - b, s2 = x - b, s4 = 1.0 - x;
                gb(ii) = -t * D(ii) / e + 1.0 / s1 + 1.0 / s2;
                gx(ii) = -t * lin(ii) - 1.0 / s2 - 1.0 / x + 1.0 / s4 + 1.0 / cs(rc[i]) + 1.0 / cs(cc[i]);
                const double own = t * D(ii) * D(ii) / (e * e) + 1.0 / (s1 * s1);
                const double link = 1.0 / (s2 * s2);
                hbb(ii) = own + link;
                hxb(ii) = -link;
                // Schur complement of the beta entry, written without cancellation
                d(ii) = 1.0 / (x * x) + 1.0 / (s4 * s4) + link * own / hbb(ii);
            }
            const Eigen::VectorXd g_red = gx.array() - hxb.array() * gb.array() / hbb.array();
            const Eigen::VectorXd y = g_red.array() / d.array();

            // (diag(d) + G' W G)^-1 via Woodbury, K = W^-1 + G diag(d)^-1 G'
            K.setZero();
            for (Eigen::Index k = 0; k < n_con; ++k)
                K(k, k) = cs(k) * cs(k);
            Eigen::VectorXd Gy = Eigen::VectorXd::Zero(n_con);
            for (std::size_t i = 0; i < P; ++i)
            {
                const auto ii = static_cast<Eigen::Index>(i);
                const double inv_d = 1.0 / d(ii);
                K(rc[i], rc[i]) += inv_d;
                K(cc[i], cc[i]) += inv_d;
                K(rc[i], cc[i]) += inv_d;
                K(cc[i], rc[i]) += inv_d;
                Gy(rc[i]) += y(ii);
                Gy(cc[i]) += y(ii);
            }
            const Eigen::VectorXd w = K.ldlt().solve(Gy);
            Eigen::VectorXd dx(static_cast<Eigen::Index>(P)), db(static_cast<Eigen::Index>(P));
            for (std::size_t i = 0; i < P; ++i)
            {
                const auto ii = static_cast<Eigen::Index>(i);
                dx(ii) = -(y(ii) - (w(rc[i]) + w(cc[i])) / d(ii));
                db(ii) = -(gb(ii) + hxb(ii) * dx(ii)) / hbb(ii);
            }
            const double dec2 = -(gx.dot(dx) + gb.dot(db));
            ++steps;
            if (!(dec2 >= 0.0) || dec2 * 0.5 < 1e-8 || steps > max_newton)
                break;
            if (dec2 < 1e-4 && dec2 >= prev_dec2)
                break; // decrement has hit the rounding floor
            prev_dec2 = dec2;

            // largest step keeping every slack positive
            double smax = 1.0 / 0.99;
            auto limit = [&smax](double s, double ds)
            {
                if (ds < 0.0)
                    smax = std::min(smax, -s / ds);
            };
            Eigen::VectorXd dcs = Eigen::VectorXd::Zero(n_con);
            for (std::size_t i = 0; i < P; ++i)
            {
                const auto ii = static_cast<Eigen::Index>(i);
                const double x = z.x(ii), b = z.beta(ii);
                limit(1.0 + D(ii) * b, D(ii) * db(ii));
                limit(tau(ii) - b, -db(ii));
                limit(x - b, dx(ii) - db(ii));
                limit(x, dx(ii));
                limit(1.0 - x, -dx(ii));
                dcs(rc[i]) -= dx(ii);
                dcs(cc[i]) -= dx(ii);
            }
            for (Eigen::Index k = 0; k < n_con; ++k)
                limit(cs(k), dcs(k));
            double step = std::min(1.0, 0.99 * smax);
            detail::BarrierState trial;
            if (dec2 < 1e-6 && step < 1.0)
                break; // direction is rounding noise this close to the centre
            if (dec2 < 0.0625 && step == 1.0)
            {
                // quadratic region of a self-concordant barrier: the full step decreases it
                z.x += dx;
                z.beta += db;
                continue;
            }
            const double f0 = barrier(t, z);
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls)
            {
                trial.x = z.x + step * dx;
                trial.beta = z.beta + step * db;
                const double f1 = barrier(t, trial);
                if (f1 <= f0 - 0.25 * step * dec2)
                {
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved)
                break;
            z = std::move(trial);
        }
        if (m_total / t < gap_tol || steps > max_newton)
            break;
        t *= mu;
    }

    sol.x = z.x;
    const Eigen::VectorXd cs = con_slack(z.x);
    for (std::size_t r = 0; r < n; ++r)
        if (con_of_row[r] >= 0)
            sol.row_dual(static_cast<Eigen::Index>(r)) = 1.0 / (t * cs(con_of_row[r]));
    for (std::size_t c = 0; c < n; ++c)
        if (con_of_col[c] >= 0)
            sol.col_dual(static_cast<Eigen::Index>(c)) = 1.0 / (t * cs(con_of_col[c]));
    double obj = 0.0;
    for (std::size_t i = 0; i < P; ++i)
    {
        const auto ii = static_cast<Eigen::Index>(i);
        const auto &pr = prog.pairs[i];
        obj += std::log1p(std::min(pr.relay, z.x(ii) * pr.dest)) + pr.linear * z.x(ii);
    }
    sol.objective = obj;
    sol.newton_steps = steps;
    sol.barrier_gap = m_total / t;
    return sol;
}

/// Lagrangian dual of the program with zero linear terms, dualizing only the row and
/// column sums. Any non-negative multipliers give an upper bound on the optimum; the
/// inner maximization over each x_i in [0, 1] is solved in closed form.
inline double bipartite_dual_bound(const BipartiteProgram &prog, const Eigen::VectorXd &row_dual,
                                   const Eigen::VectorXd &col_dual)
{
    double bound = 0.0;
    std::vector<char> row_used(prog.n, 0), col_used(prog.n, 0);
    for (const auto &pr : prog.pairs)
    {
        row_used[pr.p] = col_used[pr.q] = 1;
        const double price = std::max(0.0, row_dual(static_cast<Eigen::Index>(pr.p))) +
                             std::max(0.0, col_dual(static_cast<Eigen::Index>(pr.q)));
        const double cap = std::min(1.0, pr.relay / pr.dest); // beyond cap the log term is flat
        double x = cap;
        if (price > 0.0)
            x = std::clamp(1.0 / price - 1.0 / pr.dest, 0.0, cap);
        bound += std::log1p(pr.dest * x) - price * x;
    }
    for (std::size_t r = 0; r < prog.n; ++r)
        if (row_used[r])
            bound += std::max(0.0, row_dual(static_cast<Eigen::Index>(r)));
    for (std::size_t c = 0; c < prog.n; ++c)
        if (col_used[c])
            bound += std::max(0.0, col_dual(static_cast<Eigen::Index>(c)));
    return bound;
}

} // namespace rislink
