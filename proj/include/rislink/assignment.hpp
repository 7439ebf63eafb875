// SPDX-License-Identifier: Apache-2.0
//
// rislink - joint subcarrier matching and RIS passive beamforming for
// OFDM decode-and-forward relaying.
// ------------------------------------------------------------------------

#pragma once

#include "snr_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rislink
{

struct AssignmentResult
{
    Matching matching;
    double value = 0.0;
};

/// Maximum-weight matching on an n x n non-negative weight matrix
/// (Kuhn-Munkres with potentials, O(n^3)). Zero-weight pairs are left unmatched.
inline AssignmentResult assignment_oracle(const Eigen::MatrixXd &weights)
{
    const auto n = static_cast<std::size_t>(weights.rows());
    if (weights.cols() != weights.rows())
        throw std::invalid_argument("assignment_oracle: weight matrix must be square.");
    double w_max = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i)
    {
        const double w = weights.data()[i];
        if (std::isnan(w) || !std::isfinite(w))
            throw std::domain_error("assignment_oracle: weights must be finite.");
        w_max = std::max(w_max, w);
    }
    AssignmentResult out;
    if (n == 0)
        return out;

    // minimize cost = w_max - w over perfect matchings (1-based potentials)
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i)
    {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do
        {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j)
            {
                if (used[j])
                    continue;
                const double cost = w_max - weights(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1));
                const double cur = cost - u[i0] - v[j];
                if (cur < minv[j])
                {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta)
                {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j)
            {
                if (used[j])
                {
                    u[p[j]] += delta;
                    v[j] -= delta;
                }
                else
                    minv[j] -= delta;
            }
            j0 = j1;
        } while (p[j0] != 0);
        do
        {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    for (std::size_t j = 1; j <= n; ++j)
    {
        const std::size_t row = p[j] - 1, col = j - 1;
        const double w = weights(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
        if (w > 0.0)
        {
            out.matching.pairs.emplace_back(row, col);
            out.value += w;
        }
    }
    out.matching = out.matching.normalized();
    return out;
}

/// Total weight of a matching.
inline double matching_weight(const Matching &m, const Eigen::MatrixXd &weights)
{
    double total = 0.0;
    for (auto [p, q] : m.pairs)
        total += weights(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
    return total;
}

} // namespace rislink
