// SPDX-License-Identifier: Apache-2.0
//
// rislink - joint subcarrier matching and RIS passive beamforming for
// OFDM decode-and-forward relaying.
// ------------------------------------------------------------------------

#pragma once

#include "channel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rislink
{

/// Exclusive pairing of first-hop subcarriers p to second-hop subcarriers q (0-based).
struct Matching
{
    std::vector<std::pair<std::size_t, std::size_t>> pairs;

    bool empty() const { return pairs.empty(); }
    std::size_t size() const { return pairs.size(); }

    /// Every p and every q at most once, all indices below n.
    bool is_valid(std::size_t n) const
    {
        std::vector<char> row(n, 0), col(n, 0);
        for (auto [p, q] : pairs)
        {
            if (p >= n || q >= n || row[p] || col[q])
                return false;
            row[p] = col[q] = 1;
        }
        return true;
    }

    /// Pairs sorted by p, for stable comparison and output.
    Matching normalized() const
    {
        Matching m = *this;
        std::sort(m.pairs.begin(), m.pairs.end());
        return m;
    }

    bool operator==(const Matching &o) const { return normalized().pairs == o.normalized().pairs; }

    static Matching diagonal(std::size_t n)
    {
        Matching m;
        for (std::size_t i = 0; i < n; ++i)
            m.pairs.emplace_back(i, i);
        return m;
    }
};

/// Reflection coefficients of both slots, optionally with the SDR certificate.
struct BeamformingSolution
{
    Eigen::VectorXcd v1, v2;
    std::optional<Eigen::MatrixXcd> phi1, phi2;
    std::optional<double> sdp_upper_bound;

    bool is_unit_modulus(double tol = 1e-9) const
    {
        auto ok = [tol](const Eigen::VectorXcd &v)
        {
            for (Eigen::Index i = 0; i < v.size(); ++i)
                if (std::abs(std::abs(v(i)) - 1.0) > tol)
                    return false;
            return true;
        };
        return ok(v1) && ok(v2);
    }
};

/// Per-subcarrier SNRs for a fixed beamformer: relay(p) and dest(p, q). Linear scale.
struct SnrTable
{
    Eigen::VectorXd relay;
    Eigen::MatrixXd dest;

    std::size_t n() const { return static_cast<std::size_t>(relay.size()); }
};

namespace detail
{
inline void check_index(std::size_t i, std::size_t n, const char *what)
{
    if (i >= n)
        throw std::out_of_range(std::string(what) + ": subcarrier index out of range.");
}

/// sum_m v_m x_m; an empty RIS contributes zero.
inline cplx reflect(const Eigen::VectorXcd &v, const Eigen::MatrixXcd &cascade, std::size_t n)
{
    if (cascade.rows() == 0)
        return 0.0;
    if (v.size() != cascade.rows())
        throw std::invalid_argument("Phase vector length does not match the number of RIS elements.");
    return (cascade.col(static_cast<Eigen::Index>(n)).array() * v.array()).sum();
}
} // namespace detail

/// P1 |g^SR_p + v1' a_p|^2 / sigma^2.
inline double snr_relay(std::size_t p, const Eigen::VectorXcd &v1, const ChannelRealization &ch,
                        const ScenarioConfig &c)
{
    detail::check_index(p, ch.n_subcarriers(), "snr_relay");
    const cplx eff = ch.g_sr(static_cast<Eigen::Index>(p)) + detail::reflect(v1, ch.a, p);
    return c.p_source_w * std::norm(eff) / c.noise_power_w;
}

/// k P1 |v1' c_p|^2 / sigma^2 + P2 |g^RD_q + v2' b_q|^2 / sigma^2.
inline double snr_dest(std::size_t p, std::size_t q, const Eigen::VectorXcd &v1, const Eigen::VectorXcd &v2,
                       int k, const ChannelRealization &ch, const ScenarioConfig &c)
{
    detail::check_index(p, ch.n_subcarriers(), "snr_dest");
    detail::check_index(q, ch.n_subcarriers(), "snr_dest");
    double snr = c.p_relay_w *
                 std::norm(ch.g_rd(static_cast<Eigen::Index>(q)) + detail::reflect(v2, ch.b, q)) / c.noise_power_w;
    if (k != 0)
        snr += c.p_source_w * std::norm(detail::reflect(v1, ch.c, p)) / c.noise_power_w;
    return snr;
}

/// (Delta / 2T) log2(1 + min(snr_r, snr_d)) in bits/s.
inline double pair_rate(double snr_r, double snr_d, const ScenarioConfig &c)
{
    if (snr_r < 0.0 || snr_d < 0.0 || std::isnan(snr_r) || std::isnan(snr_d))
        throw std::domain_error("pair_rate: SNRs must be non-negative.");
    return c.rate_prefactor() * std::log2(1.0 + std::min(snr_r, snr_d));
}

inline SnrTable snr_table(const ChannelRealization &ch, const Eigen::VectorXcd &v1, const Eigen::VectorXcd &v2,
                          int k, const ScenarioConfig &c)
{
    const std::size_t n = ch.n_subcarriers();
    SnrTable t;
    t.relay.resize(static_cast<Eigen::Index>(n));
    t.dest.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::VectorXd second(static_cast<Eigen::Index>(n)), first(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto ii = static_cast<Eigen::Index>(i);
        t.relay(ii) = snr_relay(i, v1, ch, c);
        second(ii) = c.p_relay_w * std::norm(ch.g_rd(ii) + detail::reflect(v2, ch.b, i)) / c.noise_power_w;
        first(ii) = k != 0 ? c.p_source_w * std::norm(detail::reflect(v1, ch.c, i)) / c.noise_power_w : 0.0;
    }
    for (Eigen::Index p = 0; p < t.dest.rows(); ++p)
        for (Eigen::Index q = 0; q < t.dest.cols(); ++q)
            t.dest(p, q) = first(p) + second(q);
    return t;
}

inline SnrTable snr_table(const ChannelRealization &ch, const BeamformingSolution &bf, int k, const ScenarioConfig &c)
{
    return snr_table(ch, bf.v1, bf.v2, k, c);
}

/// Rate w(p, q) each pair would earn if matched.
inline Eigen::MatrixXd pair_weights(const SnrTable &t, const ScenarioConfig &c)
{
    Eigen::MatrixXd w(t.dest.rows(), t.dest.cols());
    for (Eigen::Index p = 0; p < w.rows(); ++p)
        for (Eigen::Index q = 0; q < w.cols(); ++q)
            w(p, q) = pair_rate(t.relay(p), t.dest(p, q), c);
    return w;
}

/// Sum of pair rates over the matched pairs; unmatched subcarriers carry nothing.
inline double sum_rate(const Matching &m, const SnrTable &t, const ScenarioConfig &c)
{
    double total = 0.0;
    for (auto [p, q] : m.pairs)
        total += pair_rate(t.relay(static_cast<Eigen::Index>(p)),
                           t.dest(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)), c);
    return total;
}

inline double sum_rate(const Matching &m, const Eigen::VectorXcd &v1, const Eigen::VectorXcd &v2, int k,
                       const ChannelRealization &ch, const ScenarioConfig &c)
{
    double total = 0.0;
    for (auto [p, q] : m.pairs)
        total += pair_rate(snr_relay(p, v1, ch, c), snr_dest(p, q, v1, v2, k, ch, c), c);
    return total;
}

} // namespace rislink
