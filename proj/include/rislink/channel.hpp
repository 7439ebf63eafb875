// SPDX-License-Identifier: Apache-2.0
//
// rislink - joint subcarrier matching and RIS passive beamforming for
// OFDM decode-and-forward relaying.
// ------------------------------------------------------------------------

#pragma once

#include "config.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace rislink
{

using cplx = std::complex<double>;
using Rng = std::mt19937_64;

/// splitmix64 finalizer, used to derive independent seeds from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// ---------- large-scale fading ----------

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// Large-scale fading PL1 + 10 log10((d / D1)^-alpha) + shadowing, in dB.
inline double path_loss_db(double d_m, double exponent, double pl1_db, double ref_m, double shadow_db)
{
    if (!(d_m > 0.0))
        throw std::domain_error("path_loss_db: distance must be positive.");
    if (!(ref_m > 0.0))
        throw std::domain_error("path_loss_db: reference distance must be positive.");
    return pl1_db - 10.0 * exponent * std::log10(d_m / ref_m) + shadow_db;
}

struct Point3
{
    double x = 0.0, y = 0.0, z = 0.0;
};

inline double distance(const Point3 &a, const Point3 &b)
{
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

/// Node placement: source at the origin, relay at (d1,0,0), destination at
/// (d1+d2,0,0), RIS at (d1, d3, height).
struct Placement
{
    Point3 source, relay, destination, ris;

    static Placement from(const ScenarioConfig &c)
    {
        Placement p;
        p.relay = {c.d_source_relay_m, 0.0, 0.0};
        p.destination = {c.d_source_relay_m + c.d_relay_dest_m, 0.0, 0.0};
        p.ris = {c.d_source_relay_m, c.d_ris_relay_m, c.ris_height_m};
        return p;
    }

    double link_distance(Link l) const
    {
        switch (l)
        {
        case Link::SourceRelay: return distance(source, relay);
        case Link::RelayDest: return distance(relay, destination);
        case Link::SourceRis: return distance(source, ris);
        case Link::RisRelay:
        case Link::RelayRis: return distance(ris, relay);
        case Link::RisDest: return distance(ris, destination);
        }
        return 0.0;
    }
};

/// Linear amplitude scale sqrt(10^(L/10)) applied to the unit-variance taps of a link.
inline double link_amplitude(const ScenarioConfig &c, Link l)
{
    const double d = Placement::from(c).link_distance(l);
    const double pl = path_loss_db(d, c.fading_exponent, c.pathloss_ref_db, c.ref_distance_m, c.shadow(l));
    return std::sqrt(db_to_linear(pl));
}

// ---------- channel realization ----------

/// Time-domain taps of one slot. Matrices are M x L (element x tap).
struct SlotTaps
{
    Eigen::VectorXcd g_sr, g_rd;
    Eigen::MatrixXcd h_si, h_ir, h_id, h_ri;
};

/// Taps of both slots, the per-subcarrier responses that enter the SNRs, and
/// the cascaded RIS vectors. Frequency matrices are M x N (column = subcarrier).
///
/// Cascade convention: for reflection coefficients phi (the RIS diagonal), the
/// scalar (h^IR)' diag(phi) h^SI equals sum_m phi_m a_m, i.e. a = conj(h^IR) .* h^SI.
/// Vectors b (slot 2, relay-RIS-destination) and c (slot 1, source-RIS-destination)
/// follow the same rule.
struct ChannelRealization
{
    std::array<SlotTaps, 2> taps;

    Eigen::VectorXcd g_sr; // slot 1, length N
    Eigen::VectorXcd g_rd; // slot 2, length N
    Eigen::MatrixXcd h_si1, h_ir1, h_id1; // slot 1
    Eigen::MatrixXcd h_id2, h_ri2;        // slot 2

    Eigen::MatrixXcd a, b, c;

    std::size_t n_subcarriers() const { return static_cast<std::size_t>(g_sr.size()); }
    std::size_t n_elements() const { return static_cast<std::size_t>(a.rows()); }
};

inline cplx draw_cscg(Rng &rng)
{
    std::normal_distribution<double> half(0.0, std::sqrt(0.5));
    const double re = half(rng);
    const double im = half(rng);
    return {re, im};
}

/// Draws CSCG(0,1) taps for every link and slot, scaled per link by the large-scale
/// fading amplitude. Direct links are drawn before the RIS links, so the direct
/// taps of a given seed do not depend on M.
inline ChannelRealization generate_taps(const ScenarioConfig &config, Rng &rng)
{
    config.validate();
    const auto M = static_cast<Eigen::Index>(config.n_elements);
    const auto L = static_cast<Eigen::Index>(config.n_taps);

    const double amp_sr = link_amplitude(config, Link::SourceRelay);
    const double amp_rd = link_amplitude(config, Link::RelayDest);
    const double amp_si = link_amplitude(config, Link::SourceRis);
    const double amp_ir = link_amplitude(config, Link::RisRelay);
    const double amp_id = link_amplitude(config, Link::RisDest);
    const double amp_ri = link_amplitude(config, Link::RelayRis);

    ChannelRealization ch;
    for (auto &slot : ch.taps)
    {
        slot.g_sr.resize(L);
        slot.g_rd.resize(L);
        for (Eigen::Index l = 0; l < L; ++l)
            slot.g_sr(l) = amp_sr * draw_cscg(rng);
        for (Eigen::Index l = 0; l < L; ++l)
            slot.g_rd(l) = amp_rd * draw_cscg(rng);
    }

    auto fill = [&](Eigen::MatrixXcd &h, double amp)
    {
        h.resize(M, L);
        for (Eigen::Index m = 0; m < M; ++m)
            for (Eigen::Index l = 0; l < L; ++l)
                h(m, l) = amp * draw_cscg(rng);
    };
    for (auto &slot : ch.taps)
    {
        fill(slot.h_si, amp_si);
        fill(slot.h_ir, amp_ir);
        fill(slot.h_id, amp_id);
        fill(slot.h_ri, amp_ri);
    }
    return ch;
}

/// N-point DFT of the tap sequence zero-padded to length N.
inline Eigen::VectorXcd to_frequency(const Eigen::Ref<const Eigen::VectorXcd> &taps, std::size_t n)
{
    const auto L = static_cast<std::size_t>(taps.size());
    if (n < 1)
        throw std::domain_error("to_frequency: n must be positive.");
    if (L > n)
        throw std::domain_error("to_frequency: more taps than DFT points.");
    const double two_pi = 6.283185307179586;
    Eigen::VectorXcd out(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k)
    {
        cplx acc = 0.0;
        for (std::size_t l = 0; l < L; ++l)
        {
            // reduce k*l modulo n before scaling to keep the angle exact for large n
            const double angle = -two_pi * static_cast<double>((k * l) % n) / static_cast<double>(n);
            acc += taps(static_cast<Eigen::Index>(l)) * std::polar(1.0, angle);
        }
        out(static_cast<Eigen::Index>(k)) = acc;
    }
    return out;
}

/// Row-wise DFT: an M x L tap matrix becomes an M x N response matrix.
inline Eigen::MatrixXcd to_frequency_rows(const Eigen::MatrixXcd &taps, std::size_t n)
{
    Eigen::MatrixXcd out(taps.rows(), static_cast<Eigen::Index>(n));
    for (Eigen::Index m = 0; m < taps.rows(); ++m)
        out.row(m) = to_frequency(taps.row(m).transpose(), n).transpose();
    return out;
}

/// Fills the cascaded vectors from the frequency responses.
inline void cascade_vectors(ChannelRealization &ch)
{
    ch.a = ch.h_ir1.conjugate().cwiseProduct(ch.h_si1);
    ch.b = ch.h_id2.conjugate().cwiseProduct(ch.h_ri2);
    ch.c = ch.h_id1.conjugate().cwiseProduct(ch.h_si1);
}

/// Computes the per-subcarrier responses and cascades of a tap realization.
inline void transform_to_frequency(ChannelRealization &ch, std::size_t n)
{
    const auto &s1 = ch.taps[0];
    const auto &s2 = ch.taps[1];
    ch.g_sr = to_frequency(s1.g_sr, n);
    ch.g_rd = to_frequency(s2.g_rd, n);
    ch.h_si1 = to_frequency_rows(s1.h_si, n);
    ch.h_ir1 = to_frequency_rows(s1.h_ir, n);
    ch.h_id1 = to_frequency_rows(s1.h_id, n);
    ch.h_id2 = to_frequency_rows(s2.h_id, n);
    ch.h_ri2 = to_frequency_rows(s2.h_ri, n);
    cascade_vectors(ch);
}

inline ChannelRealization generate_channel(const ScenarioConfig &config, Rng &rng)
{
    auto ch = generate_taps(config, rng);
    transform_to_frequency(ch, config.n_subcarriers);
    return ch;
}

/// Channel drawn from the config's own seed.
inline ChannelRealization generate_channel(const ScenarioConfig &config)
{
    Rng rng(config.rng_seed);
    return generate_channel(config, rng);
}

/// The same realization with the RIS removed (M = 0), direct links untouched.
inline ChannelRealization without_ris(const ChannelRealization &ch)
{
    ChannelRealization out = ch;
    const auto n = static_cast<Eigen::Index>(ch.n_subcarriers());
    for (auto &slot : out.taps)
    {
        const auto L = slot.g_sr.size();
        slot.h_si.resize(0, L);
        slot.h_ir.resize(0, L);
        slot.h_id.resize(0, L);
        slot.h_ri.resize(0, L);
    }
    for (auto *h : {&out.h_si1, &out.h_ir1, &out.h_id1, &out.h_id2, &out.h_ri2, &out.a, &out.b, &out.c})
        h->resize(0, n);
    return out;
}

} // namespace rislink
