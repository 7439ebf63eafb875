// SPDX-License-Identifier: Apache-2.0
//
// rislink - joint subcarrier matching and RIS passive beamforming for
// OFDM decode-and-forward relaying.
// ------------------------------------------------------------------------

#pragma once

#include "snr_model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rislink
{

/// Lifted forms of the hop SNRs. With v~ = [phi; 1] and Phi = v~ v~',
///   Tr(Phi A_p) + |g^SR_p|^2 = |g^SR_p + phi' a_p|^2      (A_p from relay_lift)
///   Tr(Phi B_q) + |g^RD_q|^2 = |g^RD_q + phi' b_q|^2      (B_q from dest_lift)
///   Tr(Phi C_p)              = |phi' c_p|^2               (C_p from cross_lift)
/// where phi' x means sum_m phi_m x_m. Column p of each lift matrix holds the
/// (M+1)-vector u with A_p = u u^H minus the offset in the corner.
struct LiftedMatrices
{
    std::vector<Eigen::MatrixXcd> A, B, C;
    Eigen::VectorXd relay_offset, dest_offset;
    Eigen::MatrixXcd relay_lift, dest_lift, cross_lift;

    std::size_t n_elements() const { return static_cast<std::size_t>(relay_lift.rows()) - 1; }
    std::size_t n_subcarriers() const { return static_cast<std::size_t>(relay_lift.cols()); }
};

inline LiftedMatrices build_lifted_matrices(const ChannelRealization &ch)
{
    const auto N = static_cast<Eigen::Index>(ch.n_subcarriers());
    const auto M = static_cast<Eigen::Index>(ch.n_elements());
    LiftedMatrices lm;
    lm.relay_lift.resize(M + 1, N);
    lm.dest_lift.resize(M + 1, N);
    lm.cross_lift.resize(M + 1, N);
    lm.relay_offset.resize(N);
    lm.dest_offset.resize(N);
    for (Eigen::Index n = 0; n < N; ++n)
    {
        lm.relay_lift.col(n).head(M) = ch.a.col(n).conjugate();
        lm.relay_lift(M, n) = std::conj(ch.g_sr(n));
        lm.dest_lift.col(n).head(M) = ch.b.col(n).conjugate();
        lm.dest_lift(M, n) = std::conj(ch.g_rd(n));
        lm.cross_lift.col(n).head(M) = ch.c.col(n).conjugate();
        lm.cross_lift(M, n) = 0.0;
        lm.relay_offset(n) = std::norm(ch.g_sr(n));
        lm.dest_offset(n) = std::norm(ch.g_rd(n));

        Eigen::MatrixXcd a = lm.relay_lift.col(n) * lm.relay_lift.col(n).adjoint();
        a(M, M) = 0.0;
        Eigen::MatrixXcd b = lm.dest_lift.col(n) * lm.dest_lift.col(n).adjoint();
        b(M, M) = 0.0;
        lm.A.push_back(std::move(a));
        lm.B.push_back(std::move(b));
        lm.C.push_back(lm.cross_lift.col(n) * lm.cross_lift.col(n).adjoint());
    }
    return lm;
}

struct SdpSolution
{
    Eigen::MatrixXcd phi1, phi2;  // (M+1) x (M+1), PSD, unit diagonal
    double upper_bound = 0.0;     // bits/s, dual objective at a dual-feasible point
    double primal_value = 0.0;    // bits/s achieved by (phi1, phi2) in the relaxation
    double kkt_residual = 0.0;    // relative duality gap
    std::size_t iterations = 0;   // Newton steps
};

/// Raised when the SDR solver runs out of iterations; carries the last iterate.
class SdpError : public std::runtime_error
{
public:
    SdpError(const std::string &what, SdpSolution best)
        : std::runtime_error(what), best_(std::move(best))
    {
    }

    const SdpSolution &best() const { return best_; }
    double residual() const { return best_.kkt_residual; }

private:
    SdpSolution best_;
};

namespace detail
{
inline double l1_square(const Eigen::VectorXcd &u)
{
    const double s = u.cwiseAbs().sum();
    return s * s;
}

inline double quad(const Eigen::VectorXcd &u, const Eigen::MatrixXcd &phi)
{
    return std::max(0.0, (u.adjoint() * phi * u)(0, 0).real());
}

/// Scales a Hermitian PSD matrix to unit diagonal.
inline Eigen::MatrixXcd unit_diagonal(const Eigen::MatrixXcd &w)
{
    Eigen::VectorXd s = w.diagonal().real().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    Eigen::MatrixXcd out = s.asDiagonal() * w * s.asDiagonal();
    out = 0.5 * (out + out.adjoint()).eval();
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        out(i, i) = 1.0;
    return out;
}
} // namespace detail

/// Semidefinite relaxation of the beamforming subproblem for a fixed matching:
///
///   max  sum log(1 + alpha_i)
///   s.t. alpha_i <= rho1 u1_i' Phi1 u1_i,
///        alpha_i <= k rho1 u3_i' Phi1 u3_i + rho2 u2_i' Phi2 u2_i,
///        diag(Phi_t) = 1, Phi_t >= 0,
///
/// solved through its Lagrangian dual, which is small (two multipliers per pair and
/// one per diagonal entry):
///
///   min  sum (L_i - 1 - log L_i) + 1'y1 + 1'y2,   L_i = lambda_i + mu_i,
///   s.t. S1 = diag(y1) - sum lambda_i rho1 u1 u1' - k sum mu_i rho1 u3 u3' >= 0,
///        S2 = diag(y2) - sum mu_i rho2 u2 u2' >= 0.
///
/// A log-barrier path-following Newton method runs on the dual. The primal is read
/// off the central path as S^-1 / t, scaled to unit diagonal, and the dual value is a
/// certified upper bound.
inline SdpSolution solve_sdr(const Matching &matching, const LiftedMatrices &lifted, int k,
                             const ScenarioConfig &cfg)
{
    const std::size_t N = lifted.n_subcarriers();
    if (lifted.relay_lift.rows() < 2)
        throw std::domain_error("solve_sdr: at least one RIS element is required.");
    if (!matching.is_valid(N))
        throw std::invalid_argument("solve_sdr: matching is not valid for this channel.");
    const auto n = lifted.relay_lift.rows();
    const double rho1 = cfg.p_source_w / cfg.noise_power_w;
    const double rho2 = cfg.p_relay_w / cfg.noise_power_w;
    const double scale = cfg.rate_prefactor() / std::numbers::ln2;

    // active pairs, with each constraint scaled by the largest value it can take
    std::vector<Eigen::VectorXcd> w1, w2, w3;
    std::vector<Eigen::VectorXcd> u1, u2, u3;
    std::vector<double> s1, s2;
    for (auto [p, q] : matching.pairs)
    {
        const Eigen::VectorXcd r = lifted.relay_lift.col(static_cast<Eigen::Index>(p));
        const Eigen::VectorXcd d = lifted.dest_lift.col(static_cast<Eigen::Index>(q));
        const Eigen::VectorXcd x = lifted.cross_lift.col(static_cast<Eigen::Index>(p));
        const double a = rho1 * detail::l1_square(r);
        const double b = rho2 * detail::l1_square(d) + (k != 0 ? rho1 * detail::l1_square(x) : 0.0);
        if (!(a > 0.0) || !(b > 0.0))
            continue; // the pair carries no rate whatever the phases
        u1.push_back(r);
        u2.push_back(d);
        u3.push_back(x);
        s1.push_back(a);
        s2.push_back(b);
        w1.push_back(std::sqrt(rho1 / a) * r);
        w2.push_back(std::sqrt(rho2 / b) * d);
        w3.push_back(k != 0 ? Eigen::VectorXcd(std::sqrt(rho1 / b) * x) : Eigen::VectorXcd::Zero(n));
    }
    const auto P = static_cast<Eigen::Index>(s1.size());

    SdpSolution sol;
    sol.phi1 = Eigen::MatrixXcd::Identity(n, n);
    sol.phi2 = Eigen::MatrixXcd::Identity(n, n);

    auto primal = [&](const Eigen::MatrixXcd &f1, const Eigen::MatrixXcd &f2)
    {
        double v = 0.0;
        for (Eigen::Index i = 0; i < P; ++i)
        {
            const double r = rho1 * detail::quad(u1[i], f1);
            const double d = rho2 * detail::quad(u2[i], f2) + (k != 0 ? rho1 * detail::quad(u3[i], f1) : 0.0);
            v += std::log1p(std::min(r, d));
        }
        return v;
    };
    if (P == 0)
        return sol;

    // z = [lambda (P), mu (P), y1 (n), y2 (n)]
    const Eigen::Index dim = 2 * P + 2 * n;
    const Eigen::Index off_y1 = 2 * P, off_y2 = 2 * P + n;
    const bool cross = k != 0;

    // rank-one generators of S1 and S2: S = sum_j sign_j z_j f_j f_j'
    struct Gen
    {
        Eigen::MatrixXcd f;              // n x count
        std::vector<Eigen::Index> var;   // index into z
        std::vector<double> sign;
    };
    Gen g1, g2;
    {
        const Eigen::Index c1 = P + (cross ? P : 0) + n;
        g1.f.resize(n, c1);
        Eigen::Index col = 0;
        for (Eigen::Index i = 0; i < P; ++i, ++col)
        {
            g1.f.col(col) = w1[i];
            g1.var.push_back(i);
            g1.sign.push_back(-1.0);
        }
        if (cross)
            for (Eigen::Index i = 0; i < P; ++i, ++col)
            {
                g1.f.col(col) = w3[i];
                g1.var.push_back(P + i);
                g1.sign.push_back(-1.0);
            }
        for (Eigen::Index m = 0; m < n; ++m, ++col)
        {
            g1.f.col(col) = Eigen::VectorXcd::Unit(n, m);
            g1.var.push_back(off_y1 + m);
            g1.sign.push_back(1.0);
        }
        g2.f.resize(n, P + n);
        col = 0;
        for (Eigen::Index i = 0; i < P; ++i, ++col)
        {
            g2.f.col(col) = w2[i];
            g2.var.push_back(P + i);
            g2.sign.push_back(-1.0);
        }
        for (Eigen::Index m = 0; m < n; ++m, ++col)
        {
            g2.f.col(col) = Eigen::VectorXcd::Unit(n, m);
            g2.var.push_back(off_y2 + m);
            g2.sign.push_back(1.0);
        }
    }
    // the last n generators are the unit vectors of the diagonal
    auto build_s = [&](const Gen &g, const Eigen::VectorXd &z)
    {
        const Eigen::Index r = g.f.cols() - n;
        Eigen::VectorXd coef(r);
        for (Eigen::Index j = 0; j < r; ++j)
            coef(j) = g.sign[j] * z(g.var[j]);
        const auto fr = g.f.leftCols(r);
        Eigen::MatrixXcd s = fr * coef.asDiagonal() * fr.adjoint();
        for (Eigen::Index m = 0; m < n; ++m)
            s(m, m) += z(g.var[r + m]);
        return s;
    };

    const double inf = std::numeric_limits<double>::infinity();
    auto lam_sum = [&](const Eigen::VectorXd &z, Eigen::Index i) { return z(i) / s1[i] + z(P + i) / s2[i]; };
    auto dual_value = [&](const Eigen::VectorXd &z)
    {
        double v = z.segment(off_y1, n).sum() + z.segment(off_y2, n).sum();
        for (Eigen::Index i = 0; i < P; ++i)
        {
            const double L = lam_sum(z, i);
            v += L - 1.0 - std::log(L);
        }
        return v;
    };
    // barrier value, or +inf outside the domain
    auto barrier = [&](double t, const Eigen::VectorXd &z) -> double
    {
        if ((z.head(2 * P).array() <= 0.0).any())
            return inf;
        double f = t * dual_value(z) - z.head(2 * P).array().log().sum();
        for (const Gen *g : {&g1, &g2})
        {
            Eigen::LLT<Eigen::MatrixXcd> llt(build_s(*g, z));
            if (llt.info() != Eigen::Success)
                return inf;
            f -= 2.0 * llt.matrixLLT().diagonal().real().array().log().sum();
        }
        return f;
    };

    Eigen::VectorXd z(dim);
    z.head(2 * P).setOnes();
    {
        double t1 = 1.0, t2 = 1.0;
        for (Eigen::Index i = 0; i < P; ++i)
        {
            t1 += w1[i].squaredNorm() + w3[i].squaredNorm();
            t2 += w2[i].squaredNorm();
        }
        z.segment(off_y1, n).setConstant(t1);
        z.segment(off_y2, n).setConstant(t2);
    }

    const double m_param = static_cast<double>(dim);
    const double mu = 20.0;
    double t = 1.0;
    std::size_t steps = 0;
    Eigen::MatrixXd H(dim, dim);
    Eigen::VectorXd grad(dim);
    Eigen::MatrixXcd W1, W2;

    auto record = [&](double tt)
    {
        sol.phi1 = detail::unit_diagonal(W1 / tt);
        sol.phi2 = detail::unit_diagonal(W2 / tt);
        const double dv = dual_value(z);
        const double pv = primal(sol.phi1, sol.phi2);
        sol.upper_bound = scale * dv;
        sol.primal_value = scale * pv;
        sol.kkt_residual = std::max(0.0, dv - pv) / std::max(1.0, std::abs(dv));
        sol.iterations = steps;
    };

    while (true)
    {
        double prev_dec2 = inf;
        while (true)
        {
            // gradient and Hessian
            grad.setZero();
            H.setZero();
            for (Eigen::Index i = 0; i < P; ++i)
            {
                const double L = lam_sum(z, i);
                const double dl = 1.0 - 1.0 / L;
                grad(i) += t * dl / s1[i];
                grad(P + i) += t * dl / s2[i];
                const double h = t / (L * L);
                H(i, i) += h / (s1[i] * s1[i]);
                H(P + i, P + i) += h / (s2[i] * s2[i]);
                H(i, P + i) += h / (s1[i] * s2[i]);
                H(P + i, i) += h / (s1[i] * s2[i]);
                grad(i) -= 1.0 / z(i);
                grad(P + i) -= 1.0 / z(P + i);
                H(i, i) += 1.0 / (z(i) * z(i));
                H(P + i, P + i) += 1.0 / (z(P + i) * z(P + i));
            }
            grad.segment(off_y1, n).array() += t;
            grad.segment(off_y2, n).array() += t;

            bool inside = true;
            for (int slot = 0; slot < 2; ++slot)
            {
                const Gen &g = slot == 0 ? g1 : g2;
                Eigen::LLT<Eigen::MatrixXcd> llt(build_s(g, z));
                if (llt.info() != Eigen::Success)
                {
                    inside = false;
                    break;
                }
                Eigen::MatrixXcd W = llt.solve(Eigen::MatrixXcd::Identity(n, n));
                const Eigen::MatrixXcd Q = g.f.adjoint() * W * g.f;
                for (Eigen::Index a = 0; a < Q.rows(); ++a)
                {
                    grad(g.var[a]) -= g.sign[a] * Q(a, a).real();
                    for (Eigen::Index b = 0; b < Q.cols(); ++b)
                        H(g.var[a], g.var[b]) += g.sign[a] * g.sign[b] * std::norm(Q(a, b));
                }
                (slot == 0 ? W1 : W2) = std::move(W);
            }
            if (!inside)
                throw SdpError("solve_sdr: iterate left the feasible region.", sol);

            const Eigen::VectorXd dz = -H.ldlt().solve(grad);
            const double dec2 = -grad.dot(dz);
            ++steps;
            if (!(dec2 >= 0.0) || std::isnan(dec2) || dec2 * 0.5 < 1e-10)
                break;
            if (dec2 < 1e-4 && dec2 >= prev_dec2)
                break; // rounding floor
            prev_dec2 = dec2;
            if (steps >= cfg.solver.sdp_max_iterations)
            {
                record(t);
                throw SdpError("solve_sdr: no convergence within " + std::to_string(cfg.solver.sdp_max_iterations) +
                                   " iterations (residual " + std::to_string(sol.kkt_residual) + ").",
                               sol);
            }

            // a full step in the quadratic region stays inside for a self-concordant barrier
            if (dec2 < 0.0625 && std::isfinite(barrier(t, z + dz)))
            {
                z += dz;
                continue;
            }
            const double f0 = barrier(t, z);
            double step = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls, step *= 0.5)
            {
                const double f1 = barrier(t, z + step * dz);
                if (f1 <= f0 - 0.25 * step * dec2)
                {
                    moved = true;
                    break;
                }
            }
            if (!moved)
                break;
            z += step * dz;
        }

        // W1, W2 belong to the last evaluated iterate; refresh them at z
        {
            Eigen::LLT<Eigen::MatrixXcd> l1(build_s(g1, z)), l2(build_s(g2, z));
            W1 = l1.solve(Eigen::MatrixXcd::Identity(n, n));
            W2 = l2.solve(Eigen::MatrixXcd::Identity(n, n));
        }
        record(t);
        if (sol.kkt_residual <= cfg.solver.sdp_tolerance || m_param / t < 1e-14)
            break;
        if (steps >= cfg.solver.sdp_max_iterations)
            throw SdpError("solve_sdr: no convergence within " + std::to_string(cfg.solver.sdp_max_iterations) +
                               " iterations (residual " + std::to_string(sol.kkt_residual) + ").",
                           sol);
        t *= mu;
    }
    return sol;
}

inline SdpSolution solve_sdr(const Matching &matching, const ChannelRealization &ch, int k,
                             const ScenarioConfig &cfg)
{
    return solve_sdr(matching, build_lifted_matrices(ch), k, cfg);
}

namespace detail
{
/// v[m] = exp(j arg(u[m] / u[M])) for a lifted vector u of length M + 1.
inline Eigen::VectorXcd phases_from_lift(const Eigen::VectorXcd &u)
{
    const auto M = u.size() - 1;
    const cplx ref = std::conj(u(M));
    Eigen::VectorXcd v(M);
    for (Eigen::Index m = 0; m < M; ++m)
        v(m) = std::polar(1.0, std::arg(u(m) * ref));
    return v;
}

struct LiftFactor
{
    Eigen::MatrixXcd root; // U sqrt(Sigma)
    Eigen::VectorXcd principal;
    bool rank_one = false;
};

inline LiftFactor factor_lift(const Eigen::MatrixXcd &phi, double rank_one_ratio)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(phi);
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    const auto n = ev.size();
    LiftFactor f;
    f.root = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
    f.principal = f.root.col(n - 1);
    f.rank_one = n < 2 || ev(n - 2) < rank_one_ratio * ev(n - 1);
    return f;
}
} // namespace detail

/// Recovers unit-modulus phases from the SDR solution: the principal eigenvector of
/// each lift, then `draws` Gaussian samples U sqrt(Sigma) r with r ~ CN(0, I), each
/// scored by the true sum rate. A lift that is numerically rank one is used directly.
/// The best candidate wins; ties keep the earliest.
inline BeamformingSolution gaussian_randomization(const SdpSolution &sdp, std::size_t draws, const Matching &matching,
                                                  const ChannelRealization &ch, int k, const ScenarioConfig &cfg,
                                                  Rng &rng)
{
    if (draws == 0)
        throw std::domain_error("gaussian_randomization: draws must be positive.");
    const auto f1 = detail::factor_lift(sdp.phi1, cfg.solver.rank_one_ratio);
    const auto f2 = detail::factor_lift(sdp.phi2, cfg.solver.rank_one_ratio);

    BeamformingSolution best;
    best.v1 = detail::phases_from_lift(f1.principal);
    best.v2 = detail::phases_from_lift(f2.principal);
    best.phi1 = sdp.phi1;
    best.phi2 = sdp.phi2;
    best.sdp_upper_bound = sdp.upper_bound;
    if (f1.rank_one && f2.rank_one)
        return best;
    double best_rate = sum_rate(matching, best.v1, best.v2, k, ch, cfg);

    const auto n = sdp.phi1.rows();
    Eigen::VectorXcd r1(n), r2(n);
    for (std::size_t d = 0; d < draws; ++d)
    {
        for (Eigen::Index i = 0; i < n; ++i)
            r1(i) = draw_cscg(rng);
        for (Eigen::Index i = 0; i < n; ++i)
            r2(i) = draw_cscg(rng);
        const Eigen::VectorXcd v1 = f1.rank_one ? best.v1 : detail::phases_from_lift(f1.root * r1);
        const Eigen::VectorXcd v2 = f2.rank_one ? best.v2 : detail::phases_from_lift(f2.root * r2);
        const double rate = sum_rate(matching, v1, v2, k, ch, cfg);
        if (rate > best_rate)
        {
            best_rate = rate;
            best.v1 = v1;
            best.v2 = v2;
        }
    }
    return best;
}

/// Snaps every phase to the nearest of 2^bits levels 2 pi l / 2^bits.
inline Eigen::VectorXcd quantize_phases(const Eigen::VectorXcd &v, int bits)
{
    if (bits < 1)
        throw std::domain_error("quantize_phases: bits must be at least 1.");
    if (bits > 30)
        throw std::domain_error("quantize_phases: at most 30 bits are supported.");
    const double levels = std::ldexp(1.0, bits);
    const double step = 2.0 * std::numbers::pi / levels;
    Eigen::VectorXcd out(v.size());
    for (Eigen::Index m = 0; m < v.size(); ++m)
    {
        double theta = std::arg(v(m));
        if (theta < 0.0)
            theta += 2.0 * std::numbers::pi;
        const double l = std::fmod(std::round(theta / step), levels);
        out(m) = std::polar(1.0, l * step);
    }
    return out;
}

inline BeamformingSolution quantize(const BeamformingSolution &bf, int bits)
{
    BeamformingSolution out = bf;
    out.v1 = quantize_phases(bf.v1, bits);
    out.v2 = quantize_phases(bf.v2, bits);
    return out;
}

/// Brute force over a `levels`-point phase grid per element and slot. Costs
/// levels^(2M) evaluations, so M is limited to 3.
inline BeamformingSolution phase_sweep_oracle(const Matching &matching, const ChannelRealization &ch, int k,
                                              const ScenarioConfig &cfg, std::size_t levels)
{
    const std::size_t M = ch.n_elements();
    if (M > 3)
        throw std::domain_error("phase_sweep_oracle: refusing M > 3.");
    if (levels < 1)
        throw std::domain_error("phase_sweep_oracle: levels must be positive.");
    if (!matching.is_valid(ch.n_subcarriers()))
        throw std::invalid_argument("phase_sweep_oracle: invalid matching.");

    std::size_t grid = 1;
    for (std::size_t m = 0; m < M; ++m)
        grid *= levels;
    auto vector_at = [&](std::size_t idx)
    {
        Eigen::VectorXcd v(static_cast<Eigen::Index>(M));
        for (std::size_t m = 0; m < M; ++m)
        {
            v(static_cast<Eigen::Index>(m)) =
                std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(idx % levels) / static_cast<double>(levels));
            idx /= levels;
        }
        return v;
    };

    const std::size_t P = matching.size();
    const double rho1 = cfg.p_source_w / cfg.noise_power_w;
    const double rho2 = cfg.p_relay_w / cfg.noise_power_w;
    // per grid point of slot 1: relay SNR and the cross term; of slot 2: second-hop SNR
    std::vector<double> relay(grid * P), cross(grid * P), second(grid * P);
    for (std::size_t g = 0; g < grid; ++g)
    {
        const auto v = vector_at(g);
        for (std::size_t i = 0; i < P; ++i)
        {
            auto [p, q] = matching.pairs[i];
            relay[g * P + i] = snr_relay(p, v, ch, cfg);
            cross[g * P + i] = k != 0 ? rho1 * std::norm(detail::reflect(v, ch.c, p)) : 0.0;
            second[g * P + i] = rho2 * std::norm(ch.g_rd(static_cast<Eigen::Index>(q)) + detail::reflect(v, ch.b, q));
        }
    }

    // sum log(1 + s_i) is compared as a product, which is exact enough for few pairs
    const bool use_product = P <= 8;
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best1 = 0, best2 = 0;
    for (std::size_t g1 = 0; g1 < grid; ++g1)
        for (std::size_t g2 = 0; g2 < grid; ++g2)
        {
            double score = use_product ? 1.0 : 0.0;
            for (std::size_t i = 0; i < P; ++i)
            {
                const double s = std::min(relay[g1 * P + i], cross[g1 * P + i] + second[g2 * P + i]);
                if (use_product)
                    score *= 1.0 + s;
                else
                    score += std::log1p(s);
            }
            if (score > best)
            {
                best = score;
                best1 = g1;
                best2 = g2;
            }
        }
    BeamformingSolution out;
    out.v1 = vector_at(best1);
    out.v2 = vector_at(best2);
    return out;
}

} // namespace rislink
