// SPDX-License-Identifier: Apache-2.0
//
// rislink - joint subcarrier matching and RIS passive beamforming for
// OFDM decode-and-forward relaying.
// ------------------------------------------------------------------------

#pragma once

#include "optimizer.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace rislink
{

enum class Scheme : std::size_t
{
    BnbI = 0,
    BnbII,
    DcpI,
    DcpII,
    RandomI,
    RandomII,
    RelayOnly
};

inline constexpr std::array<std::string_view, 7> scheme_names = {"BnB-I",    "BnB-II",    "DCP-I",    "DCP-II",
                                                                 "Random-I", "Random-II", "RelayOnly"};

inline std::string_view to_string(Scheme s) { return scheme_names[static_cast<std::size_t>(s)]; }

inline Scheme parse_scheme(std::string_view name)
{
    for (std::size_t i = 0; i < scheme_names.size(); ++i)
        if (scheme_names[i] == name)
            return static_cast<Scheme>(i);
    throw std::invalid_argument("Unknown scheme '" + std::string(name) + "'.");
}

inline int scheme_case(Scheme s) { return s == Scheme::BnbII || s == Scheme::DcpII || s == Scheme::RandomII ? 1 : 0; }

enum class SweepParameter : std::size_t
{
    TransmitPower = 0, // dBm, applied to both P1 and P2
    NElements,
    NSubcarriers,
    RisHeight,
    FadingExponent,
    QuantizationBits // 0 means continuous phases
};

inline constexpr std::array<std::string_view, 6> sweep_parameter_names = {
    "transmit_power", "n_elements", "n_subcarriers", "ris_height", "fading_exponent", "quantization_bits"};

inline std::string_view to_string(SweepParameter p) { return sweep_parameter_names[static_cast<std::size_t>(p)]; }

inline SweepParameter parse_sweep_parameter(std::string_view name)
{
    for (std::size_t i = 0; i < sweep_parameter_names.size(); ++i)
        if (sweep_parameter_names[i] == name)
            return static_cast<SweepParameter>(i);
    throw std::invalid_argument("Unknown sweep parameter '" + std::string(name) + "'.");
}

inline std::size_t whole_value(double v, const char *what)
{
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e9)
        throw std::invalid_argument(std::string(what) + " must be a non-negative integer.");
    return static_cast<std::size_t>(v);
}

/// Copy of `base` with the swept parameter set to `value`.
inline ScenarioConfig apply_sweep_value(const ScenarioConfig &base, SweepParameter p, double value)
{
    ScenarioConfig c = base;
    switch (p)
    {
    case SweepParameter::TransmitPower:
        c.p_source_w = c.p_relay_w = dbm_to_watts(value);
        break;
    case SweepParameter::NElements: c.n_elements = whole_value(value, "n_elements"); break;
    case SweepParameter::NSubcarriers: c.n_subcarriers = whole_value(value, "n_subcarriers"); break;
    case SweepParameter::RisHeight: c.ris_height_m = value; break;
    case SweepParameter::FadingExponent: c.fading_exponent = value; break;
    case SweepParameter::QuantizationBits:
    {
        const auto bits = whole_value(value, "quantization_bits");
        if (bits == 0)
            c.quantization_bits.reset();
        else
            c.quantization_bits = static_cast<int>(bits);
        break;
    }
    }
    c.validate();
    return c;
}

struct SweepSpec
{
    ScenarioConfig base;
    SweepParameter parameter = SweepParameter::NElements;
    std::vector<double> values;
    std::size_t trials = 1;
    std::vector<Scheme> schemes;

    void validate() const
    {
        if (values.empty())
            throw std::invalid_argument("Sweep needs at least one value.");
        if (!std::is_sorted(values.begin(), values.end()))
            throw std::invalid_argument("Sweep values must be sorted.");
        if (trials < 1)
            throw std::invalid_argument("Sweep needs at least one trial.");
        if (schemes.empty())
            throw std::invalid_argument("Sweep needs at least one scheme.");
        for (double v : values)
            apply_sweep_value(base, parameter, v);
    }
};

namespace detail
{
inline std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}
} // namespace detail

inline std::vector<Scheme> parse_scheme_list(const std::string &s)
{
    std::vector<Scheme> out;
    for (const auto &name : detail::split_list(s))
        out.push_back(parse_scheme(name));
    if (out.empty())
        throw std::invalid_argument("Scheme list is empty.");
    return out;
}

/// Reads a sweep spec: a scenario config plus `sweep.parameter`, `sweep.values`
/// (comma separated), `sweep.trials` and `sweep.schemes` (comma separated).
inline SweepSpec sweep_from_key_values(const KeyValues &kv)
{
    SweepSpec spec;
    spec.base = config_from_key_values(kv, "sweep.");
    for (const auto &[key, value] : kv)
    {
        if (key.rfind("sweep.", 0) != 0)
            continue;
        if (key == "sweep.parameter")
            spec.parameter = parse_sweep_parameter(value);
        else if (key == "sweep.values")
        {
            for (const auto &v : detail::split_list(value))
                spec.values.push_back(detail::to_double(key, v));
        }
        else if (key == "sweep.trials")
            spec.trials = detail::to_uint(key, value);
        else if (key == "sweep.schemes")
            spec.schemes = parse_scheme_list(value);
        else
            throw std::invalid_argument("Unknown sweep key '" + key + "'.");
    }
    if (!kv.contains("sweep.parameter"))
        throw std::invalid_argument("Missing key 'sweep.parameter'.");
    if (!kv.contains("sweep.schemes"))
        throw std::invalid_argument("Missing key 'sweep.schemes'.");
    spec.validate();
    return spec;
}

inline SweepSpec load_sweep(const std::string &path) { return sweep_from_key_values(read_key_values(path)); }

struct PairSnr
{
    std::size_t p = 0, q = 0;
    double relay = 0.0, dest = 0.0;
};

struct TrialRecord
{
    Scheme scheme = Scheme::BnbI;
    SweepParameter parameter = SweepParameter::NElements;
    double value = 0.0;
    std::uint64_t seed = 0;
    double rate_bps = 0.0;
    double time_s = 0.0;
    std::size_t nodes = 0; // BnB relaxations
    std::size_t iters = 0; // DC inner iterations
    std::vector<PairSnr> pairs;
    bool failed = false;
    std::string error;
};

/// Channel seed of trial `trial`; shared by every scheme and swept value.
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial) { return mix_seed(base_seed, trial); }

namespace detail
{
inline std::vector<PairSnr> pair_snrs(const Matching &m, const SnrTable &t)
{
    std::vector<PairSnr> out;
    for (auto [p, q] : m.pairs)
        out.push_back({p, q, t.relay(static_cast<Eigen::Index>(p)),
                       t.dest(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q))});
    return out;
}
} // namespace detail

/// Best matching over the direct links only.
inline OptimizationResult relay_only(const ChannelRealization &ch, const ScenarioConfig &cfg)
{
    const auto start = std::chrono::steady_clock::now();
    const auto direct = without_ris(ch);
    OptimizationResult res;
    res.beamforming.v1.resize(0);
    res.beamforming.v2.resize(0);
    res.snr = snr_table(direct, res.beamforming, 0, cfg);
    const auto mr = bnb_match(res.snr, cfg);
    res.matching = mr.matching;
    res.bnb_nodes = mr.nodes;
    res.sum_rate_bps = mr.value;
    res.objective_trace = {mr.value};
    res.rounds = 1;
    res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

/// The optimizer's initial random phases with a BnB matching on top.
inline OptimizationResult random_beamforming(const ChannelRealization &ch, const ScenarioConfig &cfg)
{
    const auto start = std::chrono::steady_clock::now();
    OptimizationResult res;
    res.beamforming = initial_phases(cfg, ch.n_elements());
    if (cfg.quantization_bits)
        res.beamforming = quantize(res.beamforming, *cfg.quantization_bits);
    res.snr = snr_table(ch, res.beamforming, cfg.case_indicator, cfg);
    const auto mr = bnb_match(res.snr, cfg);
    res.matching = mr.matching;
    res.bnb_nodes = mr.nodes;
    res.sum_rate_bps = mr.value;
    res.objective_trace = {mr.value};
    res.rounds = 1;
    res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

/// Runs one scheme on the channel of `seed`.
inline OptimizationResult run_scheme(Scheme s, const ScenarioConfig &cfg_in, std::uint64_t seed)
{
    ScenarioConfig cfg = cfg_in;
    cfg.rng_seed = seed;
    cfg.case_indicator = scheme_case(s);
    Rng rng(seed);
    const auto ch = generate_channel(cfg, rng);
    switch (s)
    {
    case Scheme::BnbI:
    case Scheme::BnbII: return alternating_optimize(ch, cfg, Matcher::Exact);
    case Scheme::DcpI:
    case Scheme::DcpII: return alternating_optimize(ch, cfg, Matcher::Dcp);
    case Scheme::RandomI:
    case Scheme::RandomII: return random_beamforming(ch, cfg);
    case Scheme::RelayOnly: return relay_only(ch, cfg);
    }
    throw std::logic_error("run_scheme: unhandled scheme.");
}

inline TrialRecord run_trial(Scheme s, const SweepSpec &spec, double value, std::size_t trial)
{
    TrialRecord rec;
    rec.scheme = s;
    rec.parameter = spec.parameter;
    rec.value = value;
    rec.seed = trial_seed(spec.base.rng_seed, trial);
    try
    {
        const auto cfg = apply_sweep_value(spec.base, spec.parameter, value);
        const auto res = run_scheme(s, cfg, rec.seed);
        rec.rate_bps = res.sum_rate_bps;
        rec.time_s = res.wall_time_s;
        rec.nodes = res.bnb_nodes;
        rec.iters = res.dcp_iterations;
        rec.pairs = detail::pair_snrs(res.matching, res.snr);
    }
    catch (const std::exception &e)
    {
        rec.failed = true;
        rec.error = e.what();
        rec.rate_bps = std::numeric_limits<double>::quiet_NaN();
    }
    return rec;
}

/// Every (scheme, value, trial) of the spec, run on `threads` workers (0 = all
/// cores). Records come back sorted by (scheme, value, seed).
inline std::vector<TrialRecord> run_sweep(const SweepSpec &spec, std::size_t threads = 0)
{
    spec.validate();
    struct Task
    {
        Scheme scheme;
        double value;
        std::size_t trial;
    };
    std::vector<Task> tasks;
    for (Scheme s : spec.schemes)
        for (double v : spec.values)
            for (std::size_t t = 0; t < spec.trials; ++t)
                tasks.push_back({s, v, t});

    std::vector<TrialRecord> records(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]
    {
        for (std::size_t i = next++; i < tasks.size(); i = next++)
            records[i] = run_trial(tasks[i].scheme, spec, tasks[i].value, tasks[i].trial);
    };
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, tasks.size());
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < threads; ++i)
        pool.emplace_back(worker);
    worker();
    for (auto &th : pool)
        th.join();

    std::sort(records.begin(), records.end(),
              [](const TrialRecord &a, const TrialRecord &b)
              {
                  return std::tuple(static_cast<std::size_t>(a.scheme), a.value, a.seed) <
                         std::tuple(static_cast<std::size_t>(b.scheme), b.value, b.seed);
              });
    return records;
}

// ---------- reports ----------

struct PairBalance
{
    std::size_t p = 0, q = 0;
    double relay = 0.0, dest = 0.0;
    double ratio = 1.0; // min / max
};

struct BalanceReport
{
    std::vector<PairBalance> pairs;
    double mean_ratio = 0.0;
};

/// Both hop SNRs of every matched pair and how evenly they are balanced.
inline BalanceReport snr_balance_report(const OptimizationResult &res)
{
    BalanceReport rep;
    for (const auto &ps : detail::pair_snrs(res.matching, res.snr))
    {
        const double hi = std::max(ps.relay, ps.dest), lo = std::min(ps.relay, ps.dest);
        rep.pairs.push_back({ps.p, ps.q, ps.relay, ps.dest, hi > 0.0 ? lo / hi : 1.0});
    }
    for (const auto &pb : rep.pairs)
        rep.mean_ratio += pb.ratio;
    if (!rep.pairs.empty())
        rep.mean_ratio /= static_cast<double>(rep.pairs.size());
    return rep;
}

struct TimingRow
{
    Scheme scheme = Scheme::BnbI;
    double value = 0.0;
    double mean_time_s = 0.0;
    double mean_nodes = 0.0;
    double mean_iters = 0.0;
    std::size_t trials = 0;
};

/// Mean wall time per (scheme, swept value) over the successful trials.
inline std::vector<TimingRow> timing_table(const std::vector<TrialRecord> &records)
{
    std::map<std::pair<std::size_t, double>, TimingRow> rows;
    for (const auto &r : records)
    {
        if (r.failed)
            continue;
        auto &row = rows[{static_cast<std::size_t>(r.scheme), r.value}];
        row.scheme = r.scheme;
        row.value = r.value;
        row.mean_time_s += r.time_s;
        row.mean_nodes += static_cast<double>(r.nodes);
        row.mean_iters += static_cast<double>(r.iters);
        ++row.trials;
    }
    std::vector<TimingRow> out;
    for (auto &[key, row] : rows)
    {
        const auto n = static_cast<double>(row.trials);
        row.mean_time_s /= n;
        row.mean_nodes /= n;
        row.mean_iters /= n;
        out.push_back(row);
    }
    return out;
}

inline std::vector<TimingRow> timing_table(const SweepSpec &spec, std::size_t threads = 0)
{
    if (spec.parameter != SweepParameter::NSubcarriers)
        throw std::invalid_argument("timing_table: the spec must sweep n_subcarriers.");
    return timing_table(run_sweep(spec, threads));
}

// ---------- CSV and plots ----------

inline constexpr std::string_view csv_header = "scheme,param,value,seed,rate_bps,time_s,nodes,iters";

namespace detail
{
inline std::string fmt_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
} // namespace detail

/// CSV text of the records. With `timing` false the time column is written as 0,
/// which makes the output a pure function of the spec.
inline std::string to_csv(const std::vector<TrialRecord> &records, bool timing = true)
{
    std::ostringstream os;
    os << csv_header << '\n';
    for (const auto &r : records)
        os << to_string(r.scheme) << ',' << to_string(r.parameter) << ',' << detail::fmt_double(r.value) << ','
           << r.seed << ',' << (r.failed ? std::string("nan") : detail::fmt_double(r.rate_bps)) << ','
           << detail::fmt_double(timing ? r.time_s : 0.0) << ',' << r.nodes << ',' << r.iters << '\n';
    return os.str();
}

inline void emit_csv(const std::vector<TrialRecord> &records, const std::string &path, bool timing = true)
{
    if (records.empty())
        throw std::invalid_argument("emit_csv: no records.");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("Cannot write '" + path + "'.");
    out << to_csv(records, timing);
    if (!out)
        throw std::runtime_error("Failed writing '" + path + "'.");
}

/// Parses CSV text written by `to_csv`. Per-pair SNRs are not part of the CSV.
inline std::vector<TrialRecord> parse_csv(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line) || trim(line) != csv_header)
        throw std::invalid_argument("parse_csv: unexpected header.");
    std::vector<TrialRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        if (trim(line).empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            f.push_back(cell);
        if (f.size() != 8)
            throw std::invalid_argument("parse_csv: line " + std::to_string(line_no) + " has " +
                                        std::to_string(f.size()) + " fields.");
        TrialRecord r;
        r.scheme = parse_scheme(f[0]);
        r.parameter = parse_sweep_parameter(f[1]);
        r.value = detail::to_double("value", f[2]);
        r.seed = detail::to_uint("seed", f[3]);
        if (f[4] == "nan")
        {
            r.failed = true;
            r.rate_bps = std::numeric_limits<double>::quiet_NaN();
        }
        else
            r.rate_bps = detail::to_double("rate_bps", f[4]);
        r.time_s = detail::to_double("time_s", f[5]);
        r.nodes = detail::to_uint("nodes", f[6]);
        r.iters = detail::to_uint("iters", f[7]);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<TrialRecord> read_csv(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("Cannot open '" + path + "'.");
    return parse_csv(in);
}

namespace detail
{
inline std::string axis_label(SweepParameter p)
{
    switch (p)
    {
    case SweepParameter::TransmitPower: return "Transmit power (dBm)";
    case SweepParameter::NElements: return "Number of RIS reflecting elements M";
    case SweepParameter::NSubcarriers: return "Number of subcarriers N";
    case SweepParameter::RisHeight: return "RIS height (m)";
    case SweepParameter::FadingExponent: return "Fading factor";
    case SweepParameter::QuantizationBits: return "Quantization bits (0 = continuous)";
    }
    return "value";
}
} // namespace detail

/// Writes a standalone Python/matplotlib script that plots mean spectral efficiency
/// (sum rate over the N * Delta occupied bandwidth) per scheme against the swept value.
inline void emit_plot_script(const std::vector<TrialRecord> &records, const SweepSpec &spec,
                             const std::string &csv_path, const std::string &path)
{
    if (records.empty())
        throw std::invalid_argument("emit_plot_script: no records.");
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("Cannot write '" + path + "'.");
    std::ostringstream bw;
    bw << '{';
    for (std::size_t i = 0; i < spec.values.size(); ++i)
    {
        const auto cfg = apply_sweep_value(spec.base, spec.parameter, spec.values[i]);
        bw << (i ? ", " : "") << detail::fmt_double(spec.values[i]) << ": "
           << detail::fmt_double(static_cast<double>(cfg.n_subcarriers) * cfg.subcarrier_bandwidth_hz);
    }
    bw << '}';

    out << "#!/usr/bin/env python3\n"
           "# Generated by rislink. Plots the sweep in "
        << csv_path
        << ".\n"
           "import csv\n"
           "import math\n"
           "import sys\n"
           "from collections import defaultdict\n\n"
           "import matplotlib\n"
           "matplotlib.use(\"Agg\")\n"
           "import matplotlib.pyplot as plt\n\n"
           "CSV = sys.argv[1] if len(sys.argv) > 1 else \""
        << csv_path
        << "\"\n"
           "OUT = sys.argv[2] if len(sys.argv) > 2 else CSV.rsplit(\".\", 1)[0] + \".png\"\n"
           "BANDWIDTH_HZ = "
        << bw.str()
        << "\n\n"
           "rates = defaultdict(lambda: defaultdict(list))\n"
           "order = []\n"
           "with open(CSV, newline=\"\") as f:\n"
           "    for row in csv.DictReader(f):\n"
           "        rate = float(row[\"rate_bps\"])\n"
           "        if math.isnan(rate):\n"
           "            continue\n"
           "        value = float(row[\"value\"])\n"
           "        if row[\"scheme\"] not in order:\n"
           "            order.append(row[\"scheme\"])\n"
           "        rates[row[\"scheme\"]][value].append(rate / BANDWIDTH_HZ[value])\n\n"
           "markers = \"osD^v<>\"\n"
           "fig, ax = plt.subplots(figsize=(6, 4.5))\n"
           "for i, scheme in enumerate(order):\n"
           "    xs = sorted(rates[scheme])\n"
           "    ys = [sum(rates[scheme][x]) / len(rates[scheme][x]) for x in xs]\n"
           "    ax.plot(xs, ys, marker=markers[i % len(markers)], label=scheme)\n"
           "ax.set_xlabel(\""
        << detail::axis_label(spec.parameter)
        << "\")\n"
           "ax.set_ylabel(\"Achievable rate (bps/Hz)\")\n"
           "ax.grid(True, alpha=0.3)\n"
           "ax.legend()\n"
           "fig.tight_layout()\n"
           "fig.savefig(OUT, dpi=150)\n"
           "print(\"wrote\", OUT)\n";
    if (!out)
        throw std::runtime_error("Failed writing '" + path + "'.");
}

} // namespace rislink
