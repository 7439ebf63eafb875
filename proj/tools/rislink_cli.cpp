// SPDX-License-Identifier: Apache-2.0
//
// rislink - joint subcarrier matching and RIS passive beamforming for
// OFDM decode-and-forward relaying.
// ------------------------------------------------------------------------
//
// Command line front end: run, sweep, snr-report, bench.

#include <rislink/rislink.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

using namespace rislink;

namespace
{

struct Options
{
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::string out_dir = ".";
    std::string schemes;
    std::size_t threads = 0;
    bool no_timing = false;
};

std::vector<Scheme> schemes_or(const Options &o, std::vector<Scheme> fallback)
{
    return o.schemes.empty() ? fallback : parse_scheme_list(o.schemes);
}

ScenarioConfig scenario(const std::string &path, const Options &o)
{
    auto cfg = load_config(path);
    if (o.seed)
        cfg.rng_seed = *o.seed;
    return cfg;
}

SweepSpec sweep_spec(const std::string &path, const Options &o)
{
    auto spec = load_sweep(path);
    if (o.seed)
        spec.base.rng_seed = *o.seed;
    if (o.trials)
        spec.trials = *o.trials;
    if (!o.schemes.empty())
        spec.schemes = parse_scheme_list(o.schemes);
    spec.validate();
    return spec;
}

std::string matching_text(const Matching &m)
{
    std::string s;
    for (auto [p, q] : m.pairs)
        s += (s.empty() ? "" : " ") + std::to_string(p) + "->" + std::to_string(q);
    return s.empty() ? "(none)" : s;
}

void print_result(Scheme s, std::uint64_t seed, const OptimizationResult &r)
{
    std::printf("%-9s seed=%llu rate=%.6g bps rounds=%zu nodes=%zu dcp_iters=%zu sdp_iters=%zu time=%.3f s\n",
                std::string(to_string(s)).c_str(), static_cast<unsigned long long>(seed), r.sum_rate_bps, r.rounds,
                r.bnb_nodes, r.dcp_iterations, r.sdp_iterations, r.wall_time_s);
    std::printf("          matching %s\n", matching_text(r.matching).c_str());
}

int failed_records(const std::vector<TrialRecord> &records)
{
    int failed = 0;
    for (const auto &r : records)
        if (r.failed)
        {
            std::fprintf(stderr, "failed: %s %s=%g seed=%llu: %s\n", std::string(to_string(r.scheme)).c_str(),
                         std::string(to_string(r.parameter)).c_str(), r.value,
                         static_cast<unsigned long long>(r.seed), r.error.c_str());
            ++failed;
        }
    return failed;
}

int cmd_run(const std::string &path, const Options &o)
{
    const auto cfg = scenario(path, o);
    const std::size_t trials = o.trials.value_or(1);
    int status = 0;
    for (Scheme s : schemes_or(o, {Scheme::BnbI}))
        for (std::size_t t = 0; t < trials; ++t)
        {
            const auto seed = trials == 1 ? cfg.rng_seed : trial_seed(cfg.rng_seed, t);
            try
            {
                print_result(s, seed, run_scheme(s, cfg, seed));
            }
            catch (const OptimizationError &e)
            {
                std::fprintf(stderr, "%s seed=%llu: %s\n", std::string(to_string(s)).c_str(),
                             static_cast<unsigned long long>(seed), e.what());
                print_result(s, seed, e.partial());
                status = 2;
            }
        }
    return status;
}

int cmd_snr_report(const std::string &path, const Options &o)
{
    const auto cfg = scenario(path, o);
    const std::size_t trials = o.trials.value_or(1);
    int status = 0;
    for (Scheme s : schemes_or(o, {Scheme::BnbI, Scheme::RelayOnly}))
    {
        double mean = 0.0;
        std::size_t ok = 0;
        std::printf("%s\n  %-6s %-6s %12s %12s %8s\n", std::string(to_string(s)).c_str(), "p", "q", "relay_dB",
                    "dest_dB", "ratio");
        for (std::size_t t = 0; t < trials; ++t)
        {
            const auto seed = trials == 1 ? cfg.rng_seed : trial_seed(cfg.rng_seed, t);
            try
            {
                const auto rep = snr_balance_report(run_scheme(s, cfg, seed));
                for (const auto &pb : rep.pairs)
                    std::printf("  %-6zu %-6zu %12.3f %12.3f %8.4f\n", pb.p, pb.q, linear_to_db(pb.relay),
                                linear_to_db(pb.dest), pb.ratio);
                mean += rep.mean_ratio;
                ++ok;
            }
            catch (const std::exception &e)
            {
                std::fprintf(stderr, "%s seed=%llu: %s\n", std::string(to_string(s)).c_str(),
                             static_cast<unsigned long long>(seed), e.what());
                status = 2;
            }
        }
        if (ok)
            std::printf("  mean min/max ratio %.6f over %zu trial(s)\n", mean / static_cast<double>(ok), ok);
    }
    return status;
}

int cmd_sweep(const std::string &path, const Options &o)
{
    const auto spec = sweep_spec(path, o);
    const auto records = run_sweep(spec, o.threads);
    std::filesystem::create_directories(o.out_dir);
    const std::string stem = "sweep_" + std::string(to_string(spec.parameter));
    const auto csv = std::filesystem::absolute(std::filesystem::path(o.out_dir) / (stem + ".csv")).string();
    const auto py = (std::filesystem::path(o.out_dir) / ("plot_" + stem + ".py")).string();
    emit_csv(records, csv, !o.no_timing);
    emit_plot_script(records, spec, csv, py);

    std::map<std::pair<std::size_t, double>, std::pair<double, std::size_t>> means;
    for (const auto &r : records)
        if (!r.failed)
        {
            auto &[sum, n] = means[{static_cast<std::size_t>(r.scheme), r.value}];
            sum += r.rate_bps;
            ++n;
        }
    std::printf("%-9s %12s %14s %7s\n", "scheme", std::string(to_string(spec.parameter)).c_str(), "mean_rate_bps",
                "trials");
    for (const auto &[key, acc] : means)
        std::printf("%-9s %12g %14.6g %7zu\n", std::string(scheme_names[key.first]).c_str(), key.second,
                    acc.first / static_cast<double>(acc.second), acc.second);
    std::printf("wrote %s\nwrote %s\n", csv.c_str(), py.c_str());
    return failed_records(records) ? 2 : 0;
}

int cmd_bench(const std::string &path, const Options &o)
{
    const auto spec = sweep_spec(path, o);
    if (spec.parameter != SweepParameter::NSubcarriers)
        throw std::invalid_argument("bench: the spec must sweep n_subcarriers.");
    // one worker unless asked otherwise, so timings are not skewed by contention
    const auto records = run_sweep(spec, o.threads ? o.threads : 1);
    std::printf("%-9s %4s %12s %12s %12s %7s\n", "scheme", "N", "mean_time_s", "mean_nodes", "mean_iters", "trials");
    for (const auto &row : timing_table(records))
        std::printf("%-9s %4g %12.5f %12.1f %12.1f %7zu\n", std::string(to_string(row.scheme)).c_str(), row.value,
                    row.mean_time_s, row.mean_nodes, row.mean_iters, row.trials);
    return failed_records(records) ? 2 : 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Joint subcarrier matching and RIS beamforming for an OFDM DF relay."};
    app.require_subcommand(1);

    Options o;
    app.add_option("--seed", o.seed, "Override the base RNG seed");
    app.add_option("--trials", o.trials, "Number of Monte-Carlo trials")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", o.out_dir, "Directory for CSV and plot output")->capture_default_str();
    app.add_option("--schemes", o.schemes, "Comma-separated scheme list, e.g. BnB-I,DCP-I,RelayOnly");
    app.add_option("--threads", o.threads, "Worker threads for sweeps (0 = all cores)");
    app.add_flag("--no-timing", o.no_timing, "Write time_s as 0 so sweep CSVs are byte-reproducible");

    std::string path;
    std::function<int()> action;
    auto sub = [&](const char *name, const char *help, int (*fn)(const std::string &, const Options &))
    {
        auto *s = app.add_subcommand(name, help);
        s->add_option("file", path, "Key-value config or sweep spec")->required()->check(CLI::ExistingFile);
        s->fallthrough();
        s->callback([&, fn] { action = [&, fn] { return fn(path, o); }; });
    };
    sub("run", "Optimize one scenario and print the result", cmd_run);
    sub("sweep", "Run a parameter sweep, write CSV and a plot script", cmd_sweep);
    sub("snr-report", "Print per-pair relay and destination SNR balance", cmd_snr_report);
    sub("bench", "Time the matchers across subcarrier counts", cmd_bench);

    CLI11_PARSE(app, argc, argv);
    try
    {
        return action();
    }
    catch (const std::exception &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
