// SPDX-License-Identifier: Apache-2.0
//
// rislink - joint subcarrier matching and RIS passive beamforming for
// OFDM decode-and-forward relaying.
// ------------------------------------------------------------------------

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rislink
{

/// The five physical links plus the relay-RIS leg of the second slot.
enum class Link : std::size_t
{
    SourceRelay = 0, // g^SR
    RelayDest,       // g^RD
    SourceRis,       // h^SI
    RisRelay,        // h^IR (slot 1, RIS towards relay)
    RisDest,         // h^ID
    RelayRis,        // h^RI (slot 2, relay towards RIS)
};

inline constexpr std::size_t link_count = 6;

inline constexpr std::array<std::string_view, link_count> link_names = {"sr", "rd", "si", "ir", "id", "ri"};

inline Link parse_link(std::string_view name)
{
    for (std::size_t i = 0; i < link_count; ++i)
        if (link_names[i] == name)
            return static_cast<Link>(i);
    throw std::invalid_argument("Unknown link id '" + std::string(name) + "'");
}

/// Numerical knobs of the matching, beamforming and alternating solvers.
struct SolverSettings
{
    double outer_threshold = 1e-6;   // relative objective increase that stops the alternation
    std::size_t max_rounds = 30;     // alternation round cap
    double dcp_threshold = 1e-6;     // relative increase that stops the DC inner loop
    std::size_t dcp_max_iterations = 50;
    std::optional<double> dcp_eta;   // penalty weight in bits/s; derived from the SNR table when unset
    double relaxation_gap = 1e-9;    // barrier duality gap (nats) of the box relaxations
    std::size_t bnb_node_limit = 5'000'000;
    double sdp_tolerance = 1e-7;     // relative duality gap / diagonal feasibility of the SDR
    std::size_t sdp_max_iterations = 200;
    std::size_t randomization_draws = 1000;
    double rank_one_ratio = 1e-6;    // second/first eigenvalue below which a lift counts as rank one
};

/// Every physical and algorithmic parameter of one experiment.
struct ScenarioConfig
{
    std::size_t n_subcarriers = 4;
    std::size_t n_elements = 8;
    std::size_t n_taps = 2;
    double subcarrier_bandwidth_hz = 15e3;
    double slot_duration_s = 0.1;
    double noise_power_w = 1e-12; // -90 dBm
    double p_source_w = 1.0;
    double p_relay_w = 1.0;
    double d_source_relay_m = 8.0;
    double d_relay_dest_m = 8.0;
    double d_ris_relay_m = 1.0;
    double ris_height_m = 0.70710678118654752; // 1/sqrt(2)
    double pathloss_ref_db = -20.0;
    double ref_distance_m = 1.0;
    double fading_exponent = 2.2;
    std::array<double, link_count> shadow_db{};
    int case_indicator = 0;
    std::optional<int> quantization_bits;
    std::uint64_t rng_seed = 1;
    SolverSettings solver;

    double shadow(Link l) const { return shadow_db[static_cast<std::size_t>(l)]; }
    double &shadow(Link l) { return shadow_db[static_cast<std::size_t>(l)]; }

    /// Rate prefactor Delta / (2T) in Hz.
    double rate_prefactor() const { return subcarrier_bandwidth_hz / (2.0 * slot_duration_s); }

    void validate() const
    {
        auto positive = [](double v, const char *what)
        {
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument(std::string(what) + " must be strictly positive.");
        };
        if (n_subcarriers < 1)
            throw std::invalid_argument("n_subcarriers must be at least 1.");
        if (n_taps < 1)
            throw std::invalid_argument("n_taps must be at least 1.");
        if (n_taps > n_subcarriers)
            throw std::invalid_argument("n_taps cannot exceed n_subcarriers.");
        positive(subcarrier_bandwidth_hz, "subcarrier_bandwidth_hz");
        positive(slot_duration_s, "slot_duration_s");
        positive(noise_power_w, "noise_power_w");
        positive(p_source_w, "p_source_w");
        positive(p_relay_w, "p_relay_w");
        positive(d_source_relay_m, "d_source_relay_m");
        positive(d_relay_dest_m, "d_relay_dest_m");
        positive(d_ris_relay_m, "d_ris_relay_m");
        positive(ref_distance_m, "ref_distance_m");
        positive(fading_exponent, "fading_exponent");
        if (!(ris_height_m >= 0.0))
            throw std::invalid_argument("ris_height_m cannot be negative.");
        if (case_indicator != 0 && case_indicator != 1)
            throw std::invalid_argument("case_indicator must be 0 or 1.");
        if (quantization_bits && *quantization_bits < 1)
            throw std::invalid_argument("quantization_bits must be at least 1.");
        if (solver.randomization_draws < 1)
            throw std::invalid_argument("randomization_draws must be at least 1.");
    }
};

// ---------- key = value files ----------

using KeyValues = std::map<std::string, std::string>;

inline std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are ignored.
inline KeyValues parse_key_values(std::istream &in)
{
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        auto body = trim(line);
        if (body.empty())
            continue;
        auto eq = body.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("Line " + std::to_string(line_no) + ": expected 'key = value'.");
        auto key = trim(std::string_view(body).substr(0, eq));
        auto value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("Line " + std::to_string(line_no) + ": empty key.");
        if (!kv.emplace(key, value).second)
            throw std::invalid_argument("Line " + std::to_string(line_no) + ": duplicate key '" + key + "'.");
    }
    return kv;
}

inline KeyValues read_key_values(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("Cannot open '" + path + "'.");
    return parse_key_values(in);
}

namespace detail
{
inline double to_double(const std::string &key, const std::string &v)
{
    std::size_t used = 0;
    double d = 0.0;
    try
    {
        d = std::stod(v, &used);
    }
    catch (const std::exception &)
    {
        used = 0;
    }
    if (used == 0 || trim(std::string_view(v).substr(used)).size() != 0)
        throw std::invalid_argument("Key '" + key + "': '" + v + "' is not a number.");
    return d;
}

inline std::uint64_t to_uint(const std::string &key, const std::string &v)
{
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("Key '" + key + "': '" + v + "' is not a non-negative integer.");
    return std::stoull(v);
}
} // namespace detail

/// Applies one key to a config. Returns false if the key is not a scenario key.
inline bool apply_config_key(ScenarioConfig &c, const std::string &key, const std::string &value)
{
    using detail::to_double;
    using detail::to_uint;
    if (key == "n_subcarriers") c.n_subcarriers = to_uint(key, value);
    else if (key == "n_elements") c.n_elements = to_uint(key, value);
    else if (key == "n_taps") c.n_taps = to_uint(key, value);
    else if (key == "subcarrier_bandwidth_hz") c.subcarrier_bandwidth_hz = to_double(key, value);
    else if (key == "slot_duration_s") c.slot_duration_s = to_double(key, value);
    else if (key == "noise_power_w") c.noise_power_w = to_double(key, value);
    else if (key == "p_source_w") c.p_source_w = to_double(key, value);
    else if (key == "p_relay_w") c.p_relay_w = to_double(key, value);
    else if (key == "d_source_relay_m") c.d_source_relay_m = to_double(key, value);
    else if (key == "d_relay_dest_m") c.d_relay_dest_m = to_double(key, value);
    else if (key == "d_ris_relay_m") c.d_ris_relay_m = to_double(key, value);
    else if (key == "ris_height_m") c.ris_height_m = to_double(key, value);
    else if (key == "pathloss_ref_db") c.pathloss_ref_db = to_double(key, value);
    else if (key == "ref_distance_m") c.ref_distance_m = to_double(key, value);
    else if (key == "fading_exponent") c.fading_exponent = to_double(key, value);
    else if (key.rfind("shadow_db.", 0) == 0) c.shadow(parse_link(key.substr(10))) = to_double(key, value);
    else if (key == "case_indicator") c.case_indicator = static_cast<int>(to_uint(key, value));
    else if (key == "quantization_bits")
    {
        if (value == "none" || value.empty())
            c.quantization_bits.reset();
        else
            c.quantization_bits = static_cast<int>(to_uint(key, value));
    }
    else if (key == "rng_seed") c.rng_seed = to_uint(key, value);
    else if (key == "solver.outer_threshold") c.solver.outer_threshold = to_double(key, value);
    else if (key == "solver.max_rounds") c.solver.max_rounds = to_uint(key, value);
    else if (key == "solver.dcp_threshold") c.solver.dcp_threshold = to_double(key, value);
    else if (key == "solver.dcp_max_iterations") c.solver.dcp_max_iterations = to_uint(key, value);
    else if (key == "solver.dcp_eta")
    {
        if (value == "auto")
            c.solver.dcp_eta.reset();
        else
            c.solver.dcp_eta = to_double(key, value);
    }
    else if (key == "solver.relaxation_gap") c.solver.relaxation_gap = to_double(key, value);
    else if (key == "solver.bnb_node_limit") c.solver.bnb_node_limit = to_uint(key, value);
    else if (key == "solver.sdp_tolerance") c.solver.sdp_tolerance = to_double(key, value);
    else if (key == "solver.sdp_max_iterations") c.solver.sdp_max_iterations = to_uint(key, value);
    else if (key == "solver.randomization_draws") c.solver.randomization_draws = to_uint(key, value);
    else if (key == "solver.rank_one_ratio") c.solver.rank_one_ratio = to_double(key, value);
    else return false;
    return true;
}

/// Builds a validated config from key-value pairs. Keys it does not know are
/// rejected unless they start with one of the `ignored_prefixes`.
inline ScenarioConfig config_from_key_values(const KeyValues &kv, std::string_view ignored_prefix = {})
{
    ScenarioConfig c;
    for (const auto &[key, value] : kv)
    {
        if (!ignored_prefix.empty() && key.rfind(ignored_prefix, 0) == 0)
            continue;
        if (!apply_config_key(c, key, value))
            throw std::invalid_argument("Unknown config key '" + key + "'.");
    }
    c.validate();
    return c;
}

inline ScenarioConfig load_config(const std::string &path)
{
    return config_from_key_values(read_key_values(path));
}

/// Serializes a config in the same schema `load_config` reads.
inline std::string to_key_values(const ScenarioConfig &c)
{
    std::ostringstream os;
    os.precision(17);
    os << "n_subcarriers = " << c.n_subcarriers << '\n'
       << "n_elements = " << c.n_elements << '\n'
       << "n_taps = " << c.n_taps << '\n'
       << "subcarrier_bandwidth_hz = " << c.subcarrier_bandwidth_hz << '\n'
       << "slot_duration_s = " << c.slot_duration_s << '\n'
       << "noise_power_w = " << c.noise_power_w << '\n'
       << "p_source_w = " << c.p_source_w << '\n'
       << "p_relay_w = " << c.p_relay_w << '\n'
       << "d_source_relay_m = " << c.d_source_relay_m << '\n'
       << "d_relay_dest_m = " << c.d_relay_dest_m << '\n'
       << "d_ris_relay_m = " << c.d_ris_relay_m << '\n'
       << "ris_height_m = " << c.ris_height_m << '\n'
       << "pathloss_ref_db = " << c.pathloss_ref_db << '\n'
       << "ref_distance_m = " << c.ref_distance_m << '\n'
       << "fading_exponent = " << c.fading_exponent << '\n';
    for (std::size_t i = 0; i < link_count; ++i)
        os << "shadow_db." << link_names[i] << " = " << c.shadow_db[i] << '\n';
    os << "case_indicator = " << c.case_indicator << '\n'
       << "quantization_bits = " << (c.quantization_bits ? std::to_string(*c.quantization_bits) : "none") << '\n'
       << "rng_seed = " << c.rng_seed << '\n';
    const auto &s = c.solver;
    os << "solver.outer_threshold = " << s.outer_threshold << '\n'
       << "solver.max_rounds = " << s.max_rounds << '\n'
       << "solver.dcp_threshold = " << s.dcp_threshold << '\n'
       << "solver.dcp_max_iterations = " << s.dcp_max_iterations << '\n'
       << "solver.dcp_eta = ";
    if (s.dcp_eta)
        os << *s.dcp_eta << '\n';
    else
        os << "auto\n";
    os << "solver.relaxation_gap = " << s.relaxation_gap << '\n'
       << "solver.bnb_node_limit = " << s.bnb_node_limit << '\n'
       << "solver.sdp_tolerance = " << s.sdp_tolerance << '\n'
       << "solver.sdp_max_iterations = " << s.sdp_max_iterations << '\n'
       << "solver.randomization_draws = " << s.randomization_draws << '\n'
       << "solver.rank_one_ratio = " << s.rank_one_ratio << '\n';
    return os.str();
}

} // namespace rislink
