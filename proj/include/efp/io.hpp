#pragma once

// Experiment configuration file (flat `key = value` grammar, `#` comments),
// the sine dataset, and result emission. trace.csv is byte-reproducible for
// a fixed config and seed; measured wall times go to timing.csv instead.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "efp/driver.hpp"
#include "efp/types.hpp"

namespace efp {

enum class Problem { sine, toy };
enum class ToyPotential { quadratic, zero };

struct ExperimentConfig {
    Problem problem = Problem::sine;
    EfpConfig efp;
    ToyPotential toy_v = ToyPotential::quadratic;
    InnerMode inner_sampler = InnerMode::ula;
    std::string out_dir = "out";
    bool emit_svg = true;
    bool baseline = false;

    void validate() const {
        efp.validate();
        if (problem == Problem::sine && inner_sampler == InnerMode::exact_gibbs)
            throw ConfigError("inner_sampler = exact requires problem = toy");
    }
};

// K = 101 training samples z_k = (k-1)/101, y_k = sin(2 pi z_k), and a
// validation grid of 1000 evenly distributed points z_j = (j-1)/1000.
inline Dataset make_sine_dataset() {
    Dataset data;
    data.feature_dim = 1;
    constexpr std::size_t train = 101, val = 1000;
    data.features.reserve(train);
    data.labels.reserve(train);
    for (std::size_t k = 0; k < train; ++k) {
        const double z = static_cast<double>(k) / 101.0;
        data.features.push_back(z);
        data.labels.push_back(std::sin(2.0 * std::numbers::pi * z));
    }
    data.val_features.reserve(val);
    data.val_labels.reserve(val);
    for (std::size_t j = 0; j < val; ++j) {
        const double z = static_cast<double>(j) / 1000.0;
        data.val_features.push_back(z);
        data.val_labels.push_back(std::sin(2.0 * std::numbers::pi * z));
    }
    return data;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view value, int line, const std::string& key) {
    double out = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw ConfigError("line " + std::to_string(line) + ": invalid number for '" + key + "'");
    return out;
}

inline std::uint64_t parse_u64(std::string_view value, int line, const std::string& key) {
    std::uint64_t out = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw ConfigError("line " + std::to_string(line) + ": invalid integer for '" + key + "'");
    return out;
}

inline bool parse_bool(std::string_view value, int line, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("line " + std::to_string(line) + ": invalid boolean for '" + key + "'");
}

}  // namespace detail

// Applies `key = value` lines to the paper-default configuration. Unknown
// keys are rejected; all invariants are enforced before returning.
inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view sv = raw;
        if (const auto hash = sv.find('#'); hash != std::string_view::npos)
            sv = sv.substr(0, hash);
        sv = detail::trim(sv);
        if (sv.empty()) continue;
        const auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
        const std::string key{detail::trim(sv.substr(0, eq))};
        const std::string_view value = detail::trim(sv.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");

        if (key == "problem") {
            if (value == "sine") cfg.problem = Problem::sine;
            else if (value == "toy") cfg.problem = Problem::toy;
            else throw ConfigError("line " + std::to_string(line) + ": problem must be sine or toy");
        } else if (key == "dt") cfg.efp.dt = detail::parse_double(value, line, key);
        else if (key == "T") cfg.efp.T = detail::parse_double(value, line, key);
        else if (key == "alpha") cfg.efp.alpha = detail::parse_double(value, line, key);
        else if (key == "N") cfg.efp.N = static_cast<std::size_t>(detail::parse_u64(value, line, key));
        else if (key == "sigma2_half") cfg.efp.sigma2_half = detail::parse_double(value, line, key);
        else if (key == "ds") cfg.efp.ds = detail::parse_double(value, line, key);
        else if (key == "S_first") cfg.efp.S_first = detail::parse_double(value, line, key);
        else if (key == "S_other") cfg.efp.S_other = detail::parse_double(value, line, key);
        else if (key == "init_mean") cfg.efp.init_mean = detail::parse_double(value, line, key);
        else if (key == "init_std") cfg.efp.init_std = detail::parse_double(value, line, key);
        else if (key == "seed") cfg.efp.seed = detail::parse_u64(value, line, key);
        else if (key == "toy_v") {
            if (value == "quadratic") cfg.toy_v = ToyPotential::quadratic;
            else if (value == "zero") cfg.toy_v = ToyPotential::zero;
            else throw ConfigError("line " + std::to_string(line) +
                                   ": toy_v must be quadratic or zero");
        } else if (key == "inner_sampler") {
            if (value == "ula") cfg.inner_sampler = InnerMode::ula;
            else if (value == "exact") cfg.inner_sampler = InnerMode::exact_gibbs;
            else throw ConfigError("line " + std::to_string(line) +
                                   ": inner_sampler must be ula or exact");
        } else if (key == "out_dir") cfg.out_dir = std::string{value};
        else if (key == "emit_svg") cfg.emit_svg = detail::parse_bool(value, line, key);
        else if (key == "baseline") cfg.baseline = detail::parse_bool(value, line, key);
        else throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    return parse_config(in);
}

// Locale-independent fixed scientific format, 9 significant digits.
inline std::string format_value(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 8);
    return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) {
    return v ? format_value(*v) : std::string{};
}

inline constexpr std::string_view kTraceHeader =
    "epoch,t,objective,validation_error,entropy_rel_g,free_energy,aux_w1,aux_tv,wall_s";

// The wall_s column stays empty so that trace.csv is byte-identical across
// reruns; measured times are written by write_timing_csv.
inline void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << kTraceHeader << '\n';
    for (const auto& row : trace.rows) {
        out << row.epoch << ',' << format_value(row.t) << ',' << format_value(row.objective) << ','
            << format_optional(row.validation_error) << ',' << format_value(row.entropy_rel_g)
            << ',' << format_value(row.free_energy) << ',' << format_optional(row.aux_w1) << ','
            << format_optional(row.aux_tv) << ',' << '\n';
    }
    if (!out) throw IoError("failed while writing " + path.string());
}

inline void write_timing_csv(const std::filesystem::path& path, const RunTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "epoch,wall_s\n";
    for (const auto& row : trace.rows) out << row.epoch << ',' << format_value(row.wall_s) << '\n';
    if (!out) throw IoError("failed while writing " + path.string());
}

inline void write_cloud_csv(const std::filesystem::path& path, const ParticleCloud& cloud) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (int c = 0; c < cloud.dim(); ++c) out << (c ? "," : "") << 'c' << c;
    out << '\n';
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto x = cloud.particle(i);
        for (int c = 0; c < cloud.dim(); ++c) out << (c ? "," : "") << format_value(x[c]);
        out << '\n';
    }
    if (!out) throw IoError("failed while writing " + path.string());
}

}  // namespace efp
