#pragma once

// The `run` command: executes the configured experiment and emits
// trace.csv, final_cloud.csv, timing.csv and optional SVG plots into the
// output directory.

#include <filesystem>
#include <iostream>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "efp/driver.hpp"
#include "efp/io.hpp"
#include "efp/svg.hpp"

namespace efp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitIo = 4;

inline std::unique_ptr<Objective> make_objective(const ExperimentConfig& cfg) {
    if (cfg.problem == Problem::sine)
        return std::make_unique<NnObjective>(make_sine_dataset());
    return std::make_unique<ToyObjective>(cfg.toy_v == ToyPotential::quadratic
                                              ? ToyObjective::quadratic()
                                              : ToyObjective::zero());
}

namespace detail {

// epochs plotted in the function-fit figure, shallow to deep
inline const std::vector<std::int64_t> kFitEpochs{10, 20, 50, 100, 200, 600};
inline const std::vector<std::string> kFitStrokes{"#c6dbef", "#9ecae1", "#6baed6",
                                                  "#4292c6", "#2171b5", "#08306b"};

inline void write_error_svg(const std::filesystem::path& path, const RunTrace& trace) {
    SvgSeries errors;
    for (const auto& row : trace.rows)
        if (row.validation_error)
            errors.points.emplace_back(static_cast<double>(row.epoch),
                                       std::max(*row.validation_error, 1e-12));
    if (errors.points.empty()) return;
    write_line_svg(path, {.x_label = "epoch", .y_label = "validation error", .log_y = true},
                   {errors});
}

inline void write_fit_svg(const std::filesystem::path& path, const NnObjective& objective,
                          const std::vector<std::pair<std::int64_t, ParticleCloud>>& snapshots) {
    std::vector<SvgSeries> series;
    SvgSeries target;
    target.stroke = "#d62728";
    target.stroke_width = 2.0;
    target.dash = "6,4";
    constexpr int grid = 401;
    for (int i = 0; i < grid; ++i) {
        const double z = static_cast<double>(i) / (grid - 1);
        target.points.emplace_back(z, std::sin(2.0 * std::numbers::pi * z));
    }
    for (std::size_t s = 0; s < snapshots.size(); ++s) {
        SvgSeries fit;
        fit.stroke = kFitStrokes[std::min(s, kFitStrokes.size() - 1)];
        for (int i = 0; i < grid; ++i) {
            const double z = static_cast<double>(i) / (grid - 1);
            fit.points.emplace_back(z, objective.network_output(snapshots[s].second, {&z, 1}));
        }
        series.push_back(std::move(fit));
    }
    series.push_back(std::move(target));
    write_line_svg(path, {.x_label = "z", .y_label = "network output"}, series);
}

inline void emit_outputs(const std::filesystem::path& dir, const std::string& stem,
                         const RunTrace& trace, const ParticleCloud& final_cloud) {
    write_trace_csv(dir / ("trace" + stem + ".csv"), trace);
    write_timing_csv(dir / ("timing" + stem + ".csv"), trace);
    write_cloud_csv(dir / ("final_cloud" + stem + ".csv"), final_cloud);
}

}  // namespace detail

// Returns a process exit code: 0 ok, 2 config error, 3 numerical
// divergence, 4 I/O failure.
inline int run_command(const ExperimentConfig& cfg, std::ostream& log = std::cout,
                       std::ostream& err = std::cerr) {
    try {
        cfg.validate();
        const auto objective = make_objective(cfg);
        const std::filesystem::path dir{cfg.out_dir};
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory " + dir.string());

        std::vector<std::pair<std::int64_t, ParticleCloud>> snapshots;
        ParticleCloud final_cloud;
        const auto* nn = dynamic_cast<const NnObjective*>(objective.get());
        EpochObserver observer = [&](const EpochResult& result) {
            if (nn && cfg.emit_svg &&
                std::find(detail::kFitEpochs.begin(), detail::kFitEpochs.end(), result.epoch) !=
                    detail::kFitEpochs.end())
                snapshots.emplace_back(result.epoch, result.cloud);
            final_cloud = result.cloud;
        };

        const RunTrace trace = run_efp(*objective, cfg.efp, cfg.inner_sampler, observer);
        detail::emit_outputs(dir, "", trace, final_cloud);
        if (cfg.emit_svg && nn) {
            detail::write_error_svg(dir / "error.svg", trace);
            detail::write_fit_svg(dir / "fit.svg", *nn, snapshots);
        }

        double total_wall = 0.0;
        for (const auto& row : trace.rows) total_wall += row.wall_s;
        const auto& last = trace.rows.back();
        log << "run: " << trace.rows.size() << " epochs, objective " << format_value(last.objective);
        if (last.validation_error)
            log << ", validation error " << format_value(*last.validation_error);
        log << ", free energy " << format_value(last.free_energy) << ", wall "
            << format_value(total_wall) << " s\n";

        if (cfg.baseline) {
            ParticleCloud mfld_cloud;
            EpochObserver mfld_observer = [&](const EpochResult& r) { mfld_cloud = r.cloud; };
            const RunTrace mfld = run_mfld_baseline(*objective, cfg.efp, mfld_observer);
            detail::emit_outputs(dir, "_mfld", mfld, mfld_cloud);
            const auto& mlast = mfld.rows.back();
            log << "mfld baseline: objective " << format_value(mlast.objective);
            if (mlast.validation_error)
                log << ", validation error " << format_value(*mlast.validation_error);
            log << '\n';
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DivergenceError& e) {
        err << "numerical divergence: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
}

}  // namespace efp
