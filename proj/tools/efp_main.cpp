// Command-line front end: `efp run`, `efp validate`, `efp oracle`.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "efp/command.hpp"
#include "efp/diagnostics.hpp"
#include "efp/driver.hpp"
#include "efp/grid1d.hpp"
#include "efp/io.hpp"

namespace {

// Prints the independently computed reference numbers used by the tests:
// quadrature and direct-summation values one can check by hand.
void print_oracles() {
    using namespace efp;
    const double x0 = 0.0;
    std::cout << "U(0) in one dimension:                    "
              << format_value(reference_potential({&x0, 1})) << " (expect 0.5*log(2*pi) = "
              << format_value(0.5 * std::log(2.0 * std::numbers::pi)) << ")\n";

    {
        const Grid1d grid = Grid1d::uniform(10.0, 4001);
        std::vector<double> values(grid.nodes.size());
        for (std::size_t i = 0; i < grid.nodes.size(); ++i)
            values[i] = std::exp(-reference_potential({&grid.nodes[i], 1}));
        std::cout << "integral of exp(-U) over [-10,10]:        " << format_value(trapezoid(grid, values))
                  << " (expect 1)\n";
    }

    {
        const Dataset data = make_sine_dataset();
        double sum_sq = 0.0;
        for (double y : data.labels) sum_sq += y * y;
        std::cout << "sum of sin^2 over the training grid:      " << format_value(sum_sq)
                  << " (expect 101/2 = " << format_value(101.0 / 2.0) << ")\n";
        std::cout << "F of the zero-output cloud:               "
                  << format_value(sum_sq / (2.0 * static_cast<double>(data.size())))
                  << " (expect 0.25)\n";
        double val_sq = 0.0;
        for (double y : data.val_labels) val_sq += y * y;
        std::cout << "validation error of the zero predictor:   "
                  << format_value(val_sq / (2.0 * static_cast<double>(data.val_size())))
                  << " (expect 0.25)\n";
        std::cout << "z_2, y_2 of the sine dataset:             " << format_value(data.feature(1)[0])
                  << ", " << format_value(data.labels[1]) << '\n';
    }

    {
        // toy fixed point for v = x^2/2, sigma^2 = 2: density ~ exp(-x^2 - c)
        const double sigma2 = 2.0;
        const auto toy = efp::ToyObjective::quadratic();
        ParticleCloud dummy(1, 1);
        const auto frozen = toy.freeze(dummy);
        const Grid1d grid = Grid1d::uniform(6.0, 2001);
        const auto density = normalized_density(grid, [&](double x) {
            return gibbs_log_density_unnormalized(toy, *frozen, {&x, 1}, sigma2);
        });
        std::vector<double> second(grid.nodes.size());
        for (std::size_t i = 0; i < grid.nodes.size(); ++i)
            second[i] = grid.nodes[i] * grid.nodes[i] * density[i];
        std::cout << "toy fixed-point variance by quadrature:   "
                  << format_value(trapezoid(grid, second)) << " (expect sigma^2/(2+sigma^2) = 0.5)\n";

        std::vector<double> integrand(grid.nodes.size());
        for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
            const double x = grid.nodes[i];
            const double p = density[i];
            const double log_p = p > 0 ? std::log(p) : -745.0;
            integrand[i] =
                p * (0.5 * x * x + 0.5 * sigma2 * (log_p + reference_potential({&x, 1})));
        }
        std::cout << "toy V(m*) by quadrature:                  "
                  << format_value(trapezoid(grid, integrand))
                  << " (expect 1/4 + (log 2 - 1/2)/2 = "
                  << format_value(0.25 + 0.5 * (std::log(2.0) - 0.5)) << ")\n";
    }

    {
        // discrete OU stationary variance for x <- (1 - a ds) x + sigma sqrt(ds) xi
        const double sigma = 1.0, ds = 0.01, a = 0.5 * sigma * sigma;
        const double factor = 1.0 - a * ds;
        std::cout << "discrete OU variance (sigma=1, ds=0.01):  "
                  << format_value(sigma * sigma * ds / (1.0 - factor * factor)) << '\n';
    }

    std::cout << "Gaussian KL, N(0,1/4) vs N(0,1):          "
              << format_value(0.5 * (0.25 - 1.0 - std::log(0.25))) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropic fictitious play for mean-field optimization"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    bool baseline_flag = false;

    auto* run = app.add_subcommand("run", "run the configured experiment");
    run->add_option("--config", config_path, "configuration file")->required();
    run->add_option("--seed", seed_override, "override the configured seed");
    run->add_option("--out", out_override, "override the output directory");
    run->add_flag("--baseline", baseline_flag, "also run the mean-field Langevin baseline");

    auto* validate = app.add_subcommand("validate", "check a configuration file");
    validate->add_option("--config", config_path, "configuration file")->required();

    app.add_subcommand("oracle", "print independently computed reference values");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("oracle")) {
            print_oracles();
            return efp::kExitOk;
        }
        efp::ExperimentConfig cfg = efp::load_config(config_path);
        if (seed_override) cfg.efp.seed = *seed_override;
        if (out_override) cfg.out_dir = *out_override;
        if (baseline_flag) cfg.baseline = true;
        if (app.got_subcommand("validate")) {
            cfg.validate();
            std::cout << "config ok\n";
            return efp::kExitOk;
        }
        return efp::run_command(cfg);
    } catch (const efp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return efp::kExitConfig;
    } catch (const efp::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return efp::kExitIo;
    }
}
