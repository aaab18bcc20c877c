// Command-line runner for the weak-constraint 4D-Var preconditioning
// experiments: twin-experiment runs, spectrum dumps, parameter sweeps and
// SVG plots from the emitted CSV tables.

#include "wc4dvar/csv.hpp"
#include "wc4dvar/runner.hpp"
#include "wc4dvar/svg.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

namespace {

using namespace wc4dvar;

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
    ExperimentConfig cfg = ExperimentConfig::load(path, overrides);
    return cfg;
}

void dump_effective_config(const ExperimentConfig& cfg, const std::string& out_dir) {
    write_file_atomic(out_dir + "/effective.cfg", cfg.dump());
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            std::string out_dir) {
    const ExperimentConfig cfg = load_config(config_path, overrides);
    if (out_dir.empty()) out_dir = cfg.directory;
    const RunOutput out = run_experiment(cfg);
    write_run_outputs(out, out_dir);
    dump_effective_config(cfg, out_dir);
    std::cout << "hessian dimension: " << out.hessian_dim << "\n";
    if (!cfg.apply_in_first_loop)
        std::cout << "first inner loop iterations: " << out.first_loop_iterations << "\n";
    std::cout << "wrote " << out_dir << "/cost_history.csv, ritz_values.csv, summary.csv\n";
    return 0;
}

int cmd_spectrum(const std::string& config_path, const std::vector<std::string>& overrides,
                 std::string out_dir) {
    const ExperimentConfig cfg = load_config(config_path, overrides);
    if (out_dir.empty()) out_dir = cfg.directory;
    const SpectrumOutput out = spectrum_experiment(cfg);
    write_spectrum_output(out, out_dir);
    dump_effective_config(cfg, out_dir);
    std::cout << "hessian dimension: " << out.hessian_dim << "\n";
    std::cout << "wrote " << out_dir << "/spectrum.csv\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& overrides,
              std::string out_dir, const std::string& axis,
              const std::vector<std::string>& values) {
    const ExperimentConfig cfg = load_config(config_path, overrides);
    if (out_dir.empty()) out_dir = cfg.directory;
    const SweepOutput out = sweep_experiment(cfg, parse_sweep_axis(axis), values);
    write_sweep_output(out, out_dir);
    dump_effective_config(cfg, out_dir);
    std::cout << "wrote " << out_dir << "/sweep_summary.csv\n";
    return 0;
}

// Column layouts understood by the plotter, detected from the CSV header.
struct SeriesLayout {
    std::string x_col, y_col;
    std::vector<std::string> key_cols;
    bool log_y = false;
    bool scatter = false;
};

SeriesLayout detect_layout(const CsvTable& table, const std::string& path) {
    SeriesLayout layout;
    if (table.column("quadratic_cost") >= 0) {
        layout = {"iteration", "quadratic_cost", {"spec", "seed"}, true, false};
    } else if (table.column("eigenvalue") >= 0) {
        layout = {"index", "eigenvalue", {"spec"}, true, true};
    } else if (table.column("mean_cost") >= 0 && table.column("value") >= 0) {
        layout = {"iteration", "std_cost", {"spec", "value"}, true, false};
    } else if (table.column("mean_cost") >= 0) {
        layout = {"iteration", "mean_cost", {"spec"}, true, false};
    } else if (table.column("theta") >= 0) {
        layout = {"index", "theta", {"spec", "seed"}, true, true};
    } else {
        throw ConfigError("plot: unrecognized CSV header in '" + path + "'");
    }
    return layout;
}

int cmd_plot(const std::vector<std::string>& csv_paths, const std::string& svg_path,
             int log_flag) {
    std::vector<PlotSeries> series;
    PlotOptions opts;
    for (const std::string& path : csv_paths) {
        const CsvTable table = read_csv(path);
        const SeriesLayout layout = detect_layout(table, path);
        opts.log_y = layout.log_y;
        opts.scatter = layout.scatter;
        opts.x_label = layout.x_col;
        opts.y_label = layout.y_col;
        const Index xc = table.column(layout.x_col);
        const Index yc = table.column(layout.y_col);
        if (xc < 0 || yc < 0)
            throw ConfigError("plot: column missing in '" + path + "'");
        std::vector<Index> key_cols;
        for (const std::string& k : layout.key_cols) {
            const Index c = table.column(k);
            if (c >= 0) key_cols.push_back(c);
        }
        std::map<std::string, Index> index_of;
        for (size_t row = 0; row < table.rows.size(); ++row) {
            std::string key;
            for (Index c : key_cols) key += table.rows[row][c] + "/";
            if (!index_of.count(key)) {
                index_of[key] = static_cast<Index>(series.size());
                PlotSeries s;
                s.label = key.empty() ? path : key.substr(0, key.size() - 1);
                series.push_back(s);
            }
            PlotSeries& s = series[index_of[key]];
            s.x.push_back(table.number(row, xc));
            s.y.push_back(table.number(row, yc));
        }
    }
    if (log_flag == 1) opts.log_y = true;
    if (log_flag == -1) opts.log_y = false;
    const std::string svg = render_svg(series, opts);
    write_file_atomic(svg_path, svg);
    std::cout << "wrote " << svg_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weak-constraint 4D-Var preconditioning experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir, svg_path, axis;
    std::vector<std::string> overrides, values, csv_paths;
    bool logy = false, linear = false;

    CLI::App* run = app.add_subcommand("run", "run the twin experiment");
    run->add_option("--config", config_path, "configuration file")->required();
    run->add_option("--set", overrides, "override section.key=value");
    run->add_option("--out", out_dir, "output directory");

    CLI::App* spectrum = app.add_subcommand("spectrum", "dense spectra of A and C^T A C");
    spectrum->add_option("--config", config_path, "configuration file")->required();
    spectrum->add_option("--set", overrides, "override section.key=value");
    spectrum->add_option("--out", out_dir, "output directory");

    CLI::App* sweep = app.add_subcommand("sweep", "repeat the run across an axis");
    sweep->add_option("--config", config_path, "configuration file")->required();
    sweep->add_option("--set", overrides, "override section.key=value");
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--axis", axis, "k, l or obs-network")->required();
    sweep->add_option("--values", values, "axis values (obs-network: sx/st)")
        ->required()
        ->delimiter(',');

    CLI::App* plot = app.add_subcommand("plot", "render CSV tables to SVG");
    plot->add_option("--svg", svg_path, "output SVG path")->required();
    plot->add_flag("--logy", logy, "force logarithmic y axis");
    plot->add_flag("--linear", linear, "force linear y axis");
    plot->add_option("csv", csv_paths, "input CSV files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (*run) return cmd_run(config_path, overrides, out_dir);
        if (*spectrum) return cmd_spectrum(config_path, overrides, out_dir);
        if (*sweep) return cmd_sweep(config_path, overrides, out_dir, axis, values);
        if (*plot) return cmd_plot(csv_paths, svg_path, logy ? 1 : (linear ? -1 : 0));
    } catch (const wc4dvar::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const wc4dvar::DenseCapError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const wc4dvar::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
