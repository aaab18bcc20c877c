#include "wc4dvar/runner.hpp"

#include "wc4dvar/csv.hpp"
#include "wc4dvar/threads.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace wc4dvar {

namespace {

struct Job {
    PrecondSpec spec;
    InnerLoopReport report;
};

void append_job_rows(const Job& job, RunOutput& out) {
    const std::string label = job.spec.label();
    const std::uint64_t seed = job.spec.randomized() ? job.spec.seed : 0;
    const auto& costs = job.report.quadratic_costs;
    const auto& resid = job.report.residual_norms;
    for (size_t i = 0; i < costs.size(); ++i) {
        CostRow row;
        row.spec = label;
        row.seed = seed;
        row.iteration = static_cast<int>(i);
        row.quadratic_cost = costs[i];
        row.relative_residual = i < resid.size() ? resid[i] / resid[0] : 0.0;
        out.cost_history.push_back(row);
    }
    for (Index i = 0; i < job.report.ritz_values.size(); ++i)
        out.ritz_values.push_back(
            {label, seed, static_cast<int>(i + 1), job.report.ritz_values(i)});
}

}  // namespace

std::vector<SummaryRow> summarize_costs(const std::vector<CostRow>& rows) {
    // spec -> seed -> cost series
    std::map<std::string, std::map<std::uint64_t, std::vector<double>>> series;
    for (const CostRow& r : rows) {
        auto& s = series[r.spec][r.seed];
        if (static_cast<int>(s.size()) != r.iteration)
            throw std::invalid_argument("summarize_costs: iterations out of order");
        s.push_back(r.quadratic_cost);
    }
    std::vector<SummaryRow> out;
    for (const auto& [spec, by_seed] : series) {
        size_t longest = 0;
        for (const auto& [seed, costs] : by_seed) longest = std::max(longest, costs.size());
        for (size_t it = 0; it < longest; ++it) {
            double mean = 0.0;
            for (const auto& [seed, costs] : by_seed)
                mean += it < costs.size() ? costs[it] : costs.back();
            mean /= by_seed.size();
            double var = 0.0;
            for (const auto& [seed, costs] : by_seed) {
                const double v = (it < costs.size() ? costs[it] : costs.back()) - mean;
                var += v * v;
            }
            var /= by_seed.size();
            out.push_back({spec, static_cast<int>(it), mean, std::sqrt(var)});
        }
    }
    return out;
}

RunOutput run_experiment(const ExperimentConfig& cfg) {
    const AssimilationSystem sys = cfg.build_system();
    const TwinData twin =
        generate_twin(sys, cfg.twin_seeds(), cfg.noise_scale, cfg.truth_model_error);
    const SolverSpec solver = cfg.solver_spec();

    RunOutput out;
    out.hessian_dim = sys.window_dim();

    const OuterState s0 = initial_state(sys, twin);
    const std::shared_ptr<HessianOperator> h1 = sys.hessian(s0.traj);

    std::vector<Job> jobs;
    for (const PrecondSpec& spec : cfg.precond_specs()) jobs.push_back({spec, {}});

    const OuterState* loop_state = &s0;
    const HessianOperator* loop_hessian = h1.get();
    const HessianOperator* previous = nullptr;

    OuterState s1;
    std::shared_ptr<HessianOperator> h2;
    if (!cfg.apply_in_first_loop) {
        PrecondSpec none;
        none.kind = PrecondSpec::Kind::None;
        const InnerLoopReport first =
            run_inner_loop(sys, s0, twin, *h1, none, solver, nullptr, cfg.dense_cap);
        out.first_loop_iterations = first.iterations;
        s1 = outer_update(sys, s0, first.delta_p);
        h2 = sys.hessian(s1.traj);
        loop_state = &s1;
        loop_hessian = h2.get();
        previous = h1.get();
    } else {
        for (const Job& job : jobs)
            if (job.spec.kind == PrecondSpec::Kind::Deterministic)
                throw ConfigError(
                    "run: the deterministic LMP cannot precondition the first inner loop");
    }

    parallel_for(static_cast<Index>(jobs.size()), [&](Index i) {
        jobs[i].report = run_inner_loop(sys, *loop_state, twin, *loop_hessian, jobs[i].spec,
                                        solver, previous, cfg.dense_cap);
    });

    std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
        const std::string la = a.spec.label(), lb = b.spec.label();
        return la != lb ? la < lb : a.spec.seed < b.spec.seed;
    });
    for (const Job& job : jobs) append_job_rows(job, out);
    out.summary = summarize_costs(out.cost_history);
    return out;
}

void write_run_outputs(const RunOutput& out, const std::string& directory) {
    std::ostringstream cost;
    cost << "spec,seed,iteration,quadratic_cost,relative_residual\n";
    for (const CostRow& r : out.cost_history)
        cost << r.spec << "," << r.seed << "," << r.iteration << ","
             << csv_number(r.quadratic_cost) << "," << csv_number(r.relative_residual)
             << "\n";
    write_file_atomic(directory + "/cost_history.csv", cost.str());

    std::ostringstream ritz;
    ritz << "spec,seed,index,theta\n";
    for (const RitzRow& r : out.ritz_values)
        ritz << r.spec << "," << r.seed << "," << r.index << "," << csv_number(r.theta)
             << "\n";
    write_file_atomic(directory + "/ritz_values.csv", ritz.str());

    std::ostringstream summary;
    summary << "spec,iteration,mean_cost,std_cost\n";
    for (const SummaryRow& r : out.summary)
        summary << r.spec << "," << r.iteration << "," << csv_number(r.mean_cost) << ","
                << csv_number(r.std_cost) << "\n";
    write_file_atomic(directory + "/summary.csv", summary.str());
}

SpectrumOutput spectrum_experiment(const ExperimentConfig& cfg) {
    const AssimilationSystem sys = cfg.build_system();
    if (sys.window_dim() > cfg.dense_cap) {
        std::ostringstream msg;
        msg << "spectrum: dimension " << sys.window_dim() << " exceeds dense cap "
            << cfg.dense_cap << "; use a smaller configuration";
        throw DenseCapError(msg.str());
    }
    const TwinData twin =
        generate_twin(sys, cfg.twin_seeds(), cfg.noise_scale, cfg.truth_model_error);
    const OuterState s0 = initial_state(sys, twin);
    const std::shared_ptr<HessianOperator> h1 = sys.hessian(s0.traj);

    SpectrumOutput out;
    out.hessian_dim = sys.window_dim();

    std::vector<PrecondSpec> specs;
    {
        // One spectrum per method at the first sketch seed; 'none' is the
        // unpreconditioned Hessian itself.
        for (PrecondSpec::Kind kind : cfg.methods) {
            PrecondSpec spec;
            spec.kind = kind;
            spec.k = cfg.k;
            spec.l = cfg.l;
            spec.seed = spec.randomized() ? cfg.sketch_seeds.front() : 0;
            specs.push_back(spec);
        }
    }

    for (const PrecondSpec& spec : specs) {
        if (spec.kind == PrecondSpec::Kind::Deterministic)
            throw ConfigError("spectrum: the deterministic LMP has no first-loop spectrum");
        LmpFactor factor = LmpFactor::identity(h1->dim());
        if (spec.randomized()) {
            SketchConfig sketch;
            sketch.target_rank = spec.k;
            sketch.oversample = spec.l;
            sketch.seed = spec.seed;
            sketch.method = spec.kind == PrecondSpec::Kind::Revd ? SketchMethod::Revd
                            : spec.kind == PrecondSpec::Kind::Nystrom ? SketchMethod::Nystrom
                                                                      : SketchMethod::Ritzit;
            factor = build_spectral_lmp(sketch_eigenpairs(*h1, sketch));
        }
        const SplitPreconditionedOperator preconditioned(*h1, factor);
        const Matrix dense = assemble_dense(preconditioned, cfg.dense_cap);
        Eigen::SelfAdjointEigenSolver<Matrix> es(dense, Eigen::EigenvaluesOnly);
        const Vector values = es.eigenvalues().reverse();
        const std::string label = spec.label();
        for (Index i = 0; i < values.size(); ++i)
            out.rows.push_back({label, static_cast<int>(i + 1), values(i)});
    }
    return out;
}

void write_spectrum_output(const SpectrumOutput& out, const std::string& directory) {
    std::ostringstream spectrum;
    spectrum << "spec,index,eigenvalue\n";
    for (const SpectrumRow& r : out.rows)
        spectrum << r.spec << "," << r.index << "," << csv_number(r.eigenvalue) << "\n";
    write_file_atomic(directory + "/spectrum.csv", spectrum.str());
}

SweepAxis parse_sweep_axis(const std::string& name) {
    if (name == "k") return SweepAxis::K;
    if (name == "l") return SweepAxis::L;
    if (name == "obs-network") return SweepAxis::ObsNetwork;
    throw ConfigError("sweep: unknown axis '" + name + "' (expected k, l or obs-network)");
}

SweepOutput sweep_experiment(const ExperimentConfig& cfg, SweepAxis axis,
                             const std::vector<std::string>& values) {
    if (values.empty()) throw ConfigError("sweep: no axis values given");
    SweepOutput out;
    for (const std::string& value : values) {
        ExperimentConfig point = cfg;
        std::string axis_name;
        switch (axis) {
            case SweepAxis::K:
                axis_name = "k";
                point.k = std::stoi(value);
                break;
            case SweepAxis::L:
                axis_name = "l";
                point.l = std::stoi(value);
                break;
            case SweepAxis::ObsNetwork: {
                axis_name = "obs-network";
                const size_t slash = value.find('/');
                if (slash == std::string::npos)
                    throw ConfigError("sweep: obs-network values look like 'sx/st'");
                point.space_stride = std::stoi(value.substr(0, slash));
                point.time_stride = std::stoi(value.substr(slash + 1));
                break;
            }
        }
        point.validate();
        const RunOutput run = run_experiment(point);
        for (const SummaryRow& r : run.summary)
            out.rows.push_back({axis_name, value, r.spec, r.iteration, r.mean_cost, r.std_cost});
    }
    return out;
}

void write_sweep_output(const SweepOutput& out, const std::string& directory) {
    std::ostringstream sweep;
    sweep << "axis,value,spec,iteration,mean_cost,std_cost\n";
    for (const SweepRow& r : out.rows)
        sweep << r.axis << "," << r.value << "," << r.spec << "," << r.iteration << ","
              << csv_number(r.mean_cost) << "," << csv_number(r.std_cost) << "\n";
    write_file_atomic(directory + "/sweep_summary.csv", sweep.str());
}

}  // namespace wc4dvar
