#pragma once

#include "wc4dvar/config.hpp"
#include "wc4dvar/spectrum.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wc4dvar {

struct CostRow {
    std::string spec;
    std::uint64_t seed;
    int iteration;
    double quadratic_cost;
    double relative_residual;
};

struct RitzRow {
    std::string spec;
    std::uint64_t seed;
    int index;  // 1-based, decreasing values
    double theta;
};

struct SummaryRow {
    std::string spec;
    int iteration;
    double mean_cost;
    double std_cost;  // population standard deviation over seeds
};

struct RunOutput {
    std::vector<CostRow> cost_history;
    std::vector<RitzRow> ritz_values;
    std::vector<SummaryRow> summary;
    Index hessian_dim = 0;
    int first_loop_iterations = 0;
};

// Outer loop 1 with an unpreconditioned inner loop, outer update, then
// inner loop 2 once per requested (preconditioner, sketch seed) job. With
// experiment.apply_in_first_loop the specs run directly on the first inner
// loop instead. Jobs fan out to workers; rows merge in (spec, seed) order.
RunOutput run_experiment(const ExperimentConfig& cfg);

void write_run_outputs(const RunOutput& out, const std::string& directory);

struct SpectrumRow {
    std::string spec;
    int index;  // 1-based, eigenvalues sorted decreasing
    double eigenvalue;
};

struct SpectrumOutput {
    std::vector<SpectrumRow> rows;
    Index hessian_dim = 0;
};

// Dense spectra of A and C^T A C for each spec on the first inner loop,
// one sketch seed per spec.
SpectrumOutput spectrum_experiment(const ExperimentConfig& cfg);

void write_spectrum_output(const SpectrumOutput& out, const std::string& directory);

enum class SweepAxis { K, L, ObsNetwork };

struct SweepRow {
    std::string axis;
    std::string value;
    std::string spec;
    int iteration;
    double mean_cost;
    double std_cost;
};

struct SweepOutput {
    std::vector<SweepRow> rows;
};

SweepAxis parse_sweep_axis(const std::string& name);
SweepOutput sweep_experiment(const ExperimentConfig& cfg, SweepAxis axis,
                             const std::vector<std::string>& values);
void write_sweep_output(const SweepOutput& out, const std::string& directory);

// Aggregates cost rows into per-iteration mean/std across seeds; runs that
// stopped early carry their last cost forward.
std::vector<SummaryRow> summarize_costs(const std::vector<CostRow>& rows);

}  // namespace wc4dvar
