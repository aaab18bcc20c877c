#pragma once

#include "wc4dvar/assimilation.hpp"
#include "wc4dvar/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace wc4dvar {

// Flat key-value experiment description with [section] headers. Keys are
// addressed as "section.key"; '#' starts a comment. Defaults reproduce the
// advection study.
struct ExperimentConfig {
    // [model]
    ModelKind model_kind = ModelKind::Advection;
    int n = 40;
    int steps = 50;
    double dt = 0.02;
    double courant = -1.0;  // < 0: derive from dt and dx
    double forcing = 8.0;
    int spinup_steps = 500;

    // [covariance]
    CovKind background_kind = CovKind::Soar;
    CovKind model_error_kind = CovKind::Laplacian;
    double sigma_b = 0.1;
    double sigma_q = 0.05;
    double sigma_o = 0.05;
    double length_b = 10.0;  // grid-spacing units
    double length_q = 10.0;

    // [observations]
    int space_stride = 4;
    int time_stride = 5;

    // [solver]
    int max_iter = 100;
    double rel_tol = 1e-6;
    bool reorthogonalize = false;

    // [precond]
    std::vector<PrecondSpec::Kind> methods = {PrecondSpec::Kind::None};
    int k = 25;
    int l = 5;

    // [seeds]
    std::uint64_t seed_background = 1001;
    std::uint64_t seed_observations = 1002;
    std::uint64_t seed_model_error = 1003;
    std::vector<std::uint64_t> sketch_seeds = {1};

    // [experiment]
    double noise_scale = 1.0;
    bool truth_model_error = false;
    bool apply_in_first_loop = false;  // study the first inner loop directly
    Index dense_cap = 4096;

    // [output]
    std::string directory = "out";

    static ExperimentConfig load(const std::string& path,
                                 const std::vector<std::string>& overrides = {});
    static ExperimentConfig from_map(const std::map<std::string, std::string>& kv);

    void validate() const;
    AssimilationSystem build_system() const;
    TwinSeeds twin_seeds() const;
    SolverSpec solver_spec() const;
    std::vector<PrecondSpec> precond_specs() const;  // one per (method, seed)
    std::string dump() const;  // canonical round-trippable form
};

PrecondSpec::Kind parse_precond_kind(const std::string& name);
const char* to_string(PrecondSpec::Kind kind);
const char* to_string(ModelKind kind);
const char* to_string(CovKind kind);

}  // namespace wc4dvar
