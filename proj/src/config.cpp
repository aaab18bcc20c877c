#include "wc4dvar/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wc4dvar {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::map<std::string, std::string> parse_key_values(std::istream& in,
                                                    const std::string& origin) {
    std::map<std::string, std::string> kv;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(line_no) +
                                  ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        kv[section.empty() ? key : section + "." + key] = value;
    }
    return kv;
}

class KvReader {
public:
    explicit KvReader(const std::map<std::string, std::string>& kv) : kv_(kv) {}

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string str(const std::string& key, const std::string& fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    double num(const std::string& key, double fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        try {
            size_t used = 0;
            const double v = std::stod(it->second, &used);
            if (used != it->second.size()) throw std::invalid_argument("trailing text");
            return v;
        } catch (...) {
            throw ConfigError("config: cannot parse number for '" + key + "': " + it->second);
        }
    }

    int integer(const std::string& key, int fallback) const {
        const double v = num(key, fallback);
        if (v != std::floor(v))
            throw ConfigError("config: expected integer for '" + key + "'");
        return static_cast<int>(v);
    }

    std::uint64_t uinteger(const std::string& key, std::uint64_t fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        try {
            return std::stoull(it->second);
        } catch (...) {
            throw ConfigError("config: cannot parse seed for '" + key + "': " + it->second);
        }
    }

    bool boolean(const std::string& key, bool fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        std::string v = it->second;
        std::transform(v.begin(), v.end(), v.begin(), ::tolower);
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ConfigError("config: cannot parse boolean for '" + key + "': " + it->second);
    }

private:
    const std::map<std::string, std::string>& kv_;
};

CovKind parse_cov_kind(const std::string& name) {
    if (name == "diagonal") return CovKind::Diagonal;
    if (name == "soar") return CovKind::Soar;
    if (name == "laplacian") return CovKind::Laplacian;
    throw ConfigError("config: unknown covariance kind '" + name + "'");
}

std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

PrecondSpec::Kind parse_precond_kind(const std::string& name) {
    if (name == "none") return PrecondSpec::Kind::None;
    if (name == "deterministic") return PrecondSpec::Kind::Deterministic;
    if (name == "revd") return PrecondSpec::Kind::Revd;
    if (name == "nystrom") return PrecondSpec::Kind::Nystrom;
    if (name == "ritzit") return PrecondSpec::Kind::Ritzit;
    throw ConfigError("config: unknown preconditioner method '" + name + "'");
}

const char* to_string(PrecondSpec::Kind kind) {
    switch (kind) {
        case PrecondSpec::Kind::None:
            return "none";
        case PrecondSpec::Kind::Deterministic:
            return "deterministic";
        case PrecondSpec::Kind::Revd:
            return "revd";
        case PrecondSpec::Kind::Nystrom:
            return "nystrom";
        case PrecondSpec::Kind::Ritzit:
            return "ritzit";
    }
    return "unknown";
}

const char* to_string(ModelKind kind) {
    return kind == ModelKind::Advection ? "advection" : "lorenz96";
}

const char* to_string(CovKind kind) {
    switch (kind) {
        case CovKind::Diagonal:
            return "diagonal";
        case CovKind::Soar:
            return "soar";
        case CovKind::Laplacian:
            return "laplacian";
    }
    return "unknown";
}

ExperimentConfig ExperimentConfig::load(const std::string& path,
                                        const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    auto kv = parse_key_values(in, path);
    for (const std::string& ov : overrides) {
        const size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: --set expects section.key=value, got '" + ov + "'");
        kv[trim(ov.substr(0, eq))] = trim(ov.substr(eq + 1));
    }
    return from_map(kv);
}

ExperimentConfig ExperimentConfig::from_map(const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        static const char* known[] = {
            "model.kind", "model.n", "model.steps", "model.dt", "model.courant",
            "model.forcing", "model.spinup_steps", "covariance.kind_b",
            "covariance.kind_q", "covariance.sigma_b", "covariance.sigma_q",
            "covariance.sigma_o", "covariance.length_b", "covariance.length_q",
            "observations.space_stride", "observations.time_stride", "solver.max_iter",
            "solver.rel_tol", "solver.reorthogonalize", "precond.methods", "precond.k",
            "precond.l", "seeds.background", "seeds.observations", "seeds.model_error",
            "seeds.sketch", "seeds.sketch_base", "seeds.sketch_count",
            "experiment.noise_scale", "experiment.truth_model_error",
            "experiment.apply_in_first_loop", "experiment.dense_cap", "output.directory"};
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return key == k; }) == std::end(known))
            throw ConfigError("config: unknown key '" + key + "'");
        (void)value;
    }

    KvReader r(kv);
    ExperimentConfig cfg;

    const std::string kind = r.str("model.kind", "advection");
    if (kind == "advection")
        cfg.model_kind = ModelKind::Advection;
    else if (kind == "lorenz96")
        cfg.model_kind = ModelKind::Lorenz96;
    else
        throw ConfigError("config: unknown model kind '" + kind + "'");
    cfg.n = r.integer("model.n", cfg.n);
    cfg.steps = r.integer("model.steps", cfg.steps);
    cfg.dt = r.num("model.dt", cfg.dt);
    cfg.courant = r.num("model.courant", cfg.courant);
    cfg.forcing = r.num("model.forcing", cfg.forcing);
    cfg.spinup_steps = r.integer("model.spinup_steps", cfg.spinup_steps);

    cfg.background_kind = parse_cov_kind(r.str("covariance.kind_b", "soar"));
    cfg.model_error_kind = parse_cov_kind(r.str("covariance.kind_q", "laplacian"));
    cfg.sigma_b = r.num("covariance.sigma_b", cfg.sigma_b);
    cfg.sigma_q = r.num("covariance.sigma_q", cfg.sigma_q);
    cfg.sigma_o = r.num("covariance.sigma_o", cfg.sigma_o);
    cfg.length_b = r.num("covariance.length_b", cfg.length_b);
    cfg.length_q = r.num("covariance.length_q", cfg.length_q);

    cfg.space_stride = r.integer("observations.space_stride", cfg.space_stride);
    cfg.time_stride = r.integer("observations.time_stride", cfg.time_stride);

    cfg.max_iter = r.integer("solver.max_iter", cfg.max_iter);
    cfg.rel_tol = r.num("solver.rel_tol", cfg.rel_tol);
    cfg.reorthogonalize = r.boolean("solver.reorthogonalize", cfg.reorthogonalize);

    if (r.has("precond.methods")) {
        cfg.methods.clear();
        for (const std::string& m : split(r.str("precond.methods", ""), ','))
            cfg.methods.push_back(parse_precond_kind(m));
        if (cfg.methods.empty())
            throw ConfigError("config: precond.methods must name at least one method");
    }
    cfg.k = r.integer("precond.k", cfg.k);
    cfg.l = r.integer("precond.l", cfg.l);

    cfg.seed_background = r.uinteger("seeds.background", cfg.seed_background);
    cfg.seed_observations = r.uinteger("seeds.observations", cfg.seed_observations);
    cfg.seed_model_error = r.uinteger("seeds.model_error", cfg.seed_model_error);
    if (r.has("seeds.sketch")) {
        cfg.sketch_seeds.clear();
        for (const std::string& s : split(r.str("seeds.sketch", ""), ','))
            cfg.sketch_seeds.push_back(std::stoull(s));
    } else if (r.has("seeds.sketch_base") || r.has("seeds.sketch_count")) {
        const std::uint64_t base = r.uinteger("seeds.sketch_base", 1);
        const int count = r.integer("seeds.sketch_count", 1);
        if (count < 1) throw ConfigError("config: seeds.sketch_count must be >= 1");
        cfg.sketch_seeds.clear();
        for (int i = 0; i < count; ++i) cfg.sketch_seeds.push_back(base + i);
    }
    if (cfg.sketch_seeds.empty())
        throw ConfigError("config: at least one sketch seed is required");

    cfg.noise_scale = r.num("experiment.noise_scale", cfg.noise_scale);
    cfg.truth_model_error = r.boolean("experiment.truth_model_error", cfg.truth_model_error);
    cfg.apply_in_first_loop =
        r.boolean("experiment.apply_in_first_loop", cfg.apply_in_first_loop);
    cfg.dense_cap = r.integer("experiment.dense_cap", static_cast<int>(cfg.dense_cap));

    cfg.directory = r.str("output.directory", cfg.directory);

    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    try {
        require(n >= 4, "model.n must be >= 4");
        require(steps >= 1, "model.steps must be >= 1");
        require(dt > 0.0, "model.dt must be positive");
        if (model_kind == ModelKind::Advection) {
            const double derived = dt * n;  // dt / dx with dx = 1/n
            if (courant >= 0.0 && std::abs(courant - derived) > 1e-9)
                throw ConfigError("config: model.courant " + std::to_string(courant) +
                                  " inconsistent with dt*n = " + std::to_string(derived));
            require(derived > 0.0 && derived <= 1.0,
                    "advection Courant number dt*n must lie in (0, 1]");
        }
        require(sigma_b > 0.0 && sigma_q > 0.0 && sigma_o > 0.0,
                "covariance sigmas must be positive");
        require(space_stride >= 1 && space_stride <= n, "observations.space_stride invalid");
        require(time_stride >= 1 && time_stride <= steps, "observations.time_stride invalid");
        require(max_iter >= 1, "solver.max_iter must be >= 1");
        require(rel_tol > 0.0, "solver.rel_tol must be positive");
        const bool needs_rank =
            std::any_of(methods.begin(), methods.end(),
                        [](PrecondSpec::Kind m) { return m != PrecondSpec::Kind::None; });
        if (needs_rank) {
            require(k >= 1, "precond.k must be >= 1");
            require(l >= 0, "precond.l must be >= 0");
            require(static_cast<Index>(k + l) <= static_cast<Index>(n) * (steps + 1),
                    "precond.k + precond.l exceeds the window dimension");
        }
        require(noise_scale >= 0.0, "experiment.noise_scale must be >= 0");
        require(dense_cap >= 1, "experiment.dense_cap must be >= 1");
        require(!directory.empty(), "output.directory must not be empty");
    } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("config: ") + err.what());
    }
}

AssimilationSystem ExperimentConfig::build_system() const {
    AssimilationSystem sys;
    sys.kind = model_kind;
    sys.grid = ModelGrid(n, steps, dt, 1.0 / n);
    sys.courant = model_kind == ModelKind::Advection ? dt * n : 0.0;
    sys.forcing = forcing;
    sys.spinup_steps = spinup_steps;
    sys.net = ObservationNetwork::build(n, steps, space_stride, time_stride);
    CovarianceSpec b_spec{background_kind, sigma_b, length_b, n};
    CovarianceSpec q_spec{model_error_kind, sigma_q, length_q, n};
    sys.background_half = std::make_shared<CovarianceFactor>(sym_sqrt(build_covariance(b_spec)));
    sys.model_error_half = std::make_shared<CovarianceFactor>(sym_sqrt(build_covariance(q_spec)));
    sys.sigma_obs = sigma_o;
    return sys;
}

TwinSeeds ExperimentConfig::twin_seeds() const {
    return TwinSeeds{seed_background, seed_observations, seed_model_error};
}

SolverSpec ExperimentConfig::solver_spec() const {
    SolverSpec s;
    s.max_iter = max_iter;
    s.rel_tol = rel_tol;
    s.reorthogonalize = reorthogonalize;
    return s;
}

std::vector<PrecondSpec> ExperimentConfig::precond_specs() const {
    std::vector<PrecondSpec> specs;
    for (PrecondSpec::Kind m : methods) {
        PrecondSpec spec;
        spec.kind = m;
        spec.k = k;
        spec.l = l;
        if (spec.randomized()) {
            for (std::uint64_t seed : sketch_seeds) {
                spec.seed = seed;
                specs.push_back(spec);
            }
        } else {
            spec.seed = 0;
            specs.push_back(spec);
        }
    }
    return specs;
}

std::string ExperimentConfig::dump() const {
    std::ostringstream out;
    out << "[model]\n";
    out << "kind = " << to_string(model_kind) << "\n";
    out << "n = " << n << "\n";
    out << "steps = " << steps << "\n";
    out << "dt = " << fmt_g17(dt) << "\n";
    if (model_kind == ModelKind::Advection)
        out << "courant = " << fmt_g17(dt * n) << "\n";
    if (model_kind == ModelKind::Lorenz96) {
        out << "forcing = " << fmt_g17(forcing) << "\n";
        out << "spinup_steps = " << spinup_steps << "\n";
    }
    out << "\n[covariance]\n";
    out << "kind_b = " << to_string(background_kind) << "\n";
    out << "kind_q = " << to_string(model_error_kind) << "\n";
    out << "sigma_b = " << fmt_g17(sigma_b) << "\n";
    out << "sigma_q = " << fmt_g17(sigma_q) << "\n";
    out << "sigma_o = " << fmt_g17(sigma_o) << "\n";
    out << "length_b = " << fmt_g17(length_b) << "\n";
    out << "length_q = " << fmt_g17(length_q) << "\n";
    out << "\n[observations]\n";
    out << "space_stride = " << space_stride << "\n";
    out << "time_stride = " << time_stride << "\n";
    out << "\n[solver]\n";
    out << "max_iter = " << max_iter << "\n";
    out << "rel_tol = " << fmt_g17(rel_tol) << "\n";
    out << "reorthogonalize = " << (reorthogonalize ? "true" : "false") << "\n";
    out << "\n[precond]\n";
    out << "methods = ";
    for (size_t i = 0; i < methods.size(); ++i)
        out << (i ? "," : "") << to_string(methods[i]);
    out << "\n";
    out << "k = " << k << "\n";
    out << "l = " << l << "\n";
    out << "\n[seeds]\n";
    out << "background = " << seed_background << "\n";
    out << "observations = " << seed_observations << "\n";
    out << "model_error = " << seed_model_error << "\n";
    out << "sketch = ";
    for (size_t i = 0; i < sketch_seeds.size(); ++i)
        out << (i ? "," : "") << sketch_seeds[i];
    out << "\n";
    out << "\n[experiment]\n";
    out << "noise_scale = " << fmt_g17(noise_scale) << "\n";
    out << "truth_model_error = " << (truth_model_error ? "true" : "false") << "\n";
    out << "apply_in_first_loop = " << (apply_in_first_loop ? "true" : "false") << "\n";
    out << "dense_cap = " << dense_cap << "\n";
    out << "\n[output]\n";
    out << "directory = " << directory << "\n";
    return out.str();
}

}  // namespace wc4dvar
