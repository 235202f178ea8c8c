#include "qmeta/config.hpp"

#include <climits>
#include <fstream>
#include <sstream>
#include <vector>

#include "qmeta/errors.hpp"

namespace qmeta {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as " + expected);
}

}  // namespace

KeyValueFile KeyValueFile::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_text(buffer.str());
}

KeyValueFile KeyValueFile::from_text(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (kv.values_.count(key))
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" +
                              key + "'");
        kv.values_[key] = value;
    }
    return kv;
}

bool KeyValueFile::has(const std::string& key) const { return values_.count(key) != 0; }

void KeyValueFile::set(const std::string& key, const std::string& value) {
    values_[key] = value;
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(key);
    return it->second;
}

int KeyValueFile::get_int(const std::string& key, int fallback) const {
    long v = get_long(key, fallback);
    if (v < INT_MIN || v > INT_MAX) bad_value(key, std::to_string(v), "an int");
    return static_cast<int>(v);
}

long KeyValueFile::get_long(const std::string& key, long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(key);
    try {
        std::size_t pos = 0;
        long v = std::stol(it->second, &pos);
        if (pos != it->second.size()) bad_value(key, it->second, "an integer");
        return v;
    } catch (const std::logic_error&) {
        bad_value(key, it->second, "an integer");
    }
}

std::uint64_t KeyValueFile::get_uint64(const std::string& key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(key);
    const std::string& s = it->second;
    if (s.empty() || s[0] == '-') bad_value(key, s, "a non-negative integer");
    try {
        std::size_t pos = 0;
        std::uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) bad_value(key, s, "a non-negative integer");
        return v;
    } catch (const std::logic_error&) {
        bad_value(key, s, "a non-negative integer");
    }
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(key);
    try {
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) bad_value(key, it->second, "a number");
        return v;
    } catch (const std::logic_error&) {
        bad_value(key, it->second, "a number");
    }
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(key);
    const std::string& s = it->second;
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    bad_value(key, s, "a bool (true/false/1/0)");
}

Eigen::VectorXd KeyValueFile::get_vector(const std::string& key,
                                         const Eigen::VectorXd& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(key);
    std::vector<double> parts;
    std::istringstream in(it->second);
    std::string token;
    while (std::getline(in, token, ',')) {
        const std::string t = trim(token);
        if (t.empty()) bad_value(key, it->second, "comma-separated numbers");
        try {
            std::size_t pos = 0;
            parts.push_back(std::stod(t, &pos));
            if (pos != t.size()) bad_value(key, it->second, "comma-separated numbers");
        } catch (const std::logic_error&) {
            bad_value(key, it->second, "comma-separated numbers");
        }
    }
    if (parts.empty()) bad_value(key, it->second, "comma-separated numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) out[static_cast<Eigen::Index>(i)] = parts[i];
    return out;
}

void KeyValueFile::require_consumed() const {
    std::string unknown;
    for (const auto& [key, value] : values_) {
        if (!consumed_.count(key)) unknown += unknown.empty() ? key : ", " + key;
    }
    if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

namespace {

Eigen::Matrix2d matrix2_from(const Eigen::VectorXd& v, const std::string& key) {
    if (v.size() != 4)
        throw ConfigError("config key '" + key + "': expected 4 comma-separated numbers");
    Eigen::Matrix2d m;
    m << v[0], v[1], v[2], v[3];
    return m;
}

Eigen::Vector2d vector2_from(const Eigen::VectorXd& v, const std::string& key) {
    if (v.size() != 2)
        throw ConfigError("config key '" + key + "': expected 2 comma-separated numbers");
    return Eigen::Vector2d(v[0], v[1]);
}

HiddenInit parse_hidden_init(const std::string& name) {
    if (name == "zero") return HiddenInit::Zero;
    if (name == "uniform") return HiddenInit::Uniform01;
    if (name == "normal") return HiddenInit::Normal01;
    throw ConfigError("meta.h0_init must be zero, uniform, or normal (got '" + name + "')");
}

PhiTrain parse_phi_train(const std::string& name) {
    if (name == "spsa") return PhiTrain::SpsaOnPhi;
    if (name == "reinforce") return PhiTrain::Reinforce;
    if (name == "frozen") return PhiTrain::Frozen;
    throw ConfigError("meta.phi_train must be spsa, reinforce, or frozen (got '" + name + "')");
}

Reduction parse_reduction(const std::string& name) {
    if (name == "single_z") return Reduction::SingleZ;
    if (name == "product_z") return Reduction::ProductZ;
    if (name == "product_of_expectations") return Reduction::ProductOfExpectations;
    throw ConfigError(
        "ansatz.reduction must be single_z, product_z, or product_of_expectations (got '" +
        name + "')");
}

}  // namespace

OptimizerKind parse_optimizer_kind(const std::string& name) {
    if (name == "sgd") return OptimizerKind::Sgd;
    if (name == "adam") return OptimizerKind::Adam;
    if (name == "rmsprop") return OptimizerKind::RmsProp;
    throw ConfigError("not a gradient optimizer: '" + name + "'");
}

RunConfig load_run_config(const KeyValueFile& kv) {
    RunConfig cfg;

    cfg.seed = kv.get_uint64("run.seed", 0);
    cfg.run_id = kv.get_string("run.id", "");
    cfg.out_dir = kv.get_string("out.dir", "out");

    DatasetConfig& d = cfg.dataset;
    d.kind = kv.get_string("dataset.kind", d.kind);
    if (d.kind != "gaussian" && d.kind != "spirals" && d.kind != "spheres" &&
        d.kind != "iris" && d.kind != "none")
        throw ConfigError("dataset.kind must be gaussian, spirals, spheres, iris, or none");
    if (kv.has("dataset.seed")) d.seed = kv.get_uint64("dataset.seed", 0);
    d.n_per_class = kv.get_int("dataset.n_per_class", d.n_per_class);
    if (d.n_per_class < 1) throw ConfigError("dataset.n_per_class must be >= 1");
    d.noise_std = kv.get_double("dataset.noise_std", d.noise_std);
    if (d.noise_std < 0.0) throw ConfigError("dataset.noise_std must be non-negative");
    d.r_inner = kv.get_double("dataset.r_inner", d.r_inner);
    d.r_outer = kv.get_double("dataset.r_outer", d.r_outer);
    if (d.r_inner <= 0.0 || d.r_outer <= 0.0)
        throw ConfigError("dataset sphere radii must be positive");
    d.gaussian.n_per_class = d.n_per_class;
    d.gaussian.mu1 = vector2_from(kv.get_vector("dataset.mu1", d.gaussian.mu1), "dataset.mu1");
    d.gaussian.mu2 = vector2_from(kv.get_vector("dataset.mu2", d.gaussian.mu2), "dataset.mu2");
    if (kv.has("dataset.sigma1"))
        d.gaussian.sigma1 =
            matrix2_from(kv.get_vector("dataset.sigma1", {}), "dataset.sigma1");
    if (kv.has("dataset.sigma2"))
        d.gaussian.sigma2 =
            matrix2_from(kv.get_vector("dataset.sigma2", {}), "dataset.sigma2");
    d.iris_path = kv.get_string("dataset.iris_path", d.iris_path);
    d.species_pos = kv.get_string("dataset.species_pos", d.species_pos);
    d.species_neg = kv.get_string("dataset.species_neg", d.species_neg);

    AnsatzConfig& a = cfg.ansatz;
    a.family = kv.get_string("ansatz.family", a.family);
    if (a.family == "layered") {
        a.qubits = kv.get_int("ansatz.qubits", 2);
        a.layers = kv.get_int("ansatz.layers", 2);
    } else if (a.family == "spheres") {
        a.qubits = kv.get_int("ansatz.qubits", 3);
        a.layers = kv.get_int("ansatz.layers", 4);
    } else if (a.family == "strongly_entangling") {
        a.qubits = kv.get_int("ansatz.qubits", 4);
        a.layers = kv.get_int("ansatz.layers", 5);
    } else {
        throw ConfigError(
            "ansatz.family must be layered, spheres, or strongly_entangling (got '" +
            a.family + "')");
    }
    a.reduction = kv.get_string("ansatz.reduction", "");

    OptimizerConfig& o = cfg.optimizer;
    o.kind = kv.get_string("optimizer.kind", o.kind);
    if (o.kind != "meta" && o.kind != "sgd" && o.kind != "adam" && o.kind != "rmsprop" &&
        o.kind != "spsa")
        throw ConfigError("optimizer.kind must be meta, sgd, adam, rmsprop, or spsa");
    o.lr = kv.get_double("optimizer.lr", o.lr);
    if (o.lr <= 0.0) throw ConfigError("optimizer.lr must be positive");
    o.iterations = kv.get_int("optimizer.iterations", o.iterations);
    if (o.iterations < 1) throw ConfigError("optimizer.iterations must be >= 1");

    cfg.spsa.a = kv.get_double("spsa.a", cfg.spsa.a);
    cfg.spsa.gamma = kv.get_double("spsa.gamma", cfg.spsa.gamma);
    if (cfg.spsa.a <= 0.0 || cfg.spsa.gamma <= 0.0)
        throw ConfigError("spsa.a and spsa.gamma must be positive");

    MetaConfig& m = cfg.meta;
    m.alpha = kv.get_double("meta.alpha", m.alpha);
    m.p = kv.get_double("meta.p", m.p);
    m.unroll_horizon = kv.get_int("meta.unroll_horizon", m.unroll_horizon);
    m.loss_weights = kv.get_vector("meta.loss_weights", m.loss_weights);
    m.tau0 = kv.get_double("meta.tau0", m.tau0);
    m.zeta = kv.get_double("meta.zeta", m.zeta);
    m.eps_stop = kv.get_double("meta.eps_stop", m.eps_stop);
    m.h0_init = parse_hidden_init(kv.get_string("meta.h0_init", "normal"));
    m.hidden_size = kv.get_int("meta.hidden_size", m.hidden_size);
    m.phi_train = parse_phi_train(kv.get_string("meta.phi_train", "spsa"));
    m.meta_iterations = kv.get_int("meta.meta_iterations", m.meta_iterations);
    m.replay_capacity = kv.get_int("meta.replay_capacity", m.replay_capacity);
    m.use_replay = kv.get_bool("meta.use_replay", m.use_replay);
    m.phi_lr = kv.get_double("meta.phi_lr", m.phi_lr);
    m.phi_spsa_a = kv.get_double("meta.phi_spsa_a", m.phi_spsa_a);
    m.phi_spsa_gamma = kv.get_double("meta.phi_spsa_gamma", m.phi_spsa_gamma);
    validate_meta_config(m);

    const std::string shots_mode = kv.get_string("shots.mode", "exact");
    if (shots_mode == "exact") {
        cfg.shots = ShotBudget::exact();
        kv.get_int("shots.count", 0);  // consumed and ignored in exact mode
    } else if (shots_mode == "finite") {
        cfg.shots = ShotBudget::finite(kv.get_int("shots.count", 1024));
    } else {
        throw ConfigError("shots.mode must be exact or finite (got '" + shots_mode + "')");
    }

    kv.require_consumed();
    return cfg;
}

RunConfig load_run_config(const std::string& config_path, const CliOverrides& overrides) {
    KeyValueFile kv = config_path.empty() ? KeyValueFile::from_text("")
                                          : KeyValueFile::from_file(config_path);
    if (overrides.seed) kv.set("run.seed", std::to_string(*overrides.seed));
    if (overrides.out_dir) kv.set("out.dir", *overrides.out_dir);
    if (overrides.shots) {
        if (*overrides.shots == "exact") {
            kv.set("shots.mode", "exact");
        } else {
            kv.set("shots.mode", "finite");
            kv.set("shots.count", *overrides.shots);
        }
    }
    return load_run_config(kv);
}

RunConfig run_config_from_text(const std::string& text, const CliOverrides& overrides) {
    KeyValueFile kv = KeyValueFile::from_text(text);
    if (overrides.seed) kv.set("run.seed", std::to_string(*overrides.seed));
    if (overrides.out_dir) kv.set("out.dir", *overrides.out_dir);
    if (overrides.shots) {
        if (*overrides.shots == "exact") {
            kv.set("shots.mode", "exact");
        } else {
            kv.set("shots.mode", "finite");
            kv.set("shots.count", *overrides.shots);
        }
    }
    return load_run_config(kv);
}

AnsatzSpec ansatz_from_config(const AnsatzConfig& cfg) {
    AnsatzSpec spec;
    if (cfg.family == "layered") {
        spec = build_layered(cfg.qubits, cfg.layers);
    } else if (cfg.family == "spheres") {
        if (cfg.qubits != 3)
            throw ConfigError("the spheres ansatz is fixed at 3 qubits");
        spec = build_spheres(cfg.layers);
    } else if (cfg.family == "strongly_entangling") {
        spec = build_strongly_entangling(cfg.qubits, cfg.layers);
    } else {
        throw ConfigError("unknown ansatz family: '" + cfg.family + "'");
    }
    if (!cfg.reduction.empty()) spec.reduction = parse_reduction(cfg.reduction);
    return spec;
}

std::string effective_run_id(const RunConfig& cfg) {
    if (!cfg.run_id.empty()) return cfg.run_id;
    return cfg.optimizer.kind + "_s" + std::to_string(cfg.seed);
}

}  // namespace qmeta
