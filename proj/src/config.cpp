#include "mrgbsde/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "mrgbsde/errors.hpp"

namespace mrgbsde {

double poly_eval(const std::vector<double>& c, double t) {
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
    return v;
}

BoundaryCurve LossSpec::build(const Grid& grid) const {
    std::vector<double> thr(grid.nt() + 1);
    for (int i = 0; i <= grid.nt(); ++i) thr[i] = poly_eval(threshold, grid.time(i));
    if (kind == "affine") return BoundaryCurve::affine(slope, std::move(thr));
    if (kind == "sin") return BoundaryCurve::sin_perturbed(gamma, std::move(thr));
    throw ConfigError("unknown loss kind '" + kind + "' (affine, sin)");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw ConfigError("expected a number, got '" + v + "'");
    return out;
}

long long to_int(const std::string& v) {
    long long out = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw ConfigError("expected an integer, got '" + v + "'");
    return out;
}

std::vector<double> to_list(const std::string& v) {
    std::vector<double> out;
    std::istringstream is(v);
    std::string tok;
    while (is >> tok) {
        if (!tok.empty() && tok.back() == ',') tok.pop_back();
        if (!tok.empty()) out.push_back(to_double(tok));
    }
    return out;
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("expected true/false, got '" + v + "'");
}

std::string list_str(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt17(v[i]);
    return s;
}

struct Key {
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

void term_set(GeneratorTerm& t, const std::string& v) {
    const auto c = to_list(v);
    if (c.size() != 3) throw ConfigError("generator coeffs need exactly 3 numbers (a0 a1 a2)");
    t.a0 = c[0];
    t.a1 = c[1];
    t.a2 = c[2];
}

std::string term_get(const GeneratorTerm& t) { return list_str({t.a0, t.a1, t.a2}); }

// Ordered so that resolved() is stable.
const std::vector<std::pair<std::string, Key>>& keys() {
    using C = ExperimentConfig;
    using S = const std::string&;
    static const std::vector<std::pair<std::string, Key>> k = {
        {"vol.sigma_low_sq", {[](C& c, S v) { c.sigma_low_sq = to_double(v); },
                              [](const C& c) { return fmt17(c.sigma_low_sq); }}},
        {"vol.sigma_high_sq", {[](C& c, S v) { c.sigma_high_sq = to_double(v); },
                               [](const C& c) { return fmt17(c.sigma_high_sq); }}},
        {"grid.T", {[](C& c, S v) { c.T = to_double(v); }, [](const C& c) { return fmt17(c.T); }}},
        {"grid.nt", {[](C& c, S v) { c.nt = int(to_int(v)); },
                     [](const C& c) { return std::to_string(c.nt); }}},
        {"grid.nx", {[](C& c, S v) { c.nx = int(to_int(v)); },
                     [](const C& c) { return std::to_string(c.nx); }}},
        {"grid.x_half_width", {[](C& c, S v) { c.x_half_width = to_double(v); },
                               [](const C& c) { return fmt17(c.x_half_width); }}},
        {"grid.substeps", {[](C& c, S v) { c.substeps = int(to_int(v)); },
                           [](const C& c) { return std::to_string(c.substeps); }}},
        {"terminal.kind", {[](C& c, S v) { c.terminal.kind = payoff_kind_from(v); },
                           [](const C& c) { return to_string(c.terminal.kind); }}},
        {"terminal.coeffs", {[](C& c, S v) { c.terminal.coeffs = to_list(v); },
                             [](const C& c) { return list_str(c.terminal.coeffs); }}},
        {"generator.f.kind", {[](C& c, S v) { c.gen.f.kind = generator_kind_from(v); },
                              [](const C& c) { return to_string(c.gen.f.kind); }}},
        {"generator.f.coeffs", {[](C& c, S v) { term_set(c.gen.f, v); },
                                [](const C& c) { return term_get(c.gen.f); }}},
        {"generator.g.kind", {[](C& c, S v) { c.gen.g.kind = generator_kind_from(v); },
                              [](const C& c) { return to_string(c.gen.g.kind); }}},
        {"generator.g.coeffs", {[](C& c, S v) { term_set(c.gen.g, v); },
                                [](const C& c) { return term_get(c.gen.g); }}},
        {"generator.gamma", {[](C& c, S v) { c.gen.gamma_poly = to_list(v); },
                             [](const C& c) { return list_str(c.gen.gamma_poly); }}},
        {"loss.L.kind", {[](C& c, S v) { c.L.kind = v; }, [](const C& c) { return c.L.kind; }}},
        {"loss.L.slope", {[](C& c, S v) { c.L.slope = to_double(v); },
                          [](const C& c) { return fmt17(c.L.slope); }}},
        {"loss.L.gamma", {[](C& c, S v) { c.L.gamma = to_double(v); },
                          [](const C& c) { return fmt17(c.L.gamma); }}},
        {"loss.L.threshold", {[](C& c, S v) { c.L.threshold = to_list(v); },
                              [](const C& c) { return list_str(c.L.threshold); }}},
        {"loss.R.kind", {[](C& c, S v) { c.R.kind = v; }, [](const C& c) { return c.R.kind; }}},
        {"loss.R.slope", {[](C& c, S v) { c.R.slope = to_double(v); },
                          [](const C& c) { return fmt17(c.R.slope); }}},
        {"loss.R.gamma", {[](C& c, S v) { c.R.gamma = to_double(v); },
                          [](const C& c) { return fmt17(c.R.gamma); }}},
        {"loss.R.threshold", {[](C& c, S v) { c.R.threshold = to_list(v); },
                              [](const C& c) { return list_str(c.R.threshold); }}},
        {"loss.separation", {[](C& c, S v) { c.separation = to_double(v); },
                             [](const C& c) { return fmt17(c.separation); }}},
        {"solver.policy", {[](C& c, S v) { c.policy = policy_from(v); },
                           [](const C& c) { return to_string(c.policy); }}},
        {"solver.tol_iter", {[](C& c, S v) { c.tol_iter = to_double(v); },
                             [](const C& c) { return fmt17(c.tol_iter); }}},
        {"solver.tol_flat", {[](C& c, S v) { c.tol_flat = to_double(v); },
                             [](const C& c) { return fmt17(c.tol_flat); }}},
        {"solver.max_iters", {[](C& c, S v) { c.max_iters = int(to_int(v)); },
                              [](const C& c) { return std::to_string(c.max_iters); }}},
        {"solver.beta", {[](C& c, S v) { c.beta = to_double(v); },
                         [](const C& c) { return fmt17(c.beta); }}},
        {"solver.kappa_bound", {[](C& c, S v) { c.kappa_bound = to_double(v); },
                                [](const C& c) { return fmt17(c.kappa_bound); }}},
        {"solver.boundary_points", {[](C& c, S v) { c.boundary_points = int(to_int(v)); },
                                    [](const C& c) { return std::to_string(c.boundary_points); }}},
        {"game.t", {[](C& c, S v) { c.game_t = to_double(v); },
                    [](const C& c) { return fmt17(c.game_t); }}},
        {"game.s_count", {[](C& c, S v) { c.game_s_count = int(to_int(v)); },
                          [](const C& c) { return std::to_string(c.game_s_count); }}},
        {"game.q_count", {[](C& c, S v) { c.game_q_count = int(to_int(v)); },
                          [](const C& c) { return std::to_string(c.game_q_count); }}},
        {"verify.trials", {[](C& c, S v) { c.verify_trials = int(to_int(v)); },
                           [](const C& c) { return std::to_string(c.verify_trials); }}},
        {"verify.controls", {[](C& c, S v) { c.verify_controls = int(to_int(v)); },
                             [](const C& c) { return std::to_string(c.verify_controls); }}},
        {"verify.lambda", {[](C& c, S v) { c.verify_lambda = to_double(v); },
                           [](const C& c) { return fmt17(c.verify_lambda); }}},
        {"output.dir", {[](C& c, S v) { c.output_dir = v; }, [](const C& c) { return c.output_dir; }}},
        {"output.field", {[](C& c, S v) { c.output_field = to_bool(v); },
                          [](const C& c) { return std::string(c.output_field ? "true" : "false"); }}},
        {"seed", {[](C& c, S v) { c.seed = std::uint64_t(to_int(v)); },
                  [](const C& c) { return std::to_string(c.seed); }}},
    };
    return k;
}

const std::set<std::string> required = {"vol.sigma_low_sq", "vol.sigma_high_sq", "terminal.kind",
                                        "terminal.coeffs",  "loss.L.threshold",  "loss.R.threshold",
                                        "loss.separation"};

}  // namespace

std::vector<std::pair<std::string, std::string>> ExperimentConfig::resolved() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, key] : keys()) out.emplace_back(name, key.get(*this));
    return out;
}

std::string ExperimentConfig::canonical_text() const {
    std::string s;
    for (const auto& [k, v] : resolved()) s += k + " = " + v + "\n";
    return s;
}

std::uint64_t ExperimentConfig::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : canonical_text()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

VolBounds ExperimentConfig::vol() const { return VolBounds::make(sigma_low_sq, sigma_high_sq); }

Grid ExperimentConfig::grid() const {
    const VolBounds vb = vol();
    const double W = x_half_width > 0.0 ? x_half_width : 6.0 * std::sqrt(vb.sigma_high_sq * T);
    const double extra = gen.cfl_rate(2.0 * W / nx, T, vb);
    return Grid::make(T, nt, nx, W, vb, extra, substeps);
}

MRInstance ExperimentConfig::instance() const {
    const Grid g = grid();
    MRInstance inst{terminal, gen, BoundaryPair::make(L.build(g), R.build(g), separation), g, vol()};
    inst.policy = policy;
    inst.tol_iter = tol_iter;
    inst.tol_flat = tol_flat;
    inst.max_iters = max_iters;
    inst.beta = beta;
    inst.kappa_bound = kappa_bound;
    inst.boundary_points = boundary_points;
    return inst;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::map<std::string, const Key*> table;
    for (const auto& [name, key] : keys()) table[name] = &key;
    std::set<std::string> seen;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    auto where = [&] { return origin + ":" + std::to_string(lineno) + ": "; };
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where() + "expected 'key = value'");
        const std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        const auto it = table.find(k);
        if (it == table.end()) throw ConfigError(where() + "unknown key '" + k + "'");
        if (!seen.insert(k).second) throw ConfigError(where() + "duplicate key '" + k + "'");
        try {
            it->second->set(cfg, v);
        } catch (const Error& e) {
            throw ConfigError(where() + k + ": " + e.what());
        }
    }
    for (const auto& r : required)
        if (!seen.count(r)) {
            if (r == "loss.separation")
                throw ConfigError(origin + ": missing loss.separation (BoundaryPair separation invariant needs sep > 0)");
            throw ConfigError(origin + ": missing required key '" + r + "'");
        }
    if (cfg.max_iters < 1 || cfg.boundary_points < 3 || cfg.verify_trials < 1 || cfg.verify_controls < 1)
        throw ConfigError(origin + ": counts must be positive (max_iters, boundary_points >= 3, verify.*)");
    // Construct everything once so that every component invariant is checked at load.
    try {
        cfg.terminal.validate();
        cfg.gen.validate();
        const MRInstance inst = cfg.instance();
        inst.grid.coarse_index(cfg.game_t);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace mrgbsde
