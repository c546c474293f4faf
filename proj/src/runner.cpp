#include "mrgbsde/runner.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "mrgbsde/errors.hpp"
#include "mrgbsde/suites.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace mrgbsde {

namespace {

constexpr const char* version = "0.1.0";

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + p.string() + "'");
    out << body;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path prepare(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

ojson manifest(const ExperimentConfig& cfg, const std::string& verb,
               const std::vector<SuiteReport>& suites, const std::vector<std::string>& outputs) {
    ojson m;
    m["tool"] = "mrgbsde";
    m["version"] = version;
    m["verb"] = verb;
    m["config_hash"] = "fnv1a64:" + hex64(cfg.hash());
    ojson c = ojson::object();
    for (const auto& [k, v] : cfg.resolved()) c[k] = v;
    m["config"] = c;
    // Wall-clock time would break bit-identical regeneration; a reproducible
    // build date can be injected through SOURCE_DATE_EPOCH.
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) m["timestamp"] = epoch;
    ojson checks = ojson::object();
    bool all = true;
    for (const auto& s : suites)
        for (const auto& r : s.rows) {
            checks[s.id + "." + r.name] = {{"value", r.value}, {"bound", r.bound}, {"pass", r.pass}};
            all = all && r.pass;
        }
    m["checks"] = checks;
    m["all_pass"] = all;
    m["outputs"] = outputs;
    return m;
}

void log_suite(std::ostream& log, const SuiteReport& s) {
    for (const auto& r : s.rows)
        log << (r.pass ? "PASS " : "FAIL ") << s.id << '.' << r.name << " value=" << fmt17(r.value)
            << " bound=" << fmt17(r.bound) << '\n';
}

GameGrid game_grid(const ExperimentConfig& cfg, const Grid& grid) {
    return GameGrid::make(grid, grid.coarse_index(cfg.game_t), cfg.game_s_count, cfg.game_q_count);
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const CatalogError*>(&e) ||
        dynamic_cast<const AlignmentError*>(&e))
        return exit_config;
    if (dynamic_cast<const ConvergenceError*>(&e)) return exit_convergence;
    if (dynamic_cast<const PreconditionError*>(&e) || dynamic_cast<const DomainError*>(&e))
        return exit_precondition;
    return 1;
}

std::string output_dir(const ExperimentConfig& cfg) {
    if (const char* env = std::getenv("MRGBSDE_OUTPUT_DIR"); env && *env) return env;
    return cfg.output_dir;
}

int run_solve(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
    const fs::path dir = prepare(out_dir);
    const MRInstance inst = cfg.instance();
    MRSolution sol;
    try {
        sol = solve(inst);
    } catch (const ConvergenceError& e) {
        std::ostringstream it;
        it << "iter,delta_beta_norm\n";
        for (std::size_t k = 0; k < e.deltas().size(); ++k) it << k + 1 << ',' << fmt17(e.deltas()[k]) << '\n';
        write_file(dir / "iterations.csv", it.str());
        throw;
    }
    std::vector<std::string> outputs = {"results.csv", "iterations.csv"};
    {
        std::ostringstream os;
        write_results_csv(os, sol);
        write_file(dir / "results.csv", os.str());
    }
    {
        std::ostringstream os;
        write_iterations_csv(os, sol);
        write_file(dir / "iterations.csv", os.str());
    }
    if (cfg.output_field) {
        std::ostringstream os;
        write_field_csv(os, sol.y_field(), inst.grid);
        write_file(dir / "field.csv", os.str());
        outputs.push_back("field.csv");
    }
    const SuiteReport flat = suite_flatness(sol, inst);
    outputs.push_back("manifest.json");
    write_file(dir / "manifest.json", manifest(cfg, "solve", {flat}, outputs).dump(2) + "\n");
    log << "policy " << to_string(inst.policy) << ", nt " << inst.grid.nt() << ", nx " << inst.grid.nx()
        << ", substeps " << inst.grid.substeps() << ", segments " << sol.segments << ", iterations "
        << sol.iterations.size() << '\n';
    log << "E^[Y_0] = " << fmt17(sol.curves.E_Y.front()) << ", A_T = " << fmt17(sol.A.back()) << '\n';
    log_suite(log, flat);
    return flat.ok() ? exit_ok : exit_check_failed;
}

int run_verify(const ExperimentConfig& cfg, const std::string& suite, const std::string& out_dir,
               std::ostream& log) {
    static const std::vector<std::string> ids = {"skorokhod", "gexp",  "classical-limit", "kprocess",
                                                 "flatness",  "game",  "comparison"};
    std::vector<std::string> run;
    if (suite == "all") run = ids;
    else if (std::find(ids.begin(), ids.end(), suite) != ids.end()) run = {suite};
    else throw ConfigError("unknown suite '" + suite + "' (skorokhod, gexp, classical-limit, kprocess, flatness, game, comparison, all)");

    const fs::path dir = prepare(out_dir);
    const MRInstance inst = cfg.instance();
    std::optional<MRSolution> sol;
    auto solved = [&]() -> const MRSolution& {
        if (!sol) sol = solve(inst);
        return *sol;
    };
    std::vector<SuiteReport> reports;
    std::vector<std::string> outputs;
    for (const auto& id : run) {
        SuiteReport r;
        if (id == "skorokhod") r = suite_skorokhod(cfg.seed, cfg.verify_trials);
        else if (id == "gexp") r = suite_gexp(inst.vb, inst.grid, cfg.seed);
        else if (id == "classical-limit") r = suite_classical(cfg.sigma_high_sq, cfg.T, cfg.nt, cfg.nx);
        else if (id == "kprocess") r = suite_kprocess(solved(), inst, cfg.seed, cfg.verify_controls);
        else if (id == "flatness") r = suite_flatness(solved(), inst);
        else if (id == "game") r = suite_game(solved(), inst, game_grid(cfg, inst.grid));
        else r = suite_comparison(inst, cfg.seed, 5, cfg.verify_lambda);
        std::ostringstream os;
        write_suite_csv(os, r);
        const std::string name = "verify_" + id + ".csv";
        write_file(dir / name, os.str());
        outputs.push_back(name);
        log_suite(log, r);
        reports.push_back(std::move(r));
    }
    outputs.push_back("manifest.json");
    write_file(dir / "manifest.json", manifest(cfg, "verify " + suite, reports, outputs).dump(2) + "\n");
    for (const auto& r : reports)
        if (!r.ok()) return exit_check_failed;
    return exit_ok;
}

int run_game(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
    const fs::path dir = prepare(out_dir);
    const MRInstance inst = cfg.instance();
    const MRSolution sol = solve(inst);
    const GameGrid gg = game_grid(cfg, inst.grid);
    const GameValues gv = optim_bounds(sol, inst, gg);
    std::vector<std::string> outputs = {"game.csv"};
    {
        std::ostringstream os;
        write_game_csv(os, gv);
        write_file(dir / "game.csv", os.str());
    }
    SuiteReport rep{"game", {}};
    rep.add("lower_game_le_negE_negY", gv.infsup_lower - gv.negE_negY, gv.tol,
            gv.infsup_lower <= gv.negE_negY + gv.tol);
    rep.add("negE_negY_le_E_Y", gv.negE_negY - gv.E_Y, gv.tol, gv.negE_negY <= gv.E_Y + gv.tol);
    rep.add("E_Y_le_upper_game", gv.E_Y - gv.supinf_upper, gv.tol, gv.E_Y <= gv.supinf_upper + gv.tol);
    if (gv.no_mean_uncertainty)
        rep.add("equality_case", std::max(std::abs(gv.supinf_upper - gv.E_Y), std::abs(gv.infsup_lower - gv.E_Y)),
                3 * gv.tol, gv.equality_ok);
    try {
        const LinearGame lg = linear_game(sol, inst, gg);
        std::ostringstream os;
        os << "s,q,value\n";
        for (std::size_t a = 0; a < lg.gg.S_set.size(); ++a)
            for (std::size_t b = 0; b < lg.gg.Q_set.size(); ++b)
                os << lg.gg.S_set[a] << ',' << lg.gg.Q_set[b] << ',' << fmt17(lg.value[a][b]) << '\n';
        os << "\nsupinf,infsup,E_Y,s_star,q_star,s_brute,q_brute\n"
           << fmt17(lg.supinf) << ',' << fmt17(lg.infsup) << ',' << fmt17(lg.E_Y) << ',' << lg.s_star
           << ',' << lg.q_star << ',' << lg.s_brute << ',' << lg.q_brute << '\n';
        write_file(dir / "linear_game.csv", os.str());
        outputs.push_back("linear_game.csv");
        rep.add("linear_supinf_vs_E_Y", std::abs(lg.supinf - lg.E_Y), lg.tol, std::abs(lg.supinf - lg.E_Y) <= lg.tol);
        rep.add("linear_infsup_vs_E_Y", std::abs(lg.infsup - lg.E_Y), lg.tol, std::abs(lg.infsup - lg.E_Y) <= lg.tol);
        rep.add("linear_saddle", lg.saddle_ok ? 0 : 1, 0, lg.saddle_ok);
        rep.add("linear_saddle_times_match_brute_force", lg.brute_match ? 0 : 1, 0, lg.brute_match);
    } catch (const PreconditionError& e) {
        log << "linear game skipped: " << e.what() << '\n';
    }
    outputs.push_back("manifest.json");
    write_file(dir / "manifest.json", manifest(cfg, "game", {rep}, outputs).dump(2) + "\n");
    log << "t = " << fmt17(inst.grid.time(gg.t)) << ": lower game " << fmt17(gv.infsup_lower)
        << " <= " << fmt17(gv.negE_negY) << " <= " << fmt17(gv.E_Y) << " <= upper game "
        << fmt17(gv.supinf_upper) << '\n';
    log_suite(log, rep);
    return rep.ok() ? exit_ok : exit_check_failed;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool as_number(const std::string& s, double& v) {
    if (s.empty()) return false;
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    std::string l;
    while (std::getline(is, l)) out.push_back(l);
    return out;
}

bool same_value(const ojson& a, const ojson& b, double tol) {
    if (a.is_number() && b.is_number()) {
        const double x = a.get<double>(), y = b.get<double>();
        return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)});
    }
    if (a.is_object() && b.is_object()) {
        if (a.size() != b.size()) return false;
        for (auto it = a.begin(); it != a.end(); ++it)
            if (!b.contains(it.key()) || !same_value(it.value(), b[it.key()], tol)) return false;
        return true;
    }
    return a == b;
}

}  // namespace

CsvDiff compare_csv(const std::string& golden, const std::string& fresh, double tol) {
    CsvDiff d;
    std::ostringstream rep;
    const auto g = lines_of(golden), f = lines_of(fresh);
    if (g.size() != f.size()) {
        ++d.differences;
        rep << "  line count " << g.size() << " (golden) vs " << f.size() << '\n';
    }
    std::vector<std::string> header;
    for (std::size_t i = 0; i < std::min(g.size(), f.size()); ++i) {
        const auto a = split(g[i]), b = split(f[i]);
        double x = 0.0;
        if (!a.empty() && !as_number(a[0], x)) header = a;
        if (a.size() != b.size()) {
            ++d.differences;
            rep << "  line " << i + 1 << ": cell count differs\n";
            continue;
        }
        for (std::size_t c = 0; c < a.size(); ++c) {
            double u = 0.0, v = 0.0;
            bool same;
            if (as_number(a[c], u) && as_number(b[c], v))
                same = std::abs(u - v) <= tol * std::max({1.0, std::abs(u), std::abs(v)});
            else
                same = a[c] == b[c];
            if (!same) {
                if (++d.differences <= 20)
                    rep << "  line " << i + 1 << " column " << (c < header.size() ? header[c] : std::to_string(c))
                        << ": golden " << a[c] << " vs " << b[c] << '\n';
            }
        }
    }
    d.report = rep.str();
    return d;
}

int run_regress(const ExperimentConfig& cfg, const std::string& golden_dir,
                const std::string& work_dir, bool bless, std::ostream& log) {
    const fs::path work = prepare(work_dir);
    std::ostringstream quiet;
    run_solve(cfg, (work / "solve").string(), quiet);
    run_game(cfg, (work / "game").string(), quiet);
    const fs::path golden(golden_dir);

    if (bless) {
        for (const char* sub : {"solve", "game"}) {
            fs::create_directories(golden / sub);
            for (const auto& e : fs::directory_iterator(work / sub))
                fs::copy_file(e.path(), golden / sub / e.path().filename(), fs::copy_options::overwrite_existing);
        }
        log << "blessed goldens in " << golden.string() << '\n';
        return exit_ok;
    }

    int diffs = 0;
    for (const char* sub : {"solve", "game"}) {
        if (!fs::is_directory(golden / sub)) {
            log << "DIFF missing golden directory " << (golden / sub).string() << '\n';
            ++diffs;
            continue;
        }
        std::map<std::string, bool> names;
        for (const auto& e : fs::directory_iterator(golden / sub)) names[e.path().filename().string()] = true;
        for (const auto& e : fs::directory_iterator(work / sub)) names.emplace(e.path().filename().string(), false);
        for (const auto& [name, in_golden] : names) {
            const std::string label = std::string(sub) + "/" + name;
            if (!in_golden) {
                log << "DIFF " << label << ": not in goldens\n";
                ++diffs;
                continue;
            }
            if (!fs::exists(work / sub / name)) {
                log << "DIFF " << label << ": not regenerated\n";
                ++diffs;
                continue;
            }
            const std::string a = read_file(golden / sub / name), b = read_file(work / sub / name);
            if (name == "manifest.json") {
                const ojson ga = ojson::parse(a), fb = ojson::parse(b);
                // Check values and verdicts must match; bounds follow the
                // configured tolerances and only produce notes.
                const ojson& gc = ga["checks"];
                const ojson& fc = fb["checks"];
                bool same = gc.size() == fc.size();
                for (auto it = gc.begin(); same && it != gc.end(); ++it) {
                    same = fc.contains(it.key()) &&
                           same_value(it.value()["value"], fc[it.key()]["value"], 1e-12) &&
                           it.value()["pass"] == fc[it.key()]["pass"];
                    if (same && !same_value(it.value()["bound"], fc[it.key()]["bound"], 1e-12))
                        log << "NOTE " << label << ": bound of '" << it.key() << "' differs (not a failure)\n";
                }
                if (!same) {
                    log << "DIFF " << label << ": check results differ\n";
                    ++diffs;
                }
                for (auto it = ga.begin(); it != ga.end(); ++it)
                    if (it.key() != "checks" && it.key() != "all_pass" && (!fb.contains(it.key()) || fb[it.key()] != it.value()))
                        log << "NOTE " << label << ": field '" << it.key() << "' differs (not a failure)\n";
                continue;
            }
            const CsvDiff d = compare_csv(a, b);
            if (d.differences) {
                log << "DIFF " << label << ": " << d.differences << " differing cells\n" << d.report;
                ++diffs;
            } else {
                log << "same " << label << '\n';
            }
        }
    }
    if (diffs) {
        log << diffs << " file(s) differ\n";
        return exit_regression;
    }
    log << "golden suite green\n";
    return exit_ok;
}

}  // namespace mrgbsde
