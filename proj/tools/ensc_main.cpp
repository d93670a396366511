// ensc: command-line front end for the elastic net / subspace clustering
// library. Subcommands: solve | cluster | synth | verify | bench.

#include "ensc/elastic_net.hpp"
#include "ensc/io.hpp"
#include "ensc/orgen.hpp"
#include "ensc/parallel.hpp"
#include "ensc/rng.hpp"
#include "ensc/self_expressive.hpp"
#include "ensc/spectral.hpp"
#include "ensc/synth.hpp"
#include "ensc/theory.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ensc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitError = 2;

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

[[noreturn]] void fail(ErrorCode code, const std::string& message) {
    json err{{"error", {{"code", error_code_name(code)}, {"message", message}}}};
    std::cerr << err.dump() << "\n";
    std::exit(kExitError);
}

void write_json(const fs::path& path, const json& doc) {
    io::atomic_write(path, [&](std::ostream& out) { out << doc.dump(2) << "\n"; });
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Config handling: a JSON document mirroring the module configs. Flags given
// on the command line override config values. Unknown keys are rejected.
// ---------------------------------------------------------------------------

const json& config_schema() {
    static const json schema = {
        {"seed", 0},
        {"out", ""},
        {"threads", 0},
        {"quiet", false},
        {"solve",
         {{"matrix", ""},
          {"b", ""},
          {"lambda", 0.0},
          {"gamma", 0.0},
          {"alpha", 0.0},
          {"full_solver", false},
          {"orgen",
           {{"init_size", 0},
            {"max_active", 0},
            {"max_outer_iterations", 0},
            {"inner", {{"max_iterations", 0}, {"tolerance", 0.0}, {"acceleration", true}}}}}}},
        {"cluster",
         {{"data", ""},
          {"truth", ""},
          {"lambda", 0.0},
          {"alpha", 0.0},
          {"n_clusters", 0},
          {"max_active", 0},
          {"max_outer_iterations", 0}}},
        {"synth",
         {{"ambient_dim", 0},
          {"n_subspaces", 0},
          {"dim", 0},
          {"points_per", 0},
          {"noise_sigma", 0.0}}},
        {"verify",
         {{"suites", json::array()},
          {"lemma_c2_seeds", 0},
          {"lambda_one_seeds", 0},
          {"proposition_trials", 0},
          {"phase_grid",
           {{"n_list", json::array()},
            {"lambda_list", json::array()},
            {"seeds", 0},
            {"alpha", 0.0},
            {"ambient_dim", 0},
            {"n_subspaces", 0},
            {"dim", 0}}}}},
        {"bench",
         {{"n_list", json::array()},
          {"lambda_list", json::array()},
          {"ambient_dim", 0},
          {"gamma", 0.0},
          {"seeds", 0},
          {"skip_full", false}}},
    };
    return schema;
}

void check_keys(const json& doc, const json& schema, const std::string& prefix) {
    if (!doc.is_object()) return;
    for (const auto& [key, value] : doc.items()) {
        if (!schema.contains(key))
            fail(ErrorCode::InvalidArgument, "unknown config key: " + prefix + key);
        if (value.is_object()) check_keys(value, schema.at(key), prefix + key + ".");
    }
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) fail(ErrorCode::FileNotFound, "config not found: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        fail(ErrorCode::FormatError, std::string("config parse error: ") + e.what());
    }
    check_keys(doc, config_schema(), "");
    return doc;
}

template <class T>
T get_or(const json& doc, const char* key, T fallback) {
    if (doc.contains(key) && !doc.at(key).is_null()) return doc.at(key).get<T>();
    return fallback;
}

struct GlobalOptions {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir = "ensc-out";
    unsigned threads = 0;
    bool quiet = false;
    bool seed_given = false;
    bool out_given = false;
    bool threads_given = false;

    json config;
    fs::path out;

    void finalize(const std::string& command) {
        config = load_config(config_path);
        if (!seed_given) seed = get_or<std::uint64_t>(config, "seed", seed);
        if (!out_given) out_dir = get_or<std::string>(config, "out", out_dir);
        if (!threads_given) threads = get_or<unsigned>(config, "threads", threads);
        if (!quiet) quiet = get_or<bool>(config, "quiet", false);
        out = fs::path(out_dir);
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec) fail(ErrorCode::InvalidArgument, "cannot create output dir: " + out_dir);

        json effective = config;
        effective["seed"] = seed;
        effective["threads"] = threads;
        effective["command"] = command;
        char hash[24];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(fnv1a(effective.dump())));
        write_json(out / "manifest.json", json{{"version", kVersion},
                                               {"command", command},
                                               {"seed", seed},
                                               {"threads", threads},
                                               {"config_hash", hash}});
    }

    void note(const std::string& line) const {
        if (!quiet) std::cout << line << "\n";
    }
};

OrgenConfig orgen_from_config(const json& section) {
    OrgenConfig cfg;
    if (section.contains("orgen")) {
        const json& o = section.at("orgen");
        cfg.init_size = get_or<Index>(o, "init_size", cfg.init_size);
        const Index max_active = get_or<Index>(o, "max_active", 0);
        if (max_active > 0) cfg.max_active = max_active;
        cfg.max_outer_iterations =
            get_or<std::size_t>(o, "max_outer_iterations", cfg.max_outer_iterations);
        if (o.contains("inner")) {
            const json& i = o.at("inner");
            cfg.inner.max_iterations =
                get_or<std::size_t>(i, "max_iterations", cfg.inner.max_iterations);
            cfg.inner.tolerance = get_or<double>(i, "tolerance", cfg.inner.tolerance);
            cfg.inner.acceleration = get_or<bool>(i, "acceleration", cfg.inner.acceleration);
        }
    }
    return cfg;
}

Vector load_vector(const fs::path& path) {
    const Matrix m = io::load_matrix(path);
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    fail(ErrorCode::InvalidDims, "expected a vector in " + path.string());
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

int cmd_solve(GlobalOptions& g, std::string matrix_path, std::string b_path, double lambda,
              double gamma, double alpha, bool full_solver) {
    const json section = g.config.value("solve", json::object());
    if (matrix_path.empty()) matrix_path = get_or<std::string>(section, "matrix", "");
    if (b_path.empty()) b_path = get_or<std::string>(section, "b", "");
    if (lambda < 0.0) lambda = get_or<double>(section, "lambda", 0.9);
    if (gamma <= 0.0) gamma = get_or<double>(section, "gamma", 0.0);
    if (alpha <= 0.0) alpha = get_or<double>(section, "alpha", 0.0);
    if (!full_solver) full_solver = get_or<bool>(section, "full_solver", false);
    if (matrix_path.empty() || b_path.empty())
        fail(ErrorCode::InvalidArgument, "solve needs --matrix and --b");

    Matrix raw;
    Vector b;
    try {
        raw = io::load_matrix(matrix_path);
        b = load_vector(b_path);
    } catch (const Error& e) {
        fail(e.code(), e.what());
    }

    const Dictionary dict = normalize_columns(raw);
    b /= b.norm();
    if (gamma <= 0.0) {
        if (alpha > 0.0)
            gamma = alpha * gamma_zero(b, dict, lambda);
        else
            fail(ErrorCode::InvalidArgument, "solve needs gamma > 0 or alpha > 0");
    }
    ElasticNetProblem problem(b, dict, lambda, gamma);
    OrgenConfig cfg = orgen_from_config(section);

    const double t0 = now_seconds();
    ElasticNetSolution sol;
    OrgenTrace trace;
    try {
        auto [s, t] = orgen_solve(problem, cfg);
        sol = std::move(s);
        trace = std::move(t);
    } catch (const MaxIterationsError& e) {
        sol = e.best();
    }
    const double orgen_seconds = now_seconds() - t0;

    json summary{{"lambda", lambda},
                 {"gamma", gamma},
                 {"n", problem.size()},
                 {"d", problem.dim()},
                 {"residual", sol.optimality_residual},
                 {"objective", sol.objective},
                 {"support_size", sol.support.size()},
                 {"outer_iterations", trace.outer_iterations()},
                 {"inner_iterations", sol.iterations},
                 {"wall_seconds", orgen_seconds},
                 {"converged", sol.converged}};

    if (full_solver) {
        const double t1 = now_seconds();
        const ElasticNetSolution full = solve_full(problem, cfg.inner);
        summary["full_wall_seconds"] = now_seconds() - t1;
        summary["full_residual"] = full.optimality_residual;
        summary["full_diff"] =
            (sol.coefficients - full.coefficients).cwiseAbs().maxCoeff();
    }

    io::save_matrix_csv(g.out / "solution.csv", sol.coefficients);
    io::atomic_write(g.out / "trace.csv", [&](std::ostream& os) { trace.write_csv(os); });
    write_json(g.out / "summary.json", summary);

    const double tol = default_tolerances().optimality;
    g.note("solve: residual " + io::format_double(sol.optimality_residual) + ", support " +
           std::to_string(sol.support.size()));
    return sol.optimality_residual <= tol ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// cluster
// ---------------------------------------------------------------------------

int cmd_cluster(GlobalOptions& g, std::string data_path, std::string truth_path, double lambda,
                double alpha, int n_clusters) {
    const json section = g.config.value("cluster", json::object());
    if (data_path.empty()) data_path = get_or<std::string>(section, "data", "");
    if (truth_path.empty()) truth_path = get_or<std::string>(section, "truth", "");
    if (lambda < 0.0) lambda = get_or<double>(section, "lambda", 0.95);
    if (alpha <= 0.0) alpha = get_or<double>(section, "alpha", 3.0);
    if (n_clusters <= 0) n_clusters = get_or<int>(section, "n_clusters", 0);
    if (data_path.empty()) fail(ErrorCode::InvalidArgument, "cluster needs --data");
    if (n_clusters < 1) fail(ErrorCode::InvalidArgument, "cluster needs --n-clusters");

    Matrix raw;
    std::optional<std::vector<int>> truth;
    try {
        raw = io::load_matrix(data_path);
        if (!truth_path.empty()) truth = io::load_labels_csv(truth_path);
    } catch (const Error& e) {
        fail(e.code(), e.what());
    }

    EnscConfig cfg;
    cfg.lambda = lambda;
    cfg.alpha = alpha;
    cfg.threads = g.threads;
    cfg.orgen = OrgenConfig::clustering_preset(get_or<Index>(section, "max_active", 3000));
    cfg.orgen.max_outer_iterations =
        get_or<std::size_t>(section, "max_outer_iterations", cfg.orgen.max_outer_iterations);

    const Dictionary data = normalize_columns(raw);
    const double t0 = now_seconds();
    const SelfExpressiveModel model = self_expressive(data, cfg);
    const Affinity affinity = build_affinity(model);
    const double affinity_seconds = now_seconds() - t0;

    const double t1 = now_seconds();
    const ClusteringResult result = spectral_cluster(affinity, n_clusters, g.seed);
    const double spectral_seconds = now_seconds() - t1;

    io::save_labels_csv(g.out / "labels.csv", result.labels);
    io::atomic_write(g.out / "affinity.csv", [&](std::ostream& os) { affinity.write_csv(os); });

    json summary{{"n", n_clusters},
                 {"N", data.size()},
                 {"seed", g.seed},
                 {"lambda", lambda},
                 {"alpha", alpha},
                 {"affinity_seconds", affinity_seconds},
                 {"spectral_seconds", spectral_seconds},
                 {"degenerate", result.degenerate},
                 {"failed_columns", model.failures.size()}};

    if (truth) {
        if (static_cast<Index>(truth->size()) != data.size())
            fail(ErrorCode::LengthMismatch, "truth labels length mismatch");
        const double accuracy = clustering_accuracy(result.labels, *truth);
        summary["accuracy"] = accuracy;
        write_json(g.out / "accuracy.json", json{{"accuracy", accuracy},
                                                 {"n", n_clusters},
                                                 {"N", data.size()},
                                                 {"seed", g.seed}});
        g.note("cluster: accuracy " + io::format_double(accuracy));
    }
    write_json(g.out / "summary.json", summary);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int cmd_synth(GlobalOptions& g) {
    const json section = g.config.value("synth", json::object());
    const Index ambient = get_or<Index>(section, "ambient_dim", 20);
    const Index subspaces = get_or<Index>(section, "n_subspaces", 4);
    const Index dim = get_or<Index>(section, "dim", 8);
    const Index points = get_or<Index>(section, "points_per", 200);
    const double noise = get_or<double>(section, "noise_sigma", 0.0);

    synth::SubspaceDataset ds;
    try {
        ds = synth::random_subspaces(ambient, subspaces, dim, points, g.seed, noise);
    } catch (const Error& e) {
        fail(e.code(), e.what());
    }
    io::save_matrix_binary(g.out / "data.bin", ds.data.atoms);
    write_json(g.out / "dataset.json",
               json{{"labels", ds.labels},
                    {"seed", g.seed},
                    {"config",
                     {{"ambient_dim", ambient},
                      {"n_subspaces", subspaces},
                      {"dim", dim},
                      {"points_per", points},
                      {"noise_sigma", noise}}},
                    {"independent", ds.independent}});
    g.note("synth: wrote " + std::to_string(ds.data.size()) + " points");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

json run_remark_suite() {
    Matrix m(3, 4);
    m << -0.55, -0.82, -0.05, 0.22,
          0.22,  0.57,  0.84, 0.78,
         -0.80,  0.00,  0.55, 0.58;
    Vector x(3);
    x << 0.22, 0.72, 0.66;
    x /= x.norm();
    const Dictionary dict = normalize_columns(m);
    const auto d88 = theory::oracle_diagnostics(x, dict, 0.88, 10.0);
    const auto d95 = theory::oracle_diagnostics(x, dict, 0.95, 10.0);
    const bool pass = d88.ratio > d95.ratio;
    return json{{"name", "remark"},
                {"pass", pass},
                {"ratio_088", d88.ratio},
                {"ratio_095", d95.ratio}};
}

json run_lemma_c2_suite(std::size_t seeds) {
    std::size_t checked = 0, passed = 0;
    const double lambdas[] = {0.1, 0.5, 0.9, 1.0};
    for (std::size_t s = 0; s < seeds; ++s) {
        const double lambda = lambdas[s % 4];
        const auto dict = synth::random_unit_sphere(10, 40, derive_seed(9000, s));
        Rng rng(derive_seed(9001, s));
        const Vector b = rng.unit_vector(10);
        const auto diag = theory::oracle_diagnostics(
            b, dict, lambda, 5.0 + static_cast<double>(s % 7) * 8.0);
        ++checked;
        if (diag.delta_norm <= diag.delta_bound + 1e-8) ++passed;
    }
    return json{{"name", "lemma-c2"},
                {"pass", checked == passed},
                {"checked", checked},
                {"passed", passed}};
}

json run_lambda_one_suite(std::size_t seeds) {
    std::size_t passed = 0;
    for (std::size_t s = 0; s < seeds; ++s) {
        const auto dict = synth::random_unit_sphere(10, 50, derive_seed(9100, s));
        Rng rng(derive_seed(9101, s));
        const Vector b = rng.unit_vector(10);
        ElasticNetProblem p(b, dict, 1.0, 30.0);
        InnerSolverConfig inner;
        inner.tolerance = 1e-11;
        const auto cold = solve_full(p, inner);
        const auto warm = solve_full(p, inner, Vector(0.1 * rng.normal_vector(50)));
        const Vector u = dict.atoms.transpose() * cold.oracle_point;
        bool ok = dual_feasibility_lambda1(cold.oracle_point, dict) <= 1.0 + 1e-8;
        for (Index j = 0; j < dict.size() && ok; ++j) {
            if (cold.coefficients[j] != 0.0) ok = std::abs(std::abs(u[j]) - 1.0) <= 1e-7;
            if (ok) ok = std::abs(u[j]) <= 1.0 + 1e-7;
        }
        if (ok) ok = (cold.oracle_point - warm.oracle_point).cwiseAbs().maxCoeff() <= 1e-7;
        if (ok) ++passed;
    }
    return json{{"name", "lambda-one"}, {"pass", passed == seeds}, {"passed", passed},
                {"checked", seeds}};
}

json run_propositions_suite(std::size_t trials) {
    std::size_t passed1 = 0, passed2 = 0;
    for (std::size_t s = 0; s < trials; ++s) {
        const auto dict = synth::random_unit_sphere(8, 20, derive_seed(9200, s));
        Rng rng(derive_seed(9201, s));
        const Vector b = rng.unit_vector(8);
        ElasticNetProblem p(b, dict, 0.6, 12.0);
        const auto sol = solve_full(p);

        Matrix grown(8, 21);
        grown.leftCols(20) = dict.atoms;
        Vector v = rng.unit_vector(8);
        while (std::abs(v.dot(sol.oracle_point)) > p.lambda * 0.99) v = rng.unit_vector(8);
        grown.col(20) = v;
        const auto sol_out = solve_full(ElasticNetProblem(b, Dictionary{grown, true}, 0.6, 12.0));
        if ((sol_out.coefficients.head(20) - sol.coefficients).cwiseAbs().maxCoeff() <= 1e-7 &&
            sol_out.coefficients[20] == 0.0)
            ++passed1;

        Vector inside = sol.oracle_point / sol.oracle_point.norm() + 0.01 * rng.normal_vector(8);
        inside /= inside.norm();
        if (std::abs(inside.dot(sol.oracle_point)) <= p.lambda + 1e-6) continue;
        grown.col(20) = inside;
        const auto sol_in = solve_full(ElasticNetProblem(b, Dictionary{grown, true}, 0.6, 12.0));
        if (std::abs(sol_in.coefficients[20]) > 1e-9) ++passed2;
    }
    return json{{"name", "propositions"},
                {"pass", passed1 == trials && passed2 == trials},
                {"outside_unchanged", passed1},
                {"inside_nonzero", passed2},
                {"trials", trials}};
}

int cmd_verify(GlobalOptions& g) {
    const json section = g.config.value("verify", json::object());
    std::vector<std::string> suites =
        get_or<std::vector<std::string>>(section, "suites",
                                         {"remark", "lemma-c2", "lambda-one", "propositions"});

    json report = json::array();
    std::vector<std::string> failed;
    for (const std::string& suite : suites) {
        json result;
        if (suite == "remark") {
            result = run_remark_suite();
        } else if (suite == "lemma-c2") {
            result = run_lemma_c2_suite(get_or<std::size_t>(section, "lemma_c2_seeds", 100));
        } else if (suite == "lambda-one") {
            result = run_lambda_one_suite(get_or<std::size_t>(section, "lambda_one_seeds", 10));
        } else if (suite == "propositions") {
            result =
                run_propositions_suite(get_or<std::size_t>(section, "proposition_trials", 100));
        } else if (suite == "phase-grid") {
            theory::PhaseGridConfig cfg;
            const json pg = section.value("phase_grid", json::object());
            cfg.n_points_list = get_or<std::vector<Index>>(pg, "n_list", {200, 400});
            cfg.lambda_list = get_or<std::vector<double>>(pg, "lambda_list", {0.99, 0.60});
            cfg.seeds = get_or<std::size_t>(pg, "seeds", 3);
            cfg.alpha = get_or<double>(pg, "alpha", 10.0);
            cfg.ambient_dim = get_or<Index>(pg, "ambient_dim", 20);
            cfg.n_subspaces = get_or<Index>(pg, "n_subspaces", 4);
            cfg.subspace_dim = get_or<Index>(pg, "dim", 8);
            cfg.threads = g.threads;
            cfg.master_seed = g.seed;
            const auto grid = theory::phase_grid(cfg);
            io::atomic_write(g.out / "phase_grid.csv",
                             [&](std::ostream& os) { grid.write_csv(os); });
            bool pass = true;
            Index violations = 0;
            for (const auto& cell : grid.cells) {
                if (cell.predicted_pct > cell.experimental_pct + 2.0) pass = false;
                violations += cell.sufficiency_violations;
            }
            if (violations > 0) pass = false;
            result = json{{"name", "phase-grid"},
                          {"pass", pass},
                          {"cells", grid.cells.size()},
                          {"sufficiency_violations", violations}};
        } else {
            fail(ErrorCode::InvalidArgument, "unknown verify suite: " + suite);
        }
        if (!result.value("pass", false)) failed.push_back(suite);
        g.note("verify: " + suite + (result.value("pass", false) ? " PASS" : " FAIL"));
        report.push_back(std::move(result));
    }

    write_json(g.out / "theory_report.json",
               json{{"suites", report}, {"failed", failed}, {"seed", g.seed}});
    return failed.empty() ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

int cmd_bench(GlobalOptions& g) {
    const json section = g.config.value("bench", json::object());
    const std::vector<Index> n_list = get_or<std::vector<Index>>(section, "n_list", {2000, 5000});
    const std::vector<double> lambda_list =
        get_or<std::vector<double>>(section, "lambda_list", {0.9});
    const Index d = get_or<Index>(section, "ambient_dim", 100);
    const double gamma = get_or<double>(section, "gamma", 50.0);
    const std::size_t seeds = get_or<std::size_t>(section, "seeds", 1);
    const bool skip_full = get_or<bool>(section, "skip_full", false);
    if (n_list.empty() || lambda_list.empty())
        fail(ErrorCode::InvalidArgument, "bench needs n_list and lambda_list");

    std::string csv = "N,lambda,solver,seconds,support,outer_iters\n";
    for (const Index n : n_list) {
        for (const double lambda : lambda_list) {
            for (std::size_t s = 0; s < seeds; ++s) {
                const auto dict = synth::random_unit_sphere(
                    d, n, derive_seed(g.seed, static_cast<std::uint64_t>(n), s));
                Rng rng(derive_seed(g.seed, static_cast<std::uint64_t>(n), s, 0xbeef));
                const Vector b = rng.unit_vector(d);
                ElasticNetProblem p(b, dict, lambda, gamma);

                const double t0 = now_seconds();
                const auto [sol, trace] = orgen_solve(p);
                const double orgen_seconds = now_seconds() - t0;
                char row[160];
                std::snprintf(row, sizeof(row), "%lld,%.17g,orgen,%.17g,%lld,%zu\n",
                              static_cast<long long>(n), lambda, orgen_seconds,
                              static_cast<long long>(sol.support.size()),
                              trace.outer_iterations());
                csv += row;

                if (!skip_full) {
                    const double t1 = now_seconds();
                    const auto full = solve_full(p);
                    const double full_seconds = now_seconds() - t1;
                    std::snprintf(row, sizeof(row), "%lld,%.17g,full,%.17g,%lld,1\n",
                                  static_cast<long long>(n), lambda, full_seconds,
                                  static_cast<long long>(full.support.size()));
                    csv += row;
                }
                g.note("bench: N=" + std::to_string(n) + " lambda=" + io::format_double(lambda) +
                       " done");
            }
        }
    }
    io::atomic_write(g.out / "bench.csv", [&](std::ostream& os) { os << csv; });
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Elastic net subspace clustering toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may appear after the subcommand

    GlobalOptions g;
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--seed", g.seed, "master seed")->each([&](const std::string&) {
        g.seed_given = true;
    });
    app.add_option("--out", g.out_dir, "output directory")->each([&](const std::string&) {
        g.out_given = true;
    });
    app.add_option("--threads", g.threads, "worker threads (0: auto, ENSC_THREADS honored)")
        ->each([&](const std::string&) { g.threads_given = true; });
    app.add_flag("--quiet", g.quiet, "suppress progress output");

    auto* solve = app.add_subcommand("solve", "solve one elastic net instance");
    std::string matrix_path, b_path;
    double lambda = -1.0, gamma = 0.0, alpha = 0.0;
    bool full_solver = false;
    solve->add_option("--matrix", matrix_path, "dictionary matrix file (csv or binary)");
    solve->add_option("--b", b_path, "query vector file");
    solve->add_option("--lambda", lambda, "l1/l2 tradeoff in [0,1]");
    solve->add_option("--gamma", gamma, "fidelity weight");
    solve->add_option("--alpha", alpha, "gamma = alpha * gamma_0 (alternative to --gamma)");
    solve->add_flag("--full-solver", full_solver, "also run the full solver and report the diff");

    auto* cluster = app.add_subcommand("cluster", "self-expressive spectral clustering");
    std::string data_path, truth_path;
    double cl_lambda = -1.0, cl_alpha = 0.0;
    int n_clusters = 0;
    cluster->add_option("--data", data_path, "data matrix file");
    cluster->add_option("--truth", truth_path, "ground-truth labels CSV (optional)");
    cluster->add_option("--lambda", cl_lambda, "l1/l2 tradeoff in [0,1]");
    cluster->add_option("--alpha", cl_alpha, "gamma = alpha * gamma_0 per column");
    cluster->add_option("--n-clusters", n_clusters, "number of clusters");

    auto* synth_cmd = app.add_subcommand("synth", "generate a union-of-subspaces dataset");
    auto* verify = app.add_subcommand("verify", "run theory verification suites");
    auto* bench = app.add_subcommand("bench", "time the active-set solver against the baseline");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            g.finalize("solve");
            return cmd_solve(g, matrix_path, b_path, lambda, gamma, alpha, full_solver);
        }
        if (cluster->parsed()) {
            g.finalize("cluster");
            return cmd_cluster(g, data_path, truth_path, cl_lambda, cl_alpha, n_clusters);
        }
        if (synth_cmd->parsed()) {
            g.finalize("synth");
            return cmd_synth(g);
        }
        if (verify->parsed()) {
            g.finalize("verify");
            return cmd_verify(g);
        }
        if (bench->parsed()) {
            g.finalize("bench");
            return cmd_bench(g);
        }
    } catch (const Error& e) {
        fail(e.code(), e.what());
    } catch (const std::exception& e) {
        fail(ErrorCode::InvalidArgument, e.what());
    }
    return kExitError;
}
