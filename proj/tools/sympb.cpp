// sympb: command-line front end for the dissipative symplectic billiard lab.
//
//   sympb simulate --table t.json --lambda 0.9 --seeds 200 --n 2000 --n0 30 --out dir/
//   sympb classify --table t.json --lambda-sweep 0.05:0.95:19
//   sympb figure num3 --lambda 0.95 --out figs/
//   sympb run --config run.toml
//
// Exit code 2 means the analysis was refused because its hypotheses do not
// hold; any other failure exits with 1.

#include "sympb/sympb.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace sympb;

namespace {

/// The requested analysis does not apply to this table or lambda.
class Refusal : public Error {
public:
    using Error::Error;
};

struct Preset {
    TableSpec spec;
    double lambda;
    int n0;
    const char* caption;
};

const std::map<std::string, Preset>& presets() {
    static const std::map<std::string, Preset> p{
        {"num1", {TableSpec::support({{0, 1.0, 0.0}, {2, 0.0, 0.125}}), 0.9, 30, "p = 1 + sin 2θ / 8"}},
        {"num2",
         {TableSpec::support({{0, 1.0, 0.0}, {2, 0.0, 0.125}, {3, 1.0 / 27.0, 0.0}}), 0.71, 10,
          "p = 1 + sin 2θ / 8 + cos 3θ / 27"}},
        {"num3", {TableSpec::polar({{0, 1.0, 0.0}, {2, -0.2, 0.0}}), 0.71, 10, "r = 1 − cos 2u / 5"}},
    };
    return p;
}

/// Everything the command line can set. Flags that were not given leave the
/// config file's (or the default) value alone.
struct Cli {
    std::string config_path;
    std::string table_path;
    std::string sweep;
    std::string out;
    std::string preset;
    double lambda = 0.9;
    int seeds = 0, n = 0, n0 = 0, threads = 0, grid = 0;
    std::uint64_t rng_seed = 0;
    double alpha = 0.5, tol = 1e-8;
    bool use_compatible_origin = false;
    bool quiet = false;
    CLI::App* active = nullptr;  ///< the subcommand that was parsed

    bool has(const std::string& flag) const { return active && active->get_option(flag)->count() > 0; }
};

void add_common(CLI::App* sub, Cli& c) {
    sub->add_option("--config", c.config_path, "run configuration (.toml or .json)");
    sub->add_option("--table", c.table_path, "table spec JSON file");
    sub->add_option("--lambda", c.lambda, "dissipation parameter in (0, 1]");
    sub->add_option("--lambda-sweep", c.sweep, "lambda sweep from:to:steps");
    sub->add_option("--seeds", c.seeds, "number of random initial conditions");
    sub->add_option("--rng-seed", c.rng_seed, "random generator seed");
    sub->add_option("--n", c.n, "iterations per seed");
    sub->add_option("--n0", c.n0, "transient iterations not recorded");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--threads", c.threads, "worker threads (default SYMPB_THREADS or all cores)");
    sub->add_option("--alpha", c.alpha, "cone half-slope for the contraction test");
    sub->add_option("--grid", c.grid, "graph transform grid size");
    sub->add_option("--tol", c.tol, "graph transform tolerance");
    sub->add_flag("--compatible-origin", c.use_compatible_origin,
                  "move the origin to a compatible one (diagonal intersection of a 4-periodic orbit)");
    sub->add_flag("-q,--quiet", c.quiet, "no progress or summary on stdout");
}

RunConfig build_config(const Cli& c) {
    RunConfig cfg;
    if (c.has("--config")) {
        cfg = load_config(c.config_path);
        // table paths in a config file are relative to that file
        if (auto p = std::get_if<std::string>(&cfg.table); p && fs::path(*p).is_relative())
            cfg.table = (fs::path(c.config_path).parent_path() / *p).string();
    }
    if (c.has("--table")) cfg.table = c.table_path;
    if (c.has("--lambda")) cfg.lambda = c.lambda;
    if (c.has("--lambda-sweep")) cfg.sweep = parse_sweep(c.sweep);
    if (c.has("--seeds")) cfg.seeds = c.seeds;
    if (c.has("--rng-seed")) cfg.rng_seed = c.rng_seed;
    if (c.has("--n")) cfg.n = c.n;
    if (c.has("--n0")) cfg.n0 = c.n0;
    if (c.has("--out")) cfg.output_dir = c.out;
    if (c.has("--threads")) cfg.threads = c.threads;
    if (c.has("--alpha")) cfg.alpha = c.alpha;
    if (c.has("--grid")) cfg.grid = c.grid;
    if (c.has("--tol")) cfg.tol = c.tol;
    if (!c.preset.empty()) {
        const Preset& p = presets().at(c.preset);
        if (!c.has("--table")) cfg.table = p.spec;
        if (!c.has("--lambda")) cfg.lambda = p.lambda;
        if (!c.has("--n0")) cfg.n0 = p.n0;
    }
    validate(cfg);
    return cfg;
}

/// Table from the config, with the origin moved if requested. Warns when
/// lambda < 1 and the origin is not compatible, since the dissipative map
/// then no longer keeps the zero-section 4-periodic orbits.
BilliardTable resolve_table(const RunConfig& cfg, const Cli& c, double lambda_min) {
    TableSpec spec;
    if (auto p = std::get_if<std::string>(&cfg.table)) spec = load_table_spec(*p);
    else if (auto s = std::get_if<TableSpec>(&cfg.table)) spec = *s;
    else throw ConfigError("no table given (use --table or a config file)");

    BilliardTable table(spec);
    if (c.use_compatible_origin) {
        table = table.with_origin(compatible_origin(table));
        if (!c.quiet) std::cout << "origin: (" << table.origin().x() << ", " << table.origin().y() << ")\n";
        return table;
    }
    if (lambda_min < 1.0) {
        try {
            Vec2 o = compatible_origin(table);
            if ((o - table.origin()).norm() > 1e-6 * table.scale())
                std::cerr << "warning: origin (" << table.origin().x() << ", " << table.origin().y()
                          << ") is not compatible; a compatible origin is (" << o.x() << ", " << o.y()
                          << "), see --compatible-origin\n";
        } catch (const SearchError& e) {
            std::cerr << "warning: could not locate a compatible origin: " << e.what() << "\n";
        }
    }
    return table;
}

fs::path out_file(const RunConfig& cfg, const std::string& name) {
    fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IOError("cannot create output directory " + dir.string());
    return dir / name;
}

template <class Write>
void write_output(const fs::path& path, Write&& write) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IOError("cannot write " + path.string());
    write(f);
    f.flush();
    if (!f) throw IOError("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) {
    write_output(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

std::vector<double> lambdas(const RunConfig& cfg) { return cfg.sweep ? cfg.sweep->values() : std::vector{cfg.lambda}; }

std::string table_label(const RunConfig& cfg) {
    if (auto p = std::get_if<std::string>(&cfg.table)) return fs::path(*p).stem().string();
    return "table";
}

// ---------------------------------------------------------------------------
// Commands

AttractorCloud run_cloud(const BilliardTable& table, const RunConfig& cfg, const std::string& id) {
    std::vector<double> psi0;
    auto seeds = random_plot_seeds(table, cfg.seeds, cfg.rng_seed, &psi0);
    auto cloud = iterate_cloud(table, cfg.lambda, seeds, cfg.n, cfg.transient(), worker_count(cfg.threads));
    cloud.seed_psi0 = std::move(psi0);
    cloud.table_id = id;
    return cloud;
}

json cloud_summary(const AttractorCloud& cloud) {
    std::optional<RotationInterval> rot;
    if (cloud.n - cloud.n0 >= 1000) rot = rotation_interval(cloud);
    auto w = non_graph_witness(cloud, pi / 256, 0.1);
    json j = summary_json(cloud.lambda, rot, std::nullopt, w);
    std::size_t lost = std::count(cloud.terminated.begin(), cloud.terminated.end(), true);
    j["seeds"] = cloud.seed_psi0.size();
    j["terminated"] = lost;
    j["n"] = cloud.n;
    j["n0"] = cloud.n0;
    return j;
}

void write_cloud(const AttractorCloud& cloud, const RunConfig& cfg, const std::string& stem, const std::string& title,
                 bool quiet) {
    auto csv = out_file(cfg, stem + ".csv");
    write_output(csv, [&](std::ostream& o) { write_cloud_csv(o, cloud); });
    SvgOptions so;
    so.title = title;
    auto svg = out_file(cfg, stem + ".svg");
    std::size_t drawn = 0;
    write_output(svg, [&](std::ostream& o) { drawn = write_svg(o, cloud, so); });
    json summary = cloud_summary(cloud);
    write_json(out_file(cfg, stem + ".json"), summary);
    if (!quiet) {
        std::cout << "wrote " << csv.string() << " (" << cloud.points.size() << " points), " << svg.string() << " ("
                  << drawn << " drawn)\n";
        if (!summary["rho_minus"].is_null())
            std::cout << "rotation interval [" << summary["rho_minus"].get<double>() << ", "
                      << summary["rho_plus"].get<double>() << "]\n";
        if (summary.contains("non_graph_witness"))
            std::cout << "non-graph witness: gap " << summary["non_graph_witness"]["gap"].get<double>() << "\n";
    }
}

void cmd_simulate(const RunConfig& cfg, const Cli& c) {
    auto table = resolve_table(cfg, c, cfg.lambda);
    auto cloud = run_cloud(table, cfg, table_label(cfg));
    char title[64];
    std::snprintf(title, sizeof title, "λ = %g, n0 = %d", cfg.lambda, cfg.transient());
    write_cloud(cloud, cfg, "cloud", title, c.quiet);
}

void cmd_figure(const RunConfig& cfg, const Cli& c) {
    auto table = resolve_table(cfg, c, cfg.lambda);
    auto cloud = run_cloud(table, cfg, c.preset);
    char title[128];
    std::snprintf(title, sizeof title, "%s, λ = %g, n0 = %d", presets().at(c.preset).caption, cfg.lambda,
                  cfg.transient());
    write_cloud(cloud, cfg, c.preset, title, c.quiet);
}

/// The 4-periodic analysis needs a centrally symmetric support table.
FourPeriodicResult periodic_or_refuse(const BilliardTable& table) {
    try {
        return find_4periodic(table);
    } catch (const KindMismatch& e) {
        throw Refusal(e.what());
    } catch (const GeometryError& e) {
        throw Refusal(e.what());
    }
}

void cmd_periodic(const RunConfig& cfg, const Cli& c) {
    auto table = resolve_table(cfg, c, 1.0);
    auto res = periodic_or_refuse(table);
    json j;
    j["radon_family"] = res.radon_family;
    j["lambda"] = cfg.lambda;
    j["orbits"] = json::array();
    for (const auto& o : res.orbits) {
        json rec = orbit_json(o, classify(table, o, cfg.lambda));
        rec["residual"] = o.residual;
        rec["closure_error"] = o.closure_error;
        rec["degenerate"] = o.degenerate;
        j["orbits"].push_back(rec);
    }
    write_json(out_file(cfg, "periodic.json"), j);
    if (!c.quiet) {
        if (res.radon_family) std::cout << "G vanishes identically: every point is 4-periodic\n";
        for (const auto& r : j["orbits"])
            std::cout << "theta1 " << r["theta1"].get<double>() << "  theta2 " << r["theta2"].get<double>() << "  k12 "
                      << r["k12"].get<double>() << "  " << r["type"].get<std::string>() << "\n";
    }
}

void cmd_classify(const RunConfig& cfg, const Cli& c) {
    auto table = resolve_table(cfg, c, 1.0);
    auto res = periodic_or_refuse(table);
    json rows = json::array();
    for (double lam : lambdas(cfg))
        for (const auto& o : res.orbits) rows.push_back(orbit_json(o, classify(table, o, lam)));
    write_json(out_file(cfg, "classify.json"), rows);
    write_output(out_file(cfg, "classify.csv"), [&](std::ostream& out) {
        out << "lambda,theta1,theta2,k12,type,mu1_re,mu1_im,mu2_re,mu2_im\n";
        for (const auto& r : rows)
            out << fmt_double(r["lambda"]) << ',' << fmt_double(r["theta1"]) << ',' << fmt_double(r["theta2"]) << ','
                << fmt_double(r["k12"]) << ',' << r["type"].get<std::string>() << ',' << fmt_double(r["mu"][0][0])
                << ',' << fmt_double(r["mu"][0][1]) << ',' << fmt_double(r["mu"][1][0]) << ','
                << fmt_double(r["mu"][1][1]) << '\n';
    });
    if (!c.quiet)
        for (const auto& r : rows)
            std::cout << "lambda " << r["lambda"].get<double>() << "  theta1 " << r["theta1"].get<double>() << "  "
                      << r["type"].get<std::string>() << "\n";
}

void cmd_graph(const RunConfig& cfg, const Cli& c) {
    auto table = resolve_table(cfg, c, cfg.lambda);
    GraphOptions go;
    go.alpha = cfg.alpha;
    go.threads = worker_count(cfg.threads);
    auto g = graph_transform_fixed_point(table, cfg.lambda, cfg.grid, cfg.tol, go);
    auto hits = zero_section_hits(table, g, 1e-10);
    write_output(out_file(cfg, "graph.csv"), [&](std::ostream& o) { write_graph_csv(o, g); });
    json j = summary_json(cfg.lambda, std::nullopt, hits, std::nullopt);
    j["whole_circle"] = hits.whole_circle;
    j["sweeps"] = g.sweeps;
    j["sup_change"] = g.sup_change;
    j["invariance_residual"] = invariance_residual(table, g);
    j["max_slope"] = g.max_slope;
    j["slope_bound"] = g.slope_bound;
    write_json(out_file(cfg, "graph.json"), j);
    if (!c.quiet)
        std::cout << "graph converged in " << g.sweeps << " sweeps, residual " << j["invariance_residual"].get<double>()
                  << ", " << hits.theta.size() << " zero-section hits\n";
}

void cmd_rotation(const RunConfig& cfg, const Cli& c) {
    auto table = resolve_table(cfg, c, cfg.lambda);
    auto cloud = run_cloud(table, cfg, table_label(cfg));
    auto r = rotation_interval(cloud);
    json j{{"lambda", cfg.lambda}, {"rho_minus", r.rho_minus}, {"rho_plus", r.rho_plus}, {"n_used", r.n_used},
           {"seeds_used", r.per_seed.size()}};
    write_json(out_file(cfg, "rotation.json"), j);
    if (!c.quiet) std::cout << "rotation interval [" << r.rho_minus << ", " << r.rho_plus << "]\n";
}

void cmd_threshold(const RunConfig& cfg, const Cli& c) {
    auto table = resolve_table(cfg, c, 1.0);
    double l = largest_contracting_lambda(table, cfg.alpha);
    write_json(out_file(cfg, "threshold.json"), json{{"alpha", cfg.alpha}, {"lambda_star", l}});
    if (!c.quiet) std::cout << "largest lambda passing the cone test: " << l << "\n";
}

void dispatch(const std::string& cmd, const RunConfig& cfg, const Cli& c) {
    if (cmd == "simulate") cmd_simulate(cfg, c);
    else if (cmd == "periodic") cmd_periodic(cfg, c);
    else if (cmd == "classify") cmd_classify(cfg, c);
    else if (cmd == "graph") cmd_graph(cfg, c);
    else if (cmd == "rotation") cmd_rotation(cfg, c);
    else if (cmd == "threshold") cmd_threshold(cfg, c);
    else if (cmd == "figure") {
        if (c.preset.empty()) throw ConfigError("figure needs a preset (num1, num2, num3)");
        cmd_figure(cfg, c);
    } else throw ConfigError("unknown command " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sympb: numerical lab for dissipative symplectic billiards"};
    app.require_subcommand(1);
    Cli c;
    std::map<std::string, CLI::App*> subs;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"simulate", "iterate random seeds and write the cloud as CSV and SVG"},
        {"periodic", "find and classify the 4-periodic orbits of a symmetric table"},
        {"classify", "stability of the 4-periodic orbits over a lambda sweep"},
        {"graph", "strong-dissipation attractor as a graph (refuses if not contracted)"},
        {"rotation", "rotation interval of the recorded iterates"},
        {"figure", "phase portrait presets num1, num2, num3"},
        {"threshold", "largest lambda passing the cone contraction test"},
        {"run", "run the commands listed in a config file"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub, c);
        subs[name] = sub;
    }
    subs["figure"]
        ->add_option("preset", c.preset, "figure preset")
        ->required()
        ->check(CLI::IsMember({"num1", "num2", "num3"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        c.active = app.get_subcommands().front();
        const std::string name = c.active->get_name();
        RunConfig cfg = build_config(c);
        if (name == "run") {
            if (cfg.commands.empty()) throw ConfigError("run: the config lists no commands");
            for (const auto& cmd : cfg.commands) dispatch(cmd, cfg, c);
        } else {
            dispatch(name, cfg, c);
        }
    } catch (const NotContracted& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 2;
    } catch (const NotSaddle& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 2;
    } catch (const Refusal& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
