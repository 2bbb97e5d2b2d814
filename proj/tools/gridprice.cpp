// gridprice: command-line driver for the adaptive pricing mechanism.
//
//   gridprice validate <case>
//   gridprice gen <template> [--seed S] [--cost-range LO HI] [--out DIR]
//   gridprice run <case> [--seed S] [--alpha A] [--tol T] [--max-iters N]
//                        [--voll [PRICE]] [--record-every K] [--price-range LO HI]
//                        [--dump-dispatch] [--out DIR]
//   gridprice oracle <case> --method grid|kkt [--pitch P] [--out DIR]
//
// Exit codes: 0 ok, 1 not converged / check failed, 2 invalid case,
// 3 unservable demand, 4 method not applicable.

#include "gridprice/gridprice.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace gridprice;

namespace {

enum Exit : int { kOk = 0, kNotConverged = 1, kInvalidCase = 2, kUnservable = 3, kNotApplicable = 4 };

fs::path output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("GRIDPRICE_OUT"); env && *env) return env;
    return ".";
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string());
}

GridCase load_valid_case(const std::string& path) {
    GridCase c = load_case(path);
    const ValidationReport report = validate_case(c);
    if (!report) {
        std::string msg = path + ": invalid case";
        for (const auto& v : report.violations) msg += "\n  " + v;
        throw InvalidCase(msg);
    }
    return c;
}

struct RunOptions {
    std::string case_path;
    std::uint64_t seed = 0;
    RunConfig cfg;
    std::optional<double> voll;
    std::vector<double> price_range{5.0, 15.0};
    bool dump_dispatch = false;
    std::string out;
};

int cmd_validate(const std::string& path) {
    GridCase c = load_case(path);
    const ValidationReport report = validate_case(c);
    if (report) {
        std::cout << "ok\n";
        return kOk;
    }
    for (const auto& v : report.violations) std::cerr << v << '\n';
    return kInvalidCase;
}

int cmd_gen(const std::string& tmpl_path, std::uint64_t seed, const std::vector<double>& range, const std::string& out) {
    GridCase tmpl = load_case(tmpl_path, /*allow_missing_costs=*/true);
    if (range.size() != 2 || !(range[0] <= range[1])) throw UsageError("--cost-range needs LO <= HI");
    GridCase generated = generate_case(tmpl, range[0], range[1], seed);
    const ValidationReport report = validate_case(generated);
    if (!report) throw InvalidCase(tmpl_path + ": bad template: " + report.violations.front());
    const std::string text = case_to_json(generated).dump(2) + "\n";

    const bool to_file = !out.empty() || std::getenv("GRIDPRICE_OUT");
    if (!to_file) {
        std::cout << text;
        return kOk;
    }
    const fs::path dir = output_dir(out);
    ensure_dir(dir);
    write_text_file(dir / "case.json", text);
    std::cerr << "wrote " << (dir / "case.json").string() << '\n';
    return kOk;
}

int cmd_run(RunOptions opt) {
    const GridCase grid = load_valid_case(opt.case_path);
    if (opt.price_range.size() != 2 || !(opt.price_range[0] <= opt.price_range[1]))
        throw UsageError("--price-range needs LO <= HI");
    opt.cfg.voll = opt.voll;
    opt.cfg.rng_seed = opt.seed;

    const auto users = users_from_case(grid);
    const DispatchModel model(grid, DispatchOptions{opt.cfg.voll});
    const PriceProfile p0 = random_prices(users.size(), opt.price_range[0], opt.price_range[1], opt.seed);
    const Trajectory traj = run(model, users, p0, opt.cfg);

    const fs::path dir = output_dir(opt.out);
    ensure_dir(dir);
    write_text_file(dir / "trajectory.csv", trajectory_csv(traj, users.size()));
    json summary = summary_to_json(traj);
    summary["seed"] = opt.seed;
    summary["step_size"] = opt.cfg.step_size;
    summary["residual_tol"] = opt.cfg.residual_tol;
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");
    if (opt.dump_dispatch && !traj.records.empty())
        write_text_file(dir / "dispatch.json", dispatch_to_json(model.evaluate(traj.terminal().x)).dump(2) + "\n");

    std::cerr << "status " << to_string(traj.status) << " after " << traj.iterations << " iterations";
    if (!traj.records.empty()) std::cerr << ", residual " << traj.terminal().residual;
    std::cerr << '\n';
    switch (traj.status) {
        case RunStatus::Converged: return kOk;
        case RunStatus::MaxIters: return kNotConverged;
        case RunStatus::Error:
            std::cerr << traj.error << '\n';
            return kUnservable;
    }
    return kNotConverged;
}

std::optional<json> read_summary(const fs::path& dir, std::size_t n) {
    const fs::path path = dir / "summary.json";
    if (!fs::exists(path)) return std::nullopt;
    json s = read_json_file(path);
    if (!s.contains("x") || s["x"].size() != n) return std::nullopt;
    return s;
}

int cmd_oracle(const std::string& case_path, const std::string& method, double pitch, std::uint64_t seed,
               const std::string& out) {
    const GridCase grid = load_valid_case(case_path);
    const auto users = users_from_case(grid);
    const DispatchModel model(grid);
    const fs::path dir = output_dir(out);
    const std::optional<json> summary = read_summary(dir, users.size());

    json report;
    report["method"] = method;
    int code = kOk;

    if (method == "grid") {
        if (users.size() > 3) {
            std::cerr << "grid oracle supports at most 3 users, case has " << users.size() << '\n';
            return kNotApplicable;
        }
        double price_span = 1.0;
        for (const auto& g : grid.generators) price_span = std::max(price_span, 2.0 * std::abs(g.cost) + 1.0);
        std::vector<Interval> box;
        for (std::size_t i = 0; i < users.size(); ++i) {
            const double half = price_span / (2.0 * users[i].a);
            box.push_back({users[i].xbar - half, users[i].xbar + half});
        }
        const PlannerSolution sol = grid_search(model, users, box, pitch);
        report["pitch"] = pitch;
        report["x"] = vector_to_json(sol.x.values);
        report["C"] = sol.cost;
        report["evaluations"] = sol.evaluations;
        if (summary) {
            const Eigen::VectorXd xd = vector_from_json((*summary)["x"]);
            const Eigen::VectorXd gap = (xd - sol.x.values).cwiseAbs();
            report["gap"] = vector_to_json(gap);
            report["max_gap"] = gap.maxCoeff();
            report["cost_gap"] = std::abs((*summary)["C"].get<double>() - sol.cost);
        }
    } else if (method == "kkt") {
        DemandProfile x;
        if (summary) {
            x = DemandProfile(vector_from_json((*summary)["x"]));
            report["source"] = "summary.json";
        } else {
            RunConfig cfg;
            const Trajectory traj = run(model, users, random_prices(users.size(), 5.0, 15.0, seed), cfg);
            if (traj.status != RunStatus::Converged) {
                std::cerr << "dynamics did not converge: " << to_string(traj.status) << '\n';
                return traj.status == RunStatus::Error ? kUnservable : kNotConverged;
            }
            x = traj.terminal().x;
            report["source"] = "run";
        }
        const KktReport kkt = joint_lp_kkt_check(model, users, x);
        report["x"] = vector_to_json(x.values);
        report["lmp"] = vector_to_json(kkt.lambda.values);
        report["residual"] = kkt.residual;
        report["C"] = kkt.cost;
        report["probes_pass"] = kkt.probes_pass();
        json probes = json::array();
        for (const auto& p : kkt.probes)
            probes.push_back({{"coordinate", p.coordinate}, {"step", p.step}, {"delta", p.delta}, {"passed", p.passed}});
        report["probes"] = probes;
        if (!kkt.probes_pass()) code = kNotConverged;
    } else {
        throw UsageError("unknown oracle method '" + method + "'");
    }

    ensure_dir(dir);
    write_text_file(dir / "oracle.json", report.dump(2) + "\n");
    std::cout << report.dump(2) << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive incentive pricing on DC optimal power flow"};
    app.require_subcommand(1);

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a case file");
    validate->add_option("case", validate_path, "Case JSON")->required();

    std::string gen_tmpl, gen_out;
    std::uint64_t gen_seed = 0;
    std::vector<double> cost_range{5.0, 20.0};
    auto* gen = app.add_subcommand("gen", "Draw generator costs for a topology template");
    gen->add_option("template", gen_tmpl, "Template JSON (costs may be omitted)")->required();
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--cost-range", cost_range, "Cost range LO HI ($/MWh)")->expected(2);
    gen->add_option("--out", gen_out, "Output directory (writes case.json); stdout otherwise");

    RunOptions run_opt;
    auto* runc = app.add_subcommand("run", "Run the price dynamic");
    runc->add_option("case", run_opt.case_path, "Case JSON")->required();
    runc->add_option("--seed", run_opt.seed, "RNG seed for initial prices");
    runc->add_option("--alpha", run_opt.cfg.step_size, "Euler step size")->check(CLI::PositiveNumber);
    runc->add_option("--tol", run_opt.cfg.residual_tol, "Residual tolerance (inf-norm)")->check(CLI::PositiveNumber);
    runc->add_option("--max-iters", run_opt.cfg.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    runc->add_option("--record-every", run_opt.cfg.record_every, "Record every k-th step")->check(CLI::PositiveNumber);
    runc->add_option("--price-range", run_opt.price_range, "Initial price range LO HI")->expected(2);
    runc->add_option_function<std::vector<double>>(
            "--voll", [&run_opt](const std::vector<double>& v) { run_opt.voll = v.empty() ? kDefaultVoll : v.front(); },
            "Enable value-of-lost-load generators (default price 1000)")
        ->expected(0, 1);
    runc->add_flag("--dump-dispatch", run_opt.dump_dispatch, "Write dispatch.json for the terminal demand");
    runc->add_option("--out", run_opt.out, "Output directory (default $GRIDPRICE_OUT or .)");

    std::string oracle_case, oracle_method = "grid", oracle_out;
    double pitch = 1e-3;
    std::uint64_t oracle_seed = 0;
    auto* oracle = app.add_subcommand("oracle", "Certify the welfare optimum");
    oracle->add_option("case", oracle_case, "Case JSON")->required();
    oracle->add_option("--method", oracle_method, "grid or kkt")->check(CLI::IsMember({"grid", "kkt"}));
    oracle->add_option("--pitch", pitch, "Grid pitch (MW)")->check(CLI::PositiveNumber);
    oracle->add_option("--seed", oracle_seed, "Seed for the dynamics run when no summary.json is present");
    oracle->add_option("--out", oracle_out, "Output directory (default $GRIDPRICE_OUT or .)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return cmd_validate(validate_path);
        if (*gen) return cmd_gen(gen_tmpl, gen_seed, cost_range, gen_out);
        if (*runc) return cmd_run(run_opt);
        if (*oracle) return cmd_oracle(oracle_case, oracle_method, pitch, oracle_seed, oracle_out);
    } catch (const InvalidCase& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalidCase;
    } catch (const UnservableDemand& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUnservable;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNotConverged;
    }
    return kOk;
}
