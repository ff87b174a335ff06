#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zpdes/experiment.hpp"
#include "zpdes/space_io.hpp"

namespace fs = std::filesystem;
using namespace zpdes;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kSessionFailure = 2;

Json load_config(const std::string& config, const std::string& manifest)
{
    if (!manifest.empty()) {
        const auto m = read_json_file(manifest);
        if (!m.contains("config"))
            throw ConfigError(manifest + " has no config");
        return m.at("config");
    }
    if (config.empty())
        return Json::object();
    return read_json_file(config);
}

struct RunOptions {
    std::string config;
    std::string manifest;
    std::string predef;
    std::string out;
    std::vector<std::string> conditions;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> steps;
    std::optional<std::size_t> cohort;
    bool weights = false;
    std::size_t threads = 0;
};

Json apply_overrides(Json doc, const RunOptions& o)
{
    if (o.seed)
        doc["seed"] = *o.seed;
    if (o.steps)
        doc["steps"] = *o.steps;
    if (o.cohort)
        doc["cohort_size"] = *o.cohort;
    if (!o.predef.empty())
        doc["predef"] = o.predef;
    if (!o.conditions.empty())
        doc["conditions"] = o.conditions;
    if (o.weights)
        doc["outputs"]["weights"] = true;
    return doc;
}

int run_one(const Json& doc, const fs::path& out, std::size_t threads)
{
    const auto config = parse_experiment_config(doc);
    const auto env = build_environment(config);
    const auto result = run_experiment(env, config, threads);
    write_outputs(env, config, result, out);
    for (const auto& cohort : result.cohorts) {
        for (const auto& s : cohort.sessions) {
            if (s.error)
                std::cerr << "session failed: " << *s.error << '\n';
        }
    }
    std::cout << "wrote " << out.string() << " (" << result.failures << " failed sessions)\n";
    return result.failures == 0 ? kOk : kSessionFailure;
}

std::string to_pointer(const std::string& path)
{
    if (path.starts_with("/"))
        return path;
    std::string p = "/" + path;
    for (auto& c : p) {
        if (c == '.')
            c = '/';
    }
    return p;
}

Json parse_value(const std::string& text)
{
    const auto j = Json::parse(text, nullptr, false);
    return j.is_discarded() ? Json(text) : j;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ZPDES / Predef curriculum experiments on the Kidlearn money game"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment and write its outputs");
    run_cmd->add_option("--config", run.config, "Experiment config (JSON)");
    run_cmd->add_option("--manifest", run.manifest, "Rerun the config stored in a manifest")->excludes("--config");
    run_cmd->add_option("--seed", run.seed, "Master seed");
    run_cmd->add_option("--out", run.out, "Output directory")->required();
    run_cmd->add_option("--steps", run.steps, "Activities per learner");
    run_cmd->add_option("--cohort", run.cohort, "Learners per condition");
    run_cmd->add_option("--conditions", run.conditions, "Subset of predef, pco, zpdes, zco")->delimiter(',');
    run_cmd->add_option("--predef", run.predef, "Alternative predefined sequence (JSON)");
    run_cmd->add_flag("--weights", run.weights, "Also write per-step expert weights");
    run_cmd->add_option("--threads", run.threads, "Worker threads (0 = all cores)");

    std::string validate_config;
    auto* validate_cmd = app.add_subcommand("validate", "Check an experiment config and its data files");
    validate_cmd->add_option("--config", validate_config, "Experiment config (JSON)")->required();

    std::string traces_dir;
    std::string report_out;
    std::vector<std::size_t> report_times{1, 8, 20, 50};
    auto* report_cmd = app.add_subcommand("report", "Recompute summaries and chronographs from traces");
    report_cmd->add_option("--traces", traces_dir, "traces/ directory of a run")->required();
    report_cmd->add_option("--out", report_out, "Output directory (default: <traces>/../report)");
    report_cmd->add_option("--times", report_times, "Chronograph time steps")->delimiter(',');

    RunOptions sweep;
    std::string sweep_param;
    std::vector<std::string> sweep_values;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run one experiment per value of a config parameter");
    sweep_cmd->add_option("--config", sweep.config, "Base experiment config (JSON)");
    sweep_cmd->add_option("--param", sweep_param, "Config path, e.g. zpd.lambda_zpd or /zpd/lambda_zpd")->required();
    sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")->delimiter(',')->required();
    sweep_cmd->add_option("--seed", sweep.seed, "Master seed");
    sweep_cmd->add_option("--out", sweep.out, "Output directory")->required();
    sweep_cmd->add_option("--steps", sweep.steps, "Activities per learner");
    sweep_cmd->add_option("--cohort", sweep.cohort, "Learners per condition");
    sweep_cmd->add_option("--conditions", sweep.conditions, "Subset of predef, pco, zpdes, zco")->delimiter(',');
    sweep_cmd->add_option("--threads", sweep.threads, "Worker threads (0 = all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInvalid;
    }

    try {
        if (*run_cmd) {
            const auto doc = apply_overrides(load_config(run.config, run.manifest), run);
            return run_one(doc, run.out, run.threads);
        }
        if (*validate_cmd) {
            const auto config = parse_experiment_config(read_json_file(validate_config));
            const auto env = build_environment(config);
            std::cout << "ok: " << env.space->groups().size() << " groups, " << env.space->value_count()
                      << " values, " << env.sequence->steps.size() << " predef steps\n";
            return kOk;
        }
        if (*report_cmd) {
            const fs::path traces = traces_dir;
            const fs::path out = report_out.empty() ? traces.parent_path() / "report" : fs::path(report_out);
            const auto n = report_from_traces(traces, out, report_times);
            std::cout << "read " << n << " traces, wrote " << out.string() << '\n';
            return kOk;
        }
        if (*sweep_cmd) {
            const auto base = apply_overrides(load_config(sweep.config, ""), sweep);
            const auto pointer = Json::json_pointer(to_pointer(sweep_param));
            int code = kOk;
            for (const auto& v : sweep_values) {
                auto doc = base;
                doc[pointer] = parse_value(v);
                const fs::path dir = fs::path(sweep.out) / (sweep_param + "=" + v);
                code = std::max(code, run_one(doc, dir, sweep.threads));
            }
            return code;
        }
    } catch (const ConfigError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    }
    return kOk;
}
