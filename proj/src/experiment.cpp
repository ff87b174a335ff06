#include "zpdes/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "zpdes/space_io.hpp"

namespace zpdes {

namespace fs = std::filesystem;
using kidlearn::ContentGenerator;

std::string_view condition_name(Condition c)
{
    switch (c) {
    case Condition::predef: return "predef";
    case Condition::pco: return "pco";
    case Condition::zpdes: return "zpdes";
    case Condition::zco: return "zco";
    }
    return "?";
}

std::optional<Condition> parse_condition(std::string_view name)
{
    for (const auto c : {Condition::predef, Condition::pco, Condition::zpdes, Condition::zco}) {
        if (condition_name(c) == name)
            return c;
    }
    return std::nullopt;
}

bool offers_choice(Condition c) { return c == Condition::pco || c == Condition::zco; }
bool uses_zpdes(Condition c) { return c == Condition::zpdes || c == Condition::zco; }

void ExperimentConfig::validate() const
{
    if (conditions.empty())
        throw ConfigError("experiment needs at least one condition");
    if (std::set<Condition>(conditions.begin(), conditions.end()).size() != conditions.size())
        throw ConfigError("experiment lists a condition twice");
    if (steps == 0)
        throw ConfigError("experiment steps must be >= 1");
    if (!seed)
        throw ConfigError("experiment needs a seed (config \"seed\" or --seed)");
    population.validate();
    bandit.validate();
    mastery.validate();
    if (!zpd.is_object())
        throw ConfigError("experiment zpd overrides must be an object");
}

ExperimentConfig parse_experiment_config(const nlohmann::json& doc)
{
    ExperimentConfig c;
    if (!doc.is_object())
        throw ConfigError("experiment config must be a JSON object");
    try {
        if (doc.contains("conditions")) {
            c.conditions.clear();
            for (const auto& name : doc.at("conditions")) {
                const auto cond = parse_condition(name.get<std::string>());
                if (!cond)
                    throw ConfigError("unknown condition " + name.get<std::string>());
                c.conditions.push_back(*cond);
            }
        }
        c.steps = doc.value("steps", c.steps);
        if (doc.contains("seed"))
            c.seed = doc.at("seed").get<std::uint64_t>();
        c.space = doc.value("space", c.space);
        c.predef = doc.value("predef", c.predef);
        c.catalog = doc.value("catalog", c.catalog);
        c.denominations = doc.value("denominations", c.denominations);
        const auto pop = doc.value("population", nlohmann::json("builtin:population.json"));
        c.population = parse_population(pop.is_string() ? load_json_source(pop.get<std::string>()) : pop);
        if (doc.contains("cohort_size"))
            c.population.cohort_size = doc.at("cohort_size").get<std::size_t>();
        if (doc.contains("bandit")) {
            const auto& b = doc.at("bandit");
            c.bandit.gamma = b.value("gamma", c.bandit.gamma);
            c.bandit.beta = b.value("beta", c.bandit.beta);
            c.bandit.eta = b.value("eta", c.bandit.eta);
        }
        if (doc.contains("zpd"))
            c.zpd = doc.at("zpd");
        if (doc.contains("mastery")) {
            c.mastery.window = doc.at("mastery").value("window", c.mastery.window);
            c.mastery.required = doc.at("mastery").value("required", c.mastery.required);
        }
        if (doc.contains("outputs")) {
            const auto& o = doc.at("outputs");
            c.write_traces = o.value("traces", c.write_traces);
            c.write_weights = o.value("weights", c.write_weights);
            c.chronograph_times = o.value("chronograph_times", c.chronograph_times);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("experiment config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& c)
{
    nlohmann::json conds = nlohmann::json::array();
    for (const auto cond : c.conditions)
        conds.push_back(std::string(condition_name(cond)));
    nlohmann::json j = {{"conditions", conds},
                        {"steps", c.steps},
                        {"space", c.space},
                        {"predef", c.predef},
                        {"catalog", c.catalog},
                        {"denominations", c.denominations},
                        {"population", serialize_population(c.population)},
                        {"bandit", {{"gamma", c.bandit.gamma}, {"beta", c.bandit.beta}, {"eta", c.bandit.eta}}},
                        {"zpd", c.zpd},
                        {"mastery", {{"window", c.mastery.window}, {"required", c.mastery.required}}},
                        {"outputs",
                         {{"traces", c.write_traces},
                          {"weights", c.write_weights},
                          {"chronograph_times", c.chronograph_times}}}};
    if (c.seed)
        j["seed"] = *c.seed;
    return j;
}

Environment build_environment(const ExperimentConfig& config)
{
    Environment env;
    auto doc = load_json_source(config.space);
    if (!doc.contains("zpd"))
        doc["zpd"] = nlohmann::json::object();
    doc["zpd"].merge_patch(config.zpd);
    auto loaded = kidlearn::load_space(doc);
    env.space = loaded.space;
    env.rules = std::move(loaded.rules);
    env.sequence =
        std::make_shared<const PredefSequence>(parse_predef_sequence(load_json_source(config.predef), *env.space));
    env.content = std::make_shared<const ContentGenerator>(
        env.space, kidlearn::load_domain_data(config.catalog, config.denominations));
    return env;
}

LearnerSeeds learner_seeds(std::uint64_t master, std::size_t index)
{
    LearnerSeeds s;
    s.learner = derive_seed(master, "learner/" + std::to_string(index));
    s.profile = derive_seed(s.learner, "profile");
    s.policy = derive_seed(s.learner, "policy");
    s.content = derive_seed(s.learner, "content");
    s.choice = derive_seed(s.learner, "choice");
    s.response = derive_seed(s.learner, "response");
    return s;
}

SessionResult run_session(const Environment& env, const ExperimentConfig& config, Condition condition,
                          std::size_t learner, bool record_weights)
{
    SessionResult r;
    r.learner = learner;
    r.seeds = learner_seeds(config.seed.value_or(0), learner);
    try {
        Rng profile_rng(r.seeds.profile);
        r.initial_profile = sample_profile(config.population, env.content->data().catalog, profile_rng);
        LearnerProfile profile = r.initial_profile;

        std::unique_ptr<CurriculumPolicy> policy;
        if (uses_zpdes(condition))
            policy = std::make_unique<ZpdesPolicy>(env.space, ZpdesConfig{config.bandit, env.rules}, r.seeds.policy);
        else
            policy = std::make_unique<PredefPolicy>(env.sequence, config.mastery);

        Rng content_rng(r.seeds.content);
        Rng choice_rng(r.seeds.choice);
        Rng response_rng(r.seeds.response);
        const auto& catalog = env.content->data().catalog;

        for (std::size_t t = 1; t <= config.steps; ++t) {
            StepRecord step;
            step.t = t;
            step.activity = policy->next_activity();
            double engagement = 0.0;
            std::optional<kidlearn::ObjectChoice> choice;
            if (offers_choice(condition)) {
                choice = env.content->offer_choice(step.activity, choice_rng);
                step.chosen_option = static_cast<int>(choose_object(profile, *choice, catalog, choice_rng));
                engagement = profile.engagement_gain *
                             option_affinity(profile, choice->options[static_cast<std::size_t>(step.chosen_option)],
                                             catalog);
            }
            step.content = env.content->generate(
                step.activity, content_rng,
                choice ? &choice->options[static_cast<std::size_t>(step.chosen_option)] : nullptr);
            const auto played = play_exercise(profile, step.content, response_rng, engagement);
            step.solved = played.solved;
            step.trials = played.trials;
            learn(profile, step.content.features, step.solved);
            step.feedback = policy->record_outcome(step.activity, step.solved);
            if (record_weights)
                step.weights = policy->weight_snapshot();
            r.trace.append(static_cast<int>(step.content.features.type), step.content.features.level, step.solved);
            r.steps.push_back(std::move(step));
        }
        r.final_profile = profile;
    } catch (const std::exception& e) {
        r.error = std::string(condition_name(condition)) + " learner " + std::to_string(learner) + ": " + e.what();
    }
    return r;
}

ExperimentResult run_experiment(const Environment& env, const ExperimentConfig& config, std::size_t threads)
{
    config.validate();
    ExperimentResult result;
    const std::size_t n = config.population.cohort_size;
    for (const auto c : config.conditions)
        result.cohorts.push_back({c, std::vector<SessionResult>(n)});

    const std::size_t jobs = result.cohorts.size() * n;
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs; j = next++) {
            auto& cohort = result.cohorts[j / n];
            cohort.sessions[j % n] = run_session(env, config, cohort.condition, j % n, config.write_weights);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < threads; ++i)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    for (const auto& cohort : result.cohorts) {
        for (const auto& s : cohort.sessions)
            result.failures += s.error ? 1 : 0;
    }
    return result;
}

ConditionScores cohort_scores(const CohortResult& cohort, std::size_t steps)
{
    std::vector<const SessionResult*> ok;
    for (const auto& s : cohort.sessions) {
        if (!s.error)
            ok.push_back(&s);
    }
    ConditionScores out;
    out.condition = std::string(condition_name(cohort.condition));
    const auto rows = static_cast<Eigen::Index>(ok.size());
    const auto cols = static_cast<Eigen::Index>(steps);
    out.reached.resize(rows, cols);
    out.success.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto curves = score_curves(ok[static_cast<std::size_t>(i)]->trace, steps);
        out.reached.row(i) = curves.row(0);
        out.success.row(i) = curves.row(1);
    }
    return out;
}

namespace {

std::string presentation_id(kidlearn::Presentation p)
{
    switch (p) {
    case kidlearn::Presentation::integer: return "integer";
    case kidlearn::Presentation::euro_sign: return "x€x";
    case kidlearn::Presentation::comma: return "x,x€";
    }
    return "?";
}

std::string carry_id(kidlearn::Carry c)
{
    switch (c) {
    case kidlearn::Carry::without: return "without";
    case kidlearn::Carry::integer: return "integer";
    case kidlearn::Carry::decimal: return "decimal";
    }
    return "?";
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

template <typename Range, typename F>
std::string join(const Range& items, F&& render)
{
    std::string out;
    for (const auto& item : items) {
        if (!out.empty())
            out += ';';
        out += render(item);
    }
    return out;
}

const char* kTraceHeader = "t,activity,type,level,presentation,carry,shape,objects,target_cents,paid_cents,"
                           "chosen_option,trials,outcome,sequence_index,rewards,activated,deactivated,boosted";

void write_trace(std::ostream& out, const ActivitySpace& space, const SessionResult& s)
{
    out << kTraceHeader << '\n';
    for (const auto& step : s.steps) {
        const auto& f = step.content.features;
        const auto objects = join(step.content.objects, [](const kidlearn::PricedObject& o) {
            return o.id + (o.skin > 0 ? "#" + std::to_string(o.skin) : std::string()) + ":" +
                   std::to_string(o.price_cents);
        });
        const auto same = [](const std::string& x) { return x; };
        out << step.t << ',' << csv_field(describe(space, step.activity)) << ',' << kidlearn::type_id(f.type) << ','
            << f.level << ',' << csv_field(presentation_id(f.presentation)) << ',' << carry_id(f.carry) << ','
            << f.shape << ',' << csv_field(objects) << ',' << step.content.target_cents << ','
            << step.content.paid_cents << ',' << step.chosen_option << ',' << step.trials << ','
            << (step.solved ? 1 : 0) << ',' << step.feedback.sequence_index << ','
            << join(step.feedback.rewards, [](double x) { return format_number(x); }) << ','
            << csv_field(join(step.feedback.activated, same)) << ','
            << csv_field(join(step.feedback.deactivated, same)) << ','
            << csv_field(join(step.feedback.boosted, same)) << '\n';
    }
}

std::ofstream open_out(const fs::path& path)
{
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_summaries(const CohortSummary& summary, const fs::path& out)
{
    for (std::size_t i = 0; i < summary.conditions.size(); ++i) {
        auto f = open_out(out / ("summary_" + summary.conditions[i] + ".csv"));
        write_summary_csv(f, summary, i);
    }
}

void write_chronographs(const std::string& condition, std::span<const SessionTrace> traces,
                        const std::vector<std::size_t>& times, const fs::path& out)
{
    auto f = open_out(out / ("chronograph_" + condition + ".csv"));
    bool header = true;
    for (const auto t : times) {
        write_chronograph_csv(f, chronograph(traces, t), header);
        header = false;
    }
}

} // namespace

std::string file_hash(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(buf.str())));
    return hex;
}

void write_outputs(const Environment& env, const ExperimentConfig& config, const ExperimentResult& result,
                   const fs::path& out)
{
    fs::create_directories(out);

    std::vector<ConditionScores> scores;
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& cohort : result.cohorts) {
        const std::string name(condition_name(cohort.condition));
        std::vector<SessionTrace> traces;
        auto profiles = open_out(out / "profiles" / (name + ".jsonl"));
        std::optional<std::ofstream> weights;
        if (config.write_weights)
            weights = open_out(out / "weights" / (name + ".jsonl"));
        for (const auto& s : cohort.sessions) {
            if (s.error) {
                failures.push_back({{"condition", name}, {"learner", s.learner}, {"error", *s.error}});
                continue;
            }
            traces.push_back(s.trace);
            if (config.write_traces) {
                auto f = open_out(out / "traces" / name / ("learner_" + std::to_string(s.learner) + ".csv"));
                write_trace(f, *env.space, s);
            }
            profiles << nlohmann::json{{"learner", s.learner},
                                       {"initial", profile_to_json(s.initial_profile)},
                                       {"final", profile_to_json(s.final_profile)}}
                            .dump()
                     << '\n';
            if (weights) {
                for (const auto& step : s.steps) {
                    const std::vector<double> w(step.weights.data(), step.weights.data() + step.weights.size());
                    *weights << nlohmann::json{{"learner", s.learner}, {"t", step.t}, {"weights", w}}.dump() << '\n';
                }
            }
        }
        write_chronographs(name, traces, config.chronograph_times, out);
        scores.push_back(cohort_scores(cohort, config.steps));
    }
    bool summarizable = !scores.empty();
    for (const auto& s : scores)
        summarizable = summarizable && s.reached.rows() >= 2;
    if (summarizable)
        write_summaries(cohort_summary(scores), out);

    const auto resolved = experiment_config_to_json(config);
    nlohmann::json seeds = nlohmann::json::array();
    for (std::size_t k = 0; k < config.population.cohort_size; ++k) {
        const auto s = learner_seeds(config.seed.value_or(0), k);
        seeds.push_back({{"learner", k},
                         {"seed", s.learner},
                         {"profile", s.profile},
                         {"policy", s.policy},
                         {"content", s.content},
                         {"choice", s.choice},
                         {"response", s.response}});
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(out)) {
        if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
            files.push_back(fs::relative(entry.path(), out));
    }
    std::sort(files.begin(), files.end());
    nlohmann::json index = nlohmann::json::object();
    for (const auto& f : files)
        index[f.generic_string()] = file_hash(out / f);

    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(resolved.dump())));
    const nlohmann::json manifest = {{"version", std::string(kVersion)},
                                     {"config", resolved},
                                     {"config_hash", hash},
                                     {"seed_derivation", "learner = splitmix64(seed ^ fnv1a(\"learner/<k>\")), "
                                                         "stream = splitmix64(learner ^ fnv1a(\"<stream>\"))"},
                                     {"seeds", seeds},
                                     {"files", index},
                                     {"failures", failures}};
    auto m = open_out(out / "manifest.json");
    m << manifest.dump(2) << '\n';
}

SessionTrace read_trace_csv(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty trace " + path.string());
    const auto header = split_csv_line(line);
    auto column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw std::runtime_error(path.string() + " has no column " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto ct = column("t");
    const auto ctype = column("type");
    const auto clevel = column("level");
    const auto cout = column("outcome");
    SessionTrace trace;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size())
            throw std::runtime_error(path.string() + ": malformed row " + line);
        const auto type = kidlearn::type_from_id(f[ctype]);
        if (!type)
            throw std::runtime_error(path.string() + ": unknown type " + f[ctype]);
        if (std::stoul(f[ct]) != trace.size() + 1)
            throw std::runtime_error(path.string() + ": t is not consecutive");
        trace.append(static_cast<int>(*type), std::stoi(f[clevel]), f[cout] == "1");
    }
    return trace;
}

std::size_t report_from_traces(const fs::path& traces, const fs::path& out,
                               const std::vector<std::size_t>& chronograph_times)
{
    if (!fs::is_directory(traces))
        throw std::runtime_error("no traces directory " + traces.string());
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(traces)) {
        if (entry.is_directory())
            dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());

    std::vector<ConditionScores> scores;
    std::size_t count = 0;
    for (const auto& dir : dirs) {
        std::map<std::size_t, fs::path> files; // learner index -> file
        for (const auto& entry : fs::directory_iterator(dir)) {
            const auto stem = entry.path().stem().string();
            if (entry.path().extension() == ".csv" && stem.starts_with("learner_"))
                files.emplace(std::stoul(stem.substr(8)), entry.path());
        }
        if (files.empty())
            continue;
        std::vector<SessionTrace> cohort;
        std::size_t steps = 0;
        for (const auto& [k, path] : files) {
            cohort.push_back(read_trace_csv(path));
            steps = std::max(steps, cohort.back().size());
        }
        count += cohort.size();
        const auto name = dir.filename().string();
        write_chronographs(name, cohort, chronograph_times, out);

        ConditionScores cs;
        cs.condition = name;
        cs.reached.resize(static_cast<Eigen::Index>(cohort.size()), static_cast<Eigen::Index>(steps));
        cs.success.resizeLike(cs.reached);
        for (std::size_t i = 0; i < cohort.size(); ++i) {
            const auto curves = score_curves(cohort[i], steps);
            cs.reached.row(static_cast<Eigen::Index>(i)) = curves.row(0);
            cs.success.row(static_cast<Eigen::Index>(i)) = curves.row(1);
        }
        scores.push_back(std::move(cs));
    }
    if (!scores.empty())
        write_summaries(cohort_summary(scores), out);
    return count;
}

} // namespace zpdes
