#include "stokolmo/cli.hpp"

#include "stokolmo/classifier.hpp"
#include "stokolmo/engine.hpp"
#include "stokolmo/food_chain.hpp"
#include "stokolmo/report.hpp"
#include "stokolmo/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

namespace stokolmo {

namespace {

struct InputError : std::runtime_error {
    InputError(std::string kind, const std::string& message, nlohmann::json extra = nlohmann::json::object())
        : std::runtime_error(message), kind(std::move(kind)), extra(std::move(extra)) {}
    std::string kind;
    nlohmann::json extra;
};

struct Options {
    std::string input;
    std::string x0_text;
    double t = 0.0;
    double dt = 1e-3;
    double burn_in = -1.0;
    int paths = 200;
    std::uint64_t seed = 1;
    std::string out = "-";
    std::string format = "json";
    bool timing = false;
    int every = 0;
    bool compare = false;
};

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("file", "cannot open '" + path + "'", {{"path", path}});
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError("json", std::string("invalid JSON in '") + path + "': " + e.what(), {{"path", path}});
    }
}

std::vector<double> parse_x0(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, end - pos);
        double v = 0.0;
        const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || r.ec != std::errc{} || r.ptr != item.data() + item.size())
            throw InputError("argument", "--x0: '" + item + "' is not a number");
        out.push_back(v);
        pos = end + 1;
    }
    return out;
}

std::vector<double> initial_state(const Options& o, const nlohmann::json& doc, int n) {
    std::vector<double> x0;
    if (!o.x0_text.empty())
        x0 = parse_x0(o.x0_text);
    else if (doc.contains("x0"))
        x0 = doc.at("x0").get<std::vector<double>>();
    else
        x0.assign(n, 1.0);
    if (static_cast<int>(x0.size()) != n)
        throw InputError("argument", "--x0 needs " + std::to_string(n) + " values, got " + std::to_string(x0.size()));
    for (double v : x0)
        if (!(v > 0) || !std::isfinite(v)) throw InputError("argument", "--x0 entries must be positive");
    return x0;
}

SimConfig sim_config(const Options& o, double default_t) {
    SimConfig c;
    c.dt = o.dt;
    c.t_max = o.t > 0 ? o.t : default_t;
    c.burn_in = o.burn_in >= 0 ? o.burn_in : 0.1 * c.t_max;
    c.seed = o.seed;
    c.n_paths = o.paths;
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw InputError("argument", e.what());
    }
    return c;
}

AnalysisConfig analysis_config(const Options& o) {
    AnalysisConfig a;
    a.mc.seed = o.seed;
    return a;
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int exit_for(const Verdict& v) { return v.kind == Verdict::Kind::Inconclusive ? 1 : 0; }

void fill_classification(RunReport& r, const Classification& c) {
    r.assumptions = c.assumptions.to_json();
    if (c.boundary) {
        nlohmann::json ms = nlohmann::json::array();
        for (const auto& m : c.boundary->measures) ms.push_back(m.to_json());
        r.measures = ms;
        r.invasion_rates = c.boundary->table.to_json();
        r.faces = c.boundary->to_json()["faces"];
    }
    r.verdict = c.verdict.to_json(c.table());
}

int cmd_check(const Options& o) {
    const nlohmann::json doc = read_json_file(o.input);
    const KolmogorovModel model = parse_model(doc);
    RunReport r;
    r.command = "check";
    r.seed = o.seed;
    r.model = model.to_json();
    r.assumptions = check_assumptions(model).to_json();
    write_report(r, o.out);
    return 0;
}

int cmd_classify(const Options& o) {
    const auto t0 = Clock::now();
    const nlohmann::json doc = read_json_file(o.input);
    const KolmogorovModel model = parse_model(doc);
    const AnalysisConfig ac = analysis_config(o);
    const Classification c = classify(model, ac);
    RunReport r;
    r.command = "classify";
    r.seed = o.seed;
    r.model = model.to_json();
    r.config = {{"analysis", ac.to_json()}};
    fill_classification(r, c);
    if (o.timing) r.timing = {{"total_seconds", seconds_since(t0)}};
    write_report(r, o.out);
    return exit_for(c.verdict);
}

int cmd_simulate(const Options& o) {
    const nlohmann::json doc = read_json_file(o.input);
    const KolmogorovModel model = parse_model(doc);
    Options so = o;
    so.paths = 1;
    const SimConfig cfg = sim_config(so, 100.0);
    const std::vector<double> x0 = initial_state(o, doc, model.n());
    const int every = o.every > 0 ? o.every : static_cast<int>(std::max<std::size_t>(1, cfg.steps() / 5000));
    const Trajectory traj = simulate_path(model, x0, cfg, 0, every);
    if (o.format == "csv") {
        write_text(traj.to_csv(), o.out);
        return 0;
    }
    RunReport r;
    r.command = "simulate";
    r.seed = o.seed;
    r.model = model.to_json();
    r.config = {{"simulation", cfg.to_json()}, {"x0", x0}, {"record_every", every}};
    nlohmann::json ext = nlohmann::json::array();
    for (double t : traj.events.extinction_time) ext.push_back(t);
    r.verification = {{"times", traj.times},
                      {"log_states", traj.log_states},
                      {"blowup", traj.events.blowup},
                      {"blowup_time", traj.events.blowup_time},
                      {"extinction_time", ext}};
    write_report(r, o.out);
    return 0;
}

int cmd_verify(const Options& o) {
    const auto t0 = Clock::now();
    const nlohmann::json doc = read_json_file(o.input);
    const KolmogorovModel model = parse_model(doc);
    const AnalysisConfig ac = analysis_config(o);
    VerifyConfig vc;
    vc.sim = sim_config(o, 500.0);
    vc.x0 = initial_state(o, doc, model.n());
    const Classification c = classify(model, ac);
    const double t_classify = seconds_since(t0);
    RunReport r;
    r.command = "verify";
    r.seed = o.seed;
    r.model = model.to_json();
    r.config = {{"analysis", ac.to_json()}, {"verify", vc.to_json()}};
    fill_classification(r, c);
    int code = exit_for(c.verdict);
    if (c.verdict.kind != Verdict::Kind::Inconclusive) {
        const EnsembleReport e = verify_verdict(model, c, vc);
        r.verification = e.to_json();
        if (!e.passed) code = 1;
    }
    if (o.timing) r.timing = {{"classify_seconds", t_classify}, {"total_seconds", seconds_since(t0)}};
    write_report(r, o.out);
    return code;
}

int cmd_foodchain(const Options& o) {
    const nlohmann::json doc = read_json_file(o.input);
    const FoodChainParams p = parse_food_chain(doc);
    const FoodChainVerdict v = classify_food_chain(p);
    RunReport r;
    r.command = "foodchain";
    r.seed = o.seed;
    r.model = p.to_json();
    r.verdict = v.to_json();
    if (o.compare) {
        const KolmogorovModel model = food_chain_model(p);
        const Classification c = classify(model, analysis_config(o));
        std::vector<int> general;
        if (c.verdict.kind == Verdict::Kind::Persistent) {
            for (int i = 0; i < p.n(); ++i) general.push_back(i + 1);
        } else if (c.verdict.kind == Verdict::Kind::Extinction && c.verdict.predictions.size() == 1) {
            for (int i : c.table()->measures[c.verdict.predictions[0].measure].support.species()) general.push_back(i + 1);
        }
        std::vector<int> fast;
        for (int s : v.survivors()) fast.push_back(s + 1);
        r.verification = {{"general_verdict", c.verdict.to_json(c.table())},
                          {"general_survivors", general},
                          {"agree", general == fast}};
        if (general != fast) {
            write_report(r, o.out);
            return 1;
        }
    }
    write_report(r, o.out);
    return v.kind == Verdict::Kind::Inconclusive ? 1 : 0;
}

void diagnostic(std::ostream& err, const std::string& kind, const std::string& message, nlohmann::json extra = {}) {
    nlohmann::json j = extra.is_object() ? extra : nlohmann::json::object();
    j["error"] = kind;
    j["message"] = message;
    err << j.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& err) {
    CLI::App app{"Persistence and extinction classifier for stochastic Kolmogorov systems", "stokolmo"};
    app.require_subcommand(1);
    app.set_version_flag("--version", STOKOLMO_VERSION);
    Options o;

    auto add_common = [&](CLI::App* sub, bool simulation) {
        sub->add_option("input", o.input, "model JSON file")->required();
        sub->add_option("--out", o.out, "output path, - for stdout");
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_flag("--timing", o.timing, "include wall-clock timing in the report");
        if (simulation) {
            sub->add_option("--x0", o.x0_text, "initial state, comma separated");
            sub->add_option("--t", o.t, "time horizon")->check(CLI::PositiveNumber);
            sub->add_option("--dt", o.dt, "step size")->check(CLI::PositiveNumber);
            sub->add_option("--burn-in", o.burn_in, "burn-in time (default: t/10)");
            sub->add_option("--paths", o.paths, "number of paths")->check(CLI::PositiveNumber);
        }
    };
    auto* check = app.add_subcommand("check", "assumption report");
    add_common(check, false);
    auto* cls = app.add_subcommand("classify", "boundary measures, invasion rates and verdict");
    add_common(cls, false);
    auto* sim = app.add_subcommand("simulate", "single trajectory");
    add_common(sim, true);
    sim->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sim->add_option("--every", o.every, "record every k-th step (default: at most ~5000 rows)");
    auto* ver = app.add_subcommand("verify", "classify, then check the verdict against simulation");
    add_common(ver, true);
    auto* fc = app.add_subcommand("foodchain", "food chain classification by invasion depth");
    add_common(fc, false);
    fc->add_flag("--compare", o.compare, "also run the general classifier and compare survivors");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        std::cout << STOKOLMO_VERSION << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        diagnostic(err, "usage", e.what());
        return 2;
    }

    try {
        if (check->parsed()) return cmd_check(o);
        if (cls->parsed()) return cmd_classify(o);
        if (sim->parsed()) return cmd_simulate(o);
        if (ver->parsed()) return cmd_verify(o);
        if (fc->parsed()) return cmd_foodchain(o);
    } catch (const InputError& e) {
        diagnostic(err, e.kind, e.what(), e.extra);
    } catch (const ExpressionSyntaxError& e) {
        diagnostic(err, "expression", e.what(), {{"offset", e.offset()}});
    } catch (const DomainError& e) {
        diagnostic(err, "domain", e.what(), {{"subexpression", e.subexpression()}});
    } catch (const FactorizationError& e) {
        diagnostic(err, "sigma", e.what(), {{"minor", e.minor()}});
    } catch (const ModelError& e) {
        diagnostic(err, "model", e.what(), {{"path", e.path()}});
    } catch (const SimulationError& e) {
        diagnostic(err, "simulation", e.what(), {{"path_id", e.path_id()}, {"time", e.time()}, {"state", e.state()}});
    } catch (const std::exception& e) {
        diagnostic(err, "error", e.what());
    }
    return 2;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cerr);
}

}  // namespace stokolmo
