// ovmm: run seeded suites, replay traces, compare reports.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "ovmm/config.hpp"
#include "ovmm/eval.hpp"
#include "ovmm/render.hpp"

namespace fs = std::filesystem;
using namespace ovmm;

namespace {

constexpr int kExitConfig = 2;

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << bytes;
}

struct RunArgs {
    std::string seeds = "0..199";
    std::string scene_config;
    std::vector<std::string> agents = {"uniteam"};
    std::vector<std::string> ablations;
    int budget = -1;
    std::string out;
    bool dump_maps = false;
    bool trace = false;
};

std::string variant_name(const std::string& agent, const std::vector<std::string>& ablations) {
    std::string name = agent;
    for (const auto& a : ablations) name += "+" + a;
    return name;
}

std::string episodes_csv(const std::vector<std::string>& names, const std::vector<std::vector<EpisodeResult>>& all) {
    std::ostringstream out;
    out << "variant,seed,overall_success,found_object,picked,found_end_receptacle,placed_correctly,partial_success,"
           "steps,termination,final_phase\n";
    for (std::size_t v = 0; v < names.size(); ++v)
        for (const auto& r : all[v])
            out << names[v] << ',' << r.seed << ',' << r.overall_success << ',' << r.stages.found_object << ','
                << r.stages.picked << ',' << r.stages.found_end_receptacle << ',' << r.stages.placed_correctly << ','
                << r.partial_success << ',' << r.steps << ',' << to_string(r.termination) << ','
                << to_string(r.final_phase) << '\n';
    return out.str();
}

int cmd_run(const RunArgs& args) {
    RunConfig base;
    if (!args.scene_config.empty()) base = load_config(args.scene_config);
    if (args.budget >= 0) base.budget = args.budget;
    if (base.budget < 1) throw ConfigError("budget must be at least 1");
    const SeedRange seeds = parse_seed_range(args.seeds);

    std::vector<std::string> names;
    std::vector<RunConfig> configs;
    std::string fingerprint_text;
    for (const auto& agent : args.agents) {
        RunConfig cfg = base;
        cfg.agent.flags = preset_flags(agent, base.agent.flags);
        for (const auto& a : args.ablations) apply_ablation(cfg.agent.flags, a);
        cfg.agent.validate();
        names.push_back(variant_name(agent, args.ablations));
        configs.push_back(cfg);
        fingerprint_text += "[" + names.back() + "]\n" + canonical_text(cfg);
    }
    for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (names[i] == names[j]) throw ConfigError("agent '" + names[i] + "' given twice");
    const std::string fp = fnv1a_hex(fingerprint_text);

    const fs::path out(args.out);
    fs::create_directories(out);
    if (args.trace) fs::create_directories(out / "traces");
    if (args.dump_maps) fs::create_directories(out / "maps");
    write_file(out / "config.txt", fingerprint_text);

    SuiteReport report;
    report.fingerprint = fp;
    for (std::size_t v = 0; v < names.size(); ++v) {
        std::vector<EpisodeResult> results;
        for (std::uint64_t s = seeds.first; s <= seeds.last; ++s) {
            SemanticMap map;
            EpisodeResult r = run_episode(s, configs[v].scene, configs[v].agent, configs[v].budget, args.trace,
                                          args.dump_maps ? &map : nullptr);
            const std::string stem = names[v] + "_seed" + std::to_string(s);
            if (args.trace)
                write_file(out / "traces" / (stem + ".jsonl"),
                           trace_jsonl(generate_scene(s, configs[v].scene), r, names[v], fp));
            if (args.dump_maps) {
                write_file(out / "maps" / (stem + ".txt"), render_map(map, {}, RenderFormat::Ascii));
                for (const auto& ch : channel_names(map))
                    write_file(out / "maps" / (stem + "." + ch + ".pgm"), render_channel_pgm(map, ch));
            }
            r.trace.clear();
            r.trace.shrink_to_fit();
            results.push_back(std::move(r));
        }
        report.rows.push_back(aggregate(names[v], results));
        report.results.push_back(std::move(results));
    }
    write_file(out / "report.csv", report_csv(report));
    write_file(out / "report.txt", report_text(report));
    write_file(out / "episodes.csv", episodes_csv(names, report.results));
    std::cout << report_text(report);
    return 0;
}

int cmd_replay(const std::string& trace_path, const std::string& format_name) {
    const RenderFormat format = parse_render_format(format_name);
    const ParsedTrace t = parse_trace(read_file(trace_path));
    std::cout << render_replay(t.scene, t.poses, format);
    if (format == RenderFormat::Ascii) {
        std::cout << "variant " << t.variant << " seed " << t.result.seed << " steps " << t.result.steps
                  << " overall " << (t.result.overall_success ? "yes" : "no") << " partial " << t.result.partial_success
                  << " termination " << to_string(t.result.termination) << '\n';
    }
    return 0;
}

struct CsvReport {
    std::string fingerprint;
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::string>> rows;
};

CsvReport read_report(const std::string& path) {
    CsvReport rep;
    std::istringstream in(read_file(path));
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.rfind("# fingerprint ", 0) == 0) rep.fingerprint = line.substr(14);
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (fields.size() != 5) throw std::runtime_error("malformed report row in '" + path + "': " + line);
        rep.order.push_back(fields[0]);
        rep.rows[fields[0]] = fields;
    }
    if (!header_seen) throw std::runtime_error("'" + path + "' is not a report");
    return rep;
}

int cmd_compare(const std::vector<std::string>& paths) {
    const CsvReport a = read_report(paths.at(0));
    const CsvReport b = read_report(paths.at(1));
    std::cout << "A " << paths[0] << " fingerprint " << a.fingerprint << '\n';
    std::cout << "B " << paths[1] << " fingerprint " << b.fingerprint << '\n';
    std::cout << (a.fingerprint == b.fingerprint ? "same configuration\n" : "different configuration\n");
    char line[256];
    std::snprintf(line, sizeof line, "%-24s %10s %10s %10s %10s %10s %10s\n", "variant", "overall A", "overall B",
                  "partial A", "partial B", "steps A", "steps B");
    std::cout << line;
    std::vector<std::string> names = a.order;
    for (const auto& n : b.order)
        if (!a.rows.count(n)) names.push_back(n);
    for (const auto& n : names) {
        auto field = [&](const CsvReport& r, int i) -> std::string {
            auto it = r.rows.find(n);
            return it == r.rows.end() ? "-" : it->second[static_cast<std::size_t>(i)];
        };
        std::snprintf(line, sizeof line, "%-24s %10s %10s %10s %10s %10s %10s\n", n.c_str(), field(a, 2).c_str(),
                      field(b, 2).c_str(), field(a, 3).c_str(), field(b, 3).c_str(), field(a, 4).c_str(),
                      field(b, 4).c_str());
        std::cout << line;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Open-vocabulary mobile manipulation heuristic agent: grid simulator and evaluation"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run every (seed, agent) episode and write reports");
    run_cmd->add_option("--seeds", run.seeds, "Seed range A..B")->capture_default_str();
    run_cmd->add_option("--scene-config", run.scene_config, "key = value config file");
    run_cmd->add_option("--agent", run.agents, "baseline, uniteam or custom (repeatable)")->capture_default_str();
    run_cmd->add_option("--ablate", run.ablations, "FLAG=on or FLAG=off (repeatable)");
    run_cmd->add_option("--budget", run.budget, "Step budget per episode");
    run_cmd->add_option("--out", run.out, "Output directory")->required();
    run_cmd->add_flag("--dump-maps", run.dump_maps, "Write final maps (ascii and per-channel pgm)");
    run_cmd->add_flag("--trace", run.trace, "Write one jsonl trace per episode");

    std::string trace_path;
    std::string render = "ascii";
    auto* replay_cmd = app.add_subcommand("replay", "Render a recorded episode");
    replay_cmd->add_option("--trace", trace_path, "Trace file")->required();
    replay_cmd->add_option("--render", render, "ascii or pgm")->capture_default_str();

    std::vector<std::string> reports;
    auto* compare_cmd = app.add_subcommand("compare", "Compare two report.csv files");
    compare_cmd->add_option("--reports", reports, "Two report files")->required()->expected(2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*replay_cmd) return cmd_replay(trace_path, render);
        if (*compare_cmd) return cmd_compare(reports);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const UnsupportedFormat& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
