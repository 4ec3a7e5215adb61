#include "quopt/analysis.hpp"
#include "quopt/checkpoint.hpp"
#include "quopt/config.hpp"
#include "quopt/partition.hpp"
#include "quopt/qasm.hpp"
#include "quopt/rulegen.hpp"
#include "quopt/search.hpp"
#include "quopt/unitary.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>

using namespace quopt;
using json = nlohmann::json;

namespace {

int g_log_level = 1; // 0 quiet, 1 info, 2 debug

void log_line(int level, const std::string& msg) {
    if (level > g_log_level)
        return;
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%H:%M:%S", std::localtime(&t));
    std::cerr << "[" << buf << "] " << msg << "\n";
}

const GateSet& gate_set_by_flag(const std::string& name) {
    const GateSet* gs = GateSet::by_name(name);
    if (!gs)
        throw std::runtime_error("unknown gate set '" + name + "' (expected nam or ibm)");
    return *gs;
}

std::vector<double> parse_angle_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos)
            comma = text.size();
        const std::string tok = text.substr(pos, comma - pos);
        if (!tok.empty())
            out.push_back(parse_param_expression(tok));
        pos = comma + 1;
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << text;
}

json verify_report_json(const VerifyReport& rep) {
    json failures = json::array();
    for (const auto& f : rep.failures)
        failures.push_back({{"rule", f.index}, {"residual", f.residual}});
    return {{"rules", rep.rules}, {"verified", rep.verified}, {"failures", failures}};
}

struct CommonOpts {
    std::string profile = "desk";
    std::string config_path;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
};

Profile make_profile(const CommonOpts& c, TrainPhase phase) {
    Profile p = profile_by_name(c.profile, phase);
    if (!c.config_path.empty())
        apply_config_file(c.config_path, p);
    p.train.workers = c.workers > 0 ? c.workers : 1;
    return p;
}

json optimize_report_json(const OptimizeReport& rep) {
    json improvements = json::array();
    for (const auto& [t, cost] : rep.improvements)
        improvements.push_back({{"wall_time", t}, {"cost", cost}});
    return {{"input_cost", rep.input_cost},
            {"output_cost", rep.output_cost},
            {"steps", rep.steps},
            {"improvements", improvements},
            {"verified", rep.verified}};
}

struct OptimizeInvocation {
    Circuit circuit;
    OptimizeReport report;
};

OptimizeInvocation run_optimize(const Circuit& input, const RuleSet& rules,
                                AgentParams& params, Profile& prof, std::uint64_t seed,
                                std::size_t partition_limit) {
    if (partition_limit > 0 && input.gate_count() > partition_limit) {
        log_line(1, "partitioning into fragments of at most " +
                        std::to_string(partition_limit) + " gates");
        auto frags = partition(input, partition_limit);
        OptimizeInvocation total;
        total.report.input_cost = cost_int(input, prof.train.metric);
        std::vector<PartitionFragment> optimized;
        for (std::size_t i = 0; i < frags.size(); ++i) {
            AgentParams local = params;
            OptimizeResult r =
                optimize(frags[i].fragment, local, rules, prof.train, prof.search,
                         seed + 101 * i);
            total.report.steps += r.report.steps;
            optimized.push_back({std::move(r.circuit), frags[i].wire_to_qubit});
        }
        total.circuit = stitch(optimized, input.num_qubits());
        total.report.output_cost = cost_int(total.circuit, prof.train.metric);
        if (input.num_qubits() <= 8 && !equivalent_up_to_phase(input, total.circuit))
            throw std::runtime_error("stitched result failed the equivalence re-check");
        total.report.verified = input.num_qubits() <= 8;
        return total;
    }
    OptimizeResult r = optimize(input, params, rules, prof.train, prof.search, seed);
    return {std::move(r.circuit), std::move(r.report)};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quopt: learned rewriting for quantum circuits"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    CommonOpts common;
    app.add_option("--seed", common.seed, "global random seed");
    app.add_option("--profile", common.profile, "hyperparameter profile: paper or desk");
    app.add_option("--config", common.config_path, "key = value overrides file");
    app.add_option("--workers", common.workers, "parallel rollout actors");
    app.add_option("--log-level", g_log_level, "0 quiet, 1 info, 2 debug");

    // --- stats ---------------------------------------------------------
    auto* stats = app.add_subcommand("stats", "print circuit metrics");
    std::string stats_file, stats_gateset = "nam", stats_errors;
    stats->add_option("file", stats_file)->required();
    stats->add_option("--gateset", stats_gateset);
    stats->add_option("--errors", stats_errors, "error-model file enabling fidelity");

    // --- gen-rules -----------------------------------------------------
    auto* gen = app.add_subcommand("gen-rules", "generate and verify a rule set");
    std::string gen_gateset = "nam", gen_out = "rules.out", gen_angles, gen_types;
    std::uint32_t gen_qubits = 2;
    std::size_t gen_gates = 3, gen_budget = 2'000'000;
    gen->add_option("--gateset", gen_gateset);
    gen->add_option("--qubits", gen_qubits);
    gen->add_option("--gates", gen_gates);
    gen->add_option("--angles", gen_angles, "comma-separated concrete rz angles");
    gen->add_option("--types", gen_types, "restrict to these gate names (comma-separated)");
    gen->add_option("--budget", gen_budget, "enumeration cap");
    gen->add_option("-o,--output", gen_out)->required();

    // --- verify-rules ----------------------------------------------------
    auto* verify = app.add_subcommand("verify-rules", "re-verify a rule file");
    std::string verify_file;
    verify->add_option("file", verify_file)->required();

    // --- optimize --------------------------------------------------------
    auto* opt = app.add_subcommand("optimize", "optimize a circuit");
    std::string opt_in, opt_out, opt_rules, opt_metric = "total", opt_ckpt, opt_save_ckpt,
                opt_report;
    double opt_budget = 0.0, opt_alpha = -1.0;
    std::size_t opt_partition = 0;
    opt->add_option("input", opt_in)->required();
    opt->add_option("-o,--output", opt_out);
    opt->add_option("--rules", opt_rules)->required();
    opt->add_option("--metric", opt_metric);
    opt->add_option("--budget", opt_budget, "wall-clock cap in seconds (0 = quota only)");
    opt->add_option("--alpha", opt_alpha, "cost-bound stop factor");
    opt->add_option("--partition", opt_partition, "fragment size limit (0 = off)");
    opt->add_option("--checkpoint", opt_ckpt, "pretrained checkpoint to start from");
    opt->add_option("--save-checkpoint", opt_save_ckpt);
    opt->add_option("--report", opt_report, "write the JSON run report here");

    // --- pretrain --------------------------------------------------------
    auto* pre = app.add_subcommand("pretrain", "pre-train on a circuit group");
    std::vector<std::string> pre_circuits;
    std::string pre_rules, pre_out, pre_log, pre_metric = "total";
    std::size_t pre_iterations = 10;
    pre->add_option("--circuits", pre_circuits, "qasm files forming the groups")->required();
    pre->add_option("--rules", pre_rules)->required();
    pre->add_option("--iterations", pre_iterations);
    pre->add_option("--metric", pre_metric);
    pre->add_option("-o,--output", pre_out, "checkpoint path")->required();
    pre->add_option("--log", pre_log, "JSON-lines training log");

    // --- analyze-space ----------------------------------------------------
    auto* ana = app.add_subcommand("analyze-space", "landscape radius study");
    std::string ana_in, ana_rules, ana_csv, ana_json;
    int ana_reach = 2, ana_radius = 6;
    std::size_t ana_samples = 200, ana_nodes = 2'000'000;
    ana->add_option("input", ana_in)->required();
    ana->add_option("--rules", ana_rules)->required();
    ana->add_option("--reach-depth", ana_reach);
    ana->add_option("--samples", ana_samples);
    ana->add_option("--max-radius", ana_radius);
    ana->add_option("--node-budget", ana_nodes);
    ana->add_option("-o,--csv", ana_csv);
    ana->add_option("--json", ana_json);

    // --- ablate-cost-increase ----------------------------------------------
    auto* abl = app.add_subcommand("ablate-cost-increase",
                                   "compare monotone and cost-increasing search");
    std::string abl_in, abl_rules, abl_csv;
    std::size_t abl_steps = 200;
    double abl_alpha = 1.2;
    abl->add_option("input", abl_in)->required();
    abl->add_option("--rules", abl_rules)->required();
    abl->add_option("--steps", abl_steps);
    abl->add_option("--alpha", abl_alpha);
    abl->add_option("-o,--csv", abl_csv);

    // --- bench ------------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "batch-optimize a manifest of circuits");
    std::string bench_manifest, bench_csv, bench_json, bench_errors;
    bench->add_option("manifest", bench_manifest)->required();
    bench->add_option("-o,--csv", bench_csv);
    bench->add_option("--json", bench_json);
    bench->add_option("--errors", bench_errors, "error model for the fidelity columns");

    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (*stats) {
            const GateSet& gs = gate_set_by_flag(stats_gateset);
            Circuit c = load_qasm(stats_file, gs);
            std::cout << "gates " << total_gate_count(c) << "\n";
            std::cout << "cnot " << cnot_count(c) << "\n";
            std::cout << "depth " << depth(c) << "\n";
            std::cout << "qubits " << c.num_qubits() << "\n";
            if (!stats_errors.empty()) {
                const ErrorModel em = ErrorModel::load(stats_errors);
                std::cout << "fidelity " << fidelity(c, em) << "\n";
            }
            return 0;
        }

        if (*gen) {
            RulegenOptions o;
            o.angles = parse_angle_list(gen_angles);
            o.budget = gen_budget;
            if (!gen_types.empty()) {
                std::size_t pos = 0;
                while (pos < gen_types.size()) {
                    std::size_t comma = gen_types.find(',', pos);
                    if (comma == std::string::npos)
                        comma = gen_types.size();
                    o.allowed.push_back(gen_types.substr(pos, comma - pos));
                    pos = comma + 1;
                }
            }
            RulegenReport rep;
            log_line(1, "enumerating circuits up to " + std::to_string(gen_qubits) +
                            " qubits, " + std::to_string(gen_gates) + " gates");
            RuleSet rs = generate_ruleset(gate_set_by_flag(gen_gateset), gen_qubits, gen_gates,
                                          o, &rep);
            save_ruleset(rs, gen_out);
            json j = {{"rules", rep.emitted},
                      {"verified", rep.verified},
                      {"failures", json::array()},
                      {"classes", rep.classes},
                      {"candidates", rep.candidates},
                      {"digest", rs.digest()}};
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (*verify) {
            RuleSet rs = load_ruleset(verify_file, /*trust=*/true);
            const VerifyReport rep = verify_ruleset(rs);
            std::cout << verify_report_json(rep).dump(2) << "\n";
            return rep.ok() ? 0 : 1;
        }

        if (*opt) {
            Profile prof = make_profile(common, TrainPhase::Finetune);
            if (auto m = cost_metric_by_name(opt_metric))
                prof.train.metric = *m;
            else
                throw std::runtime_error("unknown metric '" + opt_metric + "'");
            if (opt_alpha > 0)
                prof.train.alpha = opt_alpha;
            if (opt_budget > 0)
                prof.search.wall_budget_s = opt_budget;
            if (opt_partition > 0)
                prof.search.partition_max_gates = opt_partition;

            RuleSet rules = load_ruleset(opt_rules, /*trust=*/true);
            Circuit input = load_qasm(opt_in, *rules.gate_set);
            AgentParams params =
                opt_ckpt.empty()
                    ? AgentParams::init(*rules.gate_set, rules.size(), prof.agent, common.seed)
                    : load_checkpoint(opt_ckpt);
            if (params.num_actions != rules.size())
                throw std::runtime_error("checkpoint action count does not match the rule set");

            const std::size_t limit =
                opt_partition > 0 ? opt_partition : prof.search.partition_max_gates;
            OptimizeInvocation res = run_optimize(input, rules, params, prof, common.seed,
                                                  input.gate_count() > limit ? limit : 0);

            log_line(1, "cost " + std::to_string(res.report.input_cost) + " -> " +
                            std::to_string(res.report.output_cost));
            if (!opt_out.empty())
                save_qasm(res.circuit, opt_out);
            if (!opt_save_ckpt.empty())
                save_checkpoint(params, opt_save_ckpt);
            const json rep = optimize_report_json(res.report);
            if (!opt_report.empty())
                write_text(opt_report, rep.dump(2) + "\n");
            else
                std::cout << rep.dump(2) << "\n";
            return 0;
        }

        if (*pre) {
            Profile prof = make_profile(common, TrainPhase::Pretrain);
            if (auto m = cost_metric_by_name(pre_metric))
                prof.train.metric = *m;
            RuleSet rules = load_ruleset(pre_rules, /*trust=*/true);
            std::vector<Circuit> groups;
            for (const std::string& path : pre_circuits)
                groups.push_back(load_qasm(path, *rules.gate_set));

            AgentParams params =
                AgentParams::init(*rules.gate_set, rules.size(), prof.agent, common.seed);
            Trainer trainer(std::move(groups), rules, params, prof.train, common.seed);

            std::ofstream log_file;
            if (!pre_log.empty()) {
                log_file.open(pre_log, std::ios::binary);
                if (!log_file)
                    throw std::runtime_error("cannot write log: " + pre_log);
            }
            for (std::size_t i = 0; i < pre_iterations; ++i) {
                IterationReport rep = trainer.iterate();
                json line = {{"iteration", rep.iteration},
                             {"best_cost", rep.best_cost},
                             {"mean_return", rep.mean_return},
                             {"losses",
                              {{"surrogate", rep.update.surrogate},
                               {"value", rep.update.value_loss},
                               {"entropy", rep.update.entropy},
                               {"total", rep.update.total_loss}}},
                             {"buffer_size", rep.buffer_size}};
                if (log_file)
                    log_file << line.dump() << "\n";
                log_line(1, "iteration " + std::to_string(rep.iteration) + " best " +
                                std::to_string(rep.best_cost) + " return " +
                                std::to_string(rep.mean_return));
            }
            save_checkpoint(params, pre_out);
            return 0;
        }

        if (*ana) {
            RuleSet rules = load_ruleset(ana_rules, /*trust=*/true);
            Circuit input = load_qasm(ana_in, *rules.gate_set);
            LandscapeResult res = landscape_study(input, rules, ana_reach, ana_samples,
                                                  ana_radius, common.seed,
                                                  CostMetric::Total, ana_nodes);
            std::string csv = "radius,cdf\n";
            for (const auto& [r, f] : res.cdf)
                csv += std::to_string(r) + "," + std::to_string(f) + "\n";
            json j = {{"sampled", res.sampled}, {"radii", res.radii}, {"cdf", json::array()}};
            for (const auto& [r, f] : res.cdf)
                j["cdf"].push_back({{"radius", r}, {"fraction", f}});
            if (!ana_csv.empty())
                write_text(ana_csv, csv);
            else
                std::cout << csv;
            if (!ana_json.empty())
                write_text(ana_json, j.dump(2) + "\n");
            return 0;
        }

        if (*abl) {
            RuleSet rules = load_ruleset(abl_rules, /*trust=*/true);
            Circuit input = load_qasm(abl_in, *rules.gate_set);
            AblationResult res =
                cost_increase_ablation(input, rules, abl_steps, common.seed, abl_alpha);
            std::string csv = "mode,step,best\n";
            for (const auto& [s, b] : res.monotone.best_by_step)
                csv += "monotone," + std::to_string(s) + "," + std::to_string(b) + "\n";
            for (const auto& [s, b] : res.permissive.best_by_step)
                csv += "permissive," + std::to_string(s) + "," + std::to_string(b) + "\n";
            if (!abl_csv.empty())
                write_text(abl_csv, csv);
            else
                std::cout << csv;
            log_line(1, "monotone best " + std::to_string(res.monotone.final_best) +
                            ", permissive best " + std::to_string(res.permissive.final_best));
            return 0;
        }

        if (*bench) {
            std::ifstream in(bench_manifest);
            if (!in)
                throw std::runtime_error("cannot open manifest: " + bench_manifest);
            Profile prof = make_profile(common, TrainPhase::Finetune);
            std::string rules_path;
            std::vector<std::string> paths;
            std::string line;
            int lineno = 0;
            while (std::getline(in, line)) {
                ++lineno;
                if (auto hash = line.find('#'); hash != std::string::npos)
                    line.erase(hash);
                std::istringstream ls(line);
                std::string first;
                if (!(ls >> first))
                    continue;
                if (first == "circuit") {
                    std::string p;
                    if (!(ls >> p))
                        throw std::runtime_error("manifest line " + std::to_string(lineno) +
                                                 ": missing path");
                    paths.push_back(p);
                } else if (first == "rules") {
                    std::string eq;
                    ls >> eq >> rules_path;
                } else {
                    std::string eq, value;
                    if (!(ls >> eq) || eq != "=" || !(ls >> value))
                        throw std::runtime_error("manifest line " + std::to_string(lineno) +
                                                 ": expected 'key = value' or 'circuit PATH'");
                    apply_config_kv(first, value, prof);
                }
            }
            if (rules_path.empty() || paths.empty())
                throw std::runtime_error("manifest needs a rules line and circuit lines");

            RuleSet rules = load_ruleset(rules_path, /*trust=*/true);
            std::optional<ErrorModel> em;
            if (!bench_errors.empty())
                em = ErrorModel::load(bench_errors);

            std::string csv = "circuit,in_total,out_total,in_cnot,out_cnot,in_depth,out_depth";
            if (em)
                csv += ",in_fidelity,out_fidelity";
            csv += ",reduction\n";
            json rows = json::array();
            std::vector<std::pair<double, double>> in_out;
            for (const std::string& path : paths) {
                Circuit input = load_qasm(path, *rules.gate_set);
                AgentParams params = AgentParams::init(*rules.gate_set, rules.size(),
                                                       prof.agent, common.seed);
                Profile run_prof = prof;
                OptimizeInvocation res =
                    run_optimize(input, rules, params, run_prof, common.seed, 0);
                const Circuit& out = res.circuit;
                const double in_c = cost(input, prof.train.metric,
                                         em ? &*em : nullptr);
                const double out_c = cost(out, prof.train.metric, em ? &*em : nullptr);
                in_out.emplace_back(in_c, out_c);
                const double red = 1.0 - out_c / in_c;
                csv += path + "," + std::to_string(total_gate_count(input)) + "," +
                       std::to_string(total_gate_count(out)) + "," +
                       std::to_string(cnot_count(input)) + "," +
                       std::to_string(cnot_count(out)) + "," + std::to_string(depth(input)) +
                       "," + std::to_string(depth(out));
                if (em)
                    csv += "," + std::to_string(fidelity(input, *em)) + "," +
                           std::to_string(fidelity(out, *em));
                csv += "," + std::to_string(red) + "\n";
                json row = {{"circuit", path},
                            {"in_total", total_gate_count(input)},
                            {"out_total", total_gate_count(out)},
                            {"in_cnot", cnot_count(input)},
                            {"out_cnot", cnot_count(out)},
                            {"in_depth", depth(input)},
                            {"out_depth", depth(out)},
                            {"reduction", red}};
                if (em) {
                    row["in_fidelity"] = fidelity(input, *em);
                    row["out_fidelity"] = fidelity(out, *em);
                }
                rows.push_back(std::move(row));
                log_line(1, path + ": " + std::to_string(static_cast<std::int64_t>(in_c)) +
                                " -> " + std::to_string(static_cast<std::int64_t>(out_c)));
            }
            const double gm = geomean_reduction(in_out);
            csv += "geomean_reduction,,,,,,";
            if (em)
                csv += ",,";
            csv += "," + std::to_string(gm) + "\n";
            json j = {{"rows", rows}, {"geomean_reduction", gm}};
            if (!bench_csv.empty())
                write_text(bench_csv, csv);
            else
                std::cout << csv;
            if (!bench_json.empty())
                write_text(bench_json, j.dump(2) + "\n");
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
