// cqa: consistent query answering under denial constraints.
//
//   cqa check       --instance D --ics IC
//   cqa repairs     --instance D --ics IC --semantics S|C|WC|A [--candidates F]
//   cqa answer      --instance D --ics IC --query Q [--updates U] --semantics .. --mode certain|possible
//   cqa incremental --base D --ics IC --updates U --query Q ...
//   cqa gadget twin|rhombus|block|encode --graph G [--v N] [--k K] [--out PREFIX]

#include <chrono>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cqa/cli.hpp"

namespace {

void add_output_flag(CLI::App* app, cqa::cli::OutputFormat& format) {
    app->add_option("--format", format, "Output format")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, cqa::cli::OutputFormat>{{"text", cqa::cli::OutputFormat::text},
                                                          {"json", cqa::cli::OutputFormat::json}},
            CLI::ignore_case));
}

void add_semantics_flags(CLI::App* app, cqa::cli::RunConfig& cfg) {
    app->add_option("--semantics", cfg.semantics, "Repair semantics")
        ->check(CLI::IsMember({"S", "C", "WC", "A"}));
    app->add_option("--candidates", cfg.candidates_path, "Candidate values for semantics A");
    app->add_option("--weight-fn", cfg.weight_fn, "Change weight for semantics A")
        ->check(CLI::IsMember({"unit", "quadratic"}));
    app->add_option("--coef", cfg.coefficients, "Quadratic coefficient R.attr=value (repeatable)");
    app->add_option("--budget-vertices", cfg.budget.max_vertices, "Largest conflict hypergraph to solve");
    app->add_option("--kmax", cfg.budget.max_depth, "Largest hitting-set search depth");
    app->add_option_function<long>(
        "--time-limit-ms", [&cfg](long ms) { cfg.budget.time_limit = std::chrono::milliseconds(ms); },
        "Wall-clock cap per solver call");
    add_output_flag(app, cfg.format);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Consistent query answering under denial constraints"};
    app.require_subcommand(1);

    cqa::cli::RunConfig cfg;
    cqa::cli::GadgetConfig gadget;

    auto* check = app.add_subcommand("check", "Report consistency and minimal violating sets");
    check->add_option("--instance", cfg.instance_path, "Instance file")->required();
    check->add_option("--ics", cfg.ics_path, "Constraint file")->required();
    add_output_flag(check, cfg.format);

    auto* repairs = app.add_subcommand("repairs", "List repairs");
    repairs->add_option("--instance", cfg.instance_path, "Instance file")->required();
    repairs->add_option("--ics", cfg.ics_path, "Constraint file")->required();
    add_semantics_flags(repairs, cfg);

    auto* answer = app.add_subcommand("answer", "Consistent answers to a query");
    answer->add_option("--instance", cfg.instance_path, "Instance file")->required();
    answer->add_option("--ics", cfg.ics_path, "Constraint file")->required();
    answer->add_option("--query", cfg.query_path, "Query file")->required();
    answer->add_option("--updates", cfg.updates_path, "Update script applied to a consistent instance");
    answer->add_option("--mode", cfg.mode, "Answer mode")->check(CLI::IsMember({"certain", "possible"}));
    answer->add_flag("--force", cfg.force, "Answer statically when the base instance is inconsistent");
    add_semantics_flags(answer, cfg);

    auto* incremental = app.add_subcommand("incremental", "Consistent answers after an update script");
    incremental->add_option("--base", cfg.instance_path, "Consistent base instance")->required();
    incremental->add_option("--ics", cfg.ics_path, "Constraint file")->required();
    incremental->add_option("--updates", cfg.updates_path, "Update script")->required();
    incremental->add_option("--query", cfg.query_path, "Query file")->required();
    incremental->add_option("--mode", cfg.mode, "Answer mode")->check(CLI::IsMember({"certain", "possible"}));
    incremental->add_flag("--force", cfg.force, "Answer statically when the base instance is inconsistent");
    add_semantics_flags(incremental, cfg);

    auto* gad = app.add_subcommand("gadget", "Graph constructions");
    gad->add_option("kind", gadget.kind, "twin, rhombus, block or encode")
        ->required()
        ->check(CLI::IsMember({"twin", "rhombus", "block", "encode"}));
    gad->add_option("--graph", gadget.graph_path, "Graph file")->required();
    gad->add_option_function<unsigned>(
        "--v", [&gadget](unsigned v) { gadget.vertex = v; }, "Vertex for twin and rhombus");
    gad->add_option_function<std::size_t>(
        "--k", [&gadget](std::size_t k) { gadget.k = k; }, "Block size");
    gad->add_option("--out", gadget.out_prefix, "Output prefix for encode");
    add_output_flag(gad, gadget.format);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*check) return cqa::cli::cmd_check(cfg.instance_path, cfg.ics_path, cfg.format, std::cout, std::cerr);
    if (*repairs) return cqa::cli::cmd_repairs(cfg, std::cout, std::cerr);
    if (*answer || *incremental) return cqa::cli::cmd_answer(cfg, std::cout, std::cerr);
    return cqa::cli::cmd_gadget(gadget, std::cout, std::cerr);
}
