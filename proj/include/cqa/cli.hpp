#pragma once

// Command implementations behind the `cqa` executable. Each command reads
// its input files, writes text or json-lines to `out`, writes diagnostics to
// `err` and returns the process exit code:
//   0  yes / non-empty answer / consistent
//   1  no / empty answer / inconsistent
//   2  error

#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cqa/answer.hpp"
#include "cqa/denial.hpp"
#include "cqa/error.hpp"
#include "cqa/gadgets.hpp"
#include "cqa/hypergraph.hpp"
#include "cqa/incremental.hpp"
#include "cqa/model.hpp"
#include "cqa/repairs.hpp"
#include "cqa/solve.hpp"
#include "cqa/text.hpp"

namespace cqa::cli {

enum class OutputFormat { text, json };

struct RunConfig {
    std::string instance_path;
    std::string ics_path;
    std::string query_path;
    std::string updates_path;
    std::string candidates_path;
    std::string semantics = "C";
    std::string mode = "certain";
    std::string weight_fn = "unit";
    std::vector<std::string> coefficients;  // `R.attr=value`
    bool force = false;
    OutputFormat format = OutputFormat::text;
    SolveBudget budget;
};

struct GadgetConfig {
    std::string kind;  // twin | rhombus | block | encode
    std::string graph_path;
    std::optional<VertexId> vertex;
    std::optional<std::size_t> k;
    std::string out_prefix = "encoded";
    OutputFormat format = OutputFormat::text;
};

/// An input problem, reported as `path:line:column: message`.
class InputError : public Error {
public:
    using Error::Error;
};

namespace detail {

using nlohmann::json;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot read file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(path + ": cannot write file");
    out << text;
}

template <typename F>
auto parse_file(const std::string& path, F&& parse) {
    std::string text = read_file(path);
    try {
        return parse(text);
    } catch (const SyntaxError& e) {
        throw InputError(path + ":" + e.what());
    } catch (const Error& e) {
        throw InputError(path + ": " + e.what());
    }
}

inline Instance load_instance(const std::string& path) {
    return parse_file(path, [](const std::string& t) { return parse_instance(t); });
}

inline ConstraintSet load_constraints(const std::string& path, const Schema& schema) {
    auto ics = parse_file(path, [](const std::string& t) { return parse_constraints(t); });
    try {
        ics.check_against(schema);
    } catch (const SchemaError& e) {
        throw InputError(path + ": " + e.what());
    }
    return ics;
}

inline BoundedA load_bounded_a(const RunConfig& cfg) {
    if (cfg.candidates_path.empty()) throw InputError("semantics A needs --candidates");
    BoundedA a;
    a.candidates = parse_file(cfg.candidates_path, [](const std::string& t) { return parse_candidates(t); });
    if (cfg.weight_fn == "unit") {
        a.weight = ChangeWeight::unit;
    } else if (cfg.weight_fn == "quadratic") {
        a.weight = ChangeWeight::quadratic;
    } else {
        throw InputError("unknown weight function '" + cfg.weight_fn + "'");
    }
    for (const auto& spec : cfg.coefficients) {
        auto dot = spec.find('.');
        auto eq = spec.find('=');
        if (dot == std::string::npos || eq == std::string::npos || eq < dot)
            throw InputError("coefficient '" + spec + "' is not of the form R.attr=value");
        try {
            Lexer lex(spec.substr(eq + 1), 1);
            Weight w = parse_weight(lex);
            lex.expect_end();
            a.coefficients[{spec.substr(0, dot), std::stoul(spec.substr(dot + 1, eq - dot - 1))}] = w;
        } catch (const std::exception&) {
            throw InputError("coefficient '" + spec + "' is not of the form R.attr=value");
        }
    }
    return a;
}

inline Semantics load_semantics(const RunConfig& cfg) {
    if (cfg.semantics == "S") return SemS{};
    if (cfg.semantics == "C") return SemC{};
    if (cfg.semantics == "WC") return SemWeightedC{};
    if (cfg.semantics == "A") return load_bounded_a(cfg);
    throw InputError("unknown semantics '" + cfg.semantics + "' (expected S, C, WC or A)");
}

inline AnswerMode load_mode(const std::string& m) {
    if (m == "certain") return AnswerMode::certain;
    if (m == "possible") return AnswerMode::possible;
    throw InputError("unknown mode '" + m + "' (expected certain or possible)");
}

inline json tuple_json(const DbTuple& t) { return to_string(t); }

inline json constant_json(const Constant& c) {
    if (c.is_int()) return c.as_int();
    return c.as_symbol();
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
    } catch (const BudgetExceeded& e) {
        err << "error: budget exceeded: " << e.what() << "\n";
    } catch (const BaseInconsistent& e) {
        err << "error: " << e.what() << " (use --force to answer on the static path)\n";
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
    }
    return 2;
}

}  // namespace detail

/// Consistency verdict and all minimal violating sets.
inline int cmd_check(const std::string& instance_path, const std::string& ics_path, OutputFormat format,
                     std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        Instance d = detail::load_instance(instance_path);
        ConstraintSet ics = detail::load_constraints(ics_path, d.schema());
        auto h = build_conflict_hypergraph(d, ics);
        const bool consistent = h.edge_count() == 0;
        if (format == OutputFormat::json) {
            out << detail::json{{"consistent", consistent}, {"violating_sets", h.edge_count()}}.dump() << "\n";
            for (const auto& e : h.edges()) {
                detail::json ts = detail::json::array();
                for (auto v : e.vertices) ts.push_back(detail::tuple_json(h.label(v)));
                out << detail::json{{"constraint", e.constraint}, {"tuples", ts}}.dump() << "\n";
            }
        } else {
            out << (consistent ? "consistent" : "inconsistent") << "\n";
            out << "violating sets: " << h.edge_count() << "\n";
            for (const auto& e : h.edges()) {
                out << e.constraint << ":";
                for (auto v : e.vertices) out << " " << to_string(h.label(v));
                out << "\n";
            }
        }
        return consistent ? 0 : 1;
    });
}

/// Repairs under the configured semantics, in canonical order.
inline int cmd_repairs(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        Instance d = detail::load_instance(cfg.instance_path);
        ConstraintSet ics = detail::load_constraints(cfg.ics_path, d.schema());
        Semantics sem = detail::load_semantics(cfg);
        if (const auto* a = std::get_if<BoundedA>(&sem)) {
            std::vector<ARepair> repairs;
            try {
                repairs = a_repairs_bounded(d, ics, *a);
            } catch (const NoRepair& e) {
                if (cfg.format == OutputFormat::json) out << detail::json{{"repairs", 0}, {"no_repair", true}}.dump() << "\n";
                else out << "# no repair: " << e.what() << "\n";
                return 1;
            }
            if (cfg.format == OutputFormat::json) {
                for (const auto& r : repairs) {
                    detail::json cs = detail::json::array();
                    for (const auto& c : r.changes)
                        cs.push_back({{"tuple", detail::tuple_json(c.tuple)},
                                      {"attr", c.attribute},
                                      {"value", detail::constant_json(c.value)}});
                    out << detail::json{{"changes", cs}, {"cost", to_string(r.cost)}}.dump() << "\n";
                }
            } else {
                out << format_a_repairs(repairs);
            }
            return 0;
        }
        auto repairs = tuple_repairs(d, ics, sem, cfg.budget);
        if (cfg.format == OutputFormat::json) {
            for (const auto& r : repairs) {
                detail::json kept = detail::json::array(), gone = detail::json::array();
                for (const auto& t : r.retained) kept.push_back(detail::tuple_json(t));
                for (const auto& t : r.deleted) gone.push_back(detail::tuple_json(t));
                out << detail::json{{"retained", kept}, {"deleted", gone}, {"distance", to_string(r.distance)}}.dump()
                    << "\n";
            }
        } else {
            out << format_tuple_repairs(repairs);
        }
        return 0;
    });
}

namespace detail {

inline void print_answers(const AnswerSet& a, AnswerMode mode, const std::string& semantics, OutputFormat format,
                          const std::string& note, std::ostream& out) {
    if (format == OutputFormat::json) {
        json header{{"mode", to_string(mode)}, {"semantics", semantics}, {"head", a.head}, {"vacuous", a.vacuous}};
        if (!note.empty()) header["note"] = note;
        out << header.dump() << "\n";
        if (a.is_boolean()) {
            out << json{{"answer", a.yes ? "yes" : "no"}}.dump() << "\n";
        } else {
            for (const auto& row : a.tuples) {
                json r = json::array();
                for (const auto& c : row) r.push_back(constant_json(c));
                out << json{{"tuple", r}}.dump() << "\n";
            }
        }
        return;
    }
    if (!note.empty()) out << "# " << note << "\n";
    out << format_answers(a, mode, semantics);
}

}  // namespace detail

/// Consistent answers; with an update script, the incremental path over
/// U(D) is used, which requires a consistent base unless --force is given.
inline int cmd_answer(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        Instance d = detail::load_instance(cfg.instance_path);
        ConstraintSet ics = detail::load_constraints(cfg.ics_path, d.schema());
        Semantics sem = detail::load_semantics(cfg);
        AnswerMode mode = detail::load_mode(cfg.mode);
        std::optional<UpdateSequence> seq;
        if (!cfg.updates_path.empty())
            seq = detail::parse_file(cfg.updates_path, [](const std::string& t) { return parse_updates(t); });
        std::set<Constant> adom = d.active_domain();
        if (seq) {
            for (const auto& op : *seq) {
                std::visit([&](const auto& o) { adom.insert(o.tuple.args.begin(), o.tuple.args.end()); }, op);
                if (const auto* ch = std::get_if<ChangeOp>(&op)) adom.insert(ch->value);
            }
        }
        Query q = detail::parse_file(cfg.query_path, [&](const std::string& t) { return parse_query(t, adom); });

        AnswerSet answers;
        std::string note;
        if (seq) {
            IncrementalProblem p{d, *seq, ics, q, sem};
            if (cfg.force && !is_consistent(d, ics)) {
                Instance u = apply_update(d, *seq);
                answers = answer_query(u, ics, q, sem, mode, cfg.budget);
                note = "static path: base instance is inconsistent";
            } else {
                auto r = incremental_answer(p, mode, cfg.budget);
                answers = std::move(r.answers);
                if (r.fell_back) note = "static path: " + r.note;
            }
        } else {
            answers = answer_query(d, ics, q, sem, mode, cfg.budget);
        }
        detail::print_answers(answers, mode, semantics_name(sem), cfg.format, note, out);
        return answers.empty() ? 1 : 0;
    });
}

/// Graph gadgets. twin, rhombus and block print a graph; encode writes
/// `<prefix>.db` and `<prefix>.ics`.
inline int cmd_gadget(const GadgetConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        SimpleGraph g = detail::parse_file(cfg.graph_path, [](const std::string& t) { return parse_graph(t); });
        auto need_vertex = [&] {
            if (!cfg.vertex) throw InputError("gadget " + cfg.kind + " needs --v");
            if (*cfg.vertex >= g.vertex_count()) throw InputError("vertex " + std::to_string(*cfg.vertex) + " not in graph");
            return *cfg.vertex;
        };
        if (cfg.kind == "twin") {
            out << format_graph(twin_extension(g, need_vertex()));
        } else if (cfg.kind == "rhombus") {
            out << format_graph(rhombus_extension(g, need_vertex()));
        } else if (cfg.kind == "block") {
            if (!cfg.k || *cfg.k < 1) throw InputError("gadget block needs --k >= 1");
            Block bl = block(g, *cfg.k);
            out << format_graph(bl.graph, {{"t", bl.t}, {"b", bl.b}});
        } else if (cfg.kind == "encode") {
            auto db = graph_to_database(g);
            detail::write_file(cfg.out_prefix + ".db", format_instance(db.instance));
            detail::write_file(cfg.out_prefix + ".ics", format_constraints(db.constraints));
            if (cfg.format == OutputFormat::json)
                out << detail::json{{"instance", cfg.out_prefix + ".db"}, {"constraints", cfg.out_prefix + ".ics"},
                                    {"tuples", db.instance.size()}}
                           .dump()
                    << "\n";
            else
                out << "wrote " << cfg.out_prefix << ".db (" << db.instance.size() << " tuples) and " << cfg.out_prefix
                    << ".ics\n";
        } else {
            throw InputError("unknown gadget '" + cfg.kind + "' (expected twin, rhombus, block or encode)");
        }
        return 0;
    });
}

}  // namespace cqa::cli
