// Command-line front end.  Exit codes: 0 positive verdict, 1 negative,
// 2 unknown, 3 usage or input error.

#include "nbpa/base_io.hpp"
#include "nbpa/cc_norm.hpp"
#include "nbpa/consistency.hpp"
#include "nbpa/regularity.hpp"
#include "nbpa/search.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

using namespace nbpa;

namespace {

constexpr int kPositive = 0;
constexpr int kNegative = 1;
constexpr int kUnknown = 2;
constexpr int kInputError = 3;

struct Options {
    std::string file;
    std::string left;
    std::string right;
    std::string config;
    std::string context;
    std::string base_file;
    std::string cert_out;
    std::string strategy = "auto";
    std::string format = "text";
    std::string closure = "capped";
    unsigned jobs = 1;
    std::uint64_t max_nodes = SearchBounds{}.max_nodes;
    double time_limit = 600;
    std::size_t len_cap = 0;
    std::size_t size_cap = ClosureCaps{}.size_cap;
    std::size_t max_body = 0;
    OracleParams oracle;
};

bool json_out(const Options& o) { return o.format == "json"; }

ClosureCaps caps_of(const Options& o) {
    ClosureCaps caps;
    caps.len_cap = o.len_cap;
    caps.size_cap = o.size_cap;
    caps.mode = o.closure == "summary" ? ClosureMode::Summary : ClosureMode::Capped;
    return caps;
}

DecideParams decide_params(const Options& o) {
    DecideParams p;
    p.strategy = parse_strategy(o.strategy);
    p.bounds.max_nodes = o.max_nodes;
    p.bounds.time_limit = std::chrono::milliseconds(static_cast<std::int64_t>(o.time_limit * 1000));
    p.bounds.max_body = o.max_body;
    p.bounds.caps = caps_of(o);
    p.bounds.jobs = o.jobs;
    return p;
}

// The system every verdict is computed on: normedness is required and
// silent variables are erased.
struct Loaded {
    BpaSystem original;
    SilentElimination reduced;
};

Loaded load_normed(const std::string& file) {
    Loaded l;
    l.original = load_system(file);
    const NormednessReport r = check_normed(l.original);
    if (!r.normed) {
        std::string names;
        for (Var v : r.unnormed) {
            names += (names.empty() ? "" : ", ") + l.original.var_name(v);
        }
        throw Error("system is not normed (no terminating run from: " + names + ")");
    }
    l.reduced = eliminate_silent_variables(l.original);
    const std::size_t erased = l.original.variable_count() - l.reduced.system.variable_count();
    if (erased > 0) {
        std::cerr << "note: " << erased << " silent variable(s) erased\n";
    }
    return l;
}

Configuration config_arg(const Loaded& l, const std::string& text) {
    return l.reduced.translate(parse_configuration(l.original, text));
}

// The system a certificate speaks about, plus its base.
struct Certified {
    BpaSystem system;
    PreBase base;
};

Certified load_certificate(const Options& o) {
    const Loaded l = load_normed(o.file);
    std::ifstream in(o.base_file);
    if (!in) {
        throw Error("cannot open " + o.base_file);
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(o.base_file + ": " + e.what());
    }
    Certified c;
    if (auto names = certificate_variables(doc)) {
        c.system = restrict_to_names(l.reduced.system, *names).system;
    } else {
        c.system = l.reduced.system;
    }
    c.base = base_from_json(c.system, doc);
    return c;
}

void write_certificate(const Options& o, const nlohmann::json& doc) {
    if (o.cert_out.empty()) {
        return;
    }
    std::ofstream out(o.cert_out);
    if (!out) {
        throw Error("cannot write " + o.cert_out);
    }
    out << doc.dump(2) << "\n";
}

int cmd_validate(const Options& o) {
    const BpaSystem s = load_system(o.file);
    const NormednessReport r = check_normed(s);
    const std::vector<Var> silent = detect_silent_variables(s);
    auto names = [&](const std::vector<Var>& vs) {
        std::vector<std::string> out;
        for (Var v : vs) {
            out.push_back(s.var_name(v));
        }
        return out;
    };
    if (json_out(o)) {
        nlohmann::json doc{{"variables", s.variable_count()},
                           {"actions", s.action_count()},
                           {"rules", s.rules().size()},
                           {"normed", r.normed},
                           {"unnormed", names(r.unnormed)},
                           {"silent", names(silent)}};
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << s.variable_count() << " variables, " << s.action_count() << " actions, "
                  << s.rules().size() << " rules\n";
        if (r.normed) {
            std::cout << "normed\n";
        } else {
            std::cout << "not normed:";
            for (const auto& n : names(r.unnormed)) {
                std::cout << " " << n;
            }
            std::cout << "\n";
        }
        if (!silent.empty()) {
            std::cout << "silent:";
            for (const auto& n : names(silent)) {
                std::cout << " " << n;
            }
            std::cout << "\n";
        }
    }
    return r.normed ? kPositive : kNegative;
}

int cmd_norms(const Options& o) {
    const BpaSystem s = load_system(o.file);
    const NormTable norms = compute_norms(s);
    if (json_out(o)) {
        nlohmann::json doc = nlohmann::json::object();
        for (Var v = 0; v < s.variable_count(); ++v) {
            doc[s.var_name(v)] = norms[v];
        }
        std::cout << doc.dump(2) << "\n";
    } else {
        for (Var v = 0; v < s.variable_count(); ++v) {
            std::cout << s.var_name(v) << "\t" << norms[v] << "\n";
        }
    }
    return kPositive;
}

int cmd_decide(const Options& o) {
    const Loaded l = load_normed(o.file);
    const Configuration left = config_arg(l, o.left);
    const Configuration right = config_arg(l, o.right);
    const DecideParams params = decide_params(o);
    const Verdict v = decide_equivalence(l.reduced.system, left, right, params);
    if (v.certificate) {
        write_certificate(o, certificate_to_json(v.system, *v.certificate));
    }
    if (json_out(o)) {
        std::cout << verdict_to_json(v, params).dump(2) << "\n";
    } else {
        std::cout << to_string(v.status) << " (" << v.route << ")";
        if (!v.evidence.empty()) {
            std::cout << ": " << v.evidence;
        }
        std::cout << "\n";
        if (v.refutation) {
            std::cout << render_refutation(v.system, *v.refutation);
        }
    }
    switch (v.status) {
    case Status::Equivalent:
        return kPositive;
    case Status::Inequivalent:
        return kNegative;
    case Status::Unknown:
        return kUnknown;
    }
    return kUnknown;
}

int cmd_check_base(const Options& o) {
    const Certified c = load_certificate(o);
    const Diagnostics pre = check_pre_base(c.system, c.base);
    nlohmann::json doc;
    int code = kPositive;
    if (!pre.empty()) {
        if (json_out(o)) {
            doc["verdict"] = "malformed";
            for (const Diagnostic& d : pre) {
                doc["diagnostics"].push_back({{"condition", d.condition}, {"message", d.message}});
            }
            std::cout << doc.dump(2) << "\n";
        } else {
            std::cout << render_diagnostics(pre);
        }
        return kNegative;
    }
    const Base base(c.system.variable_count(), compute_norms(c.system), c.base);
    const Diagnostics post = check_base(c.system, base);
    if (!post.empty()) {
        if (json_out(o)) {
            doc["verdict"] = "not a base";
            for (const Diagnostic& d : post) {
                doc["diagnostics"].push_back({{"condition", d.condition}, {"message", d.message}});
            }
            std::cout << doc.dump(2) << "\n";
        } else {
            std::cout << render_diagnostics(post);
        }
        return kNegative;
    }
    const ConsistencyReport report = check_consistency(c.system, base, caps_of(o));
    if (json_out(o)) {
        std::cout << report_to_json(c.system, base, report).dump(2) << "\n";
    } else {
        std::cout << render_report(c.system, base, report);
    }
    switch (report.verdict) {
    case PairVerdict::Consistent:
        code = kPositive;
        break;
    case PairVerdict::Inconsistent:
        code = kNegative;
        break;
    case PairVerdict::Indeterminate:
        code = kUnknown;
        break;
    }
    return code;
}

int cmd_pd(const Options& o, bool cc) {
    const Certified c = load_certificate(o);
    const Diagnostics pre = check_pre_base(c.system, c.base);
    if (!pre.empty()) {
        std::cerr << render_diagnostics(pre);
        return kInputError;
    }
    const NormTable norms = compute_norms(c.system);
    const Base base(c.system.variable_count(), norms, c.base);
    const ContextSet ctx = parse_context(c.system, o.context);
    const Configuration config = parse_configuration(c.system, o.config);
    const auto id = base.find_context(ctx);
    if (!id) {
        throw Error("context " + ctx.str(c.system) + " is not in the domain of the base");
    }
    if (cc) {
        const CcNormTable table = cc_norm_table(c.system, base, norms);
        const std::uint64_t value = cc_norm(base, table, *id, config);
        if (json_out(o)) {
            std::cout << nlohmann::json{{"ccnorm", value}, {"norm", norms.of(config)}}.dump(2) << "\n";
        } else {
            std::cout << value << "\n";
        }
        return kPositive;
    }
    const Configuration image = pd(base, ctx, config);
    const ContextSet red = red_of(base, ctx, config);
    if (json_out(o)) {
        std::cout << nlohmann::json{{"pd", config_to_json(c.system, image)},
                                    {"red", context_to_json(c.system, red)}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << "pd  " << render(c.system, image) << "\nred " << red.str(c.system) << "\n";
    }
    return kPositive;
}

int cmd_regular(const Options& o) {
    const Loaded l = load_normed(o.file);
    const Configuration config = config_arg(l, o.config);
    const RegularityVerdict v = decide_regularity(l.reduced.system, config, decide_params(o));
    if (v.certificate) {
        write_certificate(o, certificate_to_json(v.system, *v.certificate));
    }
    if (json_out(o)) {
        std::cout << regularity_to_json(v).dump(2) << "\n";
    } else {
        std::cout << to_string(v.status) << " (" << v.route << ")";
        if (!v.evidence.empty()) {
            std::cout << ": " << v.evidence;
        }
        std::cout << "\n";
        if (v.witness) {
            std::cout << "PD-loop at " << v.system.var_name(v.witness->variable) << " in "
                      << v.witness->context.str(v.system) << ", reached as "
                      << render(v.system, v.witness->reachable) << "\n";
        }
    }
    switch (v.status) {
    case Regularity::Regular:
        return kPositive;
    case Regularity::Irregular:
        return kNegative;
    case Regularity::Unknown:
        return kUnknown;
    }
    return kUnknown;
}

int cmd_oracle(const Options& o) {
    const Loaded l = load_normed(o.file);
    const Configuration left = config_arg(l, o.left);
    const Configuration right = config_arg(l, o.right);
    const BpaSystem& s = l.reduced.system;
    OracleAnswer a = approximant_check(s, left, right, o.oracle);
    // A refutation is only reported after replaying it.
    if (a.value == Tri::No && !verify_refutation(s, *a.refutation, o.oracle.tau_cap)) {
        a.value = Tri::Unknown;
        a.refutation.reset();
    }
    if (json_out(o)) {
        nlohmann::json doc{{"answer", to_string(a.value)},
                           {"states", a.states},
                           {"tainted", a.tainted},
                           {"pairs", a.pairs},
                           {"rounds", a.rounds}};
        if (a.refutation) {
            doc["refutation"] = refutation_to_json(s, *a.refutation);
        }
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << to_string(a.value) << " (" << a.states << " states, " << a.tainted
                  << " truncated)\n";
        if (a.refutation) {
            std::cout << render_refutation(s, *a.refutation);
        }
    }
    switch (a.value) {
    case Tri::Yes:
        return kPositive;
    case Tri::No:
        return kNegative;
    case Tri::Unknown:
        return kUnknown;
    }
    return kUnknown;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Branching bisimilarity and regularity for normed BPA"};
    app.require_subcommand(1);
    Options o;

    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    };
    auto add_search = [&](CLI::App* sub) {
        sub->add_option("--strategy", o.strategy, "guided, exhaustive or auto")
            ->check(CLI::IsMember({"guided", "exhaustive", "auto"}));
        sub->add_option("--jobs", o.jobs, "search worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--max-nodes", o.max_nodes, "search node budget")->check(CLI::PositiveNumber);
        sub->add_option("--time-limit", o.time_limit, "search time budget in seconds")
            ->check(CLI::PositiveNumber);
        sub->add_option("--max-body", o.max_body, "longest decomposition body (0: the norm)");
        sub->add_option("--cert", o.cert_out, "write the certificate here");
    };
    auto add_caps = [&](CLI::App* sub) {
        sub->add_option("--closure", o.closure, "capped or summary")
            ->check(CLI::IsMember({"capped", "summary"}));
        sub->add_option("--closure-len", o.len_cap, "longest configuration in a τ-closure (0: default)");
        sub->add_option("--closure-size", o.size_cap, "largest τ-closure")->check(CLI::PositiveNumber);
    };

    auto* validate = app.add_subcommand("validate", "parse and report normedness and silent variables");
    validate->add_option("FILE", o.file)->required()->check(CLI::ExistingFile);
    add_format(validate);

    auto* norms = app.add_subcommand("norms", "print the norm of every variable");
    norms->add_option("FILE", o.file)->required()->check(CLI::ExistingFile);
    add_format(norms);

    auto* decide = app.add_subcommand("decide", "decide branching bisimilarity of two configurations");
    decide->add_option("FILE", o.file)->required()->check(CLI::ExistingFile);
    decide->add_option("--left", o.left)->required();
    decide->add_option("--right", o.right)->required();
    add_search(decide);
    add_caps(decide);
    add_format(decide);

    auto* check = app.add_subcommand("check-base", "verify a base file");
    check->add_option("FILE", o.file)->required()->check(CLI::ExistingFile);
    check->add_option("--base", o.base_file)->required()->check(CLI::ExistingFile);
    add_caps(check);
    add_format(check);

    auto* pdcmd = app.add_subcommand("pd", "prime decomposition relative to a context");
    auto* cccmd = app.add_subcommand("ccnorm", "class-change norm relative to a context");
    for (auto* sub : {pdcmd, cccmd}) {
        sub->add_option("FILE", o.file)->required()->check(CLI::ExistingFile);
        sub->add_option("--base", o.base_file)->required()->check(CLI::ExistingFile);
        sub->add_option("--config", o.config)->required();
        sub->add_option("--context", o.context, "comma-separated variables; empty for the empty set");
        add_format(sub);
    }

    auto* regular = app.add_subcommand("regular", "decide regularity of a configuration");
    regular->add_option("FILE", o.file)->required()->check(CLI::ExistingFile);
    regular->add_option("--config", o.config)->required();
    add_search(regular);
    add_caps(regular);
    add_format(regular);

    auto* oracle = app.add_subcommand("oracle", "bounded equivalence check with refutation traces");
    oracle->add_option("FILE", o.file)->required()->check(CLI::ExistingFile);
    oracle->add_option("--left", o.left)->required();
    oracle->add_option("--right", o.right)->required();
    oracle->add_option("--depth", o.oracle.depth)->check(CLI::PositiveNumber);
    oracle->add_option("--len-cap", o.oracle.len_cap)->check(CLI::PositiveNumber);
    oracle->add_option("--tau-cap", o.oracle.tau_cap)->check(CLI::PositiveNumber);
    oracle->add_option("--state-cap", o.oracle.state_cap)->check(CLI::PositiveNumber);
    add_format(oracle);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kInputError;
    }

    try {
        if (validate->parsed()) {
            return cmd_validate(o);
        }
        if (norms->parsed()) {
            return cmd_norms(o);
        }
        if (decide->parsed()) {
            return cmd_decide(o);
        }
        if (check->parsed()) {
            return cmd_check_base(o);
        }
        if (pdcmd->parsed()) {
            return cmd_pd(o, false);
        }
        if (cccmd->parsed()) {
            return cmd_pd(o, true);
        }
        if (regular->parsed()) {
            return cmd_regular(o);
        }
        if (oracle->parsed()) {
            return cmd_oracle(o);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}
