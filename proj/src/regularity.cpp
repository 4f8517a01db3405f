#include "nbpa/regularity.hpp"

#include "nbpa/base_io.hpp"
#include "nbpa/semantics.hpp"
#include "scc.hpp"

#include <deque>
#include <map>
#include <unordered_set>

namespace nbpa {

PdGraph build_pd_graph(const BpaSystem& system, const Base& base) {
    PdGraph g;
    g.variables = system.variable_count();
    g.contexts = base.context_count();
    g.arcs.resize(g.variables * g.contexts);
    for (ContextId c = 0; c < base.context_count(); ++c) {
        std::map<std::pair<Var, std::uint32_t>, std::size_t> seen;
        for (std::size_t ri = 0; ri < system.rules().size(); ++ri) {
            const Rule& rule = system.rules()[ri];
            const std::uint32_t from = g.vertex(c, rule.head);
            for (std::size_t i = 0; i < rule.body.size(); ++i) {
                const std::span<const Var> suffix(rule.body.data() + i + 1, rule.body.size() - i - 1);
                const PdOutcome o = evaluate_pd(base, c, suffix);
                if (!o.ok()) {
                    throw PdError(o.status, "decomposition of a rule suffix failed: " +
                                                std::string(to_string(o.status)));
                }
                const std::uint32_t to = g.vertex(o.context, rule.body[i]);
                const bool blue = !o.image.empty();
                auto [it, fresh] = seen.emplace(std::pair{rule.head, to}, g.arcs[from].size());
                if (fresh) {
                    g.arcs[from].push_back(
                        PdArc{to, blue, ri, Configuration(suffix.begin(), suffix.end())});
                } else if (blue && !g.arcs[from][it->second].blue) {
                    g.arcs[from][it->second] =
                        PdArc{to, true, ri, Configuration(suffix.begin(), suffix.end())};
                }
            }
        }
    }
    return g;
}

std::vector<bool> pd_loops(const PdGraph& graph) {
    std::vector<std::vector<std::uint32_t>> adj(graph.arcs.size());
    for (std::size_t v = 0; v < graph.arcs.size(); ++v) {
        for (const PdArc& a : graph.arcs[v]) {
            adj[v].push_back(a.to);
        }
    }
    std::uint32_t count = 0;
    const auto comp = detail::strongly_connected(adj, &count);
    std::vector<bool> blue_inside(count, false);
    for (std::size_t v = 0; v < graph.arcs.size(); ++v) {
        for (const PdArc& a : graph.arcs[v]) {
            if (a.blue && comp[v] == comp[a.to]) {
                blue_inside[comp[v]] = true;
            }
        }
    }
    std::vector<bool> out(graph.arcs.size(), false);
    for (std::size_t v = 0; v < out.size(); ++v) {
        out[v] = blue_inside[comp[v]];
    }
    return out;
}

std::vector<bool> pd_infinite(const PdGraph& graph) {
    std::vector<std::vector<std::uint32_t>> back(graph.arcs.size());
    for (std::uint32_t v = 0; v < graph.arcs.size(); ++v) {
        for (const PdArc& a : graph.arcs[v]) {
            back[a.to].push_back(v);
        }
    }
    std::vector<bool> out = pd_loops(graph);
    std::vector<std::uint32_t> stack;
    for (std::uint32_t v = 0; v < out.size(); ++v) {
        if (out[v]) {
            stack.push_back(v);
        }
    }
    while (!stack.empty()) {
        const std::uint32_t v = stack.back();
        stack.pop_back();
        for (std::uint32_t u : back[v]) {
            if (!out[u]) {
                out[u] = true;
                stack.push_back(u);
            }
        }
    }
    return out;
}

std::optional<LoopWitness> find_pd_loop(const BpaSystem& system, const Base& base,
                                        std::span<const Var> config) {
    const PdGraph g = build_pd_graph(system, base);
    const std::vector<bool> infinite = pd_infinite(g);
    const std::vector<bool> loops = pd_loops(g);
    const auto empty = base.find_context(ContextSet(system.variable_count()));
    if (!empty) {
        throw Error("base has no empty context");
    }
    ContextId r = *empty;
    for (std::size_t i = config.size(); i-- > 0;) {
        const std::uint32_t start = g.vertex(r, config[i]);
        if (infinite[start]) {
            // Breadth-first to a loop vertex; each arc (A,c) → (B,c') turns
            // δ = Aγ into the reachable Bγ2γ.
            std::vector<std::int64_t> parent(g.arcs.size(), -1);
            std::vector<const PdArc*> via(g.arcs.size(), nullptr);
            std::deque<std::uint32_t> queue{start};
            parent[start] = start;
            std::uint32_t hit = start;
            while (!queue.empty()) {
                const std::uint32_t v = queue.front();
                queue.pop_front();
                if (loops[v]) {
                    hit = v;
                    break;
                }
                for (const PdArc& a : g.arcs[v]) {
                    if (parent[a.to] < 0 && infinite[a.to]) {
                        parent[a.to] = v;
                        via[a.to] = &a;
                        queue.push_back(a.to);
                    }
                }
            }
            std::vector<const PdArc*> path;
            for (std::uint32_t v = hit; v != start; v = static_cast<std::uint32_t>(parent[v])) {
                path.push_back(via[v]);
            }
            Configuration gamma(config.begin() + static_cast<std::ptrdiff_t>(i) + 1, config.end());
            for (auto it = path.rbegin(); it != path.rend(); ++it) {
                gamma.insert(gamma.begin(), (*it)->suffix.begin(), (*it)->suffix.end());
            }
            LoopWitness w;
            w.variable = g.var_of(hit);
            w.context = base.context(g.context_of(hit));
            w.reachable = gamma;
            w.reachable.insert(w.reachable.begin(), w.variable);
            return w;
        }
        const Var x = config[i];
        r = red_context(base, r, std::span<const Var>(&x, 1));
    }
    return std::nullopt;
}

bool reaches_pd_loop(const BpaSystem& system, const Base& base, std::span<const Var> config) {
    return find_pd_loop(system, base, config).has_value();
}

const char* to_string(PdReach r) noexcept {
    switch (r) {
    case PdReach::Finite:
        return "finite";
    case PdReach::ImageCutoff:
        return "image-cutoff";
    case PdReach::StateCutoff:
        return "state-cutoff";
    }
    return "?";
}

PdReachResult pdreach(const BpaSystem& system, const Base& base, std::span<const Var> config,
                      std::size_t image_cutoff, std::size_t state_cutoff) {
    const auto empty = base.find_context(ContextSet(system.variable_count()));
    PdReachResult out;
    std::unordered_set<Configuration, ConfigurationHash> seen{Configuration(config.begin(), config.end())};
    std::unordered_set<Configuration, ConfigurationHash> images;
    std::deque<Configuration> queue{Configuration(config.begin(), config.end())};
    while (!queue.empty()) {
        const Configuration cur = std::move(queue.front());
        queue.pop_front();
        images.insert(pd_image(base, *empty, cur));
        if (images.size() > image_cutoff) {
            out.result = PdReach::ImageCutoff;
            break;
        }
        for (Transition& t : transitions(system, cur)) {
            if (seen.insert(t.target).second) {
                queue.push_back(std::move(t.target));
            }
        }
        if (seen.size() > state_cutoff) {
            out.result = PdReach::StateCutoff;
            break;
        }
    }
    out.images = images.size();
    out.states = seen.size();
    return out;
}

const char* to_string(Regularity r) noexcept {
    switch (r) {
    case Regularity::Regular:
        return "regular";
    case Regularity::Irregular:
        return "irregular";
    case Regularity::Unknown:
        return "unknown";
    }
    return "?";
}

RegularityVerdict decide_regularity(const BpaSystem& system, std::span<const Var> config,
                                    const DecideParams& params) {
    const Restriction restriction = restrict_to(system, config);
    RegularityVerdict v;
    v.system = restriction.system;
    v.config = restriction.translate(config);
    const BpaSystem& sub = v.system;
    const NormTable norms = compute_norms(sub);
    const std::size_t n = sub.variable_count();
    const ClosureCaps& caps = params.bounds.caps;

    auto finish_regular = [&](PreBase base, const char* route) {
        const Base compiled(n, norms, base);
        v.status = Regularity::Regular;
        v.route = route;
        v.cross_check = pdreach(sub, compiled, v.config);
        v.certificate = std::move(base);
        return v;
    };

    std::optional<PreBase> proposal;
    if (params.strategy != Strategy::Exhaustive) {
        ProposeResult p = propose_base(sub, norms, params.propose);
        if (p.usable && verify_certificate(sub, norms, p.base, caps, {}).ok) {
            const Base compiled(n, norms, p.base);
            v.witness = find_pd_loop(sub, compiled, v.config);
            if (!v.witness) {
                return finish_regular(std::move(p.base), "guided");
            }
            proposal = std::move(p.base);
        }
        if (params.strategy == Strategy::Guided) {
            v.route = "guided";
            v.evidence = v.witness ? "proposed base reaches a PD-loop; not conclusive"
                                   : "no usable proposed base";
            v.witness.reset();
            return v;
        }
    }

    std::optional<LoopWitness> first_witness;
    SearchProblem problem;
    problem.hint = proposal;
    problem.accept = [&](const PreBase& candidate) {
        const Base compiled(n, norms, candidate);
        auto w = find_pd_loop(sub, compiled, v.config);
        if (w && !first_witness) {
            first_witness = w;
        }
        return !w.has_value();
    };
    const SearchOutcome out = search_bases(sub, norms, problem, params.bounds);
    v.stats = out.stats;
    v.route = "exhaustive";
    if (out.base) {
        const CertificateCheck check = verify_certificate(sub, norms, *out.base, caps, {});
        if (check.ok) {
            v.witness.reset();
            return finish_regular(*out.base, "exhaustive");
        }
        v.witness.reset();
        v.evidence = "search produced a base that failed re-verification: " + check.failure;
        return v;
    }
    if (out.complete) {
        v.status = Regularity::Irregular;
        v.evidence = "every consistent base in the search space reaches a PD-loop";
        if (!v.witness) {
            v.witness = first_witness;
        }
        return v;
    }
    v.witness.reset();
    v.evidence = out.stats.indeterminate > 0 ? "consistency checks truncated"
                                             : "search budget exhausted";
    return v;
}

nlohmann::json regularity_to_json(const RegularityVerdict& verdict) {
    nlohmann::json doc;
    doc["status"] = to_string(verdict.status);
    doc["route"] = verdict.route;
    if (verdict.certificate) {
        doc["certificate"] = certificate_to_json(verdict.system, *verdict.certificate);
    }
    if (verdict.witness) {
        doc["witness"] = {
            {"variable", verdict.system.var_name(verdict.witness->variable)},
            {"context", context_to_json(verdict.system, verdict.witness->context)},
            {"reachable", render(verdict.system, verdict.witness->reachable)},
        };
    }
    if (verdict.cross_check) {
        doc["pdreach"] = {
            {"result", to_string(verdict.cross_check->result)},
            {"images", verdict.cross_check->images},
            {"states", verdict.cross_check->states},
        };
    }
    if (!verdict.evidence.empty()) {
        doc["evidence"] = verdict.evidence;
    }
    return doc;
}

} // namespace nbpa
