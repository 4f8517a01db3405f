#include "nbpa/base_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace nbpa {

namespace {

using nlohmann::json;

Var lookup_var(const BpaSystem& system, const json& name) {
    if (!name.is_string()) {
        throw Error("base file: variable names must be strings");
    }
    const auto v = system.find_variable(name.get<std::string>());
    if (!v) {
        throw Error("base file: unknown variable '" + name.get<std::string>() + "'");
    }
    return *v;
}

Configuration names_to_config(const BpaSystem& system, const json& arr) {
    if (!arr.is_array()) {
        throw Error("base file: expected an array of variable names");
    }
    Configuration out;
    for (const json& n : arr) {
        out.push_back(lookup_var(system, n));
    }
    return out;
}

ContextSet names_to_context(const BpaSystem& system, const json& arr) {
    const Configuration members = names_to_config(system, arr);
    return ContextSet(system.variable_count(), members);
}

const json& field(const json& obj, const char* name) {
    if (!obj.is_object() || !obj.contains(name)) {
        throw Error(std::string("base file: missing field '") + name + "'");
    }
    return obj.at(name);
}

} // namespace

ContextSet parse_context(const BpaSystem& system, std::string_view text) {
    ContextSet out(system.variable_count());
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
            s.remove_prefix(1);
        }
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
            s.remove_suffix(1);
        }
        return s;
    };
    if (trim(text).empty()) {
        return out;
    }
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = text.find(',', pos);
        const std::string_view item =
            trim(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (item.empty()) {
            throw Error("empty name in context list");
        }
        const auto v = system.find_variable(item);
        if (!v) {
            throw Error("unknown variable '" + std::string(item) + "' in context");
        }
        out.insert(*v);
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

json context_to_json(const BpaSystem& system, const ContextSet& ctx) {
    return config_to_json(system, ctx.members());
}

json config_to_json(const BpaSystem& system, std::span<const Var> config) {
    json arr = json::array();
    for (Var v : config) {
        arr.push_back(system.var_name(v));
    }
    return arr;
}

json base_to_json(const BpaSystem& system, const PreBase& base) {
    json doc = json::object();
    json domain = json::array();
    for (const ContextSet& r : base.domain) {
        domain.push_back(context_to_json(system, r));
    }
    doc["domain"] = std::move(domain);

    std::map<std::string, std::vector<Var>> primes;
    for (const auto& [r, list] : base.primes) {
        auto& slot = primes[r.key(system)];
        for (Var b : list) {
            if (std::find(slot.begin(), slot.end(), b) == slot.end()) {
                slot.push_back(b);
            }
        }
    }
    json pj = json::object();
    for (auto& [key, list] : primes) {
        std::sort(list.begin(), list.end());
        pj[key] = config_to_json(system, list);
    }
    doc["primes"] = std::move(pj);

    json dec = json::array();
    for (const DecTriple& d : base.dec) {
        dec.push_back({{"var", system.var_name(d.var)},
                       {"body", config_to_json(system, d.body)},
                       {"context", context_to_json(system, d.context)}});
    }
    doc["dec"] = std::move(dec);

    // Group by (prime, context) keeping first-appearance order.
    std::vector<std::pair<std::pair<Var, ContextSet>, ContextSet>> groups;
    for (const PropTriple& p : base.prop) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
            return g.first.first == p.prime && g.first.second == p.context;
        });
        if (it == groups.end()) {
            groups.push_back({{p.prime, p.context}, ContextSet(system.variable_count())});
            it = std::prev(groups.end());
        }
        it->second.insert(p.redundant);
    }
    json prop = json::array();
    for (const auto& [k, red] : groups) {
        prop.push_back({{"prime", system.var_name(k.first)},
                        {"redundant", context_to_json(system, red)},
                        {"context", context_to_json(system, k.second)}});
    }
    doc["prop"] = std::move(prop);
    return doc;
}

PreBase base_from_json(const BpaSystem& system, const json& doc) {
    if (!doc.is_object()) {
        throw Error("base file: top level must be an object");
    }
    PreBase out;
    for (const json& r : field(doc, "domain")) {
        out.domain.push_back(names_to_context(system, r));
    }
    const json& primes = field(doc, "primes");
    if (!primes.is_object()) {
        throw Error("base file: 'primes' must be an object");
    }
    for (const auto& [key, list] : primes.items()) {
        out.primes.emplace_back(parse_context(system, key), names_to_config(system, list));
    }
    for (const json& d : field(doc, "dec")) {
        out.dec.push_back(DecTriple{lookup_var(system, field(d, "var")),
                                    names_to_config(system, field(d, "body")),
                                    names_to_context(system, field(d, "context"))});
    }
    for (const json& p : field(doc, "prop")) {
        const Var prime = lookup_var(system, field(p, "prime"));
        const ContextSet ctx = names_to_context(system, field(p, "context"));
        for (Var x : names_to_config(system, field(p, "redundant"))) {
            out.prop.push_back(PropTriple{prime, x, ctx});
        }
    }
    return out;
}

std::optional<std::vector<std::string>> certificate_variables(const json& doc) {
    if (!doc.is_object() || !doc.contains("variables")) {
        return std::nullopt;
    }
    return doc.at("variables").get<std::vector<std::string>>();
}

PreBase load_base(const BpaSystem& system, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open base file '" + path + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(std::string("base file: ") + e.what());
    }
    return base_from_json(system, doc);
}

} // namespace nbpa
