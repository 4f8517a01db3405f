#include "nbpa/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

namespace nbpa {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

Var BpaSystem::add_variable(const std::string& name) {
    if (var_index_.count(name) != 0) {
        throw Error("duplicate variable '" + name + "'");
    }
    const auto id = static_cast<Var>(var_names_.size());
    var_names_.push_back(name);
    rules_by_head_.emplace_back();
    var_index_.emplace(name, id);
    return id;
}

ActionId BpaSystem::add_action(const std::string& name) {
    if (auto it = action_index_.find(name); it != action_index_.end()) {
        return it->second;
    }
    const auto id = static_cast<ActionId>(actions_.size());
    actions_.push_back(Action{name, name == "tau"});
    action_index_.emplace(name, id);
    return id;
}

void BpaSystem::add_rule(Var head, ActionId label, Configuration body) {
    if (head >= var_names_.size() || label >= actions_.size()) {
        throw Error("rule refers to an undeclared symbol");
    }
    for (Var v : body) {
        if (v >= var_names_.size()) {
            throw Error("rule body refers to an undeclared variable");
        }
    }
    rules_by_head_[head].push_back(rules_.size());
    rules_.push_back(Rule{head, label, std::move(body)});
}

std::optional<Var> BpaSystem::find_variable(std::string_view name) const {
    if (auto it = var_index_.find(std::string(name)); it != var_index_.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::optional<ActionId> BpaSystem::find_action(std::string_view name) const {
    if (auto it = action_index_.find(std::string(name)); it != action_index_.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::size_t BpaSystem::max_body_length() const noexcept {
    std::size_t m = 0;
    for (const auto& r : rules_) {
        m = std::max(m, r.body.size());
    }
    return m;
}

bool operator==(const BpaSystem& a, const BpaSystem& b) {
    if (a.var_names_ != b.var_names_ || a.rules_ != b.rules_ ||
        a.actions_.size() != b.actions_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.actions_.size(); ++i) {
        if (a.actions_[i].name != b.actions_[i].name ||
            a.actions_[i].silent != b.actions_[i].silent) {
            return false;
        }
    }
    return true;
}

namespace {

bool is_var_token(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) {
        return false;
    }
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    });
}

bool is_label_token(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    });
}

struct Token {
    std::string text;
    std::size_t column; // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        if (i >= line.size()) {
            break;
        }
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        out.push_back(Token{std::string(line.substr(start, i - start)), start + 1});
    }
    return out;
}

struct PendingRule {
    Token head;
    Token label;
    std::vector<Token> body;
    std::size_t line;
};

} // namespace

BpaSystem parse_system(std::istream& in) {
    std::vector<std::pair<Token, std::size_t>> declared;
    std::vector<std::pair<Token, std::size_t>> declared_actions;
    std::vector<PendingRule> pending;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) {
            raw.erase(hash);
        }
        auto tokens = tokenize(raw);
        if (tokens.empty()) {
            continue;
        }
        if (tokens[0].text == "vars" && (tokens.size() < 2 || tokens[1].text.front() != '-')) {
            for (std::size_t i = 1; i < tokens.size(); ++i) {
                if (!is_var_token(tokens[i].text)) {
                    throw ParseError(line_no, tokens[i].column,
                                     "invalid variable name '" + tokens[i].text + "'");
                }
                declared.emplace_back(tokens[i], line_no);
            }
            continue;
        }
        if (tokens[0].text == "actions" && (tokens.size() < 2 || tokens[1].text.front() != '-')) {
            for (std::size_t i = 1; i < tokens.size(); ++i) {
                if (!is_label_token(tokens[i].text)) {
                    throw ParseError(line_no, tokens[i].column,
                                     "invalid action name '" + tokens[i].text + "'");
                }
                declared_actions.emplace_back(tokens[i], line_no);
            }
            continue;
        }
        std::size_t pos = 0;
        if (tokens[0].text == "rule" && tokens.size() > 1 && tokens[1].text.front() != '-') {
            pos = 1;
        }
        if (tokens.size() < pos + 3) {
            throw ParseError(line_no, tokens.back().column + tokens.back().text.size(),
                             "expected 'HEAD -LABEL-> BODY'");
        }
        const Token& head = tokens[pos];
        const Token& arrow = tokens[pos + 1];
        if (!is_var_token(head.text)) {
            throw ParseError(line_no, head.column, "invalid variable name '" + head.text + "'");
        }
        const std::string& a = arrow.text;
        if (a.size() < 4 || a.front() != '-' || a.substr(a.size() - 2) != "->") {
            throw ParseError(line_no, arrow.column, "expected an arrow of the form -LABEL->");
        }
        Token label{a.substr(1, a.size() - 3), arrow.column + 1};
        if (!is_label_token(label.text)) {
            throw ParseError(line_no, label.column, "invalid action label '" + label.text + "'");
        }
        PendingRule rule{head, label, {}, line_no};
        const bool epsilon = tokens.size() == pos + 3 && tokens[pos + 2].text == ".";
        if (!epsilon) {
            for (std::size_t i = pos + 2; i < tokens.size(); ++i) {
                if (tokens[i].text == ".") {
                    throw ParseError(line_no, tokens[i].column,
                                     "'.' must be the only token of an empty body");
                }
                if (!is_var_token(tokens[i].text)) {
                    throw ParseError(line_no, tokens[i].column,
                                     "invalid variable name '" + tokens[i].text + "'");
                }
                rule.body.push_back(tokens[i]);
            }
        }
        pending.push_back(std::move(rule));
    }

    BpaSystem system;
    if (!declared.empty()) {
        for (const auto& [tok, ln] : declared) {
            if (system.find_variable(tok.text)) {
                throw ParseError(ln, tok.column, "duplicate variable declaration '" + tok.text + "'");
            }
            system.add_variable(tok.text);
        }
    } else {
        for (const auto& r : pending) {
            if (!system.find_variable(r.head.text)) {
                system.add_variable(r.head.text);
            }
        }
    }
    for (const auto& [tok, ln] : declared_actions) {
        if (system.find_action(tok.text)) {
            throw ParseError(ln, tok.column, "duplicate action declaration '" + tok.text + "'");
        }
        system.add_action(tok.text);
    }
    for (const auto& r : pending) {
        auto head = system.find_variable(r.head.text);
        if (!head) {
            throw ParseError(r.line, r.head.column, "undeclared variable '" + r.head.text + "'");
        }
        if (!declared_actions.empty() && !system.find_action(r.label.text)) {
            throw ParseError(r.line, r.label.column, "undeclared action '" + r.label.text + "'");
        }
        const ActionId label = system.add_action(r.label.text);
        Configuration body;
        for (const auto& t : r.body) {
            auto v = system.find_variable(t.text);
            if (!v) {
                throw ParseError(r.line, t.column, "undeclared variable '" + t.text + "'");
            }
            body.push_back(*v);
        }
        system.add_rule(*head, label, std::move(body));
    }
    return system;
}

BpaSystem parse_system(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_system(in);
}

BpaSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open '" + path + "'");
    }
    return parse_system(in);
}

std::string serialize_system(const BpaSystem& system) {
    std::ostringstream out;
    out << "vars";
    for (Var v = 0; v < system.variable_count(); ++v) {
        out << ' ' << system.var_name(v);
    }
    out << '\n';
    if (system.action_count() > 0) {
        out << "actions";
        for (ActionId a = 0; a < system.action_count(); ++a) {
            out << ' ' << system.action(a).name;
        }
        out << '\n';
    }
    for (const auto& r : system.rules()) {
        out << system.var_name(r.head) << " -" << system.action(r.label).name << "-> "
            << render(system, r.body) << '\n';
    }
    return out.str();
}

Configuration parse_configuration(const BpaSystem& system, std::string_view text) {
    Configuration out;
    auto tokens = tokenize(text);
    if (tokens.size() == 1 && tokens[0].text == ".") {
        return out;
    }
    for (const auto& t : tokens) {
        auto v = system.find_variable(t.text);
        if (!v) {
            throw ParseError(1, t.column, "undeclared variable '" + t.text + "'");
        }
        out.push_back(*v);
    }
    return out;
}

std::string render(const BpaSystem& system, std::span<const Var> config) {
    if (config.empty()) {
        return ".";
    }
    std::string out;
    for (std::size_t i = 0; i < config.size(); ++i) {
        if (i != 0) {
            out += ' ';
        }
        out += system.var_name(config[i]);
    }
    return out;
}

NormednessReport check_normed(const BpaSystem& system) {
    const std::size_t n = system.variable_count();
    std::vector<bool> normed(n, false);
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : system.rules()) {
            if (normed[r.head]) {
                continue;
            }
            if (std::all_of(r.body.begin(), r.body.end(), [&](Var v) { return normed[v]; })) {
                normed[r.head] = true;
                changed = true;
            }
        }
    }
    NormednessReport report;
    for (Var v = 0; v < n; ++v) {
        if (!normed[v]) {
            report.normed = false;
            report.unnormed.push_back(v);
        }
    }
    return report;
}

Norm NormTable::of(std::span<const Var> config) const {
    Norm total = 0;
    for (Var v : config) {
        const Norm x = values_.at(v);
        if (total > std::numeric_limits<Norm>::max() - x) {
            throw Error("norm overflows 64 bits");
        }
        total += x;
    }
    return total;
}

NormTable compute_norms(const BpaSystem& system) {
    auto report = check_normed(system);
    if (!report.normed) {
        std::string names;
        for (Var v : report.unnormed) {
            names += ' ' + system.var_name(v);
        }
        throw Error("system is not normed; unnormed variables:" + names);
    }
    constexpr Norm inf = std::numeric_limits<Norm>::max();
    std::vector<Norm> norm(system.variable_count(), inf);
    // Bellman-style relaxation; each round fixes at least the next-smallest norm.
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : system.rules()) {
            Norm sum = 1;
            bool finite = true;
            for (Var v : r.body) {
                if (norm[v] == inf) {
                    finite = false;
                    break;
                }
                if (sum > inf - 1 - norm[v]) {
                    throw Error("norm of '" + system.var_name(r.head) + "' overflows 64 bits");
                }
                sum += norm[v];
            }
            if (finite && sum < norm[r.head]) {
                norm[r.head] = sum;
                changed = true;
            }
        }
    }
    return NormTable(std::move(norm));
}

std::vector<Var> detect_silent_variables(const BpaSystem& system) {
    const std::size_t n = system.variable_count();
    std::vector<bool> loud(n, false);
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : system.rules()) {
            if (loud[r.head]) {
                continue;
            }
            const bool visible = !system.is_silent(r.label);
            if (visible ||
                std::any_of(r.body.begin(), r.body.end(), [&](Var v) { return loud[v]; })) {
                loud[r.head] = true;
                changed = true;
            }
        }
    }
    std::vector<Var> silent;
    for (Var v = 0; v < n; ++v) {
        if (!loud[v]) {
            silent.push_back(v);
        }
    }
    return silent;
}

namespace {

Configuration translate_with(const std::vector<std::optional<Var>>& map,
                             std::span<const Var> config, bool strict) {
    Configuration out;
    out.reserve(config.size());
    for (Var v : config) {
        if (v >= map.size()) {
            throw Error("configuration refers to an unknown variable");
        }
        if (map[v]) {
            out.push_back(*map[v]);
        } else if (strict) {
            throw Error("configuration leaves the restricted subsystem");
        }
    }
    return out;
}

} // namespace

Configuration SilentElimination::translate(std::span<const Var> config) const {
    return translate_with(var_map, config, false);
}

SilentElimination eliminate_silent_variables(const BpaSystem& system) {
    const auto silent = detect_silent_variables(system);
    std::vector<bool> is_silent(system.variable_count(), false);
    for (Var v : silent) {
        is_silent[v] = true;
    }
    SilentElimination out;
    out.var_map.resize(system.variable_count());
    for (Var v = 0; v < system.variable_count(); ++v) {
        if (!is_silent[v]) {
            out.var_map[v] = out.system.add_variable(system.var_name(v));
        }
    }
    for (ActionId a = 0; a < system.action_count(); ++a) {
        out.system.add_action(system.action(a).name);
    }
    for (const auto& r : system.rules()) {
        if (is_silent[r.head]) {
            continue;
        }
        out.system.add_rule(*out.var_map[r.head], r.label, out.translate(r.body));
    }
    return out;
}

Configuration Restriction::translate(std::span<const Var> config) const {
    return translate_with(var_map, config, true);
}

namespace {

Restriction build_restriction(const BpaSystem& system, const std::vector<bool>& keep) {
    Restriction out;
    out.var_map.resize(system.variable_count());
    for (Var v = 0; v < system.variable_count(); ++v) {
        if (keep[v]) {
            out.var_map[v] = out.system.add_variable(system.var_name(v));
        }
    }
    for (ActionId a = 0; a < system.action_count(); ++a) {
        out.system.add_action(system.action(a).name);
    }
    for (const auto& r : system.rules()) {
        if (keep[r.head]) {
            out.system.add_rule(*out.var_map[r.head], r.label, out.translate(r.body));
        }
    }
    return out;
}

} // namespace

Restriction restrict_to(const BpaSystem& system, std::span<const Var> roots) {
    std::vector<bool> keep(system.variable_count(), false);
    std::vector<Var> stack;
    for (Var v : roots) {
        if (v >= keep.size()) {
            throw Error("restriction root out of range");
        }
        if (!keep[v]) {
            keep[v] = true;
            stack.push_back(v);
        }
    }
    while (!stack.empty()) {
        const Var v = stack.back();
        stack.pop_back();
        for (std::size_t ri : system.rules_of(v)) {
            for (Var w : system.rules()[ri].body) {
                if (!keep[w]) {
                    keep[w] = true;
                    stack.push_back(w);
                }
            }
        }
    }
    return build_restriction(system, keep);
}

Restriction restrict_to_names(const BpaSystem& system, std::span<const std::string> names) {
    std::vector<bool> keep(system.variable_count(), false);
    for (const auto& name : names) {
        auto v = system.find_variable(name);
        if (!v) {
            throw Error("unknown variable '" + name + "'");
        }
        keep[*v] = true;
    }
    for (const auto& r : system.rules()) {
        if (!keep[r.head]) {
            continue;
        }
        for (Var w : r.body) {
            if (!keep[w]) {
                throw Error("variable set is not closed under the rules of '" +
                            system.var_name(r.head) + "'");
            }
        }
    }
    return build_restriction(system, keep);
}

} // namespace nbpa
