#include "nbpa/search.hpp"

#include "nbpa/base_io.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_map>

namespace nbpa {

namespace {

using Item = std::uint32_t;
constexpr Item kNoItem = static_cast<Item>(-1);

/// Thrown when an evaluation needs a decision not yet made.
struct Undecided {
    Item item;
};

struct Abort {};

enum class Kind : std::uint8_t { Undecided, InContext, Prime, NonPrime };

struct Decision {
    Kind kind = Kind::Undecided;
    ContextId red = 0;
    Configuration body;
};

// A base under construction.  unit() throws Undecided where a decision is
// missing and records, for the current evaluation, every decision the
// answer depended on.
class PartialBase final : public BaseView {
public:
    explicit PartialBase(std::size_t nvars) : n_(nvars) { add_context(ContextSet(nvars)); }

    std::size_t variable_count() const override { return n_; }
    std::size_t context_count() const override { return contexts_.size(); }
    const ContextSet& context(ContextId c) const override { return contexts_[c]; }

    std::optional<ContextId> find_context(const ContextSet& s) const override {
        auto it = index_.find(s);
        if (it == index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    const Unit& unit(ContextId c, Var x) const override {
        const Cached& u = compute(c, x);
        for (Item i : u.deps) {
            note(i);
        }
        return u.unit;
    }

    Item item(ContextId c, Var x) const { return static_cast<Item>(c * n_ + x); }
    ContextId context_of(Item i) const { return static_cast<ContextId>(i / n_); }
    Var var_of(Item i) const { return static_cast<Var>(i % n_); }

    ContextId add_context(const ContextSet& s) {
        const auto id = static_cast<ContextId>(contexts_.size());
        contexts_.push_back(s);
        index_.emplace(s, id);
        decisions_.emplace_back(n_);
        for (Var v : s.members()) {
            decisions_.back()[v].kind = Kind::InContext;
        }
        cache_.emplace_back(n_);
        active_.emplace_back(n_, 0);
        read_flag_.resize(contexts_.size() * n_, 0);
        return id;
    }

    void pop_context() {
        index_.erase(contexts_.back());
        contexts_.pop_back();
        decisions_.pop_back();
        cache_.pop_back();
        active_.pop_back();
        read_flag_.resize(contexts_.size() * n_);
    }

    const Decision& decision(ContextId c, Var x) const { return decisions_[c][x]; }

    /// The decision for (c, x), recorded as read; throws if missing.
    Kind role(ContextId c, Var x) const {
        const Decision& d = decisions_[c][x];
        if (d.kind == Kind::Undecided) {
            throw Undecided{item(c, x)};
        }
        if (d.kind != Kind::InContext) {
            note(item(c, x));
        }
        return d.kind;
    }

    void set(ContextId c, Var x, Decision d) { decisions_[c][x] = std::move(d); }

    void clear(ContextId c, Var x) {
        decisions_[c][x] = Decision{};
        for (auto& row : cache_) {
            for (Cached& u : row) {
                u.valid = false;
            }
        }
    }

    void begin_reads() const {
        for (Item i : reads_) {
            read_flag_[i] = 0;
        }
        reads_.clear();
    }

    std::vector<Item> reads() const { return reads_; }

    PreBase to_pre_base() const {
        PreBase out;
        for (ContextId c = 0; c < contexts_.size(); ++c) {
            out.domain.push_back(contexts_[c]);
            std::vector<Var> primes;
            for (Var x = 0; x < n_; ++x) {
                const Decision& d = decisions_[c][x];
                if (d.kind == Kind::Prime) {
                    primes.push_back(x);
                    for (Var y : contexts_[d.red].members()) {
                        out.prop.push_back(PropTriple{x, y, contexts_[c]});
                    }
                } else if (d.kind == Kind::NonPrime) {
                    out.dec.push_back(DecTriple{x, d.body, contexts_[c]});
                }
            }
            out.primes.emplace_back(contexts_[c], std::move(primes));
        }
        return out;
    }

    std::vector<Item> decided_items() const {
        std::vector<Item> out;
        for (ContextId c = 0; c < contexts_.size(); ++c) {
            for (Var x = 0; x < n_; ++x) {
                const Kind k = decisions_[c][x].kind;
                if (k == Kind::Prime || k == Kind::NonPrime) {
                    out.push_back(item(c, x));
                }
            }
        }
        return out;
    }

private:
    struct Cached {
        bool valid = false;
        Unit unit;
        std::vector<Item> deps;
    };

    void note(Item i) const {
        if (read_flag_[i] == 0) {
            read_flag_[i] = 1;
            reads_.push_back(i);
        }
    }

    const Cached& compute(ContextId c, Var x) const {
        Cached& slot = cache_[c][x];
        if (slot.valid) {
            return slot;
        }
        const Decision& d = decisions_[c][x];
        switch (d.kind) {
        case Kind::Undecided:
            throw Undecided{item(c, x)};
        case Kind::InContext:
            slot.unit = Unit{PdStatus::Ok, {}, c, 0};
            slot.deps.clear();
            slot.valid = true;
            return slot;
        case Kind::Prime:
            slot.unit = Unit{PdStatus::Ok, {x}, d.red, 0};
            slot.deps.assign(1, item(c, x));
            slot.valid = true;
            return slot;
        case Kind::NonPrime:
            break;
        }
        if (active_[c][x] != 0) {
            cycle_.unit = Unit{PdStatus::BudgetExceeded, {}, c, 0};
            cycle_.deps.assign(1, item(c, x));
            return cycle_;
        }
        struct Guard {
            std::uint8_t& flag;
            ~Guard() { flag = 0; }
        } guard{active_[c][x]};
        active_[c][x] = 1;

        Unit u{PdStatus::Ok, {}, c, 1};
        std::vector<Item> deps{item(c, x)};
        Configuration reversed;
        for (auto it = d.body.rbegin(); it != d.body.rend(); ++it) {
            const Cached& sub = compute(u.out, *it);
            deps.insert(deps.end(), sub.deps.begin(), sub.deps.end());
            if (sub.unit.status != PdStatus::Ok) {
                u.status = sub.unit.status;
                break;
            }
            if (reversed.size() + sub.unit.image.size() > (std::size_t{1} << 16)) {
                u.status = PdStatus::BudgetExceeded;
                break;
            }
            reversed.insert(reversed.end(), sub.unit.image.rbegin(), sub.unit.image.rend());
            u.subs += sub.unit.subs;
            u.out = sub.unit.out;
        }
        if (u.status == PdStatus::Ok) {
            u.image.assign(reversed.rbegin(), reversed.rend());
        } else {
            u.out = c;
        }
        std::sort(deps.begin(), deps.end());
        deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
        Cached& out = cache_[c][x];
        out.unit = std::move(u);
        out.deps = std::move(deps);
        out.valid = true;
        return out;
    }

    std::size_t n_;
    std::vector<ContextSet> contexts_;
    std::unordered_map<ContextSet, ContextId, ContextSetHash> index_;
    std::vector<std::vector<Decision>> decisions_;
    mutable std::vector<std::vector<Cached>> cache_;
    mutable std::vector<std::vector<std::uint8_t>> active_;
    mutable Cached cycle_;
    mutable std::vector<Item> reads_;
    mutable std::vector<std::uint8_t> read_flag_;
};

struct Obligation {
    enum class Kind : std::uint8_t { Goal, Decide, Shape, DecCheck, PropCheck };
    Kind kind = Kind::Goal;
    ContextId c = 0;
    Var x = 0;
    Var y = 0;
    std::size_t goal = 0;
    Item owner = kNoItem;
};

struct Cell {
    Obligation ob;
    std::shared_ptr<const Cell> next;
};
using Stack = std::shared_ptr<const Cell>;

struct Option {
    bool prime = false;
    ContextSet red;
    Configuration body;

    bool operator==(const Option& o) const {
        return prime == o.prime && (prime ? red == o.red : body == o.body);
    }
};

using Conflict = std::vector<Item>;

class Engine {
public:
    Engine(const BpaSystem& system, const NormTable& norms, const SearchProblem& problem,
           const SearchBounds& bounds, unsigned worker, unsigned workers,
           std::atomic<bool>& stop, std::chrono::steady_clock::time_point deadline)
        : system_(system), norms_(norms), problem_(problem), bounds_(bounds), worker_(worker),
          workers_(workers), stop_(stop), deadline_(deadline), pb_(system.variable_count()) {
        const std::size_t n = system.variable_count();
        if (n <= 16) {
            for (std::uint32_t m = 0; m < (1U << n); ++m) {
                subsets_.push_back(m);
            }
            std::stable_sort(subsets_.begin(), subsets_.end(), [](std::uint32_t a, std::uint32_t b) {
                return std::popcount(a) < std::popcount(b);
            });
        }
        if (problem.hint) {
            const Base hint(n, norms, *problem.hint);
            for (ContextId c = 0; c < hint.context_count(); ++c) {
                for (Var x = 0; x < n; ++x) {
                    Option o;
                    if (hint.role(c, x) == Role::Prime) {
                        o.prime = true;
                        o.red = hint.red_set(c, x);
                    } else if (hint.role(c, x) == Role::NonPrime) {
                        o.body = hint.body(c, x);
                    } else {
                        continue;
                    }
                    hints_.emplace(hint_key(hint.context(c), x), std::move(o));
                }
            }
        }
    }

    SearchOutcome run() {
        SearchOutcome out;
        const auto start = std::chrono::steady_clock::now();
        for (Var x = 0; x < system_.variable_count(); ++x) {
            queue_.push_back(Obligation{Obligation::Kind::Decide, 0, x, 0, 0, kNoItem});
        }
        Stack front;
        for (std::size_t g = problem_.goals.size(); g-- > 0;) {
            Obligation ob;
            ob.kind = Obligation::Kind::Goal;
            ob.goal = g;
            front = std::make_shared<const Cell>(Cell{ob, front});
        }
        bool aborted = false;
        try {
            solve(front, 0, 0);
        } catch (const Abort&) {
            aborted = true;
        }
        stats_.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.base = found_;
        out.complete = !aborted && !incomplete_;
        stats_.budget_exhausted = aborted && !found_ && !stop_.load();
        out.stats = stats_;
        return out;
    }

private:
    static std::string hint_key(const ContextSet& s, Var x) {
        std::string k;
        for (Var v : s.members()) {
            k += std::to_string(v) + ",";
        }
        return k + "|" + std::to_string(x);
    }

    std::size_t body_bound(Var x) const {
        const Norm n = norms_[x];
        if (bounds_.max_body != 0 && bounds_.max_body < n) {
            return bounds_.max_body;
        }
        return static_cast<std::size_t>(n);
    }

    bool admissible(ContextId c, Var x, const Option& o) const {
        if (o.prime) {
            return o.red.universe() == system_.variable_count();
        }
        const ContextSet& r = pb_.context(c);
        if (o.body.empty() || o.body.size() > body_bound(x)) {
            return false;
        }
        const Var last = o.body.back();
        if (last >= system_.variable_count() || r.contains(last) || last == x) {
            return false;
        }
        return o.body.size() != 1 || last < x;
    }

    // Options for one item, lazily: the hint, single-prime bodies, every
    // propagation set, then longer bodies (shortest first, lexicographic).
    class Options {
    public:
        Options(const Engine& e, ContextId c, Var x) : e_(e), c_(c), x_(x) {
            auto it = e.hints_.find(hint_key(e.pb_.context(c), x));
            if (it != e.hints_.end() && e.admissible(c, x, it->second)) {
                hint_ = it->second;
            }
        }

        std::optional<Option> next() {
            const bool first = phase_ == 0;
            while (true) {
                std::optional<Option> o = raw_next();
                if (!o || first) {
                    return o;
                }
                // already tried as the hint
                if (hint_ && *o == *hint_) {
                    continue;
                }
                return o;
            }
        }

    private:
        std::optional<Option> raw_next() {
            const std::size_t n = e_.system_.variable_count();
            if (phase_ == 0) {
                phase_ = 1;
                if (hint_) {
                    return hint_;
                }
            }
            if (e_.problem_.hint_only) {
                return std::nullopt;
            }
            if (phase_ == 1) {
                while (single_ < x_) {
                    const Var b = single_++;
                    Option o;
                    o.body = {b};
                    if (e_.admissible(c_, x_, o)) {
                        return o;
                    }
                }
                phase_ = 2;
            }
            if (phase_ == 2) {
                const std::uint64_t total = n >= 63 ? 0 : (std::uint64_t{1} << n);
                if (subset_ < total) {
                    const std::uint64_t mask = e_.subsets_.empty() ? subset_ : e_.subsets_[subset_];
                    ++subset_;
                    Option o;
                    o.prime = true;
                    o.red = ContextSet(n);
                    for (Var v = 0; v < n; ++v) {
                        if ((mask >> v) & 1U) {
                            o.red.insert(v);
                        }
                    }
                    return o;
                }
                phase_ = 3;
                len_ = 2;
                word_.assign(len_, 0);
            }
            while (len_ <= e_.body_bound(x_) && n > 0) {
                Option o;
                o.body = word_;
                // advance the counter
                std::size_t i = len_;
                while (i > 0 && word_[i - 1] + 1 == n) {
                    word_[--i] = 0;
                }
                if (i == 0) {
                    ++len_;
                    word_.assign(len_, 0);
                } else {
                    ++word_[i - 1];
                }
                if (e_.admissible(c_, x_, o)) {
                    return o;
                }
            }
            return std::nullopt;
        }

        const Engine& e_;
        ContextId c_;
        Var x_;
        std::optional<Option> hint_;
        int phase_ = 0;
        Var single_ = 0;
        std::uint64_t subset_ = 0;
        std::size_t len_ = 0;
        Configuration word_;
    };

    void tick() {
        ++stats_.nodes;
        if (stop_.load(std::memory_order_relaxed)) {
            throw Abort{};
        }
        if (stats_.nodes > bounds_.max_nodes) {
            throw Abort{};
        }
        if ((stats_.nodes & 255U) == 0 && std::chrono::steady_clock::now() > deadline_) {
            throw Abort{};
        }
    }

    enum class Eval { Pass, Fail };

    Eval check_pair(ContextId c, Var x, std::span<const Var> body) {
        try {
            const PairReport r = consistent_pair(system_, pb_, c, x, body, bounds_.caps);
            if (r.verdict == PairVerdict::Consistent) {
                return Eval::Pass;
            }
            if (r.verdict == PairVerdict::Indeterminate) {
                incomplete_ = true;
                ++stats_.indeterminate;
            }
            return Eval::Fail;
        } catch (const PdError&) {
            return Eval::Fail;
        }
    }

    Eval evaluate(const Obligation& ob) {
        switch (ob.kind) {
        case Obligation::Kind::Goal: {
            const auto& [a, b] = problem_.goals[ob.goal];
            try {
                return pd_image(pb_, 0, a) == pd_image(pb_, 0, b) ? Eval::Pass : Eval::Fail;
            } catch (const PdError&) {
                return Eval::Fail;
            }
        }
        case Obligation::Kind::Decide:
            pb_.role(ob.c, ob.x);
            return Eval::Pass;
        case Obligation::Kind::Shape: {
            const Decision& d = pb_.decision(ob.c, ob.x);
            const Unit& u = pb_.unit(ob.c, ob.x);
            if (u.status != PdStatus::Ok || u.image.size() > norms_[ob.x]) {
                return Eval::Fail;
            }
            if (pb_.role(ob.c, d.body.back()) != Kind::Prime) {
                return Eval::Fail;
            }
            return u.image == d.body ? Eval::Pass : Eval::Fail;
        }
        case Obligation::Kind::DecCheck: {
            const Configuration body = pb_.decision(ob.c, ob.x).body;
            return check_pair(ob.c, ob.x, body);
        }
        case Obligation::Kind::PropCheck: {
            const Configuration pair{ob.y, ob.x};
            return check_pair(ob.c, ob.x, pair);
        }
        }
        return Eval::Fail;
    }

    static Conflict normalized(Conflict k) {
        std::sort(k.begin(), k.end());
        k.erase(std::unique(k.begin(), k.end()), k.end());
        return k;
    }

    // nullopt on success (found_ holds the base), else a conflict set: the
    // decisions that together rule out every completion.
    std::optional<Conflict> solve(Stack front, std::size_t qpos, std::size_t depth) {
        while (true) {
            Obligation ob;
            if (front) {
                ob = front->ob;
            } else if (qpos < queue_.size()) {
                ob = queue_[qpos];
            } else {
                break;
            }
            Item need = kNoItem;
            pb_.begin_reads();
            try {
                if (evaluate(ob) == Eval::Pass) {
                    if (front) {
                        front = front->next;
                    } else {
                        ++qpos;
                    }
                    continue;
                }
                Conflict k = pb_.reads();
                if (ob.owner != kNoItem) {
                    k.push_back(ob.owner);
                }
                return normalized(std::move(k));
            } catch (const Undecided& u) {
                need = u.item;
            }
            return branch(front, qpos, depth, need);
        }
        PreBase base = pb_.to_pre_base();
        if (problem_.accept && !problem_.accept(base)) {
            return pb_.decided_items();
        }
        found_ = std::move(base);
        return std::nullopt;
    }

    std::optional<Conflict> branch(const Stack& front, std::size_t qpos, std::size_t depth,
                                   Item j) {
        const ContextId c = pb_.context_of(j);
        const Var x = pb_.var_of(j);
        Options options(*this, c, x);
        Conflict acc;
        std::size_t index = 0;
        while (auto o = options.next()) {
            if (depth == 0 && workers_ > 1 && (index++ % workers_) != worker_) {
                continue;
            }
            tick();
            Stack next = front;
            const std::size_t queue_size = queue_.size();
            bool created = false;
            if (o->prime) {
                auto target = pb_.find_context(o->red);
                if (!target) {
                    if (pb_.context_count() >= bounds_.max_contexts) {
                        incomplete_ = true;
                        acc.push_back(j);
                        continue;
                    }
                    target = pb_.add_context(o->red);
                    created = true;
                    stats_.max_contexts = std::max(stats_.max_contexts, pb_.context_count());
                    for (Var v = 0; v < system_.variable_count(); ++v) {
                        if (!o->red.contains(v)) {
                            queue_.push_back(
                                Obligation{Obligation::Kind::Decide, *target, v, 0, 0, j});
                        }
                    }
                }
                pb_.set(c, x, Decision{Kind::Prime, *target, {}});
                const auto members = o->red.members();
                for (auto it = members.rbegin(); it != members.rend(); ++it) {
                    next = std::make_shared<const Cell>(
                        Cell{Obligation{Obligation::Kind::PropCheck, c, x, *it, 0, j}, next});
                }
            } else {
                pb_.set(c, x, Decision{Kind::NonPrime, 0, o->body});
                next = std::make_shared<const Cell>(
                    Cell{Obligation{Obligation::Kind::DecCheck, c, x, 0, 0, j}, next});
                next = std::make_shared<const Cell>(
                    Cell{Obligation{Obligation::Kind::Shape, c, x, 0, 0, j}, next});
            }
            std::optional<Conflict> r;
            try {
                r = solve(next, qpos, depth + 1);
            } catch (...) {
                undo(c, x, created, queue_size);
                throw;
            }
            undo(c, x, created, queue_size);
            if (!r) {
                return r;
            }
            if (!std::binary_search(r->begin(), r->end(), j)) {
                ++stats_.backjumps;
                return r;
            }
            for (Item i : *r) {
                if (i != j) {
                    acc.push_back(i);
                }
            }
        }
        return normalized(std::move(acc));
    }

    void undo(ContextId c, Var x, bool created, std::size_t queue_size) {
        pb_.clear(c, x);
        if (created) {
            pb_.pop_context();
        }
        queue_.resize(queue_size);
    }

    const BpaSystem& system_;
    const NormTable& norms_;
    const SearchProblem& problem_;
    const SearchBounds& bounds_;
    unsigned worker_;
    unsigned workers_;
    std::atomic<bool>& stop_;
    std::chrono::steady_clock::time_point deadline_;
    PartialBase pb_;
    std::vector<Obligation> queue_;
    std::vector<std::uint32_t> subsets_;
    std::unordered_map<std::string, Option> hints_;
    std::optional<PreBase> found_;
    bool incomplete_ = false;
    SearchStats stats_;
};

} // namespace

SearchOutcome search_bases(const BpaSystem& system, const NormTable& norms,
                           const SearchProblem& problem, const SearchBounds& bounds) {
    const auto deadline = std::chrono::steady_clock::now() + bounds.time_limit;
    std::atomic<bool> stop{false};
    const unsigned workers = std::max(1U, bounds.jobs);
    SearchOutcome merged;
    bool body_reduced = false;
    for (Var x = 0; x < system.variable_count(); ++x) {
        if (bounds.max_body != 0 && bounds.max_body < norms[x]) {
            body_reduced = true;
        }
    }
    if (workers == 1) {
        Engine engine(system, norms, problem, bounds, 0, 1, stop, deadline);
        merged = engine.run();
    } else {
        std::vector<SearchOutcome> outs(workers);
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < workers; ++w) {
            threads.emplace_back([&, w] {
                Engine engine(system, norms, problem, bounds, w, workers, stop, deadline);
                outs[w] = engine.run();
                if (outs[w].base) {
                    stop.store(true);
                }
            });
        }
        for (auto& t : threads) {
            t.join();
        }
        merged.complete = true;
        for (const SearchOutcome& o : outs) {
            if (o.base && !merged.base) {
                merged.base = o.base;
            }
            merged.complete = merged.complete && o.complete;
            merged.stats.nodes += o.stats.nodes;
            merged.stats.backjumps += o.stats.backjumps;
            merged.stats.indeterminate += o.stats.indeterminate;
            merged.stats.max_contexts = std::max(merged.stats.max_contexts, o.stats.max_contexts);
            merged.stats.budget_exhausted = merged.stats.budget_exhausted || o.stats.budget_exhausted;
            merged.stats.seconds = std::max(merged.stats.seconds, o.stats.seconds);
        }
    }
    // A reduced body bound no longer covers the whole space.
    if (body_reduced) {
        merged.complete = false;
        merged.stats.body_bound_reduced = true;
    }
    return merged;
}

bool in_search_space(const BpaSystem& system, const NormTable& norms, const PreBase& base,
                     const SearchBounds& bounds) {
    SearchProblem problem;
    problem.hint = base;
    problem.hint_only = true;
    const SearchOutcome out = search_bases(system, norms, problem, bounds);
    if (!out.base) {
        return false;
    }
    // Same choices: compare through the compiled views.
    const Base a(system.variable_count(), norms, *out.base);
    const Base b(system.variable_count(), norms, base);
    if (a.context_count() != b.context_count()) {
        return false;
    }
    for (ContextId c = 0; c < a.context_count(); ++c) {
        const auto d = b.find_context(a.context(c));
        if (!d) {
            return false;
        }
        for (Var x = 0; x < system.variable_count(); ++x) {
            if (a.role(c, x) != b.role(*d, x) || a.unit(c, x).image != b.unit(*d, x).image ||
                a.context(a.unit(c, x).out) != b.context(b.unit(*d, x).out)) {
                return false;
            }
        }
    }
    return true;
}

Strategy parse_strategy(const std::string& name) {
    if (name == "guided") {
        return Strategy::Guided;
    }
    if (name == "exhaustive") {
        return Strategy::Exhaustive;
    }
    if (name == "auto") {
        return Strategy::Auto;
    }
    throw Error("unknown strategy '" + name + "'");
}

const char* to_string(Strategy s) noexcept {
    switch (s) {
    case Strategy::Guided:
        return "guided";
    case Strategy::Exhaustive:
        return "exhaustive";
    case Strategy::Auto:
        return "auto";
    }
    return "?";
}

const char* to_string(Status s) noexcept {
    switch (s) {
    case Status::Equivalent:
        return "equivalent";
    case Status::Inequivalent:
        return "inequivalent";
    case Status::Unknown:
        return "unknown";
    }
    return "?";
}

CertificateCheck verify_certificate(const BpaSystem& system, const NormTable& norms,
                                    const PreBase& base, const ClosureCaps& caps,
                                    const std::vector<std::pair<Configuration, Configuration>>& goals) {
    CertificateCheck out;
    Diagnostics d = check_pre_base(system, base);
    if (!d.empty()) {
        out.failure = "pre-base: " + d.front().message;
        return out;
    }
    const Base compiled(system.variable_count(), norms, base);
    d = check_base(system, compiled);
    if (!d.empty()) {
        out.failure = "base: " + d.front().message;
        return out;
    }
    const ConsistencyReport report = check_consistency(system, compiled, caps);
    if (report.verdict != PairVerdict::Consistent) {
        out.failure = std::string("consistency: ") + to_string(report.verdict);
        return out;
    }
    const auto empty = compiled.find_context(ContextSet(system.variable_count()));
    for (const auto& [a, b] : goals) {
        try {
            if (pd_image(compiled, *empty, a) != pd_image(compiled, *empty, b)) {
                out.failure = "decompositions of " + render(system, a) + " and " +
                              render(system, b) + " differ";
                return out;
            }
        } catch (const PdError& e) {
            out.failure = e.what();
            return out;
        }
    }
    out.ok = true;
    return out;
}

Verdict decide_equivalence(const BpaSystem& system, std::span<const Var> left,
                           std::span<const Var> right, const DecideParams& params) {
    Configuration roots(left.begin(), left.end());
    roots.insert(roots.end(), right.begin(), right.end());
    const Restriction restriction = restrict_to(system, roots);
    Verdict v;
    v.system = restriction.system;
    const BpaSystem& sub = v.system;
    const Configuration l = restriction.translate(left);
    const Configuration r = restriction.translate(right);
    const NormTable norms = compute_norms(sub);
    const std::vector<std::pair<Configuration, Configuration>> goals{{l, r}};
    const ClosureCaps& caps = params.bounds.caps;

    std::optional<PreBase> proposal;
    if (params.strategy != Strategy::Exhaustive) {
        ProposeResult p = propose_base(sub, norms, params.propose);
        if (p.usable) {
            const CertificateCheck check = verify_certificate(sub, norms, p.base, caps, {});
            if (check.ok) {
                proposal = p.base;
                if (verify_certificate(sub, norms, p.base, caps, goals).ok) {
                    v.status = Status::Equivalent;
                    v.certificate = std::move(p.base);
                    v.route = "guided";
                    return v;
                }
            }
        }
        if (params.strategy == Strategy::Guided) {
            v.route = "guided";
            v.evidence = "proposed base does not certify the pair";
            return v;
        }
    }

    SearchProblem problem;
    problem.goals = goals;
    problem.hint = proposal;
    const SearchOutcome out = search_bases(sub, norms, problem, params.bounds);
    v.stats = out.stats;
    v.route = "exhaustive";
    if (out.base) {
        const CertificateCheck check = verify_certificate(sub, norms, *out.base, caps, goals);
        if (check.ok) {
            v.status = Status::Equivalent;
            v.certificate = *out.base;
            return v;
        }
        v.evidence = "search produced a base that failed re-verification: " + check.failure;
        return v;
    }
    if (out.complete) {
        v.status = Status::Inequivalent;
        v.evidence = "search space exhausted";
        return v;
    }
    v.evidence = out.stats.indeterminate > 0 ? "consistency checks truncated"
                                             : "search budget exhausted";
    if (params.strategy == Strategy::Auto && params.oracle_refutation) {
        const OracleAnswer answer = approximant_check(sub, l, r, params.propose.oracle);
        if (answer.value == Tri::No &&
            verify_refutation(sub, *answer.refutation, params.propose.oracle.tau_cap)) {
            v.status = Status::Inequivalent;
            v.route = "oracle";
            v.evidence = "oracle refutation";
            v.refutation = answer.refutation;
        }
    }
    return v;
}

nlohmann::json certificate_to_json(const BpaSystem& system, const PreBase& base) {
    nlohmann::json doc = base_to_json(system, base);
    nlohmann::json names = nlohmann::json::array();
    for (Var v = 0; v < system.variable_count(); ++v) {
        names.push_back(system.var_name(v));
    }
    doc["variables"] = std::move(names);
    return doc;
}

nlohmann::json verdict_to_json(const Verdict& verdict, const DecideParams& params) {
    nlohmann::json doc;
    doc["status"] = to_string(verdict.status);
    doc["route"] = verdict.route;
    if (verdict.certificate) {
        doc["certificate"] = certificate_to_json(verdict.system, *verdict.certificate);
    }
    if (!verdict.evidence.empty()) {
        doc["evidence"] = verdict.evidence;
    }
    if (verdict.refutation) {
        doc["refutation"] = refutation_to_json(verdict.system, *verdict.refutation);
    }
    doc["budgets"] = {
        {"strategy", to_string(params.strategy)},
        {"max_nodes", params.bounds.max_nodes},
        {"time_limit_ms", params.bounds.time_limit.count()},
        {"len_cap", params.bounds.caps.len_cap},
        {"size_cap", params.bounds.caps.size_cap},
        {"closure", params.bounds.caps.mode == ClosureMode::Summary ? "summary" : "capped"},
        {"nodes", verdict.stats.nodes},
        {"indeterminate_checks", verdict.stats.indeterminate},
        {"budget_exhausted", verdict.stats.budget_exhausted},
    };
    return doc;
}

} // namespace nbpa
