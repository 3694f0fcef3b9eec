#include "chasekit/hom.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_set>

namespace chasekit {

namespace {

struct Arg {
    int slot = -1; // movable slot, or -1 when the term is fixed
    Term term;     // fixed image when slot < 0
};

struct SrcAtom {
    Symbol predicate;
    std::vector<Arg> args;
    FactBase::const_iterator lo, hi;
};

class Search {
public:
    Search(const std::vector<Atom>& source, const FactBase& target, const Assignment& fixed,
           const HomOptions& opt, HomStats* stats)
        : target_(target), fixed_(fixed), opt_(opt), stats_(stats)
    {
        for (const auto& t : terms_of(source)) {
            if (t.is_constant() || fixed.count(t))
                continue;
            slot_terms_.push_back(t);
        }
        binding_.assign(slot_terms_.size(), std::nullopt);
        for (const auto& a : source) {
            SrcAtom s{a.predicate, {}, {}, {}};
            for (const auto& t : a.args) {
                Arg arg;
                if (t.is_constant()) {
                    arg.term = t;
                } else if (auto it = fixed.find(t); it != fixed.end()) {
                    arg.term = it->second;
                } else {
                    arg.slot = static_cast<int>(
                        std::lower_bound(slot_terms_.begin(), slot_terms_.end(), t) -
                        slot_terms_.begin());
                }
                s.args.push_back(arg);
            }
            std::tie(s.lo, s.hi) = target.range(a.predicate);
            atoms_.push_back(std::move(s));
        }
        if (opt_.injective) {
            for (const auto& t : terms_of(source))
                if (t.is_constant())
                    used_.insert(t);
            for (const auto& [k, v] : fixed)
                used_.insert(v);
        }
        done_.assign(atoms_.size(), false);
    }

    SearchStatus run(const std::function<bool(const Assignment&)>& visit)
    {
        if (stats_)
            ++stats_->searches;
        visit_ = &visit;
        for (const auto& a : atoms_)
            if (a.lo == a.hi)
                return SearchStatus::NotFound;
        recurse(0);
        if (aborted_)
            return SearchStatus::Aborted;
        return found_ ? SearchStatus::Found : SearchStatus::NotFound;
    }

private:
    const FactBase& target_;
    const Assignment& fixed_;
    HomOptions opt_;
    HomStats* stats_;
    std::vector<Term> slot_terms_;
    std::vector<std::optional<Term>> binding_;
    std::vector<SrcAtom> atoms_;
    std::vector<bool> done_;
    std::unordered_set<Term, TermHash> used_;
    const std::function<bool(const Assignment&)>* visit_ = nullptr;
    std::uint64_t nodes_ = 0;
    bool stop_ = false, aborted_ = false, found_ = false;

    bool tick()
    {
        ++nodes_;
        if (stats_)
            ++stats_->nodes;
        if (opt_.node_budget && nodes_ > opt_.node_budget) {
            aborted_ = stop_ = true;
            return false;
        }
        return true;
    }

    std::size_t pick()
    {
        std::size_t best = atoms_.size();
        std::size_t best_unbound = std::numeric_limits<std::size_t>::max();
        std::ptrdiff_t best_range = std::numeric_limits<std::ptrdiff_t>::max();
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (done_[i])
                continue;
            std::size_t unbound = 0;
            for (const auto& a : atoms_[i].args)
                if (a.slot >= 0 && !binding_[static_cast<std::size_t>(a.slot)])
                    ++unbound;
            auto range = atoms_[i].hi - atoms_[i].lo;
            if (unbound < best_unbound || (unbound == best_unbound && range < best_range)) {
                best = i;
                best_unbound = unbound;
                best_range = range;
            }
        }
        return best;
    }

    void emit()
    {
        found_ = true;
        Assignment h = fixed_;
        for (std::size_t i = 0; i < slot_terms_.size(); ++i)
            h[slot_terms_[i]] = *binding_[i];
        if (!(*visit_)(h))
            stop_ = true;
    }

    void recurse(std::size_t depth)
    {
        if (stop_)
            return;
        if (depth == atoms_.size()) {
            emit();
            return;
        }
        std::size_t i = pick();
        done_[i] = true;
        const SrcAtom& src = atoms_[i];
        std::vector<int> newly;
        for (auto it = src.lo; it != src.hi && !stop_; ++it) {
            if (!tick())
                break;
            const Atom& cand = *it;
            if (cand.args.size() != src.args.size())
                continue;
            bool ok = true;
            newly.clear();
            for (std::size_t p = 0; p < src.args.size() && ok; ++p) {
                const Arg& a = src.args[p];
                const Term& img = cand.args[p];
                if (a.slot < 0) {
                    ok = a.term == img;
                    continue;
                }
                auto& b = binding_[static_cast<std::size_t>(a.slot)];
                if (b) {
                    ok = *b == img;
                    continue;
                }
                if (opt_.nulls_to_nulls && !img.is_null()) {
                    ok = false;
                    continue;
                }
                if (opt_.injective && used_.count(img)) {
                    ok = false;
                    continue;
                }
                b = img;
                if (opt_.injective)
                    used_.insert(img);
                newly.push_back(a.slot);
            }
            if (ok)
                recurse(depth + 1);
            for (int s : newly) {
                if (opt_.injective)
                    used_.erase(*binding_[static_cast<std::size_t>(s)]);
                binding_[static_cast<std::size_t>(s)].reset();
            }
        }
        done_[i] = false;
    }
};

} // namespace

SearchStatus for_each_homomorphism(const std::vector<Atom>& source, const FactBase& target,
                                   const Assignment& fixed,
                                   const std::function<bool(const Assignment&)>& visit,
                                   const HomOptions& options, HomStats* stats)
{
    Search s(source, target, fixed, options, stats);
    return s.run(visit);
}

std::optional<Assignment> find_homomorphism(const std::vector<Atom>& source,
                                            const FactBase& target, const Assignment& fixed,
                                            const HomOptions& options, HomStats* stats)
{
    std::optional<Assignment> out;
    for_each_homomorphism(
        source, target, fixed,
        [&](const Assignment& h) {
            out = h;
            return false;
        },
        options, stats);
    return out;
}

std::size_t count_homomorphisms(const std::vector<Atom>& source, const FactBase& target,
                                const Assignment& fixed)
{
    std::size_t n = 0;
    for_each_homomorphism(source, target, fixed, [&](const Assignment&) {
        ++n;
        return true;
    });
    return n;
}

std::vector<Atom> apply_assignment(const std::vector<Atom>& atoms, const Assignment& h)
{
    std::vector<Atom> out;
    out.reserve(atoms.size());
    for (const auto& a : atoms) {
        Atom b{a.predicate, a.args};
        for (auto& t : b.args)
            if (auto it = h.find(t); it != h.end())
                t = it->second;
        out.push_back(std::move(b));
    }
    canonicalize(out);
    return out;
}

std::optional<Assignment> find_retraction(const FactBase& whole, const FactBase& part)
{
    Assignment fixed;
    for (const auto& t : part.terms())
        if (!t.is_constant())
            fixed[t] = t;
    return find_homomorphism(whole.atoms(), part, fixed);
}

bool exists_retraction(const FactBase& whole, const FactBase& part)
{
    return find_retraction(whole, part).has_value();
}

std::optional<Assignment> find_isomorphism(const FactBase& a, const FactBase& b)
{
    if (a.size() != b.size() || a.nulls().size() != b.nulls().size())
        return std::nullopt;
    HomOptions opt;
    opt.injective = true;
    opt.nulls_to_nulls = true;
    return find_homomorphism(a.atoms(), b, {}, opt);
}

bool are_isomorphic(const FactBase& a, const FactBase& b)
{
    if (a.size() != b.size())
        return false;
    if (canonical_code(a) != canonical_code(b))
        return false;
    return find_isomorphism(a, b).has_value();
}

bool embeds_injectively(const FactBase& a, const FactBase& b)
{
    HomOptions opt;
    opt.injective = true;
    return find_homomorphism(a.atoms(), b, {}, opt).has_value();
}

bool hom_equivalent(const FactBase& a, const FactBase& b)
{
    return find_homomorphism(a.atoms(), b).has_value() &&
           find_homomorphism(b.atoms(), a).has_value();
}

namespace {

// One null-connected component: atoms whose null arguments are indices
// into a local null table, constants kept by name.
struct Component {
    struct CAtom {
        std::string predicate;
        std::vector<int> nulls; // -1 for a constant position
        std::vector<std::string> constants;
    };
    std::size_t n = 0;
    std::vector<CAtom> atoms;
    std::vector<std::vector<std::size_t>> incident; // null -> atoms containing it
};

class Canonizer {
public:
    explicit Canonizer(const Component& c) : c_(c) {}

    std::string run()
    {
        std::vector<int> col(c_.n, 0);
        std::vector<int> prefix;
        search(col, prefix);
        return best_;
    }

private:
    const Component& c_;
    std::string best_;
    bool have_best_ = false;
    std::vector<int> best_labels_;
    std::vector<std::vector<int>> automorphisms_;

    std::string arg_text(const Component::CAtom& a, std::size_t p, int self,
                         const std::vector<int>& col) const
    {
        int v = a.nulls[p];
        if (v < 0)
            return "c:" + a.constants[p];
        if (v == self)
            return "*";
        return "n" + std::to_string(col[static_cast<std::size_t>(v)]);
    }

    // Iterated refinement: a null's new colour is the rank of its old colour
    // paired with the multiset of its incidences. Old colour order is kept.
    void refine(std::vector<int>& col) const
    {
        std::size_t classes = count_classes(col);
        for (;;) {
            std::vector<std::pair<int, std::string>> sig(c_.n);
            for (std::size_t v = 0; v < c_.n; ++v) {
                std::vector<std::string> parts;
                for (auto ai : c_.incident[v]) {
                    const auto& a = c_.atoms[ai];
                    std::string args;
                    for (std::size_t p = 0; p < a.nulls.size(); ++p)
                        args += arg_text(a, p, static_cast<int>(v), col) + ",";
                    for (std::size_t p = 0; p < a.nulls.size(); ++p)
                        if (a.nulls[p] == static_cast<int>(v))
                            parts.push_back(a.predicate + "/" + std::to_string(p) + "[" + args +
                                            "]");
                }
                std::sort(parts.begin(), parts.end());
                std::string joined;
                for (auto& s : parts)
                    joined += s + ";";
                sig[v] = {col[v], std::move(joined)};
            }
            auto sorted = sig;
            std::sort(sorted.begin(), sorted.end());
            sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
            for (std::size_t v = 0; v < c_.n; ++v)
                col[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), sig[v]) -
                                          sorted.begin());
            std::size_t now = sorted.size();
            if (now == classes)
                return;
            classes = now;
        }
    }

    static std::size_t count_classes(const std::vector<int>& col)
    {
        std::vector<int> c = col;
        std::sort(c.begin(), c.end());
        return static_cast<std::size_t>(std::unique(c.begin(), c.end()) - c.begin());
    }

    std::string leaf_string(const std::vector<int>& col) const
    {
        std::vector<std::string> rows;
        rows.reserve(c_.atoms.size());
        for (const auto& a : c_.atoms) {
            std::string r = a.predicate + "(";
            for (std::size_t p = 0; p < a.nulls.size(); ++p) {
                if (p)
                    r += ",";
                int v = a.nulls[p];
                r += v < 0 ? "c:" + a.constants[p]
                           : "#" + std::to_string(col[static_cast<std::size_t>(v)]);
            }
            rows.push_back(r + ")");
        }
        std::sort(rows.begin(), rows.end());
        std::string out;
        for (auto& r : rows)
            out += r + ";";
        return out;
    }

    // Orbit of `v` under the stored automorphisms that fix every prefix element.
    bool same_orbit(int v, const std::vector<int>& tried, const std::vector<int>& prefix) const
    {
        std::vector<int> parent(c_.n);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int x) {
            while (parent[static_cast<std::size_t>(x)] != x)
                x = parent[static_cast<std::size_t>(x)] =
                    parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            return x;
        };
        for (const auto& g : automorphisms_) {
            bool fixes = std::all_of(prefix.begin(), prefix.end(), [&](int p) {
                return g[static_cast<std::size_t>(p)] == p;
            });
            if (!fixes)
                continue;
            for (std::size_t x = 0; x < c_.n; ++x)
                parent[static_cast<std::size_t>(find(static_cast<int>(x)))] = find(g[x]);
        }
        int rv = find(v);
        return std::any_of(tried.begin(), tried.end(), [&](int u) { return find(u) == rv; });
    }

    void search(std::vector<int> col, std::vector<int>& prefix)
    {
        refine(col);
        if (count_classes(col) == c_.n) {
            std::string leaf = leaf_string(col);
            if (!have_best_ || leaf < best_) {
                best_ = std::move(leaf);
                best_labels_ = col;
                have_best_ = true;
            } else if (leaf == best_) {
                // col and best_labels_ give the same structure: best^-1 . col
                // is an automorphism.
                std::vector<int> inv(c_.n);
                for (std::size_t u = 0; u < c_.n; ++u)
                    inv[static_cast<std::size_t>(best_labels_[u])] = static_cast<int>(u);
                std::vector<int> g(c_.n);
                for (std::size_t u = 0; u < c_.n; ++u)
                    g[u] = inv[static_cast<std::size_t>(col[u])];
                automorphisms_.push_back(std::move(g));
            }
            return;
        }
        // First non-singleton cell in colour order.
        std::map<int, std::vector<int>> cells;
        for (std::size_t v = 0; v < c_.n; ++v)
            cells[col[v]].push_back(static_cast<int>(v));
        const std::vector<int>* cell = nullptr;
        for (const auto& [k, members] : cells)
            if (members.size() > 1) {
                cell = &members;
                break;
            }
        std::vector<int> tried;
        for (int v : *cell) {
            if (same_orbit(v, tried, prefix))
                continue;
            tried.push_back(v);
            std::vector<int> next(c_.n);
            for (std::size_t u = 0; u < c_.n; ++u)
                next[u] = col[u] * 2 + ((col[u] == col[static_cast<std::size_t>(v)] &&
                                         static_cast<int>(u) != v)
                                            ? 1
                                            : 0);
            prefix.push_back(v);
            search(std::move(next), prefix);
            prefix.pop_back();
        }
    }
};

} // namespace

std::string canonical_code(const std::vector<Atom>& input)
{
    std::vector<Atom> atoms = input;
    canonicalize(atoms);
    std::vector<Term> nulls;
    for (const auto& a : atoms)
        for (const auto& t : a.args)
            if (t.is_null())
                nulls.push_back(t);
    std::sort(nulls.begin(), nulls.end());
    nulls.erase(std::unique(nulls.begin(), nulls.end()), nulls.end());
    auto index = [&](const Term& t) {
        return static_cast<std::size_t>(std::lower_bound(nulls.begin(), nulls.end(), t) -
                                        nulls.begin());
    };

    std::vector<std::size_t> parent(nulls.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    std::string ground;
    for (const auto& a : atoms) {
        std::size_t first = nulls.size();
        for (const auto& t : a.args) {
            if (!t.is_null())
                continue;
            std::size_t i = index(t);
            if (first == nulls.size())
                first = i;
            else
                parent[find(i)] = find(first);
        }
        if (first == nulls.size())
            ground += a.text() + ";";
    }

    std::map<std::size_t, Component> comps;
    std::map<std::size_t, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < nulls.size(); ++i)
        members[find(i)].push_back(i);
    std::vector<int> local(nulls.size());
    for (auto& [root, ms] : members) {
        for (std::size_t k = 0; k < ms.size(); ++k)
            local[ms[k]] = static_cast<int>(k);
        comps[root].n = ms.size();
        comps[root].incident.resize(ms.size());
    }
    for (const auto& a : atoms) {
        std::size_t root = nulls.size();
        for (const auto& t : a.args)
            if (t.is_null()) {
                root = find(index(t));
                break;
            }
        if (root == nulls.size())
            continue;
        Component& c = comps[root];
        Component::CAtom ca;
        ca.predicate = a.predicate.str();
        for (const auto& t : a.args) {
            if (t.is_null()) {
                ca.nulls.push_back(local[index(t)]);
                ca.constants.emplace_back();
            } else {
                ca.nulls.push_back(-1);
                ca.constants.push_back(t.name.str());
            }
        }
        std::size_t ai = c.atoms.size();
        for (int v : ca.nulls)
            if (v >= 0 && (c.incident[static_cast<std::size_t>(v)].empty() ||
                           c.incident[static_cast<std::size_t>(v)].back() != ai))
                c.incident[static_cast<std::size_t>(v)].push_back(ai);
        c.atoms.push_back(std::move(ca));
    }

    std::vector<std::string> codes;
    for (auto& [root, c] : comps)
        codes.push_back("{" + Canonizer(c).run() + "}");
    std::sort(codes.begin(), codes.end());
    std::string out = "G[" + ground + "]";
    for (auto& c : codes)
        out += c;
    return out;
}

std::string canonical_code(const FactBase& f) { return canonical_code(f.atoms()); }

} // namespace chasekit
