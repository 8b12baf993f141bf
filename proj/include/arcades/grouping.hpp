#pragma once

// Assignment of classes to blocks: declared namespaces, clusters recovered
// from the dependency graph, or a user-supplied mapping.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "arcades/code_model.hpp"
#include "arcades/depgraph.hpp"

namespace arcades {

enum class GroupingMode { Namespace, Recovered, AdHoc };
enum class ClusterAlgorithm { LabelPropagation, GreedyModularity };

inline std::string_view to_string(GroupingMode m) {
    switch (m) {
        case GroupingMode::Namespace: return "namespace";
        case GroupingMode::Recovered: return "recovered";
        case GroupingMode::AdHoc: return "adhoc";
    }
    return "namespace";
}

inline std::string_view to_string(ClusterAlgorithm a) {
    return a == ClusterAlgorithm::LabelPropagation ? "lp" : "greedy";
}

struct Group {
    std::string id;
    std::string label;
    std::vector<std::string> members;  // sorted class ids

    bool operator==(const Group&) const = default;
};

struct Grouping {
    GroupingMode mode = GroupingMode::Namespace;
    std::vector<Group> groups;
    std::optional<double> quality;  // modularity of recovered partitions

    bool operator==(const Grouping&) const = default;

    /// class id -> index into `groups`
    std::unordered_map<std::string, std::size_t> membership() const {
        std::unordered_map<std::string, std::size_t> out;
        for (std::size_t i = 0; i < groups.size(); ++i)
            for (const auto& c : groups[i].members) out.emplace(c, i);
        return out;
    }
};

inline Grouping group_by_namespace(const CodeModel& m) {
    Grouping g;
    g.mode = GroupingMode::Namespace;
    std::map<std::string, std::size_t> slot;
    std::vector<PackageEntity> pkgs = m.packages;
    std::sort(pkgs.begin(), pkgs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& p : pkgs) {
        slot[p.id] = g.groups.size();
        g.groups.push_back({p.id, p.name, {}});
    }
    for (const auto& c : m.classes) g.groups[slot.at(c.package_id)].members.push_back(c.id);
    for (auto& grp : g.groups) std::sort(grp.members.begin(), grp.members.end());
    return g;
}

// ---------------------------------------------------------------------------
// Weighted undirected projection and modularity

/// Undirected projection of a dependency graph. Node i is `nodes[i]` (sorted
/// ids); `adjacency[i]` maps neighbour index to summed edge weight.
struct WeightedGraph {
    std::vector<std::string> nodes;
    std::vector<std::map<std::size_t, double>> adjacency;
    double total_weight = 0.0;  // each undirected edge counted once

    double degree(std::size_t i) const {
        double d = 0.0;
        for (const auto& [_, w] : adjacency[i]) d += w;
        return d;
    }
};

/// Sums multiplicities across kinds and directions; IsA edges count
/// `isa_weight` times.
inline WeightedGraph project(const DependencyGraph& g, double isa_weight = 2.0) {
    WeightedGraph wg;
    wg.nodes = g.nodes;
    std::sort(wg.nodes.begin(), wg.nodes.end());
    wg.adjacency.resize(wg.nodes.size());
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < wg.nodes.size(); ++i) index.emplace(wg.nodes[i], i);
    for (const auto& e : g.edges) {
        auto a = index.find(e.referrer), b = index.find(e.referent);
        if (a == index.end() || b == index.end() || a->second == b->second) continue;
        const double w = static_cast<double>(e.multiplicity) * (e.kind == DepKind::IsA ? isa_weight : 1.0);
        wg.adjacency[a->second][b->second] += w;
        wg.adjacency[b->second][a->second] += w;
        wg.total_weight += w;
    }
    return wg;
}

/// Newman modularity Q = sum_c (e_c - a_c^2), where e_c is the fraction of
/// edge weight inside community c and a_c the fraction of edge ends attached
/// to it. Zero for an edgeless graph.
inline double modularity(const WeightedGraph& wg, const std::vector<std::size_t>& community) {
    if (wg.total_weight <= 0.0) return 0.0;
    std::map<std::size_t, double> inside, ends;
    for (std::size_t i = 0; i < wg.nodes.size(); ++i) {
        for (const auto& [j, w] : wg.adjacency[i]) {
            ends[community[i]] += w;
            if (community[i] == community[j] && i < j) inside[community[i]] += w;
        }
    }
    double q = 0.0;
    const double two_w = 2.0 * wg.total_weight;
    for (const auto& [c, d] : ends) {
        const double a = d / two_w;
        q += inside[c] / wg.total_weight - a * a;
    }
    return q;
}

namespace detail {

inline constexpr double kGainEpsilon = 1e-12;
inline constexpr std::size_t kRelabelledStarts = 6;
// Kernighan-Lin sweeps and relabelled restarts cost O(n^2) per pass; beyond
// this many nodes the cheaper merge / move refinement stands alone.
inline constexpr std::size_t kThoroughLimit = 150;

/// Community labels rewritten so each is the smallest member index.
inline std::vector<std::size_t> normalize_labels(const std::vector<std::size_t>& labels) {
    std::map<std::size_t, std::size_t> first;
    std::vector<std::size_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = first.emplace(labels[i], i).first->second;
    return out;
}

/// Agglomerative merging by largest modularity gain, starting from the
/// communities in `rep` (each label the smallest member index).
inline std::vector<std::size_t> agglomerate(const WeightedGraph& wg, std::vector<std::size_t> rep) {
    const std::size_t n = wg.nodes.size();
    const double two_w = 2.0 * wg.total_weight;
    std::vector<double> ends(n, 0.0);  // a_c, indexed by representative
    std::vector<std::map<std::size_t, double>> between(n);
    for (std::size_t i = 0; i < n; ++i) {
        ends[rep[i]] += wg.degree(i) / two_w;
        for (const auto& [j, w] : wg.adjacency[i])
            if (rep[i] != rep[j]) between[rep[i]][rep[j]] += w;
    }

    for (;;) {
        double best = 0.0;
        std::size_t bi = 0, bj = 0;
        bool found = false;
        for (std::size_t i = 0; i < n; ++i) {
            for (auto it = between[i].upper_bound(i); it != between[i].end(); ++it) {
                const double gain = it->second / wg.total_weight - 2.0 * ends[i] * ends[it->first];
                if (!found || gain > best + kGainEpsilon) {
                    best = gain;
                    bi = i;
                    bj = it->first;
                    found = true;
                }
            }
        }
        if (!found || best <= kGainEpsilon) break;

        // merge bj into bi (bi < bj keeps the smallest member as representative)
        ends[bi] += ends[bj];
        ends[bj] = 0.0;
        auto row_j = std::move(between[bj]);
        between[bj].clear();
        for (const auto& [k, w] : row_j) {
            if (k == bi) continue;
            between[bi][k] += w;
            between[k].erase(bj);
            between[k][bi] += w;
        }
        between[bi].erase(bj);
        for (auto& r : rep)
            if (r == bj) r = bi;
    }
    return rep;
}

/// Moves single nodes to the neighbouring (or a fresh) community with the
/// largest modularity gain, in node order, until no move gains. Returns
/// whether anything moved.
inline bool move_vertices(const WeightedGraph& wg, std::vector<std::size_t>& label) {
    const std::size_t n = wg.nodes.size();
    const double w = wg.total_weight;
    std::map<std::size_t, double> tot;
    std::map<std::size_t, std::size_t> size;
    for (std::size_t i = 0; i < n; ++i) {
        tot[label[i]] += wg.degree(i);
        ++size[label[i]];
    }
    std::size_t fresh = n;  // labels >= n name communities created here
    bool any = false;
    for (bool moved = true; moved;) {
        moved = false;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t from = label[i];
            const double k = wg.degree(i);
            std::map<std::size_t, double> link;  // weight from i into each neighbouring community
            for (const auto& [j, x] : wg.adjacency[i]) link[label[j]] += x;
            const double stay = link[from];
            auto gain = [&](double k_to, double tot_to) {
                return (k_to - stay) / w + k * (tot[from] - k - tot_to) / (2.0 * w * w);
            };
            double best = kGainEpsilon;
            std::optional<std::size_t> target;
            for (const auto& [c, x] : link) {
                if (c == from) continue;
                const double dq = gain(x, tot[c]);
                if (dq > best + kGainEpsilon) {
                    best = dq;
                    target = c;
                }
            }
            if (size[from] > 1 && gain(0.0, 0.0) > best + kGainEpsilon) target = fresh++;
            if (!target) continue;
            tot[from] -= k;
            --size[from];
            tot[*target] += k;
            ++size[*target];
            label[i] = *target;
            moved = any = true;
        }
    }
    return any;
}

/// One Kernighan-Lin style sweep: every node moves exactly once, each step
/// taking the best remaining move even when it loses modularity, and the
/// best intermediate partition is kept. Escapes optima that no single
/// positive move or merge can leave. Returns whether Q improved.
inline bool kl_sweep(const WeightedGraph& wg, std::vector<std::size_t>& label) {
    const std::size_t n = wg.nodes.size();
    const double w = wg.total_weight;
    std::map<std::size_t, double> tot;
    std::map<std::size_t, std::size_t> size;
    std::size_t fresh = 0;
    for (std::size_t i = 0; i < n; ++i) {
        tot[label[i]] += wg.degree(i);
        ++size[label[i]];
        fresh = std::max(fresh, label[i] + 1);
    }
    std::vector<bool> moved(n, false);
    std::vector<std::size_t> cur = label, best_state = label;
    double total = 0.0, best_total = 0.0;
    for (std::size_t step = 0; step < n; ++step) {
        bool found = false;
        double best = 0.0;
        std::size_t bi = 0, bc = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (moved[i] || wg.adjacency[i].empty()) continue;
            const std::size_t from = cur[i];
            const double k = wg.degree(i);
            std::map<std::size_t, double> link;
            for (const auto& [j, x] : wg.adjacency[i]) link[cur[j]] += x;
            const double stay = link[from];
            auto consider = [&](std::size_t c, double k_to, double tot_to) {
                const double dq = (k_to - stay) / w + k * (tot[from] - k - tot_to) / (2.0 * w * w);
                if (!found || dq > best + kGainEpsilon) {
                    found = true;
                    best = dq;
                    bi = i;
                    bc = c;
                }
            };
            for (const auto& [c, x] : link)
                if (c != from) consider(c, x, tot[c]);
            if (size[from] > 1) consider(fresh, 0.0, 0.0);
        }
        if (!found) break;
        const double k = wg.degree(bi);
        tot[cur[bi]] -= k;
        --size[cur[bi]];
        tot[bc] += k;
        ++size[bc];
        if (bc == fresh) ++fresh;
        cur[bi] = bc;
        moved[bi] = true;
        total += best;
        if (total > best_total + kGainEpsilon) {
            best_total = total;
            best_state = cur;
        }
    }
    if (best_total <= kGainEpsilon) return false;
    label = std::move(best_state);
    return true;
}

/// Merges, then alternates refinement and re-merging until Q stops rising.
inline std::vector<std::size_t> polish(const WeightedGraph& wg, std::vector<std::size_t> labels) {
    auto rep = agglomerate(wg, normalize_labels(labels));
    const bool thorough = wg.nodes.size() <= kThoroughLimit;
    while (move_vertices(wg, rep) || (thorough && kl_sweep(wg, rep))) rep = agglomerate(wg, normalize_labels(rep));
    return normalize_labels(rep);
}

/// `wg` with node i renamed perm[i].
inline WeightedGraph relabelled(const WeightedGraph& wg, const std::vector<std::size_t>& perm) {
    WeightedGraph out;
    out.nodes.resize(wg.nodes.size());
    out.adjacency.resize(wg.nodes.size());
    out.total_weight = wg.total_weight;
    for (std::size_t i = 0; i < wg.nodes.size(); ++i) {
        out.nodes[perm[i]] = wg.nodes[i];
        for (const auto& [j, w] : wg.adjacency[i]) out.adjacency[perm[i]][perm[j]] = w;
    }
    return out;
}

/// Greedy modularity maximisation. Two starts, pure agglomeration and
/// single-node moves from singletons, are each polished by merging plus
/// move / Kernighan-Lin refinement. The same runs repeat on a few node
/// relabellings from a fixed seed so that symmetric graphs are not at the
/// mercy of one tie-break order (small graphs only, see kThoroughLimit). The highest Q wins, earliest on ties.
/// Returns the community representative (smallest member index) of every
/// node.
inline std::vector<std::size_t> greedy_modularity(const WeightedGraph& wg) {
    const std::size_t n = wg.nodes.size();
    std::vector<std::size_t> identity(n);
    for (std::size_t i = 0; i < n; ++i) identity[i] = i;
    if (wg.total_weight <= 0.0) return identity;

    auto run = [](const WeightedGraph& g, std::vector<std::size_t> start, bool move_first) {
        if (move_first) move_vertices(g, start);
        return polish(g, std::move(start));
    };
    std::vector<std::size_t> best;
    double best_q = 0.0;
    auto offer = [&](std::vector<std::size_t> labels) {
        labels = normalize_labels(labels);
        const double q = modularity(wg, labels);
        if (best.empty() || q > best_q + kGainEpsilon) {
            best = std::move(labels);
            best_q = q;
        }
    };

    std::mt19937 rng(0x5eed);
    auto perm = identity;
    const std::size_t starts = n <= kThoroughLimit ? kRelabelledStarts : 0;
    for (std::size_t s = 0; s <= starts; ++s) {
        if (s > 0)  // Fisher-Yates with raw engine output: identical on every platform
            for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
        const auto g = s == 0 ? wg : relabelled(wg, perm);
        for (bool move_first : {false, true}) {
            const auto labels = run(g, identity, move_first);
            std::vector<std::size_t> back(n);
            for (std::size_t i = 0; i < n; ++i) back[i] = labels[perm[i]];
            offer(std::move(back));
        }
    }
    return best;
}

/// Synchronous label propagation: every round each node adopts the label
/// carrying the most neighbour weight in the previous round, ties going to
/// the smallest label. Stops at a fixed point or after `max_rounds`.
inline std::vector<std::size_t> label_propagation(const WeightedGraph& wg, std::size_t max_rounds = 100) {
    const std::size_t n = wg.nodes.size();
    std::vector<std::size_t> label(n);
    for (std::size_t i = 0; i < n; ++i) label[i] = i;
    for (std::size_t round = 0; round < max_rounds; ++round) {
        std::vector<std::size_t> next = label;
        for (std::size_t i = 0; i < n; ++i) {
            if (wg.adjacency[i].empty()) continue;
            std::map<std::size_t, double> votes;
            for (const auto& [j, w] : wg.adjacency[i]) votes[label[j]] += w;
            auto winner = votes.begin();
            for (auto it = votes.begin(); it != votes.end(); ++it)
                if (it->second > winner->second + kGainEpsilon) winner = it;
            next[i] = winner->first;
        }
        if (next == label) break;
        label = std::move(next);
    }
    return label;
}

}  // namespace detail

/// Clusters the weighted projection of `g`. Groups are ordered by their
/// smallest member id and labelled `component-<k>`. Throws Error on an empty
/// node set.
inline Grouping recover_components(const DependencyGraph& g, ClusterAlgorithm algorithm, double isa_weight = 2.0) {
    if (g.nodes.empty()) throw Error("cannot recover components of an empty graph");
    const auto wg = project(g, isa_weight);
    const auto labels = algorithm == ClusterAlgorithm::GreedyModularity ? detail::greedy_modularity(wg)
                                                                        : detail::label_propagation(wg);

    // renumber communities by first appearance in sorted node order
    std::map<std::size_t, std::size_t> dense;
    std::vector<std::size_t> community(labels.size());
    Grouping out;
    out.mode = GroupingMode::Recovered;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, fresh] = dense.emplace(labels[i], dense.size());
        if (fresh) {
            const auto k = std::to_string(it->second);
            out.groups.push_back({"component:" + k, "component-" + k, {}});
        }
        community[i] = it->second;
        out.groups[it->second].members.push_back(wg.nodes[i]);
    }
    out.quality = modularity(wg, community);
    return out;
}

/// Builds a grouping from a `{label: [class names]}` document. Names may be
/// class ids or fully qualified class names. Classes left out land in an
/// `ungrouped` group. Throws SchemaError / ValidationError.
inline Grouping load_adhoc_grouping(std::string_view document, const CodeModel& m) {
    Json doc;
    try {
        doc = Json::parse(document);
    } catch (const Json::parse_error& e) {
        throw SchemaError("", e.what());
    }
    if (!doc.is_object()) throw SchemaError("", "expected object mapping group labels to class names");

    std::unordered_map<std::string, std::string> by_name;
    for (const auto& c : m.classes) {
        by_name.emplace(c.id, c.id);
        by_name.emplace(m.qualified_name(c), c.id);
    }

    constexpr std::string_view kUngrouped = "ungrouped";
    Grouping out;
    out.mode = GroupingMode::AdHoc;
    std::set<std::string> assigned;
    for (const auto& [label, names] : doc.items()) {
        if (!names.is_array()) throw SchemaError(label, "expected array of class names");
        Group grp{"adhoc:" + label, label, {}};
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (!names[i].is_string()) throw SchemaError(label + "[" + std::to_string(i) + "]", "expected string");
            const auto name = names[i].get<std::string>();
            auto it = by_name.find(name);
            if (it == by_name.end()) throw ValidationError("ad-hoc grouping names unknown class '" + name + "'");
            if (!assigned.insert(it->second).second)
                throw ValidationError("ad-hoc grouping lists class '" + name + "' twice");
            grp.members.push_back(it->second);
        }
        std::sort(grp.members.begin(), grp.members.end());
        out.groups.push_back(std::move(grp));
    }

    std::vector<std::string> rest;
    for (const auto& c : m.classes)
        if (!assigned.count(c.id)) rest.push_back(c.id);
    if (!rest.empty()) {
        std::sort(rest.begin(), rest.end());
        auto it = std::find_if(out.groups.begin(), out.groups.end(), [&](const Group& g) { return g.label == kUngrouped; });
        if (it == out.groups.end()) {
            out.groups.push_back({"adhoc:" + std::string(kUngrouped), std::string(kUngrouped), std::move(rest)});
        } else {
            it->members.insert(it->members.end(), rest.begin(), rest.end());
            std::sort(it->members.begin(), it->members.end());
        }
    }
    return out;
}

inline Json grouping_to_json(const Grouping& g) {
    Json groups = Json::array();
    for (const auto& grp : g.groups) groups.push_back(Json{{"id", grp.id}, {"label", grp.label}, {"members", grp.members}});
    return Json{{"mode", std::string(to_string(g.mode))},
                {"groups", std::move(groups)},
                {"quality", g.quality ? Json(*g.quality) : Json(nullptr)}};
}

}  // namespace arcades
