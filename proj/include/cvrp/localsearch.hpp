#ifndef CVRP_LOCALSEARCH_HPP_
#define CVRP_LOCALSEARCH_HPP_

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "instance.hpp"
#include "rng.hpp"
#include "solution.hpp"

namespace cvrp {

    // Reverse-index entry: `owner` lists some vertex at `position` in its arcs.
    struct ArcOwner {
        int owner;
        int position;
    };

    // Immutable per-vertex arc lists: for every vertex the n_gs nearest
    // neighbors sorted by (cost, index), plus a reverse owner index so the
    // arcs incident to a vertex can be enumerated without a full scan. Shared
    // read-only between solvers.
    class MoveGeneratorSet {
    public:
        MoveGeneratorSet(const Instance& inst, const NeighborLists& neighbors, int n_gs_)
            : limit(n_gs_), stride(std::min(n_gs_, neighbors.length())) {
            const int v_num = inst.vertices_num();
            flat.resize(static_cast<std::size_t>(v_num) * stride);
            for (int v = 0; v < v_num; ++v) {
                const auto list = neighbors.of(v);
                std::copy_n(list.begin(), stride, flat.begin() + static_cast<std::size_t>(v) * stride);
            }
            std::vector<int> degree(v_num, 0);
            for (const int j : flat) {
                ++degree[j];
            }
            owner_begin.assign(v_num + 1, 0);
            for (int v = 0; v < v_num; ++v) {
                owner_begin[v + 1] = owner_begin[v] + degree[v];
            }
            owner_flat.resize(flat.size());
            std::vector<int> cursor(owner_begin.begin(), owner_begin.end() - 1);
            for (int v = 0; v < v_num; ++v) {
                for (int p = 0; p < stride; ++p) {
                    const int j = flat[static_cast<std::size_t>(v) * stride + p];
                    owner_flat[cursor[j]++] = {v, p};
                }
            }
        }

        // Configured generator count (before clipping to list length).
        int generators_per_vertex() const {
            return limit;
        }

        // Actual stored arcs per vertex.
        int list_length() const {
            return stride;
        }

        std::span<const int> arcs(int v) const {
            return {flat.data() + static_cast<std::size_t>(v) * stride, static_cast<std::size_t>(stride)};
        }

        // Vertices listing u, ascending owner index.
        std::span<const ArcOwner> owners(int u) const {
            return {owner_flat.data() + owner_begin[u], owner_flat.data() + owner_begin[u + 1]};
        }

    private:
        int limit;
        int stride;
        std::vector<int> flat;
        std::vector<ArcOwner> owner_flat;
        std::vector<int> owner_begin;
    };

    // Builds the arc lists from precomputed neighbor lists. The lists must be
    // at least min(n_gs, |V|-1) long: shorter lists mean the caller built them
    // with too small an n_nn, which would silently weaken the neighborhood.
    inline MoveGeneratorSet init_move_generators(const Instance& inst, const NeighborLists& neighbors, int n_gs) {
        assert(n_gs >= 1);
        if (neighbors.length() < std::min(n_gs, inst.vertices_num() - 1)) {
            throw std::invalid_argument("move generators: neighbor lists shorter than requested arc count");
        }
        return MoveGeneratorSet(inst, neighbors, n_gs);
    }

    // Per-vertex sparsification level gamma in [base, 1] with a consecutive
    // non-improving counter; crossing the threshold multiplies gamma by lambda
    // (capped at 1) and restarts the count. Owned by a single solver.
    class Sparsification {
    public:
        Sparsification(int vertices_num, double gamma_base_, double lambda_, int threshold_)
            : base(gamma_base_),
              lambda(lambda_),
              threshold(threshold_),
              gamma_(vertices_num, gamma_base_),
              counter(vertices_num, 0) {
            assert(base > 0.0 && base <= 1.0 && lambda >= 1.0 && threshold >= 1);
        }

        double gamma_base() const {
            return base;
        }

        double gamma(int v) const {
            return gamma_[v];
        }

        void reset(int v) {
            gamma_[v] = base;
            counter[v] = 0;
        }

        void note_non_improving(int v) {
            if (++counter[v] > threshold) {
                gamma_[v] = std::min(gamma_[v] * lambda, 1.0);
                counter[v] = 0;
            }
        }

        // Arcs of v that are currently in play: widened as v keeps failing to
        // improve, never below the base fraction, clipped to the list.
        int active_prefix(int v, int n_gs, int list_len) const {
            const int want = std::max(static_cast<int>(std::ceil(n_gs * base)),
                                      static_cast<int>(std::ceil(n_gs * gamma_[v])));
            return std::min(want, list_len);
        }

    private:
        double base;
        double lambda;
        int threshold;
        std::vector<double> gamma_;
        std::vector<int> counter;
    };

    // Reset on improvement, count (and possibly escalate) otherwise.
    inline void update_sparsification(Sparsification& spars, const std::vector<int>& touched, bool improved_best) {
        for (const int v : touched) {
            if (improved_best) {
                spars.reset(v);
            } else {
                spars.note_non_improving(v);
            }
        }
    }

    struct VndResult {
        std::vector<Action> actions;
        bool improved = false;
        std::vector<int> touched;
    };

    namespace detail {

        constexpr double kImprovingEps = 1e-9;

        struct ActiveArc {
            int i;
            int j;
        };

        // Active arcs with an endpoint in the cache, deduplicated and ordered
        // by (owner, position) so the scan order never depends on cache
        // recency order.
        inline std::vector<ActiveArc> collect_active_arcs(const VertexCache& cache, const MoveGeneratorSet& gens,
                                                          const Sparsification& spars) {
            const int n_gs = gens.generators_per_vertex();
            const int len = gens.list_length();
            std::vector<std::int64_t> keys;
            for (const int c : cache.snapshot()) {
                const int own_prefix = spars.active_prefix(c, n_gs, len);
                for (int p = 0; p < own_prefix; ++p) {
                    keys.push_back(static_cast<std::int64_t>(c) * len + p);
                }
                for (const ArcOwner& o : gens.owners(c)) {
                    if (o.position < spars.active_prefix(o.owner, n_gs, len)) {
                        keys.push_back(static_cast<std::int64_t>(o.owner) * len + o.position);
                    }
                }
            }
            std::sort(keys.begin(), keys.end());
            keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
            std::vector<ActiveArc> arcs;
            arcs.reserve(keys.size());
            for (const std::int64_t key : keys) {
                const int i = static_cast<int>(key / len);
                const int p = static_cast<int>(key % len);
                arcs.push_back({i, gens.arcs(i)[p]});
            }
            return arcs;
        }

        // True when both endpoints are customers currently in the solution.
        inline bool routed_customer_pair(const Solution& sol, int i, int j) {
            return i != kDepot && j != kDepot && sol.is_routed(i) && sol.is_routed(j);
        }

        // ------------------------------------------------------------------
        // Relocate: move customer i next to j (after or before).

        struct RelocateMove {
            double delta;
            int i;
            int j;
            bool before;
        };

        inline std::optional<RelocateMove> find_best_relocate(Solution& sol, const std::vector<ActiveArc>& arcs) {
            const Instance& inst = sol.instance();
            std::optional<RelocateMove> best;
            double best_delta = -kImprovingEps;
            for (const ActiveArc& arc : arcs) {
                const int i = arc.i;
                const int j = arc.j;
                if (!routed_customer_pair(sol, i, j)) {
                    continue;
                }
                const int p = sol.prev_of(i);
                const int n = sol.next_of(i);
                const double removal = inst.cost(p, n) - inst.cost(p, i) - inst.cost(i, n);
                const bool cross_route = sol.route_of(i) != sol.route_of(j);
                if (cross_route &&
                    sol.route_load(sol.route_of(j)) + inst.demand(i) > inst.capacity()) {
                    continue;
                }
                if (j != p) {
                    const int nj = sol.next_of(j);
                    const double delta = removal + inst.cost(j, i) + inst.cost(i, nj) - inst.cost(j, nj);
                    if (delta < best_delta) {
                        best_delta = delta;
                        best = RelocateMove{delta, i, j, false};
                    }
                }
                if (sol.prev_of(j) != i) {
                    const int pj = sol.prev_of(j);
                    const double delta = removal + inst.cost(pj, i) + inst.cost(i, j) - inst.cost(pj, j);
                    if (delta < best_delta) {
                        best_delta = delta;
                        best = RelocateMove{delta, i, j, true};
                    }
                }
            }
            return best;
        }

        inline void apply_relocate(Solution& sol, const RelocateMove& m) {
            const int source = sol.route_of(m.i);
            sol.apply_or_die(Action::remove(m.i, sol.prev_of(m.i), source));
            const int pred = m.before ? sol.prev_of(m.j) : m.j;
            sol.apply_or_die(Action::insert_after(m.i, pred, sol.route_of(m.j)));
            if (sol.is_route_live(source) && sol.route_size(source) == 0) {
                sol.apply_or_die(Action::delete_empty_route(m.i, source));
            }
        }

        // ------------------------------------------------------------------
        // Swap: exchange the positions of customers i and j.

        struct SwapMove {
            double delta;
            int i;
            int j;
        };

        inline std::optional<SwapMove> find_best_swap(Solution& sol, const std::vector<ActiveArc>& arcs) {
            const Instance& inst = sol.instance();
            std::optional<SwapMove> best;
            double best_delta = -kImprovingEps;
            for (const ActiveArc& arc : arcs) {
                const int i = arc.i;
                const int j = arc.j;
                if (!routed_customer_pair(sol, i, j)) {
                    continue;
                }
                const int ri = sol.route_of(i);
                const int rj = sol.route_of(j);
                if (ri != rj) {
                    const int qi = inst.demand(i);
                    const int qj = inst.demand(j);
                    if (sol.route_load(ri) - qi + qj > inst.capacity() ||
                        sol.route_load(rj) - qj + qi > inst.capacity()) {
                        continue;
                    }
                }
                const int pi = sol.prev_of(i);
                const int ni = sol.next_of(i);
                const int pj = sol.prev_of(j);
                const int nj = sol.next_of(j);
                double delta;
                if (ni == j) {
                    delta = inst.cost(pi, j) + inst.cost(i, nj) - inst.cost(pi, i) - inst.cost(j, nj);
                } else if (nj == i) {
                    delta = inst.cost(pj, i) + inst.cost(j, ni) - inst.cost(pj, j) - inst.cost(i, ni);
                } else {
                    delta = inst.cost(pi, j) + inst.cost(j, ni) - inst.cost(pi, i) - inst.cost(i, ni) +
                            inst.cost(pj, i) + inst.cost(i, nj) - inst.cost(pj, j) - inst.cost(j, nj);
                }
                if (delta < best_delta) {
                    best_delta = delta;
                    best = SwapMove{delta, i, j};
                }
            }
            return best;
        }

        inline void apply_swap(Solution& sol, const SwapMove& m) {
            const int i = m.i;
            const int j = m.j;
            if (sol.next_of(i) == j) {
                const int r = sol.route_of(i);
                sol.apply_or_die(Action::remove(j, i, r));
                sol.apply_or_die(Action::insert_after(j, sol.prev_of(i), r));
            } else if (sol.next_of(j) == i) {
                const int r = sol.route_of(j);
                sol.apply_or_die(Action::remove(i, j, r));
                sol.apply_or_die(Action::insert_after(i, sol.prev_of(j), r));
            } else {
                const int ri = sol.route_of(i);
                const int rj = sol.route_of(j);
                const int pi = sol.prev_of(i);
                const int pj = sol.prev_of(j);
                sol.apply_or_die(Action::remove(i, pi, ri));
                sol.apply_or_die(Action::insert_after(i, pj, rj));
                sol.apply_or_die(Action::remove(j, i, rj));
                sol.apply_or_die(Action::insert_after(j, pi, ri));
            }
        }

        // ------------------------------------------------------------------
        // Two-opt: intra-route segment reversal, or tail exchange between two
        // routes. Both replace edges (i, next i) and (j, next j).

        struct TwoOptMove {
            double delta;
            int i;
            int j;
            bool tails;
        };

        inline std::optional<TwoOptMove> find_best_two_opt(Solution& sol, const std::vector<ActiveArc>& arcs) {
            const Instance& inst = sol.instance();
            std::optional<TwoOptMove> best;
            double best_delta = -kImprovingEps;
            for (const ActiveArc& arc : arcs) {
                const int i = arc.i;
                const int j = arc.j;
                if (!routed_customer_pair(sol, i, j)) {
                    continue;
                }
                const int ni = sol.next_of(i);
                const int nj = sol.next_of(j);
                if (sol.route_of(i) == sol.route_of(j)) {
                    if (ni == j || nj == i) {
                        continue;
                    }
                    const double delta =
                        inst.cost(i, j) + inst.cost(ni, nj) - inst.cost(i, ni) - inst.cost(j, nj);
                    if (delta < best_delta) {
                        best_delta = delta;
                        best = TwoOptMove{delta, i, j, false};
                    }
                } else {
                    const double delta =
                        inst.cost(i, nj) + inst.cost(j, ni) - inst.cost(i, ni) - inst.cost(j, nj);
                    if (delta >= best_delta) {
                        continue;
                    }
                    const int head_i = sol.prefix_load_of(i);
                    const int head_j = sol.prefix_load_of(j);
                    const int tail_i = sol.route_load(sol.route_of(i)) - head_i;
                    const int tail_j = sol.route_load(sol.route_of(j)) - head_j;
                    if (head_i + tail_j > inst.capacity() || head_j + tail_i > inst.capacity()) {
                        continue;
                    }
                    best_delta = delta;
                    best = TwoOptMove{delta, i, j, true};
                }
            }
            return best;
        }

        inline void apply_two_opt_intra(Solution& sol, int i, int j) {
            // Orient the pair: walk forward from i; hitting the depot first
            // means j precedes i and the roles flip. The reversed segment is
            // everything strictly between the endpoints plus the second one.
            int first = i;
            int second = j;
            for (int v = sol.next_of(i); v != j; v = sol.next_of(v)) {
                if (v == kDepot) {
                    first = j;
                    second = i;
                    break;
                }
            }
            std::vector<int> segment;
            for (int v = sol.next_of(first); v != second; v = sol.next_of(v)) {
                assert(v != kDepot);
                segment.push_back(v);
            }
            segment.push_back(second);
            assert(segment.size() >= 2);
            const int r = sol.route_of(first);
            const int anchor = segment.back();
            for (std::size_t t = 0; t + 1 < segment.size(); ++t) {
                sol.apply_or_die(Action::remove(segment[t], first, r));
                sol.apply_or_die(Action::insert_after(segment[t], anchor, r));
            }
        }

        inline void apply_two_opt_tails(Solution& sol, int i, int j) {
            const int ri = sol.route_of(i);
            const int rj = sol.route_of(j);
            std::vector<int> tail_i, tail_j;
            for (int v = sol.next_of(i); v != kDepot; v = sol.next_of(v)) {
                tail_i.push_back(v);
            }
            for (int v = sol.next_of(j); v != kDepot; v = sol.next_of(v)) {
                tail_j.push_back(v);
            }
            for (const int v : tail_i) {
                sol.apply_or_die(Action::remove(v, i, ri));
            }
            for (const int v : tail_j) {
                sol.apply_or_die(Action::remove(v, j, rj));
            }
            int t = i;
            for (const int v : tail_j) {
                sol.apply_or_die(Action::insert_after(v, t, ri));
                t = v;
            }
            t = j;
            for (const int v : tail_i) {
                sol.apply_or_die(Action::insert_after(v, t, rj));
                t = v;
            }
        }

        inline void apply_two_opt(Solution& sol, const TwoOptMove& m) {
            if (m.tails) {
                apply_two_opt_tails(sol, m.i, m.j);
            } else {
                apply_two_opt_intra(sol, m.i, m.j);
            }
        }

        // ------------------------------------------------------------------
        // CROSS exchange between two routes: swap the length-li segment
        // starting at i with the length-lj segment starting at j, orientation
        // preserved. lj = 0 relocates the segment to just after j.

        constexpr int kMaxSegment = 3;

        struct CrossMove {
            double delta;
            int i;
            int li;
            int j;
            int lj;
        };

        // Loads the ≤ kMaxSegment customers starting at v into out; returns
        // how many are available before the route ends.
        inline int segment_of(const Solution& sol, int v, std::array<int, kMaxSegment>& out) {
            int len = 0;
            for (int u = v; u != kDepot && len < kMaxSegment; u = sol.next_of(u)) {
                out[len++] = u;
            }
            return len;
        }

        inline std::optional<CrossMove> find_best_cross(Solution& sol, const std::vector<ActiveArc>& arcs) {
            const Instance& inst = sol.instance();
            std::optional<CrossMove> best;
            double best_delta = -kImprovingEps;
            for (const ActiveArc& arc : arcs) {
                const int i = arc.i;
                const int j = arc.j;
                if (!routed_customer_pair(sol, i, j)) {
                    continue;
                }
                const int ri = sol.route_of(i);
                const int rj = sol.route_of(j);
                if (ri == rj) {
                    continue;
                }
                std::array<int, kMaxSegment> seg_i, seg_j;
                const int avail_i = segment_of(sol, i, seg_i);
                const int avail_j = segment_of(sol, j, seg_j);
                const int pi = sol.prev_of(i);
                const int pj = sol.prev_of(j);
                const int nj_route = sol.next_of(j);
                int load_i = 0;
                for (int li = 1; li <= avail_i; ++li) {
                    const int last_i = seg_i[li - 1];
                    load_i += inst.demand(last_i);
                    const int after_i = sol.next_of(last_i);
                    const double base_i = inst.cost(pi, i) + inst.cost(last_i, after_i);
                    // lj = 0: relocate the segment after j.
                    if (li >= 2) {
                        if (sol.route_load(rj) + load_i <= inst.capacity()) {
                            const double delta = inst.cost(pi, after_i) - base_i + inst.cost(j, i) +
                                                 inst.cost(last_i, nj_route) - inst.cost(j, nj_route);
                            if (delta < best_delta) {
                                best_delta = delta;
                                best = CrossMove{delta, i, li, j, 0};
                            }
                        }
                    }
                    int load_j = 0;
                    for (int lj = 1; lj <= avail_j; ++lj) {
                        const int last_j = seg_j[lj - 1];
                        load_j += inst.demand(last_j);
                        if (li == 1 && lj == 1) {
                            continue;  // plain swap, handled earlier
                        }
                        if (sol.route_load(ri) - load_i + load_j > inst.capacity() ||
                            sol.route_load(rj) - load_j + load_i > inst.capacity()) {
                            continue;
                        }
                        const int after_j = sol.next_of(last_j);
                        const double delta = inst.cost(pi, j) + inst.cost(last_j, after_i) + inst.cost(pj, i) +
                                             inst.cost(last_i, after_j) - base_i - inst.cost(pj, j) -
                                             inst.cost(last_j, after_j);
                        if (delta < best_delta) {
                            best_delta = delta;
                            best = CrossMove{delta, i, li, j, lj};
                        }
                    }
                }
            }
            return best;
        }

        inline void apply_cross(Solution& sol, const CrossMove& m) {
            const int ri = sol.route_of(m.i);
            const int rj = sol.route_of(m.j);
            const int pi = sol.prev_of(m.i);
            const int pj = sol.prev_of(m.j);
            std::array<int, kMaxSegment> seg_i, seg_j;
            segment_of(sol, m.i, seg_i);
            if (m.lj > 0) {
                segment_of(sol, m.j, seg_j);
            }
            for (int t = 0; t < m.li; ++t) {
                sol.apply_or_die(Action::remove(seg_i[t], pi, ri));
            }
            for (int t = 0; t < m.lj; ++t) {
                sol.apply_or_die(Action::remove(seg_j[t], pj, rj));
            }
            int pred = pi;
            for (int t = 0; t < m.lj; ++t) {
                sol.apply_or_die(Action::insert_after(seg_j[t], pred, ri));
                pred = seg_j[t];
            }
            pred = m.lj > 0 ? pj : m.j;
            for (int t = 0; t < m.li; ++t) {
                sol.apply_or_die(Action::insert_after(seg_i[t], pred, rj));
                pred = seg_i[t];
            }
            if (sol.is_route_live(ri) && sol.route_size(ri) == 0) {
                sol.apply_or_die(Action::delete_empty_route(m.i, ri));
            }
        }

        // ------------------------------------------------------------------
        // Ejection chain: relocate i next to j even though j's route cannot
        // take the load, then greedily eject a customer from each overloaded
        // route in turn (at most kMaxChainSteps relocations overall). Deltas
        // are computed against live adjacency, which stays exact because every
        // step must keep clear of the adjacency slots earlier steps touched.

        constexpr int kMaxChainSteps = 3;

        struct ChainStep {
            int v;
            int target;
            bool before;
            double delta;
        };

        struct ChainMove {
            double delta;
            int len;
            std::array<ChainStep, kMaxChainSteps> steps;
        };

        // Adjacency slots consumed by committed chain steps. Depot-adjacent
        // edges are tracked per route end, since the depot itself borders
        // every route.
        struct DirtySlots {
            std::vector<int> verts;
            std::vector<int> fronts;
            std::vector<int> backs;

            static bool has(const std::vector<int>& xs, int x) {
                return std::find(xs.begin(), xs.end(), x) != xs.end();
            }

            bool vertex_clean(int u) const {
                return !has(verts, u);
            }

            // u adjacent in route r; at the front when it is the depot edge
            // closing the route start, at the back otherwise.
            bool slot_clean(int u, int r, bool front) const {
                if (u == kDepot) {
                    return front ? !has(fronts, r) : !has(backs, r);
                }
                return vertex_clean(u);
            }

            void mark_vertex(int u) {
                if (u != kDepot) {
                    verts.push_back(u);
                }
            }

            void mark_slot(int u, int r, bool front) {
                if (u == kDepot) {
                    (front ? fronts : backs).push_back(r);
                } else {
                    verts.push_back(u);
                }
            }
        };

        // Load bookkeeping for routes affected by pending chain steps.
        struct LoadAdjust {
            std::vector<std::pair<int, int>> deltas;

            int of(int r) const {
                for (const auto& [route, d] : deltas) {
                    if (route == r) {
                        return d;
                    }
                }
                return 0;
            }

            void add(int r, int d) {
                for (auto& [route, existing] : deltas) {
                    if (route == r) {
                        existing += d;
                        return;
                    }
                }
                deltas.emplace_back(r, d);
            }
        };

        inline bool removal_clean(const Solution& sol, const DirtySlots& dirty, int v) {
            const int r = sol.route_of(v);
            return dirty.vertex_clean(v) && dirty.slot_clean(sol.prev_of(v), r, true) &&
                   dirty.slot_clean(sol.next_of(v), r, false);
        }

        inline void mark_removal(const Solution& sol, DirtySlots& dirty, int v) {
            const int r = sol.route_of(v);
            dirty.mark_vertex(v);
            dirty.mark_slot(sol.prev_of(v), r, true);
            dirty.mark_slot(sol.next_of(v), r, false);
        }

        inline bool insertion_clean(const Solution& sol, const DirtySlots& dirty, int target, bool before) {
            const int r = sol.route_of(target);
            const int pred = before ? sol.prev_of(target) : target;
            const int succ = before ? target : sol.next_of(target);
            return dirty.slot_clean(pred, r, true) && dirty.slot_clean(succ, r, false);
        }

        inline void mark_insertion(const Solution& sol, DirtySlots& dirty, int target, bool before) {
            const int r = sol.route_of(target);
            const int pred = before ? sol.prev_of(target) : target;
            const int succ = before ? target : sol.next_of(target);
            dirty.mark_slot(pred, r, true);
            dirty.mark_slot(succ, r, false);
        }

        // Relocation delta of v to just after (or before) target, live state.
        inline double relocation_delta(const Solution& sol, int v, int target, bool before) {
            const Instance& inst = sol.instance();
            const int p = sol.prev_of(v);
            const int n = sol.next_of(v);
            const double removal = inst.cost(p, n) - inst.cost(p, v) - inst.cost(v, n);
            const int pred = before ? sol.prev_of(target) : target;
            const int succ = before ? target : sol.next_of(target);
            return removal + inst.cost(pred, v) + inst.cost(v, succ) - inst.cost(pred, succ);
        }

        inline std::optional<ChainMove> evaluate_chain(Solution& sol, const MoveGeneratorSet& gens,
                                                       const Sparsification& spars, int i, int j) {
            const Instance& inst = sol.instance();
            ChainMove chain{0.0, 0, {}};
            DirtySlots dirty;
            LoadAdjust loads;
            std::vector<int> moved{i};

            // First link: force i next to j, choosing the cheaper side.
            const double after_delta = relocation_delta(sol, i, j, false);
            const double before_delta = relocation_delta(sol, i, j, true);
            const bool before = before_delta < after_delta;
            const double first_delta = before ? before_delta : after_delta;
            mark_removal(sol, dirty, i);
            mark_insertion(sol, dirty, j, before);
            loads.add(sol.route_of(i), -inst.demand(i));
            loads.add(sol.route_of(j), inst.demand(i));
            chain.steps[chain.len++] = {i, j, before, first_delta};
            chain.delta = first_delta;

            int overloaded = sol.route_of(j);
            while (sol.route_load(overloaded) + loads.of(overloaded) > inst.capacity()) {
                if (chain.len == kMaxChainSteps) {
                    return std::nullopt;
                }
                const bool last_link = chain.len + 1 == kMaxChainSteps;
                const int excess = sol.route_load(overloaded) + loads.of(overloaded) - inst.capacity();
                bool found = false;
                bool found_terminal = false;
                ChainStep pick{};
                double pick_delta = 0.0;
                for (int w = sol.route_first(overloaded); w != kDepot; w = sol.next_of(w)) {
                    if (DirtySlots::has(moved, w) || inst.demand(w) < excess || !removal_clean(sol, dirty, w)) {
                        continue;
                    }
                    for (const int u : gens.arcs(w).first(
                             spars.active_prefix(w, gens.generators_per_vertex(), gens.list_length()))) {
                        if (u == kDepot || !sol.is_routed(u) || sol.route_of(u) == overloaded ||
                            DirtySlots::has(moved, u)) {
                            continue;
                        }
                        const bool terminal =
                            sol.route_load(sol.route_of(u)) + loads.of(sol.route_of(u)) + inst.demand(w) <=
                            inst.capacity();
                        if (!terminal && last_link) {
                            continue;
                        }
                        for (const bool side_before : {false, true}) {
                            if (!insertion_clean(sol, dirty, u, side_before)) {
                                continue;
                            }
                            const double d = relocation_delta(sol, w, u, side_before);
                            // Feasible continuations beat overloading ones;
                            // within a class the smallest delta wins.
                            if (!found || (terminal && !found_terminal) ||
                                (terminal == found_terminal && d < pick_delta)) {
                                found = true;
                                found_terminal = terminal;
                                pick = {w, u, side_before, d};
                                pick_delta = d;
                            }
                        }
                    }
                }
                if (!found) {
                    return std::nullopt;
                }
                mark_removal(sol, dirty, pick.v);
                mark_insertion(sol, dirty, pick.target, pick.before);
                loads.add(overloaded, -inst.demand(pick.v));
                loads.add(sol.route_of(pick.target), inst.demand(pick.v));
                moved.push_back(pick.v);
                chain.steps[chain.len++] = pick;
                chain.delta += pick.delta;
                overloaded = sol.route_of(pick.target);
            }
            return chain;
        }

        inline std::optional<ChainMove> find_best_ejection(Solution& sol, const MoveGeneratorSet& gens,
                                                           const Sparsification& spars,
                                                           const std::vector<ActiveArc>& arcs) {
            const Instance& inst = sol.instance();
            std::optional<ChainMove> best;
            double best_delta = -kImprovingEps;
            for (const ActiveArc& arc : arcs) {
                const int i = arc.i;
                const int j = arc.j;
                if (!routed_customer_pair(sol, i, j)) {
                    continue;
                }
                const int ri = sol.route_of(i);
                const int rj = sol.route_of(j);
                if (ri == rj || sol.route_load(rj) + inst.demand(i) <= inst.capacity()) {
                    continue;  // a plain relocate covers the feasible case
                }
                const auto chain = evaluate_chain(sol, gens, spars, i, j);
                if (chain && chain->delta < best_delta) {
                    best_delta = chain->delta;
                    best = chain;
                }
            }
            return best;
        }

        inline void apply_chain(Solution& sol, const ChainMove& m) {
            for (int k = 0; k < m.len; ++k) {
                const ChainStep& step = m.steps[k];
                const int source = sol.route_of(step.v);
                sol.apply_or_die(Action::remove(step.v, sol.prev_of(step.v), source));
                const int pred = step.before ? sol.prev_of(step.target) : step.target;
                sol.apply_or_die(Action::insert_after(step.v, pred, sol.route_of(step.target)));
                if (sol.is_route_live(source) && sol.route_size(source) == 0) {
                    sol.apply_or_die(Action::delete_empty_route(step.v, source));
                }
            }
        }

    }  // namespace detail

    // Variable neighborhood descent seeded from the vertex cache: operators
    // run in a fixed order (relocate, swap, two-opt, CROSS, ejection chain),
    // each applying its best strictly improving feasible move; any success
    // restarts the pipeline. Every edit goes through the action journal, so
    // the emitted list replayed on a copy of the pre-state reproduces the
    // post-state. The rng parameter is reserved; the descent is deterministic.
    inline VndResult vnd_descend(Solution& sol, const VertexCache& cache, const MoveGeneratorSet& gens,
                                 const Sparsification& spars, [[maybe_unused]] Rng& rng) {
        const bool own_recording = !sol.is_recording();
        if (own_recording) {
            sol.begin_recording();
        }
        const std::size_t mark = sol.recorded_actions().size();

        int op = 0;
        bool any = false;
        while (op < 5) {
            const auto arcs = detail::collect_active_arcs(cache, gens, spars);
            bool applied = false;
            switch (op) {
            case 0:
                if (const auto m = detail::find_best_relocate(sol, arcs)) {
                    detail::apply_relocate(sol, *m);
                    applied = true;
                }
                break;
            case 1:
                if (const auto m = detail::find_best_swap(sol, arcs)) {
                    detail::apply_swap(sol, *m);
                    applied = true;
                }
                break;
            case 2:
                if (const auto m = detail::find_best_two_opt(sol, arcs)) {
                    detail::apply_two_opt(sol, *m);
                    applied = true;
                }
                break;
            case 3:
                if (const auto m = detail::find_best_cross(sol, arcs)) {
                    detail::apply_cross(sol, *m);
                    applied = true;
                }
                break;
            default:
                if (const auto m = detail::find_best_ejection(sol, gens, spars, arcs)) {
                    detail::apply_chain(sol, *m);
                    applied = true;
                }
                break;
            }
            if (applied) {
                any = true;
                op = 0;
            } else {
                ++op;
            }
        }

        VndResult result;
        const auto all = sol.recorded_actions();
        result.actions.assign(all.begin() + static_cast<std::ptrdiff_t>(mark), all.end());
        result.improved = any;
        result.touched = derive_touched_vertices(result.actions);
        if (own_recording) {
            sol.commit_recording();
        }
        assert(sol.unrouted_num() > 0 || full_feasibility_check(sol, sol.instance()).ok);
        return result;
    }

}  // namespace cvrp

#endif
