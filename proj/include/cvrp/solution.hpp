#ifndef CVRP_SOLUTION_HPP_
#define CVRP_SOLUTION_HPP_

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "instance.hpp"

namespace cvrp {

    // The depot vertex index.
    inline constexpr int kDepot = 0;

    // Thrown when the change journal is driven out of its LIFO discipline.
    struct ProtocolViolation : std::logic_error {
        explicit ProtocolViolation(const std::string& what_) : std::logic_error(what_) { }
    };

    // One invertible solution edit. Four kinds cover everything the solvers
    // exchange: vertex insertion and removal, creation of an empty one-customer
    // route shell, and deletion of an empty route.
    //
    // InsertAfter and Remove are anchored to the predecessor vertex so a change
    // ports across solutions that differ elsewhere; `route` disambiguates the
    // depot predecessor (the depot heads every route) and records the context
    // needed for inversion. CreateSingletonRoute claims `route` as a new empty
    // live route; the motivating customer `v` is carried for applicability
    // checks and symmetry with its inverse, DeleteEmptyRoute.
    struct Action {
        enum class Kind : std::uint8_t { insert_after, remove, create_singleton_route, delete_empty_route };

        Kind kind = Kind::insert_after;
        int v = 0;
        int pred = kDepot;
        int route = 0;

        static Action insert_after(int v, int pred, int route) {
            return {Kind::insert_after, v, pred, route};
        }

        static Action remove(int v, int pred, int route) {
            return {Kind::remove, v, pred, route};
        }

        static Action create_singleton_route(int v, int route) {
            return {Kind::create_singleton_route, v, kDepot, route};
        }

        static Action delete_empty_route(int v, int route) {
            return {Kind::delete_empty_route, v, kDepot, route};
        }

        Action inverted() const {
            switch (kind) {
            case Kind::insert_after:
                return remove(v, pred, route);
            case Kind::remove:
                return insert_after(v, pred, route);
            case Kind::create_singleton_route:
                return delete_empty_route(v, route);
            default:
                return create_singleton_route(v, route);
            }
        }

        bool operator==(const Action&) const = default;
    };

    // Why an action did not apply.
    enum class ApplyResult : std::uint8_t {
        applied,
        vertex_already_routed,
        vertex_not_routed,
        pred_unrouted,
        adjacency_mismatch,
        missing_route,
        route_not_empty,
        route_id_unavailable
    };

    // The ordered action bundle produced by one core-optimization iteration;
    // the unit of work relayed by the dispatcher.
    struct CandidateChange {
        long long sequence_no = 0;          // assigned by the dispatcher
        std::vector<Action> actions;
        std::vector<int> ruined_customers;  // for ruin-intensity bookkeeping
        std::vector<int> touched_vertices;  // for sparsification bookkeeping
        int generator_solver = -1;
        double recorded_delta = 0.0;        // generator's cost delta, diagnostics only

        std::uint64_t content_hash() const {
            std::uint64_t h = 1469598103934665603ULL;
            const auto mix = [&h](std::uint64_t word) {
                h = (h ^ word) * 1099511628211ULL;
            };
            for (const auto& a : actions) {
                mix(static_cast<std::uint64_t>(a.kind));
                mix(static_cast<std::uint64_t>(a.v));
                mix(static_cast<std::uint64_t>(a.pred));
                mix(static_cast<std::uint64_t>(a.route));
            }
            mix(0x9E3779B97F4A7C15ULL);
            for (const int v : ruined_customers) {
                mix(static_cast<std::uint64_t>(v));
            }
            mix(0x9E3779B97F4A7C15ULL);
            for (const int v : touched_vertices) {
                mix(static_cast<std::uint64_t>(v));
            }
            mix(static_cast<std::uint64_t>(generator_solver + 1));
            return h;
        }
    };

    // Customers appearing in an action list (vertices and non-depot
    // predecessors), deduplicated in encounter order.
    inline std::vector<int> derive_touched_vertices(const std::vector<Action>& actions) {
        std::vector<int> touched;
        const auto add = [&touched](int v) {
            if (v != kDepot && std::find(touched.begin(), touched.end(), v) == touched.end()) {
                touched.push_back(v);
            }
        };
        for (const auto& a : actions) {
            add(a.v);
            if (a.kind == Action::Kind::insert_after || a.kind == Action::Kind::remove) {
                add(a.pred);
            }
        }
        return touched;
    }

    // Bounded recency set of recently changed vertices with least-recently
    // changed eviction. Local search seeds only from cached vertices, which is
    // what keeps each iteration's work localized.
    class VertexCache {
    public:
        VertexCache(int capacity_, int vertices_num)
            : max_size(capacity_), next_of(vertices_num, kAbsent), prev_of(vertices_num, kAbsent) {
            assert(capacity_ >= 1);
        }

        int capacity() const {
            return max_size;
        }

        int size() const {
            return count;
        }

        bool contains(int v) const {
            return next_of[v] != kAbsent || prev_of[v] != kAbsent || head == v;
        }

        // Inserts or refreshes v at the most-recent position, evicting the
        // least-recently changed vertex when full. The depot is never cached.
        void touch(int v) {
            assert(v >= 0 && v < static_cast<int>(next_of.size()));
            if (v == kDepot) {
                return;
            }
            if (contains(v)) {
                unlink(v);
            } else if (count == max_size) {
                int evicted = head;
                unlink(evicted);
            }
            append(v);
        }

        void clear() {
            int v = head;
            while (v != kAbsent) {
                const int next = next_of[v];
                next_of[v] = kAbsent;
                prev_of[v] = kAbsent;
                v = next;
            }
            head = tail = kAbsent;
            count = 0;
        }

        // Members ordered least-recently to most-recently changed.
        std::vector<int> snapshot() const {
            std::vector<int> out;
            out.reserve(count);
            for (int v = head; v != kAbsent; v = next_of[v]) {
                out.push_back(v);
            }
            return out;
        }

    private:
        static constexpr int kAbsent = -1;

        void unlink(int v) {
            const int p = prev_of[v];
            const int n = next_of[v];
            (p != kAbsent ? next_of[p] : head) = n;
            (n != kAbsent ? prev_of[n] : tail) = p;
            next_of[v] = prev_of[v] = kAbsent;
            --count;
        }

        void append(int v) {
            prev_of[v] = tail;
            next_of[v] = kAbsent;
            (tail != kAbsent ? next_of[tail] : head) = v;
            tail = v;
            ++count;
        }

        int max_size;
        int head = kAbsent;
        int tail = kAbsent;
        int count = 0;
        std::vector<int> next_of, prev_of;
    };

    // Free pool of route ids with deterministic lowest-id-first reuse, so every
    // solver assigns identical ids along the shared change trajectory. Released
    // ids sit in a lazy min-heap; entries invalidated by claim(id) are skipped
    // on extraction.
    class RouteIdPool {
    public:
        bool is_free(int id) const {
            assert(id >= 0);
            return id >= static_cast<int>(in_use.size()) || !in_use[id];
        }

        // Claims the lowest free id.
        int claim_lowest() {
            while (!released.empty()) {
                const int id = released.top();
                if (in_use[id]) {
                    released.pop();  // stale entry, id was re-claimed directly
                    continue;
                }
                released.pop();
                in_use[id] = 1;
                return id;
            }
            in_use.push_back(1);
            return static_cast<int>(in_use.size()) - 1;
        }

        // Lowest id the next claim_lowest() would return.
        int peek_lowest() {
            while (!released.empty() && in_use[released.top()]) {
                released.pop();
            }
            return released.empty() ? static_cast<int>(in_use.size()) : released.top();
        }

        // Claims a specific id; false when it is already live.
        bool claim(int id) {
            if (!is_free(id)) {
                return false;
            }
            while (static_cast<int>(in_use.size()) <= id) {
                // Ids skipped over stay claimable.
                if (static_cast<int>(in_use.size()) < id) {
                    released.push(static_cast<int>(in_use.size()));
                }
                in_use.push_back(0);
            }
            in_use[id] = 1;
            return true;
        }

        void release(int id) {
            assert(id >= 0 && id < static_cast<int>(in_use.size()) && in_use[id]);
            in_use[id] = 0;
            released.push(id);
        }

        // Behavioral equality: both pools offer the same free-id set. The
        // high-water marks may differ (ids claimed then released above the
        // other's mark are indistinguishable from fresh ids).
        bool equivalent_to(const RouteIdPool& other) const {
            const int hwm = std::max(static_cast<int>(in_use.size()), static_cast<int>(other.in_use.size()));
            for (int id = 0; id < hwm; ++id) {
                if (is_free(id) != other.is_free(id)) {
                    return false;
                }
            }
            return true;
        }

    private:
        std::vector<char> in_use;
        std::priority_queue<int, std::vector<int>, std::greater<int>> released;
    };

    struct FeasibilityViolation {
        enum class Kind {
            unrouted_customer,
            duplicate_visit,
            broken_cycle,
            load_exceeded,
            aggregate_mismatch,
            bookkeeping
        };
        Kind kind;
        int route = -1;
        int vertex = -1;
    };

    struct FeasibilityReport {
        bool ok = true;
        std::vector<FeasibilityViolation> violations;
    };

    struct SolutionTestAccess;

    // Route set as doubly-linked vertex sequences with per-route load/cost/size
    // aggregates, a recycling route-id pool and the selective vertex cache.
    //
    // All structural edits go through apply(): both a solver's own construction
    // of an iteration and the replay of someone else's change run the same code,
    // which is what makes replayed aggregates bit-identical across solvers.
    // While recording (or inside apply_change) every applied action lands in a
    // journal carrying its contextual inverse plus cost snapshots, so rollback
    // restores floating-point aggregates exactly rather than re-deriving them.
    class Solution {
    public:
        explicit Solution(const Instance& instance_, int cache_capacity = 50)
            : inst(&instance_),
              vertex(instance_.vertices_num()),
              prefix_load(instance_.vertices_num(), 0),
              unrouted_count(instance_.customers_num()),
              svc(cache_capacity, instance_.vertices_num()) { }

        const Instance& instance() const {
            return *inst;
        }

        double cost() const {
            return total_cost;
        }

        bool is_routed(int v) const {
            return vertex[v].route != kUnrouted;
        }

        int route_of(int v) const {
            return vertex[v].route;
        }

        // Successor within the route; 0 marks the depot closing the cycle.
        int next_of(int v) const {
            assert(is_routed(v));
            return vertex[v].next;
        }

        int prev_of(int v) const {
            assert(is_routed(v));
            return vertex[v].prev;
        }

        bool is_route_live(int r) const {
            return r >= 0 && r < static_cast<int>(routes.size()) && routes[r].live;
        }

        // First customer of the route, 0 when empty.
        int route_first(int r) const {
            assert(is_route_live(r));
            return routes[r].first;
        }

        int route_last(int r) const {
            assert(is_route_live(r));
            return routes[r].last;
        }

        int route_size(int r) const {
            assert(is_route_live(r));
            return routes[r].size;
        }

        int route_load(int r) const {
            assert(is_route_live(r));
            return routes[r].load;
        }

        double route_cost(int r) const {
            assert(is_route_live(r));
            return routes[r].cost;
        }

        // Live route ids in ascending order.
        const std::set<int>& live_routes() const {
            return live_ids;
        }

        int routes_num() const {
            return static_cast<int>(live_ids.size());
        }

        int unrouted_num() const {
            return unrouted_count;
        }

        // Sum of demands from the route's first customer through v inclusive.
        // Lazily refreshed per route; used by tail-exchange feasibility checks.
        int prefix_load_of(int v) {
            assert(is_routed(v));
            Route& r = routes[vertex[v].route];
            if (r.loads_dirty) {
                int acc = 0;
                for (int u = r.first; u != kDepot; u = vertex[u].next) {
                    acc += inst->demand(u);
                    prefix_load[u] = acc;
                }
                r.loads_dirty = false;
            }
            return prefix_load[v];
        }

        int peek_free_route_id() {
            return id_pool.peek_lowest();
        }

        const VertexCache& cache() const {
            return svc;
        }

        void cache_touch(int v) {
            svc.touch(v);
        }

        void cache_clear() {
            svc.clear();
        }

        // Applies one action, journaling it when recording. Inapplicability is a
        // normal outcome in the cooperative setting, not an error. Capacity is
        // deliberately not checked here; it is validated at change granularity.
        ApplyResult apply(const Action& a) {
            assert(a.v >= 1 && a.v < static_cast<int>(vertex.size()));
            assert(a.pred >= 0 && a.pred < static_cast<int>(vertex.size()));
            assert(a.route >= 0);
            switch (a.kind) {
            case Action::Kind::insert_after: {
                if (is_routed(a.v)) {
                    return ApplyResult::vertex_already_routed;
                }
                int r;
                if (a.pred == kDepot) {
                    if (!is_route_live(a.route)) {
                        return ApplyResult::missing_route;
                    }
                    r = a.route;
                } else {
                    if (!is_routed(a.pred)) {
                        return ApplyResult::pred_unrouted;
                    }
                    r = vertex[a.pred].route;
                }
                do_insert(a.v, a.pred, r);
                return ApplyResult::applied;
            }
            case Action::Kind::remove: {
                if (!is_routed(a.v)) {
                    return ApplyResult::vertex_not_routed;
                }
                if (vertex[a.v].prev != a.pred) {
                    return ApplyResult::adjacency_mismatch;
                }
                // A depot predecessor is ambiguous between routes.
                if (a.pred == kDepot && vertex[a.v].route != a.route) {
                    return ApplyResult::adjacency_mismatch;
                }
                do_remove(a.v);
                return ApplyResult::applied;
            }
            case Action::Kind::create_singleton_route: {
                if (is_routed(a.v)) {
                    return ApplyResult::vertex_already_routed;
                }
                if (!id_pool.is_free(a.route)) {
                    return ApplyResult::route_id_unavailable;
                }
                do_create(a.v, a.route);
                return ApplyResult::applied;
            }
            default: {
                if (!is_route_live(a.route)) {
                    return ApplyResult::missing_route;
                }
                if (routes[a.route].size != 0) {
                    return ApplyResult::route_not_empty;
                }
                do_delete(a.v, a.route);
                return ApplyResult::applied;
            }
            }
        }

        // Shorthand for actions that must apply (local construction code).
        void apply_or_die(const Action& a) {
            [[maybe_unused]] const ApplyResult result = apply(a);
            assert(result == ApplyResult::applied);
        }

        // --- recording ------------------------------------------------------

        // Starts journaling applied actions so they can be harvested into a
        // CandidateChange and reverted. Not reentrant.
        void begin_recording() {
            assert(!recording && applying_change == nullptr);
            assert(journal.empty());
            recording = true;
        }

        bool is_recording() const {
            return recording;
        }

        // Forward actions applied since begin_recording, in order.
        std::vector<Action> recorded_actions() const {
            assert(recording);
            std::vector<Action> actions;
            actions.reserve(journal.size());
            for (const auto& entry : journal) {
                actions.push_back(entry.forward);
            }
            return actions;
        }

        // Reverts everything recorded and stops recording.
        void rollback_recording() {
            assert(recording);
            unwind_journal(0);
            recording = false;
        }

        // Keeps everything recorded and stops recording.
        void commit_recording() {
            assert(recording);
            journal.clear();
            recording = false;
        }

        // --- change application ----------------------------------------------

        struct ChangeOutcome {
            bool feasible = false;
            double delta = 0.0;
        };

        // Applies a change transactionally: if any action is inapplicable, any
        // touched route exceeds capacity, or a touched route is no longer a
        // depot-anchored cycle, everything rolls back and the solution is
        // bit-identical to its pre-call state. On success the change is pushed
        // onto the applied stack awaiting commit_change or undo_change.
        ChangeOutcome apply_change(const CandidateChange& ch) {
            assert(!recording);
            assert(applying_change == nullptr && journal.empty());
            const double cost_before = total_cost;
            applying_change = &ch;
            bool ok = true;
            for (const auto& a : ch.actions) {
                if (apply(a) != ApplyResult::applied) {
                    ok = false;
                    break;
                }
            }
            if (ok && !validate_touched_routes()) {
                ok = false;
            }
            if (!ok) {
                unwind_journal(0);
                applying_change = nullptr;
                return {false, 0.0};
            }
            applied_stack.push_back({&ch, std::move(journal)});
            journal.clear();
            applying_change = nullptr;
            return {true, total_cost - cost_before};
        }

        // Reverts the most recently applied (uncommitted) change.
        void undo_change(const CandidateChange& ch) {
            if (applied_stack.empty() || applied_stack.back().change != &ch) {
                throw ProtocolViolation("undo_change out of LIFO order");
            }
            assert(journal.empty());
            journal = std::move(applied_stack.back().entries);
            applied_stack.pop_back();
            unwind_journal(0);
        }

        // Finalizes the most recently applied change; it can no longer be undone.
        void commit_change(const CandidateChange& ch) {
            if (applied_stack.empty() || applied_stack.back().change != &ch) {
                throw ProtocolViolation("commit_change out of LIFO order");
            }
            applied_stack.pop_back();
        }

        // Abandons the undo bookkeeping of changes still awaiting commit or
        // undo. For snapshots copied while a change is in flight: the copy
        // keeps the state but must not inherit the original's obligations.
        void forget_pending_changes() {
            applied_stack.clear();
        }

        // --- maintenance ------------------------------------------------------

        // Rebuilds every aggregate from the links in a fixed order; bounds
        // floating-point drift in exact-cost mode (a no-op for integer costs).
        void recompute_aggregates() {
            assert(applied_stack.empty() && !recording);
            total_cost = 0.0;
            for (const int r : live_ids) {
                Route& route = routes[r];
                double c = 0.0;
                int load = 0;
                int prev = kDepot;
                for (int v = route.first; v != kDepot; v = vertex[v].next) {
                    c += inst->cost(prev, v);
                    load += inst->demand(v);
                    prev = v;
                }
                c += inst->cost(prev, kDepot);
                route.cost = c;
                route.load = load;
                route.loads_dirty = true;
                total_cost += c;
            }
        }

        // Structure-only hash: vertex links and route membership plus per-route
        // aggregates; costs excluded (compared separately where needed).
        std::uint64_t structural_hash() const {
            std::uint64_t h = 1469598103934665603ULL;
            const auto mix = [&h](std::uint64_t word) {
                h = (h ^ word) * 1099511628211ULL;
            };
            for (std::size_t v = 1; v < vertex.size(); ++v) {
                mix(static_cast<std::uint64_t>(vertex[v].route + 2));
                mix(static_cast<std::uint64_t>(vertex[v].next + 2));
                mix(static_cast<std::uint64_t>(vertex[v].prev + 2));
            }
            for (const int r : live_ids) {
                mix(static_cast<std::uint64_t>(r));
                mix(static_cast<std::uint64_t>(routes[r].first));
                mix(static_cast<std::uint64_t>(routes[r].last));
                mix(static_cast<std::uint64_t>(routes[r].size));
                mix(static_cast<std::uint64_t>(routes[r].load));
            }
            return h;
        }

        // Field-by-field equality of structure and aggregates (exact, including
        // floating-point cost bits); journals and cache state excluded.
        bool identical_to(const Solution& other) const {
            if (vertex.size() != other.vertex.size() || live_ids != other.live_ids) {
                return false;
            }
            for (std::size_t v = 1; v < vertex.size(); ++v) {
                if (vertex[v].route != other.vertex[v].route || vertex[v].next != other.vertex[v].next ||
                    vertex[v].prev != other.vertex[v].prev) {
                    return false;
                }
            }
            for (const int r : live_ids) {
                const Route& a = routes[r];
                const Route& b = other.routes[r];
                if (a.first != b.first || a.last != b.last || a.size != b.size || a.load != b.load ||
                    a.cost != b.cost) {
                    return false;
                }
            }
            return total_cost == other.total_cost && id_pool.equivalent_to(other.id_pool);
        }

        // CVRPLIB solution format: one "Route #k: v1 v2 ..." line per non-empty
        // route (ascending route id), then "Cost <c>".
        void write(std::ostream& out) const {
            int k = 1;
            for (const int r : live_ids) {
                if (routes[r].size == 0) {
                    continue;
                }
                out << "Route #" << k++ << ":";
                for (int v = routes[r].first; v != kDepot; v = vertex[v].next) {
                    out << ' ' << v;
                }
                out << '\n';
            }
            const double c = total_cost;
            if (std::abs(c - std::round(c)) < 1e-9) {
                out << "Cost " << static_cast<long long>(std::llround(c)) << '\n';
            } else {
                const auto text = std::to_string(c);
                out << "Cost " << text << '\n';
            }
        }

    private:
        friend struct SolutionTestAccess;
        friend FeasibilityReport full_feasibility_check(const Solution& sol, const Instance& inst);

        static constexpr int kUnrouted = -1;

        struct VertexSlot {
            int next = kUnrouted;
            int prev = kUnrouted;
            int route = kUnrouted;
        };

        struct Route {
            int first = kDepot;
            int last = kDepot;
            int size = 0;
            int load = 0;
            double cost = 0.0;
            bool live = false;
            bool loads_dirty = true;
        };

        struct JournalEntry {
            Action forward;
            Action inverse;           // contextual inverse (actual route recorded)
            int route;                // route whose cost snapshot is held
            double route_cost_before;
            double total_cost_before;
        };

        struct AppliedChange {
            const CandidateChange* change;
            std::vector<JournalEntry> entries;
        };

        bool journaling() const {
            return recording || applying_change != nullptr;
        }

        void journal_push(const Action& forward, const Action& inverse, int route, double route_cost_before,
                          double total_cost_before) {
            if (journaling()) {
                journal.push_back({forward, inverse, route, route_cost_before, total_cost_before});
            }
        }

        void do_insert(int v, int pred, int r) {
            Route& route = routes[r];
            journal_push(Action::insert_after(v, pred, r), Action::remove(v, pred, r), r, route.cost, total_cost);
            const int next = pred == kDepot ? route.first : vertex[pred].next;
            const double delta = inst->cost(pred, v) + inst->cost(v, next) - inst->cost(pred, next);
            vertex[v] = {next, pred, r};
            (pred == kDepot ? route.first : vertex[pred].next) = v;
            (next == kDepot ? route.last : vertex[next].prev) = v;
            route.size += 1;
            route.load += inst->demand(v);
            route.cost += delta;
            route.loads_dirty = true;
            total_cost += delta;
            --unrouted_count;
            svc.touch(v);
            if (pred != kDepot) {
                svc.touch(pred);
            }
            if (next != kDepot) {
                svc.touch(next);
            }
        }

        void do_remove(int v) {
            const int r = vertex[v].route;
            Route& route = routes[r];
            const int pred = vertex[v].prev;
            const int next = vertex[v].next;
            journal_push(Action::remove(v, pred, r), Action::insert_after(v, pred, r), r, route.cost, total_cost);
            const double delta = inst->cost(pred, next) - inst->cost(pred, v) - inst->cost(v, next);
            (pred == kDepot ? route.first : vertex[pred].next) = next;
            (next == kDepot ? route.last : vertex[next].prev) = pred;
            vertex[v] = {kUnrouted, kUnrouted, kUnrouted};
            route.size -= 1;
            route.load -= inst->demand(v);
            route.cost += delta;
            route.loads_dirty = true;
            total_cost += delta;
            ++unrouted_count;
            svc.touch(v);
            if (pred != kDepot) {
                svc.touch(pred);
            }
            if (next != kDepot) {
                svc.touch(next);
            }
        }

        void do_create(int context_v, int r) {
            journal_push(Action::create_singleton_route(context_v, r), Action::delete_empty_route(context_v, r), r,
                         0.0, total_cost);
            [[maybe_unused]] const bool claimed = id_pool.claim(r);
            assert(claimed);
            if (static_cast<int>(routes.size()) <= r) {
                routes.resize(r + 1);
            }
            routes[r] = Route{kDepot, kDepot, 0, 0, 0.0, true, true};
            live_ids.insert(r);
        }

        void do_delete(int context_v, int r) {
            assert(routes[r].size == 0);
            journal_push(Action::delete_empty_route(context_v, r), Action::create_singleton_route(context_v, r), r,
                         routes[r].cost, total_cost);
            id_pool.release(r);
            routes[r].live = false;
            live_ids.erase(r);
        }

        // Applies an inverse action without journaling or cache updates, then
        // restores the cost snapshots; used only by rollback paths.
        void unwind_entry(const JournalEntry& e) {
            const Action& a = e.inverse;
            switch (a.kind) {
            case Action::Kind::insert_after: {
                Route& route = routes[a.route];
                assert(route.live && !is_routed(a.v));
                const int next = a.pred == kDepot ? route.first : vertex[a.pred].next;
                vertex[a.v] = {next, a.pred, a.route};
                (a.pred == kDepot ? route.first : vertex[a.pred].next) = a.v;
                (next == kDepot ? route.last : vertex[next].prev) = a.v;
                route.size += 1;
                route.load += inst->demand(a.v);
                route.loads_dirty = true;
                --unrouted_count;
                break;
            }
            case Action::Kind::remove: {
                const int r = vertex[a.v].route;
                assert(r == a.route && vertex[a.v].prev == a.pred);
                Route& route = routes[r];
                const int pred = vertex[a.v].prev;
                const int next = vertex[a.v].next;
                (pred == kDepot ? route.first : vertex[pred].next) = next;
                (next == kDepot ? route.last : vertex[next].prev) = pred;
                vertex[a.v] = {kUnrouted, kUnrouted, kUnrouted};
                route.size -= 1;
                route.load -= inst->demand(a.v);
                route.loads_dirty = true;
                ++unrouted_count;
                break;
            }
            case Action::Kind::create_singleton_route: {
                [[maybe_unused]] const bool claimed = id_pool.claim(a.route);
                assert(claimed);
                if (static_cast<int>(routes.size()) <= a.route) {
                    routes.resize(a.route + 1);
                }
                routes[a.route] = Route{kDepot, kDepot, 0, 0, 0.0, true, true};
                live_ids.insert(a.route);
                break;
            }
            default: {
                assert(is_route_live(a.route) && routes[a.route].size == 0);
                id_pool.release(a.route);
                routes[a.route].live = false;
                live_ids.erase(a.route);
                break;
            }
            }
            if (routes.size() > static_cast<std::size_t>(e.route) && routes[e.route].live) {
                routes[e.route].cost = e.route_cost_before;
            }
            total_cost = e.total_cost_before;
        }

        void unwind_journal(std::size_t down_to) {
            while (journal.size() > down_to) {
                unwind_entry(journal.back());
                journal.pop_back();
            }
        }

        // Capacity and cycle integrity of every route touched by the journal.
        bool validate_touched_routes() const {
            for (std::size_t i = 0; i < journal.size(); ++i) {
                const int r = journal[i].route;
                bool seen = false;
                for (std::size_t j = 0; j < i; ++j) {
                    if (journal[j].route == r) {
                        seen = true;
                        break;
                    }
                }
                if (seen || !is_route_live(r)) {
                    continue;
                }
                const Route& route = routes[r];
                if (route.load > inst->capacity()) {
                    return false;
                }
                int steps = 0;
                int prev = kDepot;
                for (int v = route.first; v != kDepot; v = vertex[v].next) {
                    if (++steps > route.size || vertex[v].route != r || vertex[v].prev != prev) {
                        return false;
                    }
                    prev = v;
                }
                if (steps != route.size || route.last != prev) {
                    return false;
                }
            }
            return true;
        }

        const Instance* inst;
        std::vector<VertexSlot> vertex;
        std::vector<Route> routes;
        std::set<int> live_ids;
        RouteIdPool id_pool;
        std::vector<int> prefix_load;
        double total_cost = 0.0;
        int unrouted_count = 0;
        VertexCache svc;

        bool recording = false;
        const CandidateChange* applying_change = nullptr;
        std::vector<JournalEntry> journal;
        std::vector<AppliedChange> applied_stack;
    };

    // O(|V|) verification of coverage, cycle integrity, capacity and aggregate
    // consistency. Debug/test utility, never on the hot path.
    inline FeasibilityReport full_feasibility_check(const Solution& sol, const Instance& inst) {
        FeasibilityReport report;
        const auto flag = [&report](FeasibilityViolation::Kind kind, int route, int vertex) {
            report.ok = false;
            report.violations.push_back({kind, route, vertex});
        };
        const double tolerance = inst.edge_weight() == EdgeWeight::exact_euclidean ? 1e-6 : 1e-9;
        std::vector<char> visited(inst.vertices_num(), 0);
        double live_cost_sum = 0.0;
        for (const int r : sol.live_routes()) {
            if (!sol.is_route_live(r)) {
                flag(FeasibilityViolation::Kind::bookkeeping, r, -1);
                continue;
            }
            int steps = 0;
            int load = 0;
            double cost = 0.0;
            int prev = kDepot;
            bool broken = false;
            for (int v = sol.route_first(r); v != kDepot; v = sol.next_of(v)) {
                if (visited[v]) {
                    flag(FeasibilityViolation::Kind::duplicate_visit, r, v);
                    broken = true;
                    break;
                }
                visited[v] = 1;
                if (sol.route_of(v) != r || sol.prev_of(v) != prev) {
                    flag(FeasibilityViolation::Kind::broken_cycle, r, v);
                    broken = true;
                    break;
                }
                if (++steps > sol.route_size(r)) {
                    flag(FeasibilityViolation::Kind::broken_cycle, r, v);
                    broken = true;
                    break;
                }
                load += inst.demand(v);
                cost += inst.cost(prev, v);
                prev = v;
            }
            if (broken) {
                continue;
            }
            cost += inst.cost(prev, kDepot);
            if (steps != sol.route_size(r) || sol.route_last(r) != prev) {
                flag(FeasibilityViolation::Kind::broken_cycle, r, -1);
                continue;
            }
            if (load != sol.route_load(r) || std::abs(cost - sol.route_cost(r)) > tolerance) {
                flag(FeasibilityViolation::Kind::aggregate_mismatch, r, -1);
            }
            if (load > inst.capacity()) {
                flag(FeasibilityViolation::Kind::load_exceeded, r, -1);
            }
            live_cost_sum += sol.route_cost(r);
        }
        for (int v = 1; v < inst.vertices_num(); ++v) {
            if (!sol.is_routed(v)) {
                flag(FeasibilityViolation::Kind::unrouted_customer, -1, v);
            } else if (!visited[v]) {
                flag(FeasibilityViolation::Kind::bookkeeping, sol.route_of(v), v);
            }
        }
        if (std::abs(live_cost_sum - sol.cost()) > tolerance) {
            flag(FeasibilityViolation::Kind::aggregate_mismatch, -1, -1);
        }
        return report;
    }

}  // namespace cvrp

#endif
