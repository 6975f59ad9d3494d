#ifndef CVRP_IMPROVE_HPP_
#define CVRP_IMPROVE_HPP_

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "instance.hpp"
#include "localsearch.hpp"
#include "rng.hpp"
#include "solution.hpp"

namespace cvrp {

    // Feasible changes between exact-cost refreshes; rebuilding the aggregates
    // on a fixed cadence bounds floating-point drift on real-valued instances.
    inline constexpr long long kAggregateRefreshPeriod = 10000;

    // --- shaking ----------------------------------------------------------

    struct ShakeResult {
        std::vector<int> ruined;       // removal order
        std::vector<Action> actions;
    };

    // Ruins a neighborhood by random walk: the current customer leaves its
    // route (the emptied shell is deleted too), then the walk jumps to a
    // uniformly chosen still-routed vertex among the removed customer's
    // `candidate_prefix` nearest neighbors, stopping early when none is left.
    inline ShakeResult shake(Solution& sol, int seed_customer, int omega_i, const NeighborLists& neighbors, Rng& rng,
                             int candidate_prefix) {
        assert(omega_i >= 1 && sol.is_routed(seed_customer));
        const bool own_recording = !sol.is_recording();
        if (own_recording) {
            sol.begin_recording();
        }
        const std::size_t mark = sol.recorded_actions().size();

        ShakeResult out;
        out.ruined.reserve(omega_i);
        const int prefix = std::min(candidate_prefix, neighbors.length());
        std::vector<int> eligible;
        int current = seed_customer;
        for (int step = 0; step < omega_i; ++step) {
            const int route = sol.route_of(current);
            sol.apply_or_die(Action::remove(current, sol.prev_of(current), route));
            out.ruined.push_back(current);
            if (sol.route_size(route) == 0) {
                sol.apply_or_die(Action::delete_empty_route(current, route));
            }
            if (step + 1 == omega_i) {
                break;
            }
            eligible.clear();
            for (int k = 0; k < prefix; ++k) {
                const int j = neighbors.of(current)[k];
                if (j != kDepot && sol.is_routed(j)) {
                    eligible.push_back(j);
                }
            }
            if (eligible.empty()) {
                break;
            }
            current = eligible[rng.next_int(static_cast<int>(eligible.size()))];
        }

        const auto all = sol.recorded_actions();
        out.actions.assign(all.begin() + static_cast<std::ptrdiff_t>(mark), all.end());
        if (own_recording) {
            sol.commit_recording();
        }
        return out;
    }

    // --- recreate -----------------------------------------------------------

    // Reinsertion orders for ruined customers. The walk-of-the-depot distances
    // use the instance's arc costs; ties always fall back to the vertex index.
    enum class RecreateOrder : std::uint8_t {
        nearest_first,    // increasing distance from the depot
        farthest_first,   // decreasing distance from the depot
        heaviest_first,   // decreasing demand
        lightest_first,   // increasing demand
        shuffled          // uniform random permutation
    };

    inline void order_for_recreate(std::vector<int>& customers, const Instance& inst, RecreateOrder order, Rng& rng) {
        switch (order) {
        case RecreateOrder::nearest_first:
            std::sort(customers.begin(), customers.end(), [&inst](int a, int b) {
                const double da = inst.cost(kDepot, a);
                const double db = inst.cost(kDepot, b);
                return da != db ? da < db : a < b;
            });
            break;
        case RecreateOrder::farthest_first:
            std::sort(customers.begin(), customers.end(), [&inst](int a, int b) {
                const double da = inst.cost(kDepot, a);
                const double db = inst.cost(kDepot, b);
                return da != db ? da > db : a < b;
            });
            break;
        case RecreateOrder::heaviest_first:
            std::sort(customers.begin(), customers.end(), [&inst](int a, int b) {
                return inst.demand(a) != inst.demand(b) ? inst.demand(a) > inst.demand(b) : a < b;
            });
            break;
        case RecreateOrder::lightest_first:
            std::sort(customers.begin(), customers.end(), [&inst](int a, int b) {
                return inst.demand(a) != inst.demand(b) ? inst.demand(a) < inst.demand(b) : a < b;
            });
            break;
        default:
            rng.shuffle(customers.data(), static_cast<int>(customers.size()));
            break;
        }
    }

    namespace detail {

        struct InsertionSpot {
            double delta = 0.0;
            int route = 0;
            int position = 0;  // 0 = after the depot, k = after the k-th customer
            int pred = kDepot;
            bool found = false;
        };

        // Cheapest feasible insertion over live routes only. Scanning routes in
        // ascending id and positions front to back with a strict improvement
        // test realizes the (delta, route, position) tie order.
        inline InsertionSpot best_insertion_in_existing_routes(const Solution& sol, int v) {
            const Instance& inst = sol.instance();
            InsertionSpot best;
            const int load = inst.demand(v);
            for (const int r : sol.live_routes()) {
                if (sol.route_load(r) + load > inst.capacity()) {
                    continue;
                }
                int pred = kDepot;
                int position = 0;
                do {
                    const int succ = pred == kDepot ? sol.route_first(r) : sol.next_of(pred);
                    const double delta = inst.cost(pred, v) + inst.cost(v, succ) - inst.cost(pred, succ);
                    if (!best.found || delta < best.delta) {
                        best = {delta, r, position, pred, true};
                    }
                    pred = succ;
                    ++position;
                } while (pred != kDepot);
            }
            return best;
        }

    }  // namespace detail

    // Reinserts every unserved customer, ordered by the chosen rule, at the
    // cheapest feasible position over all routes plus a fresh singleton route;
    // ties prefer the lowest route id (the singleton ranks by the id it would
    // claim) and then the earliest position.
    inline std::vector<Action> recreate(Solution& sol, const std::vector<int>& unserved, RecreateOrder order,
                                        Rng& rng) {
        const bool own_recording = !sol.is_recording();
        if (own_recording) {
            sol.begin_recording();
        }
        const std::size_t mark = sol.recorded_actions().size();

        const Instance& inst = sol.instance();
        std::vector<int> pending = unserved;
        order_for_recreate(pending, inst, order, rng);
        for (const int v : pending) {
            assert(!sol.is_routed(v));
            const auto spot = detail::best_insertion_in_existing_routes(sol, v);
            const int fresh = sol.peek_free_route_id();
            const double alone = 2.0 * inst.cost(kDepot, v);
            const bool make_singleton =
                !spot.found || alone < spot.delta || (alone == spot.delta && fresh < spot.route);
            if (make_singleton) {
                sol.apply_or_die(Action::create_singleton_route(v, fresh));
                sol.apply_or_die(Action::insert_after(v, kDepot, fresh));
            } else {
                sol.apply_or_die(Action::insert_after(v, spot.pred, spot.route));
            }
        }

        const auto all = sol.recorded_actions();
        std::vector<Action> actions(all.begin() + static_cast<std::ptrdiff_t>(mark), all.end());
        if (own_recording) {
            sol.commit_recording();
        }
        return actions;
    }

    // --- annealing acceptance and ruin-intensity adaptation -----------------

    // Standard simulated-annealing rule; one shared draw is consumed whatever
    // the outcome so every solver stays aligned on the common stream.
    inline bool sa_accept(double cost_new, double cost_ref, double temperature, Rng& shared_rng) {
        assert(temperature > 0.0);
        const double u = shared_rng.next_double();
        return cost_new < cost_ref - temperature * std::log(u);
    }

    // Adjusts the ruin intensity of every ruined customer from the relative
    // cost gap of the neighbor: similar cost raises it, a much worse cost
    // lowers it, anything else nudges it one step in a random direction. Only
    // the random branch draws from the shared stream — exactly once per vertex.
    inline void update_omega(std::vector<int>& omega, const std::vector<int>& ruined, double cost_new, double cost_ref,
                             Rng& shared_rng, const SolverParams& params) {
        const int vertices_num = static_cast<int>(omega.size());
        const int lo = params.omega_min;
        const int hi = params.omega_max(vertices_num);
        const double gap = cost_ref != 0.0 ? (cost_new - cost_ref) / cost_ref : 0.0;
        for (const int v : ruined) {
            if (std::abs(gap) <= params.eps_similar) {
                omega[v] = std::min(omega[v] + 1, hi);
            } else if (gap > params.eps_degraded) {
                omega[v] = std::max(omega[v] - 1, lo);
            } else {
                const int step = shared_rng.next_int(2) == 0 ? -1 : 1;
                omega[v] = std::clamp(omega[v] + step, lo, hi);
            }
        }
    }

    // --- route minimization ---------------------------------------------------

    namespace detail {

        // The lowest-load route, then the route holding the nearest routed
        // neighbor of its first customer; ties keep the lowest route id and a
        // neighborless anchor falls back to the lowest other id.
        inline std::pair<int, int> pick_route_pair(const Solution& sol, const NeighborLists& neighbors) {
            assert(sol.routes_num() >= 2);
            int first = -1;
            for (const int r : sol.live_routes()) {
                if (first == -1 || sol.route_load(r) < sol.route_load(first)) {
                    first = r;
                }
            }
            int second = -1;
            for (const int j : neighbors.of(sol.route_first(first))) {
                if (j == kDepot || !sol.is_routed(j)) {
                    continue;
                }
                const int r = sol.route_of(j);
                if (r != first) {
                    second = r;
                    break;
                }
            }
            if (second == -1) {
                for (const int r : sol.live_routes()) {
                    if (r != first) {
                        second = r;
                        break;
                    }
                }
            }
            return {first, second};
        }

    }  // namespace detail

    // Compacts the solution toward `target_routes` routes by repeatedly
    // dissolving a route pair and reinserting the customers greedily, leaving
    // some unserved with a probability that decays over the iterations. The
    // best complete solution (cheaper, or equally cheap with fewer routes)
    // is tracked and returned; the reference reverts to it when it falls
    // behind. Always returns a complete feasible solution.
    inline Solution route_minimization(const Instance& inst, const Solution& start, int target_routes,
                                       const MoveGeneratorSet& gens, const NeighborLists& neighbors, Rng& rng,
                                       const SolverParams& params) {
        assert(target_routes >= 1);
        assert(full_feasibility_check(start, inst).ok);
        Solution best = start;
        if (best.routes_num() <= target_routes) {
            return best;
        }
        Solution sol = start;
        Sparsification spars(inst.vertices_num(), params.gamma_base, params.lambda, params.non_improving_threshold());
        double retain = 1.0;        // chance an uninsertable customer stays unserved
        std::vector<int> backlog;   // customers currently left out of the reference
        for (long long n = 0; n < params.delta_rm; ++n) {
            if (sol.routes_num() < 2) {
                break;
            }
            sol.cache_clear();
            const auto [first, second] = detail::pick_route_pair(sol, neighbors);
            for (const int r : {first, second}) {
                int witness = kDepot;
                while (sol.route_size(r) > 0) {
                    const int v = sol.route_first(r);
                    sol.apply_or_die(Action::remove(v, kDepot, r));
                    backlog.push_back(v);
                    witness = v;
                }
                sol.apply_or_die(Action::delete_empty_route(witness, r));
            }
            const RecreateOrder order = rng.next_int(2) == 0 ? RecreateOrder::shuffled : RecreateOrder::lightest_first;
            order_for_recreate(backlog, inst, order, rng);
            std::vector<int> deferred;
            for (const int v : backlog) {
                const auto spot = detail::best_insertion_in_existing_routes(sol, v);
                if (spot.found) {
                    sol.apply_or_die(Action::insert_after(v, spot.pred, spot.route));
                } else if (sol.routes_num() < target_routes || rng.next_double() > retain) {
                    const int fresh = sol.peek_free_route_id();
                    sol.apply_or_die(Action::create_singleton_route(v, fresh));
                    sol.apply_or_die(Action::insert_after(v, kDepot, fresh));
                } else {
                    deferred.push_back(v);
                }
            }
            backlog = std::move(deferred);
            const auto descent = vnd_descend(sol, sol.cache(), gens, spars, rng);
            bool improved_best = false;
            if (backlog.empty() &&
                (sol.cost() < best.cost() || (sol.cost() == best.cost() && sol.routes_num() < best.routes_num()))) {
                best = sol;
                improved_best = true;
                if (best.routes_num() <= target_routes) {
                    return best;
                }
            }
            update_sparsification(spars, descent.touched, improved_best);
            retain *= 0.9;
            if (sol.cost() > best.cost()) {
                // The backlog describes the abandoned reference; the best
                // solution serves everyone.
                sol = best;
                backlog.clear();
            }
        }
        return best;
    }

    // --- core optimization ------------------------------------------------------

    // Mean cost over the whole granular arc set; the cost scale the annealing
    // temperatures are expressed in.
    inline double mean_generator_arc_cost(const Instance& inst, const MoveGeneratorSet& gens) {
        double sum = 0.0;
        long long count = 0;
        for (int v = 0; v < inst.vertices_num(); ++v) {
            for (const int j : gens.arcs(v)) {
                sum += inst.cost(v, j);
                ++count;
            }
        }
        return count > 0 ? sum / static_cast<double>(count) : 0.0;
    }

    // One cooperating worker's private search state.
    struct SolverState {
        Solution current;         // reference solution S
        Solution best;            // best solution found so far
        std::vector<int> omega;   // per-customer ruin intensity
        Sparsification gamma;     // per-vertex local search intensification
        double temperature;
        double cooling;           // per-feasible-change temperature factor
        Rng private_rng;          // seeds, walks and reinsertion orders
        Rng shared_rng;           // intensity updates and acceptance draws
        long long iterations;     // feasible changes simulated so far
        SolverParams params;
    };

    inline SolverState make_solver_state(const Instance& inst, const Solution& start, const MoveGeneratorSet& gens,
                                         const SolverParams& params, std::uint64_t private_seed,
                                         std::uint64_t shared_seed) {
        assert(full_feasibility_check(start, inst).ok);
        double t0 = params.t0_factor * mean_generator_arc_cost(inst, gens);
        if (!(t0 > 0.0)) {
            t0 = 1.0;  // degenerate geometry: keep the acceptance rule defined
        }
        const double cooling =
            params.delta_co > 0 ? std::pow(params.tf_factor, 1.0 / static_cast<double>(params.delta_co)) : 1.0;
        return SolverState{start,
                           start,
                           std::vector<int>(inst.vertices_num(), params.omega_base(inst.vertices_num())),
                           Sparsification(inst.vertices_num(), params.gamma_base, params.lambda,
                                          params.non_improving_threshold()),
                           t0,
                           cooling,
                           Rng(private_seed),
                           Rng(shared_seed),
                           0,
                           params};
    }

    // Generates one candidate change without leaving a trace: ruin around a
    // random seed, reinsert under a random order, descend, harvest the journal
    // and roll everything back so the change can be replayed later in the
    // dispatcher's total order (its own generator included).
    inline CandidateChange core_opt_iteration(SolverState& state, const Instance& inst, const MoveGeneratorSet& gens,
                                              const NeighborLists& neighbors) {
        assert(state.current.unrouted_num() == 0);
        state.current.cache_clear();
        const double cost_before = state.current.cost();
        state.current.begin_recording();
        const int seed = 1 + state.private_rng.next_int(inst.customers_num());
        const auto ruin = shake(state.current, seed, state.omega[seed], neighbors, state.private_rng,
                                state.params.n_gs);
        static constexpr RecreateOrder kOrders[] = {RecreateOrder::nearest_first, RecreateOrder::farthest_first,
                                                    RecreateOrder::heaviest_first, RecreateOrder::shuffled};
        const RecreateOrder order = kOrders[state.private_rng.next_int(4)];
        recreate(state.current, ruin.ruined, order, state.private_rng);
        assert(state.current.unrouted_num() == 0);
        vnd_descend(state.current, state.current.cache(), gens, state.gamma, state.private_rng);

        CandidateChange change;
        change.actions = state.current.recorded_actions();
        change.ruined_customers = ruin.ruined;
        change.touched_vertices = derive_touched_vertices(change.actions);
        change.recorded_delta = state.current.cost() - cost_before;
        state.current.rollback_recording();
        return change;
    }

    // What a relayed change did to this solver.
    enum class SimulationResult : std::uint8_t {
        discarded,      // inapplicable here; no state, stream or clock advanced
        applied_kept,   // feasible and accepted as the new reference
        applied_undone  // feasible but rejected; parameters still advanced
    };

    // Replays one relayed change and runs the full acceptance pipeline on it.
    // Every solver executes this same code on the same change sequence, so
    // parameters, streams and solutions evolve in lockstep.
    inline SimulationResult simulate_iteration(SolverState& state, const CandidateChange& change,
                                               [[maybe_unused]] const Instance& inst) {
        assert(&inst == &state.current.instance());
        const double cost_ref = state.current.cost();
        if (!state.current.apply_change(change).feasible) {
            return SimulationResult::discarded;
        }
        const double cost_new = state.current.cost();
        const bool improved_best = cost_new < state.best.cost();
        update_sparsification(state.gamma, change.touched_vertices, improved_best);
        if (improved_best) {
            state.best = state.current;  // snapshot taken while the change is in flight
            state.best.forget_pending_changes();
        }
        update_omega(state.omega, change.ruined_customers, cost_new, cost_ref, state.shared_rng, state.params);
        const bool kept = sa_accept(cost_new, cost_ref, state.temperature, state.shared_rng);
        if (kept) {
            state.current.commit_change(change);
        } else {
            state.current.undo_change(change);
        }
        state.temperature *= state.cooling;
        state.iterations += 1;
        if (state.iterations % kAggregateRefreshPeriod == 0) {
            state.current.recompute_aggregates();
        }
        return kept ? SimulationResult::applied_kept : SimulationResult::applied_undone;
    }

    // The single-worker optimization loop: every iteration generates a change,
    // rolls it back and replays it through the same path the cooperative
    // schema uses, so one worker and many share the same physics.
    inline Solution core_optimization_sequential(SolverState& state, const Instance& inst,
                                                 const MoveGeneratorSet& gens, const NeighborLists& neighbors,
                                                 long long delta_co) {
        for (long long n = 0; n < delta_co; ++n) {
            const CandidateChange change = core_opt_iteration(state, inst, gens, neighbors);
            [[maybe_unused]] const SimulationResult result = simulate_iteration(state, change, inst);
            assert(result != SimulationResult::discarded);
        }
        return state.best;
    }

}  // namespace cvrp

#endif
