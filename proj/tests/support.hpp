#ifndef CVRP_TESTS_SUPPORT_HPP_
#define CVRP_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include <cvrp/instance.hpp>
#include <cvrp/rng.hpp>
#include <cvrp/solution.hpp>

namespace cvrp {

    // Raw access into Solution internals for corruption tests.
    struct SolutionTestAccess {
        static double& route_cost(Solution& s, int r) {
            return s.routes[r].cost;
        }

        static int& route_first(Solution& s, int r) {
            return s.routes[r].first;
        }

        static double& total_cost(Solution& s) {
            return s.total_cost;
        }
    };

}  // namespace cvrp

namespace cvrp::testing {

    // Random instance with integer coordinates in [0, span)^2 and customer
    // demands in [1, max_demand]. Coordinates are drawn without any separation
    // guarantee, so duplicated points and cost ties do occur — intentionally.
    inline Instance make_random_instance(Rng& rng, int customers, int capacity, int max_demand = 10, int span = 1000,
                                         EdgeWeight kind = EdgeWeight::rounded_euclidean) {
        std::vector<double> xs(customers + 1), ys(customers + 1);
        std::vector<int> demands(customers + 1, 0);
        for (int i = 0; i <= customers; ++i) {
            xs[i] = rng.next_int(span);
            ys[i] = rng.next_int(span);
        }
        for (int i = 1; i <= customers; ++i) {
            demands[i] = 1 + rng.next_int(std::min(max_demand, capacity));
        }
        return Instance("random-" + std::to_string(customers), std::move(xs), std::move(ys), std::move(demands),
                        capacity, kind);
    }

    // One singleton route per customer; the simplest feasible solution.
    inline Solution make_singleton_solution(const Instance& inst, int cache_capacity = 50) {
        Solution sol(inst, cache_capacity);
        for (int v = 1; v < inst.vertices_num(); ++v) {
            const int r = sol.peek_free_route_id();
            sol.apply_or_die(Action::create_singleton_route(v, r));
            sol.apply_or_die(Action::insert_after(v, kDepot, r));
        }
        return sol;
    }

    // Records a random multi-customer relocation bundle on sol and returns it
    // as a change, leaving sol untouched. The bundle is always applicable to
    // the solution it was generated on; it may still be capacity-infeasible,
    // which apply_change is expected to reject.
    inline CandidateChange make_random_change(Solution& sol, Rng& rng) {
        const Instance& inst = sol.instance();
        sol.begin_recording();
        std::vector<int> moved;
        const int ops = 1 + rng.next_int(4);
        for (int k = 0; k < ops; ++k) {
            std::vector<int> routed;
            for (int v = 1; v < inst.vertices_num(); ++v) {
                if (sol.is_routed(v)) {
                    routed.push_back(v);
                }
            }
            if (routed.empty()) {
                break;
            }
            const int v = routed[rng.next_int(static_cast<int>(routed.size()))];
            const int r = sol.route_of(v);
            sol.apply_or_die(Action::remove(v, sol.prev_of(v), r));
            moved.push_back(v);
            if (sol.route_size(r) == 0 && rng.next_bool()) {
                sol.apply_or_die(Action::delete_empty_route(v, r));
            }
        }
        rng.shuffle(moved.data(), static_cast<int>(moved.size()));
        for (const int v : moved) {
            std::vector<int> routed;
            for (int u = 1; u < inst.vertices_num(); ++u) {
                if (sol.is_routed(u)) {
                    routed.push_back(u);
                }
            }
            const bool make_singleton = routed.empty() || rng.next_int(4) == 0;
            if (make_singleton) {
                const int r = sol.peek_free_route_id();
                sol.apply_or_die(Action::create_singleton_route(v, r));
                sol.apply_or_die(Action::insert_after(v, kDepot, r));
            } else {
                const int after = routed[rng.next_int(static_cast<int>(routed.size()))];
                sol.apply_or_die(Action::insert_after(v, after, sol.route_of(after)));
            }
        }
        CandidateChange change;
        change.actions = sol.recorded_actions();
        change.ruined_customers = moved;
        change.touched_vertices = derive_touched_vertices(change.actions);
        sol.rollback_recording();
        return change;
    }

    // Builds a solution with exactly the given routes, in order.
    inline Solution build_solution(const Instance& inst, const std::vector<std::vector<int>>& routes,
                                   int cache_capacity = 50) {
        Solution sol(inst, cache_capacity);
        for (const auto& route : routes) {
            const int r = sol.peek_free_route_id();
            sol.apply_or_die(Action::create_singleton_route(route.front(), r));
            int pred = kDepot;
            for (const int v : route) {
                sol.apply_or_die(Action::insert_after(v, pred, r));
                pred = v;
            }
        }
        return sol;
    }

    // O(|V|^2) reference for the kd-tree neighbor lists.
    inline std::vector<std::vector<int>> brute_force_neighbors(const Instance& inst, int n_nn) {
        const int v_num = inst.vertices_num();
        const int per = std::min(n_nn, v_num - 1);
        std::vector<std::vector<int>> lists(v_num);
        for (int v = 0; v < v_num; ++v) {
            std::vector<std::pair<double, int>> all;
            all.reserve(v_num - 1);
            for (int u = 0; u < v_num; ++u) {
                if (u != v) {
                    all.emplace_back(inst.cost(v, u), u);
                }
            }
            std::sort(all.begin(), all.end());
            lists[v].reserve(per);
            for (int i = 0; i < per; ++i) {
                lists[v].push_back(all[i].second);
            }
        }
        return lists;
    }

}  // namespace cvrp::testing

#endif
