#ifndef CVRP_CONSTRUCTION_HPP_
#define CVRP_CONSTRUCTION_HPP_

#include <algorithm>
#include <cassert>
#include <vector>

#include "instance.hpp"
#include "rng.hpp"
#include "solution.hpp"

namespace cvrp {

    // Savings construction over neighbor-limited pairs.
    //
    // Starts from one singleton route per customer and merges route ends in
    // non-increasing savings order, where savings are computed only for the
    // n_cw nearest customers of each vertex instead of all pairs. Ties are
    // broken lexicographically by (i, j) so construction is fully
    // deterministic; the rng parameter is reserved.
    inline Solution savings_construct(const Instance& inst, const NeighborLists& neighbors, int n_cw,
                                      [[maybe_unused]] Rng& rng, int cache_capacity = 50) {
        Solution sol(inst, cache_capacity);
        for (int v = 1; v < inst.vertices_num(); ++v) {
            const int r = sol.peek_free_route_id();
            sol.apply_or_die(Action::create_singleton_route(v, r));
            sol.apply_or_die(Action::insert_after(v, kDepot, r));
        }

        struct Saving {
            double value;
            int i, j;
        };
        std::vector<Saving> savings;
        for (int i = 1; i < inst.vertices_num(); ++i) {
            int considered = 0;
            for (const int j : neighbors.of(i)) {
                if (j == kDepot) {
                    continue;
                }
                if (++considered > n_cw) {
                    break;
                }
                if (j > i) {
                    savings.push_back({inst.cost(i, kDepot) + inst.cost(kDepot, j) - inst.cost(i, j), i, j});
                }
            }
        }
        std::sort(savings.begin(), savings.end(), [](const Saving& a, const Saving& b) {
            if (a.value != b.value) {
                return a.value > b.value;
            }
            return a.i != b.i ? a.i < b.i : a.j < b.j;
        });

        for (const auto& s : savings) {
            int i = s.i;
            int j = s.j;
            // Merge only at route ends: the edge (i, j) is created by appending
            // j's route after i, or symmetrically i's route after j.
            if (sol.next_of(i) != kDepot || sol.prev_of(j) != kDepot) {
                std::swap(i, j);
                if (sol.next_of(i) != kDepot || sol.prev_of(j) != kDepot) {
                    continue;
                }
            }
            const int route_i = sol.route_of(i);
            const int route_j = sol.route_of(j);
            if (route_i == route_j || sol.route_load(route_i) + sol.route_load(route_j) > inst.capacity()) {
                continue;
            }
            int tail = sol.route_last(route_i);
            while (sol.route_size(route_j) > 0) {
                const int v = sol.route_first(route_j);
                sol.apply_or_die(Action::remove(v, kDepot, route_j));
                sol.apply_or_die(Action::insert_after(v, tail, route_i));
                tail = v;
            }
            sol.apply_or_die(Action::delete_empty_route(j, route_j));
        }
        return sol;
    }

    // Greedy first-fit bin packing over customers in ascending index order;
    // the resulting bin count estimates how many routes a good solution needs.
    inline int greedy_route_estimate(const Instance& inst) {
        std::vector<int> residual;
        for (int v = 1; v < inst.vertices_num(); ++v) {
            const int q = inst.demand(v);
            bool placed = false;
            for (int& slack : residual) {
                if (slack >= q) {
                    slack -= q;
                    placed = true;
                    break;
                }
            }
            if (!placed) {
                residual.push_back(inst.capacity() - q);
            }
        }
        return static_cast<int>(residual.size());
    }

}  // namespace cvrp

#endif
