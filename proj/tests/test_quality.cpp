#include <gtest/gtest.h>

#include <bit>
#include <limits>
#include <string>
#include <vector>

#include "cvrp/instance.hpp"
#include "cvrp/parallel.hpp"
#include "cvrp/rng.hpp"
#include "cvrp/solution.hpp"
#include "support.hpp"

namespace cvrp {
    namespace {

        // Exact optimum by dynamic programming: Held-Karp paths give the best
        // single route per customer subset, then a partition DP assembles routes.
        // Exponential, so only for instances of up to ~12 customers.
        double exact_cvrp_cost(const Instance& inst) {
            const int n = inst.customers_num();
            const int full = (1 << n) - 1;
            constexpr double kInf = std::numeric_limits<double>::infinity();

            std::vector<int> load(full + 1, 0);
            for (int m = 1; m <= full; ++m) {
                const int j = std::countr_zero(static_cast<unsigned>(m));
                load[m] = load[m & (m - 1)] + inst.demand(j + 1);
            }

            std::vector<std::vector<double>> dp(full + 1, std::vector<double>(n, kInf));
            for (int j = 0; j < n; ++j) {
                dp[1 << j][j] = inst.cost(0, j + 1);
            }
            for (int m = 1; m <= full; ++m) {
                for (int j = 0; j < n; ++j) {
                    if (!(m >> j & 1) || dp[m][j] == kInf) {
                        continue;
                    }
                    for (int k = 0; k < n; ++k) {
                        if (m >> k & 1) {
                            continue;
                        }
                        const int next = m | 1 << k;
                        dp[next][k] = std::min(dp[next][k], dp[m][j] + inst.cost(j + 1, k + 1));
                    }
                }
            }

            std::vector<double> route(full + 1, kInf);
            for (int m = 1; m <= full; ++m) {
                if (load[m] > inst.capacity()) {
                    continue;
                }
                for (int j = 0; j < n; ++j) {
                    if (m >> j & 1 && dp[m][j] < kInf) {
                        route[m] = std::min(route[m], dp[m][j] + inst.cost(j + 1, 0));
                    }
                }
            }

            std::vector<double> best(full + 1, kInf);
            best[0] = 0.0;
            for (int m = 1; m <= full; ++m) {
                const int low = m & -m;
                // Every partition has exactly one part holding the lowest customer.
                for (int s = m; s != 0; s = (s - 1) & m) {
                    if ((s & low) && route[s] < kInf && best[m ^ s] < kInf) {
                        best[m] = std::min(best[m], best[m ^ s] + route[s]);
                    }
                }
            }
            return best[full];
        }

        TEST(ExactOracle, HandBuiltTwoRouteInstance) {
            // Two customers on opposite sides, each filling a vehicle: the only
            // solution is two out-and-back routes.
            const Instance inst("two", {0.0, 0.0, 0.0}, {0.0, 10.0, -7.0}, {0, 5, 5}, 5,
                                EdgeWeight::rounded_euclidean);
            EXPECT_DOUBLE_EQ(exact_cvrp_cost(inst), 2.0 * 10.0 + 2.0 * 7.0);
        }

        TEST(Quality, SequentialRunReachesTheExactOptimumOnTinyInstances) {
            const struct {
                std::uint64_t make_seed;
                int customers;
                int capacity;
            } cases[] = {{11, 5, 12}, {22, 6, 15}, {33, 7, 18}, {44, 8, 20}};
            for (const auto& c : cases) {
                Rng make(c.make_seed);
                const Instance inst = testing::make_random_instance(make, c.customers, c.capacity);
                const double optimum = exact_cvrp_cost(inst);
                SolverParams params;
                params.seed = 1;
                params.delta_co = 5000;
                auto [best, stats] = run_sequential(inst, params);
                EXPECT_TRUE(full_feasibility_check(best, inst).ok);
                EXPECT_GE(stats.final_cost, optimum);
                EXPECT_DOUBLE_EQ(stats.final_cost, optimum)
                    << "customers " << c.customers << " capacity " << c.capacity;
            }
        }

        // Four far-apart clusters, each exactly filling one vehicle: the optimum
        // is the sum of the per-cluster optima, which the oracle supplies.
        Instance clustered_instance(std::vector<Instance>* clusters) {
            const double centers[4][2] = {{0.0, 0.0}, {2000.0, 0.0}, {0.0, 2000.0}, {2000.0, 2000.0}};
            const double offsets[5][2] = {{0.0, 0.0}, {25.0, 10.0}, {10.0, 28.0}, {-15.0, 20.0}, {-8.0, -18.0}};
            std::vector<double> xs{1000.0};
            std::vector<double> ys{1000.0};
            std::vector<int> demands{0};
            for (const auto& center : centers) {
                std::vector<double> cx{1000.0};
                std::vector<double> cy{1000.0};
                std::vector<int> cq{0};
                for (const auto& offset : offsets) {
                    xs.push_back(center[0] + offset[0]);
                    ys.push_back(center[1] + offset[1]);
                    demands.push_back(2);
                    cx.push_back(center[0] + offset[0]);
                    cy.push_back(center[1] + offset[1]);
                    cq.push_back(2);
                }
                clusters->emplace_back("cluster", std::move(cx), std::move(cy), std::move(cq), 10,
                                       EdgeWeight::rounded_euclidean);
            }
            return Instance("clustered", std::move(xs), std::move(ys), std::move(demands), 10,
                            EdgeWeight::rounded_euclidean);
        }

        TEST(Quality, ClusteredInstanceDecomposesIntoPerClusterTours) {
            std::vector<Instance> clusters;
            const Instance inst = clustered_instance(&clusters);
            double optimum = 0.0;
            for (const auto& cluster : clusters) {
                optimum += exact_cvrp_cost(cluster);
            }
            SolverParams params;
            params.seed = 3;
            params.delta_co = 3000;
            auto [best, stats] = run_sequential(inst, params);
            EXPECT_TRUE(full_feasibility_check(best, inst).ok);
            EXPECT_EQ(best.routes_num(), 4);
            EXPECT_DOUBLE_EQ(stats.final_cost, optimum);

            params.solvers = 2;
            auto [par_best, par_stats] = run_filo2x(inst, params);
            EXPECT_TRUE(full_feasibility_check(par_best, inst).ok);
            EXPECT_DOUBLE_EQ(par_stats.final_cost, optimum);
        }

    }  // namespace
}  // namespace cvrp
