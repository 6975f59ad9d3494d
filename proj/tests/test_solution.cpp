#include <cvrp/solution.hpp>

#include <deque>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "support.hpp"

namespace {

    using cvrp::Action;
    using cvrp::ApplyResult;
    using cvrp::CandidateChange;
    using cvrp::EdgeWeight;
    using cvrp::Instance;
    using cvrp::kDepot;
    using cvrp::Solution;

    Instance line_instance(int customers, int capacity) {
        std::vector<double> xs{0}, ys{0};
        std::vector<int> q{0};
        for (int i = 1; i <= customers; ++i) {
            xs.push_back(i);
            ys.push_back(0);
            q.push_back(1);
        }
        return Instance("line", std::move(xs), std::move(ys), std::move(q), capacity, EdgeWeight::rounded_euclidean);
    }

    TEST(Action, DoubleInversionIsIdentity) {
        const std::vector<Action> all = {
            Action::insert_after(3, 7, 2),
            Action::remove(3, 7, 2),
            Action::create_singleton_route(4, 1),
            Action::delete_empty_route(4, 1),
        };
        for (const auto& a : all) {
            EXPECT_EQ(a.inverted().inverted(), a);
        }
        EXPECT_EQ(Action::insert_after(3, 7, 2).inverted(), Action::remove(3, 7, 2));
        EXPECT_EQ(Action::create_singleton_route(4, 1).inverted(), Action::delete_empty_route(4, 1));
    }

    TEST(ApplyAction, InsertIntoEmptyRouteUpdatesAggregates) {
        const auto inst = line_instance(3, 10);
        Solution sol(inst);
        EXPECT_EQ(sol.apply(Action::create_singleton_route(3, 0)), ApplyResult::applied);
        EXPECT_EQ(sol.apply(Action::insert_after(3, kDepot, 0)), ApplyResult::applied);
        EXPECT_EQ(sol.route_first(0), 3);
        EXPECT_EQ(sol.route_last(0), 3);
        EXPECT_EQ(sol.route_size(0), 1);
        EXPECT_EQ(sol.route_load(0), 1);
        EXPECT_EQ(sol.route_cost(0), 6.0);  // out and back at distance 3
        EXPECT_EQ(sol.cost(), 6.0);
        EXPECT_EQ(sol.next_of(3), kDepot);
        EXPECT_EQ(sol.prev_of(3), kDepot);
    }

    TEST(ApplyAction, InapplicabilityReasons) {
        const auto inst = line_instance(3, 10);
        auto sol = cvrp::testing::make_singleton_solution(inst);
        // Customer 1 lives in route 0, customer 2 in route 1, customer 3 in route 2.
        EXPECT_EQ(sol.apply(Action::insert_after(1, 2, 1)), ApplyResult::vertex_already_routed);
        EXPECT_EQ(sol.apply(Action::remove(1, 2, 0)), ApplyResult::adjacency_mismatch);  // 1's pred is the depot
        EXPECT_EQ(sol.apply(Action::remove(1, kDepot, 1)), ApplyResult::adjacency_mismatch);  // wrong route
        EXPECT_EQ(sol.apply(Action::create_singleton_route(1, 9)), ApplyResult::vertex_already_routed);
        EXPECT_EQ(sol.apply(Action::delete_empty_route(1, 0)), ApplyResult::route_not_empty);
        EXPECT_EQ(sol.apply(Action::delete_empty_route(1, 42)), ApplyResult::missing_route);
        sol.apply_or_die(Action::remove(2, kDepot, 1));
        sol.apply_or_die(Action::remove(3, kDepot, 2));
        EXPECT_EQ(sol.apply(Action::remove(2, kDepot, 1)), ApplyResult::vertex_not_routed);
        EXPECT_EQ(sol.apply(Action::insert_after(2, 3, 2)), ApplyResult::pred_unrouted);  // 3 is unrouted too
        EXPECT_EQ(sol.apply(Action::insert_after(2, kDepot, 42)), ApplyResult::missing_route);
        EXPECT_EQ(sol.apply(Action::create_singleton_route(2, 0)), ApplyResult::route_id_unavailable);
    }

    TEST(ApplyAction, ApplyThenInverseRestoresFieldByField) {
        const auto inst = line_instance(4, 10);
        auto sol = cvrp::testing::make_singleton_solution(inst);
        const Solution snapshot = sol;
        const std::vector<Action> probes = {
            Action::remove(2, kDepot, 1),
            Action::insert_after(2, 1, 0),  // relocated after applying the remove first
        };
        // remove then its inverse
        sol.apply_or_die(probes[0]);
        sol.apply_or_die(probes[0].inverted());
        EXPECT_TRUE(sol.identical_to(snapshot));
        // insert (after a removal) then unwind both via inverses in reverse order
        sol.apply_or_die(probes[0]);
        sol.apply_or_die(probes[1]);
        sol.apply_or_die(probes[1].inverted());
        sol.apply_or_die(probes[0].inverted());
        EXPECT_TRUE(sol.identical_to(snapshot));
        // route deletion and recreation
        sol.apply_or_die(Action::remove(3, kDepot, 2));
        sol.apply_or_die(Action::delete_empty_route(3, 2));
        sol.apply_or_die(Action::delete_empty_route(3, 2).inverted());
        sol.apply_or_die(Action::remove(3, kDepot, 2).inverted());
        EXPECT_TRUE(sol.identical_to(snapshot));
    }

    TEST(ApplyChange, SelfGeneratedChangeIsFeasibleWithRecordedDelta) {
        cvrp::Rng rng(5);
        const auto inst = cvrp::testing::make_random_instance(rng, 30, 40);
        auto sol = cvrp::testing::make_singleton_solution(inst);
        const double before = sol.cost();
        sol.begin_recording();
        sol.apply_or_die(Action::remove(7, kDepot, 6));
        sol.apply_or_die(Action::delete_empty_route(7, 6));
        sol.apply_or_die(Action::insert_after(7, 3, sol.route_of(3)));
        CandidateChange ch;
        ch.actions = sol.recorded_actions();
        const double recorded_delta = sol.cost() - before;
        sol.rollback_recording();
        EXPECT_EQ(sol.cost(), before);

        const auto outcome = sol.apply_change(ch);
        EXPECT_TRUE(outcome.feasible);
        EXPECT_EQ(outcome.delta, recorded_delta);
        sol.commit_change(ch);
        EXPECT_TRUE(full_feasibility_check(sol, inst).ok);
    }

    TEST(ApplyChange, CapacityViolationRejectsAndRestoresBitIdentically) {
        const auto inst = line_instance(3, 2);  // unit demands, capacity 2
        auto sol = cvrp::testing::make_singleton_solution(inst);
        // Pack customers 1 and 2 into route 0 (load 2 = Q).
        CandidateChange fill;
        fill.actions = {Action::remove(2, kDepot, 1), Action::delete_empty_route(2, 1), Action::insert_after(2, 1, 0)};
        ASSERT_TRUE(sol.apply_change(fill).feasible);
        sol.commit_change(fill);
        const Solution snapshot = sol;
        const auto hash_before = sol.structural_hash();
        // Pushing customer 3 into route 0 exceeds Q.
        CandidateChange overload;
        overload.actions = {Action::remove(3, kDepot, 2), Action::insert_after(3, 2, 0)};
        const auto outcome = sol.apply_change(overload);
        EXPECT_FALSE(outcome.feasible);
        EXPECT_EQ(sol.structural_hash(), hash_before);
        EXPECT_TRUE(sol.identical_to(snapshot));
        EXPECT_TRUE(full_feasibility_check(sol, inst).ok);
    }

    TEST(ApplyChange, EmptyChangeIsFeasibleIdentity) {
        const auto inst = line_instance(2, 10);
        auto sol = cvrp::testing::make_singleton_solution(inst);
        const Solution snapshot = sol;
        CandidateChange empty;
        const auto outcome = sol.apply_change(empty);
        EXPECT_TRUE(outcome.feasible);
        EXPECT_EQ(outcome.delta, 0.0);
        sol.undo_change(empty);
        EXPECT_TRUE(sol.identical_to(snapshot));
    }

    TEST(ApplyChange, StaleAdjacencyIsRejected) {
        const auto inst = line_instance(4, 10);
        auto sol = cvrp::testing::make_singleton_solution(inst);
        CandidateChange stale;
        stale.actions = {Action::remove(2, 3, 1)};  // 2's predecessor is the depot, not 3
        const Solution snapshot = sol;
        EXPECT_FALSE(sol.apply_change(stale).feasible);
        EXPECT_TRUE(sol.identical_to(snapshot));
    }

    TEST(UndoChange, LifoProtocolEnforced) {
        const auto inst = line_instance(4, 10);
        auto sol = cvrp::testing::make_singleton_solution(inst);
        cvrp::Rng rng(11);
        const auto ch1 = cvrp::testing::make_random_change(sol, rng);
        const auto ch2 = cvrp::testing::make_random_change(sol, rng);
        ASSERT_TRUE(sol.apply_change(ch1).feasible);
        if (sol.apply_change(ch2).feasible) {
            EXPECT_THROW(sol.undo_change(ch1), cvrp::ProtocolViolation);
            sol.undo_change(ch2);
        }
        EXPECT_THROW(sol.commit_change(ch2), cvrp::ProtocolViolation);
        sol.undo_change(ch1);
    }

    TEST(UndoChange, HundredStackedChangesUnwindToOriginal) {
        cvrp::Rng rng(2718);
        const auto inst = cvrp::testing::make_random_instance(rng, 60, 30);
        auto sol = cvrp::testing::make_singleton_solution(inst);
        const Solution original = sol;
        // undo_change identifies a change by the address handed to apply_change,
        // so applied changes must live in an address-stable container.
        std::deque<CandidateChange> applied;
        while (applied.size() < 100) {
            applied.push_back(cvrp::testing::make_random_change(sol, rng));
            if (!sol.apply_change(applied.back()).feasible) {
                applied.pop_back();
            }
        }
        for (auto it = applied.rbegin(); it != applied.rend(); ++it) {
            sol.undo_change(*it);
        }
        EXPECT_TRUE(sol.identical_to(original));
        EXPECT_TRUE(full_feasibility_check(sol, inst).ok);
    }

    TEST(UndoChange, TenThousandRandomChangesRoundTrip) {
        cvrp::Rng rng(31337);
        const auto inst = cvrp::testing::make_random_instance(rng, 400, 50);
        auto sol = cvrp::testing::make_singleton_solution(inst);
        Solution snapshot = sol;
        int feasible = 0, rejected = 0;
        for (int i = 0; i < 10000; ++i) {
            const auto ch = cvrp::testing::make_random_change(sol, rng);
            const auto outcome = sol.apply_change(ch);
            if (!outcome.feasible) {
                ++rejected;
                ASSERT_TRUE(sol.identical_to(snapshot)) << "rejection must be transactional, iter " << i;
                continue;
            }
            ++feasible;
            if (rng.next_bool()) {
                sol.undo_change(ch);
                ASSERT_TRUE(sol.identical_to(snapshot)) << "undo must restore exactly, iter " << i;
            } else {
                sol.commit_change(ch);
                snapshot = sol;
            }
        }
        // The harness must exercise both paths.
        EXPECT_GT(feasible, 1000);
        EXPECT_GT(rejected, 10);
        EXPECT_TRUE(full_feasibility_check(sol, inst).ok);
    }

    TEST(VertexCache, EvictionAndRecencyOrder) {
        cvrp::VertexCache cache(2, 10);
        cache.touch(1);
        cache.touch(2);
        cache.touch(3);
        EXPECT_EQ(cache.size(), 2);
        EXPECT_FALSE(cache.contains(1));
        EXPECT_EQ(cache.snapshot(), (std::vector<int>{2, 3}));
        cache.touch(2);  // refresh, no eviction
        EXPECT_EQ(cache.snapshot(), (std::vector<int>{3, 2}));

        // Hand-simulated 5-element sequence on capacity 3.
        cvrp::VertexCache c3(3, 10);
        for (const int v : {5, 1, 5, 2, 4, 1}) {
            c3.touch(v);
        }
        // touches: 5 1 5 2 4 1 -> [5 1] -> [1 5] -> [1 5 2] -> evict 1 -> [5 2 4] -> evict 5 -> [2 4 1]
        EXPECT_EQ(c3.snapshot(), (std::vector<int>{2, 4, 1}));
        c3.clear();
        EXPECT_EQ(c3.size(), 0);
        EXPECT_FALSE(c3.contains(2));
    }

    TEST(VertexCache, DepotIsNeverCached) {
        cvrp::VertexCache cache(3, 10);
        cache.touch(kDepot);
        EXPECT_EQ(cache.size(), 0);
    }

    TEST(RouteIdPool, LowestFirstRecycling) {
        const auto inst = line_instance(4, 10);
        auto sol = cvrp::testing::make_singleton_solution(inst);
        // Routes 0..3 live. Free 2 and 1; the next two creations claim 1 then 2.
        sol.apply_or_die(Action::remove(3, kDepot, 2));
        sol.apply_or_die(Action::delete_empty_route(3, 2));
        sol.apply_or_die(Action::remove(2, kDepot, 1));
        sol.apply_or_die(Action::delete_empty_route(2, 1));
        EXPECT_EQ(sol.peek_free_route_id(), 1);
        sol.apply_or_die(Action::create_singleton_route(2, 1));
        sol.apply_or_die(Action::insert_after(2, kDepot, 1));
        EXPECT_EQ(sol.peek_free_route_id(), 2);
    }

    TEST(FeasibilityCheck, DetectsCorruptions) {
        const auto inst = line_instance(4, 10);
        auto sol = cvrp::testing::make_singleton_solution(inst);
        EXPECT_TRUE(full_feasibility_check(sol, inst).ok);

        // Customer appearing in two routes.
        auto dup = sol;
        cvrp::SolutionTestAccess::route_first(dup, 1) = 1;  // route 1 now also starts at customer 1
        const auto dup_report = full_feasibility_check(dup, inst);
        EXPECT_FALSE(dup_report.ok);
        bool found_duplicate = false;
        for (const auto& v : dup_report.violations) {
            found_duplicate |= v.kind == cvrp::FeasibilityViolation::Kind::duplicate_visit;
        }
        EXPECT_TRUE(found_duplicate);

        // Stored cost perturbed by +1.
        auto skew = sol;
        cvrp::SolutionTestAccess::route_cost(skew, 0) += 1.0;
        const auto skew_report = full_feasibility_check(skew, inst);
        EXPECT_FALSE(skew_report.ok);
        bool found_mismatch = false;
        for (const auto& v : skew_report.violations) {
            found_mismatch |= v.kind == cvrp::FeasibilityViolation::Kind::aggregate_mismatch;
        }
        EXPECT_TRUE(found_mismatch);

        // Unrouted customer reported.
        auto partial = sol;
        partial.apply_or_die(Action::remove(4, kDepot, 3));
        const auto partial_report = full_feasibility_check(partial, inst);
        EXPECT_FALSE(partial_report.ok);
        EXPECT_EQ(partial_report.violations[0].kind, cvrp::FeasibilityViolation::Kind::unrouted_customer);
        EXPECT_EQ(partial_report.violations[0].vertex, 4);
    }

    TEST(Serialization, CvrplibSolutionFormat) {
        std::vector<double> xs{0, 1, 2, 0};
        std::vector<double> ys{0, 0, 0, 5};
        std::vector<int> q{0, 1, 1, 1};
        const Instance inst("fmt", std::move(xs), std::move(ys), std::move(q), 10,
                            EdgeWeight::rounded_euclidean);
        Solution sol(inst);
        sol.apply_or_die(Action::create_singleton_route(1, 0));
        sol.apply_or_die(Action::insert_after(1, kDepot, 0));
        sol.apply_or_die(Action::insert_after(2, 1, 0));
        sol.apply_or_die(Action::create_singleton_route(3, 1));
        sol.apply_or_die(Action::insert_after(3, kDepot, 1));

        std::ostringstream out;
        sol.write(out);
        EXPECT_EQ(out.str(), "Route #1: 1 2\nRoute #2: 3\nCost 14\n");

        // Empty live routes are skipped.
        sol.apply_or_die(Action::remove(3, kDepot, 1));
        sol.apply_or_die(Action::insert_after(3, 2, 0));
        std::ostringstream out2;
        sol.write(out2);
        EXPECT_EQ(out2.str().find("Route #2"), std::string::npos);
    }

    TEST(PrefixLoads, LazyCumulativeLoads) {
        std::vector<double> xs{0, 1, 2, 3};
        std::vector<double> ys{0, 0, 0, 0};
        std::vector<int> q{0, 2, 3, 4};
        const Instance inst("loads", std::move(xs), std::move(ys), std::move(q), 20,
                            EdgeWeight::rounded_euclidean);
        Solution sol(inst);
        sol.apply_or_die(Action::create_singleton_route(1, 0));
        sol.apply_or_die(Action::insert_after(1, kDepot, 0));
        sol.apply_or_die(Action::insert_after(2, 1, 0));
        sol.apply_or_die(Action::insert_after(3, 2, 0));
        EXPECT_EQ(sol.prefix_load_of(1), 2);
        EXPECT_EQ(sol.prefix_load_of(2), 5);
        EXPECT_EQ(sol.prefix_load_of(3), 9);
        // Mutation invalidates and recomputes.
        sol.apply_or_die(Action::remove(2, 1, 0));
        EXPECT_EQ(sol.prefix_load_of(3), 6);
    }

    TEST(TouchedVertices, DerivedFromActionsInEncounterOrder) {
        const std::vector<Action> actions = {
            Action::remove(5, 2, 0),
            Action::insert_after(5, 7, 1),
            Action::remove(2, kDepot, 0),
            Action::create_singleton_route(2, 3),
            Action::insert_after(2, kDepot, 3),
        };
        EXPECT_EQ(cvrp::derive_touched_vertices(actions), (std::vector<int>{5, 2, 7}));
    }

    TEST(RecomputeAggregates, MatchesIncrementalState) {
        cvrp::Rng rng(404);
        const auto inst = cvrp::testing::make_random_instance(rng, 50, 30, 10, 500, EdgeWeight::exact_euclidean);
        auto sol = cvrp::testing::make_singleton_solution(inst);
        for (int i = 0; i < 200; ++i) {
            const auto ch = cvrp::testing::make_random_change(sol, rng);
            if (sol.apply_change(ch).feasible) {
                sol.commit_change(ch);
            }
        }
        const double incremental = sol.cost();
        sol.recompute_aggregates();
        EXPECT_NEAR(sol.cost(), incremental, 1e-6);
        EXPECT_TRUE(full_feasibility_check(sol, inst).ok);
    }

}  // namespace
