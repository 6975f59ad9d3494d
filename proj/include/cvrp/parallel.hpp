#ifndef CVRP_PARALLEL_HPP_
#define CVRP_PARALLEL_HPP_

#include <algorithm>
#include <cassert>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "construction.hpp"
#include "improve.hpp"
#include "instance.hpp"
#include "localsearch.hpp"
#include "rng.hpp"
#include "solution.hpp"

namespace cvrp {

    // Changes are shared by reference across all inboxes; the dispatcher writes
    // the sequence number before publication and nobody mutates them after.
    using ChangePtr = std::shared_ptr<CandidateChange>;
    using ChangeView = std::shared_ptr<const CandidateChange>;

    // --- queues ---------------------------------------------------------------

    // Shared submission queue: solvers produce, the single dispatcher consumes.
    // Consumption blocks while empty and ends once every solver has signaled
    // completion; entries still queued at that point are past the trajectory
    // cutoff and are dropped.
    class DispatcherQueue {
    public:
        explicit DispatcherQueue(int solvers_) : solvers(solvers_) {
            assert(solvers_ >= 1);
        }

        void submit(ChangePtr change) {
            {
                const std::lock_guard<std::mutex> lock(m);
                queue.push_back(std::move(change));
            }
            cv.notify_one();
        }

        void note_solver_done() {
            {
                const std::lock_guard<std::mutex> lock(m);
                done += 1;
                assert(done <= solvers);
            }
            cv.notify_one();
        }

        // Next change in arrival order, or null after the cooperative shutdown.
        ChangePtr next() {
            std::unique_lock<std::mutex> lock(m);
            cv.wait(lock, [this] { return !queue.empty() || done == solvers; });
            if (done == solvers) {
                dropped += static_cast<long long>(queue.size());
                queue.clear();
                return nullptr;
            }
            ChangePtr out = std::move(queue.front());
            queue.pop_front();
            return out;
        }

        // Stable only once the dispatcher has terminated.
        long long dropped_count() const {
            const std::lock_guard<std::mutex> lock(m);
            return dropped;
        }

    private:
        mutable std::mutex m;
        std::condition_variable cv;
        std::deque<ChangePtr> queue;
        const int solvers;
        int done = 0;
        long long dropped = 0;
    };

    // Per-solver ordered queue of broadcast changes: the dispatcher is the only
    // producer, the owning solver the only consumer.
    class SolverInbox {
    public:
        void push(ChangeView change) {
            {
                const std::lock_guard<std::mutex> lock(m);
                queue.push_back(std::move(change));
            }
            cv.notify_one();
        }

        // Everything present right now, without waiting.
        std::vector<ChangeView> drain_available() {
            const std::lock_guard<std::mutex> lock(m);
            std::vector<ChangeView> out(queue.begin(), queue.end());
            queue.clear();
            return out;
        }

        // Blocks until at least one change is present, then drains.
        std::vector<ChangeView> drain_blocking() {
            std::unique_lock<std::mutex> lock(m);
            cv.wait(lock, [this] { return !queue.empty(); });
            std::vector<ChangeView> out(queue.begin(), queue.end());
            queue.clear();
            return out;
        }

    private:
        std::mutex m;
        std::condition_variable cv;
        std::deque<ChangeView> queue;
    };

    // --- the dispatcher ---------------------------------------------------------

    // Relays every submitted change, stamped with the next sequence number, to
    // every inbox (the generator's included) in arrival order. Returns the
    // number of changes broadcast.
    inline long long dispatcher_loop(DispatcherQueue& queue, std::vector<SolverInbox>& inboxes) {
        long long sequence = 0;
        while (ChangePtr change = queue.next()) {
            change->sequence_no = ++sequence;
            const ChangeView view = std::move(change);
            for (auto& inbox : inboxes) {
                inbox.push(view);
            }
        }
        return sequence;
    }

    // --- the solver -----------------------------------------------------------

    struct SolverStats {
        long long generated = 0;          // changes produced and submitted
        long long applied = 0;            // relayed changes that were feasible here
        long long discarded = 0;          // relayed changes rejected as infeasible
        double routemin_seconds = 0.0;
        double sync_seconds = 0.0;        // draining, waiting and simulating
        double gen_seconds = 0.0;         // shake + recreate + descent + submit
        double best_cost = 0.0;
        std::uint64_t best_hash = 0;      // structural hash of the final best
        std::uint64_t reference_hash = 0; // structural hash of the final reference
        std::uint64_t shared_draws = 0;   // shared-stream position at termination

        long long processed() const {
            return applied + discarded;
        }
    };

    // Alternates synchronization and generation stages until `delta_co`
    // feasible changes, in dispatcher order, have been simulated. A sync stage
    // first handles what is already queued; while this solver's own last change
    // is still in flight it keeps waiting for more, so every generation starts
    // from a reference that already includes (or has rejected) its predecessor.
    // Throws ProtocolViolation when the inbox sequence numbering has a gap.
    inline Solution solver_loop(SolverState& state, int solver_id, SolverInbox& inbox, DispatcherQueue& out,
                                const Instance& inst, const MoveGeneratorSet& gens, const NeighborLists& neighbors,
                                long long delta_co, SolverStats& stats) {
        using clock = std::chrono::steady_clock;
        const auto seconds_since = [](clock::time_point start) {
            return std::chrono::duration<double>(clock::now() - start).count();
        };

        long long next_sequence = 1;
        bool own_in_flight = false;
        const auto process = [&](const ChangeView& change) {
            if (change->sequence_no != next_sequence) {
                throw ProtocolViolation("solver " + std::to_string(solver_id) + " expected change " +
                                        std::to_string(next_sequence) + ", received " +
                                        std::to_string(change->sequence_no));
            }
            next_sequence += 1;
            if (change->generator_solver == solver_id) {
                own_in_flight = false;
            }
            if (simulate_iteration(state, *change, inst) == SimulationResult::discarded) {
                stats.discarded += 1;
            } else {
                stats.applied += 1;
            }
        };

        while (state.iterations < delta_co) {
            const auto sync_start = clock::now();
            auto batch = inbox.drain_available();
            for (std::size_t i = 0; i < batch.size() && state.iterations < delta_co; ++i) {
                process(batch[i]);
            }
            while (own_in_flight && state.iterations < delta_co) {
                batch = inbox.drain_blocking();
                for (std::size_t i = 0; i < batch.size() && state.iterations < delta_co; ++i) {
                    process(batch[i]);
                }
            }
            stats.sync_seconds += seconds_since(sync_start);
            if (state.iterations >= delta_co) {
                break;
            }

            const auto gen_start = clock::now();
            auto change = std::make_shared<CandidateChange>(core_opt_iteration(state, inst, gens, neighbors));
            change->generator_solver = solver_id;
            stats.generated += 1;
            own_in_flight = true;
            out.submit(std::move(change));
            stats.gen_seconds += seconds_since(gen_start);
        }

        stats.best_cost = state.best.cost();
        stats.best_hash = state.best.structural_hash();
        stats.reference_hash = state.current.structural_hash();
        stats.shared_draws = state.shared_rng.draw_count();
        return state.best;
    }

    // --- orchestration -----------------------------------------------------------

    struct RunStats {
        int solvers = 1;
        int route_estimate = 0;
        long long changes_broadcast = 0;
        long long changes_dropped = 0;
        double preprocessing_seconds = 0.0;
        double construction_seconds = 0.0;
        double estimate_seconds = 0.0;
        double routemin_seconds = 0.0;  // slowest solver (all do identical work)
        double coreopt_seconds = 0.0;   // slowest solver's sync + generation loop
        double total_seconds = 0.0;
        double construction_cost = 0.0;
        double start_cost = 0.0;        // reference cost entering core optimization
        double final_cost = 0.0;
        std::vector<SolverStats> per_solver;

        // Relayed changes that did not survive revalidation, as a percentage of
        // everything processed; identical for every solver by construction.
        double infeasible_pct() const {
            if (per_solver.empty() || per_solver.front().processed() == 0) {
                return 0.0;
            }
            return 100.0 * static_cast<double>(per_solver.front().discarded) /
                   static_cast<double>(per_solver.front().processed());
        }

        double sync_fraction() const {
            double sync = 0.0;
            double total = 0.0;
            for (const auto& s : per_solver) {
                sync += s.sync_seconds;
                total += s.sync_seconds + s.gen_seconds;
            }
            return total > 0.0 ? sync / total : 0.0;
        }

        double gen_fraction() const {
            return per_solver.empty() ? 0.0 : 1.0 - sync_fraction();
        }
    };

    namespace detail {

        inline std::uint64_t private_seed(const SolverParams& params, int solver_id) {
            return params.seed + 1 + static_cast<std::uint64_t>(solver_id);
        }

        // The phases every solver repeats identically before diverging: route
        // minimization (seeded with the shared seed, hence one common result)
        // and solver-state initialization.
        inline SolverState make_worker_state(const Instance& inst, const Solution& constructed, int route_estimate,
                                             const MoveGeneratorSet& gens, const NeighborLists& neighbors,
                                             const SolverParams& params, int solver_id, double* routemin_seconds) {
            using clock = std::chrono::steady_clock;
            Solution start = constructed;
            const auto rm_start = clock::now();
            if (start.routes_num() > route_estimate) {
                Rng rm_rng(params.seed);
                start = route_minimization(inst, start, route_estimate, gens, neighbors, rm_rng, params);
            }
            if (routemin_seconds != nullptr) {
                *routemin_seconds = std::chrono::duration<double>(clock::now() - rm_start).count();
            }
            return make_solver_state(inst, start, gens, params, private_seed(params, solver_id), params.seed);
        }

    }  // namespace detail

    // The full cooperative pipeline: parallel preprocessing, one construction
    // and route-count estimate, then x solver workers plus a dispatcher sharing
    // a single totally-ordered trajectory of candidate changes. Every solver
    // finishes on the same trajectory prefix, so any solver's best may be
    // returned; solver 0's is.
    inline std::pair<Solution, RunStats> run_filo2x(const Instance& inst, const SolverParams& params) {
        using clock = std::chrono::steady_clock;
        params.validate();
        const auto seconds_between = [](clock::time_point a, clock::time_point b) {
            return std::chrono::duration<double>(b - a).count();
        };
        RunStats stats;
        stats.solvers = params.solvers;
        stats.per_solver.resize(params.solvers);

        const auto run_start = clock::now();
        const auto neighbors = build_neighbor_lists(inst, params.n_nn, params.solvers);
        const auto gens = init_move_generators(inst, neighbors, params.n_gs);
        const auto preprocessing_end = clock::now();
        stats.preprocessing_seconds = seconds_between(run_start, preprocessing_end);

        Rng construction_rng(params.seed);
        const Solution constructed =
            savings_construct(inst, neighbors, params.n_cw, construction_rng, params.cache_capacity);
        const auto construction_end = clock::now();
        stats.construction_seconds = seconds_between(preprocessing_end, construction_end);
        stats.construction_cost = constructed.cost();

        stats.route_estimate = greedy_route_estimate(inst);
        const auto estimate_end = clock::now();
        stats.estimate_seconds = seconds_between(construction_end, estimate_end);

        DispatcherQueue queue(params.solvers);
        std::vector<SolverInbox> inboxes(params.solvers);
        std::vector<Solution> bests(params.solvers, constructed);
        std::vector<double> loop_seconds(params.solvers, 0.0);
        std::vector<std::exception_ptr> failures(params.solvers);

        long long broadcast = 0;
        std::thread dispatcher([&queue, &inboxes, &broadcast] {
            broadcast = dispatcher_loop(queue, inboxes);
        });

        std::vector<std::thread> workers;
        workers.reserve(params.solvers);
        for (int id = 0; id < params.solvers; ++id) {
            workers.emplace_back([&, id] {
                try {
                    auto state = detail::make_worker_state(inst, constructed, stats.route_estimate, gens, neighbors,
                                                           params, id, &stats.per_solver[id].routemin_seconds);
                    if (id == 0) {
                        stats.start_cost = state.current.cost();
                    }
                    const auto loop_start = clock::now();
                    bests[id] = solver_loop(state, id, inboxes[id], queue, inst, gens, neighbors, params.delta_co,
                                            stats.per_solver[id]);
                    loop_seconds[id] = std::chrono::duration<double>(clock::now() - loop_start).count();
                } catch (...) {
                    failures[id] = std::current_exception();
                }
                queue.note_solver_done();
            });
        }
        for (auto& worker : workers) {
            worker.join();
        }
        dispatcher.join();
        for (const auto& failure : failures) {
            if (failure) {
                std::rethrow_exception(failure);
            }
        }

        stats.changes_broadcast = broadcast;
        stats.changes_dropped = queue.dropped_count();
        for (int id = 0; id < params.solvers; ++id) {
            stats.routemin_seconds = std::max(stats.routemin_seconds, stats.per_solver[id].routemin_seconds);
            stats.coreopt_seconds = std::max(stats.coreopt_seconds, loop_seconds[id]);
        }
        stats.final_cost = stats.per_solver.front().best_cost;
        stats.total_seconds = seconds_between(run_start, clock::now());
        return {std::move(bests.front()), std::move(stats)};
    }

    // The single-threaded pipeline: identical phases and seed derivation, with
    // the dispatcher round-trip replaced by the local generate-then-simulate
    // loop. The cooperative runtime at one solver reproduces this exactly.
    inline std::pair<Solution, RunStats> run_sequential(const Instance& inst, const SolverParams& params) {
        using clock = std::chrono::steady_clock;
        params.validate();
        const auto seconds_between = [](clock::time_point a, clock::time_point b) {
            return std::chrono::duration<double>(b - a).count();
        };
        RunStats stats;
        stats.solvers = 1;
        stats.per_solver.resize(1);

        const auto run_start = clock::now();
        const auto neighbors = build_neighbor_lists(inst, params.n_nn, 1);
        const auto gens = init_move_generators(inst, neighbors, params.n_gs);
        const auto preprocessing_end = clock::now();
        stats.preprocessing_seconds = seconds_between(run_start, preprocessing_end);

        Rng construction_rng(params.seed);
        const Solution constructed =
            savings_construct(inst, neighbors, params.n_cw, construction_rng, params.cache_capacity);
        const auto construction_end = clock::now();
        stats.construction_seconds = seconds_between(preprocessing_end, construction_end);
        stats.construction_cost = constructed.cost();

        stats.route_estimate = greedy_route_estimate(inst);
        const auto estimate_end = clock::now();
        stats.estimate_seconds = seconds_between(construction_end, estimate_end);

        auto state = detail::make_worker_state(inst, constructed, stats.route_estimate, gens, neighbors, params, 0,
                                               &stats.per_solver[0].routemin_seconds);
        stats.routemin_seconds = stats.per_solver[0].routemin_seconds;
        stats.start_cost = state.current.cost();

        const auto loop_start = clock::now();
        Solution best = core_optimization_sequential(state, inst, gens, neighbors, params.delta_co);
        stats.coreopt_seconds = seconds_between(loop_start, clock::now());

        auto& s = stats.per_solver[0];
        s.generated = params.delta_co;
        s.applied = state.iterations;
        s.gen_seconds = stats.coreopt_seconds;
        s.best_cost = best.cost();
        s.best_hash = best.structural_hash();
        s.reference_hash = state.current.structural_hash();
        s.shared_draws = state.shared_rng.draw_count();
        stats.final_cost = best.cost();
        stats.total_seconds = seconds_between(run_start, clock::now());
        return {std::move(best), std::move(stats)};
    }

}  // namespace cvrp

#endif
