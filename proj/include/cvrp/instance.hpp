#ifndef CVRP_INSTANCE_HPP_
#define CVRP_INSTANCE_HPP_

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "kdtree.hpp"

namespace cvrp {

    // How Euclidean distances are turned into edge costs.
    // EUC_2D instances round to the nearest integer (half away from zero, the
    // CVRPLIB convention best-known values assume), FLOOR_2D truncates, and
    // EXACT_2D keeps the double-precision distance.
    enum class EdgeWeight { rounded_euclidean, floored_euclidean, exact_euclidean };

    // Raised on malformed or unsupported instance input.
    class ParseError : public std::runtime_error {
    public:
        enum class Kind {
            missing_section,
            dimension_mismatch,
            unsupported_edge_weight_type,
            demand_exceeds_capacity,
            bad_format
        };

        ParseError(Kind kind_, const std::string& what_) : std::runtime_error(what_), err_kind(kind_) { }

        Kind kind() const {
            return err_kind;
        }

    private:
        Kind err_kind;
    };

    // Immutable problem data: coordinates, demands, capacity and the edge cost
    // function. Vertex 0 is always the depot, vertices 1..N are customers. Costs
    // are computed on demand; no cost matrix is ever materialized.
    class Instance {
    public:
        Instance(std::string name_, std::vector<double> xs_, std::vector<double> ys_, std::vector<int> demands_,
                 int capacity_, EdgeWeight edge_weight_)
            : instance_name(std::move(name_)),
              xs(std::move(xs_)),
              ys(std::move(ys_)),
              q(std::move(demands_)),
              max_load(capacity_),
              weight_kind(edge_weight_) {
            if (xs.size() != ys.size() || xs.size() != q.size()) {
                throw std::invalid_argument("coordinate and demand lists must have equal length");
            }
            if (xs.size() < 2) {
                throw std::invalid_argument("an instance needs a depot and at least one customer");
            }
            if (max_load <= 0) {
                throw std::invalid_argument("capacity must be positive");
            }
            if (q[0] != 0) {
                throw std::invalid_argument("depot demand must be zero");
            }
            for (std::size_t i = 1; i < q.size(); ++i) {
                if (q[i] < 0) {
                    throw std::invalid_argument("demands must be non-negative");
                }
                if (q[i] > max_load) {
                    throw std::invalid_argument("customer demand exceeds vehicle capacity");
                }
            }
        }

        const std::string& name() const {
            return instance_name;
        }

        // Number of vertices including the depot.
        int vertices_num() const {
            return static_cast<int>(xs.size());
        }

        // Number of customers.
        int customers_num() const {
            return vertices_num() - 1;
        }

        double x(int i) const {
            return xs[i];
        }

        double y(int i) const {
            return ys[i];
        }

        int demand(int i) const {
            return q[i];
        }

        int capacity() const {
            return max_load;
        }

        EdgeWeight edge_weight() const {
            return weight_kind;
        }

        // Cost of edge (i, j), symmetric, zero on the diagonal.
        double cost(int i, int j) const {
            assert(i >= 0 && i < vertices_num() && j >= 0 && j < vertices_num());
            const double dx = xs[i] - xs[j];
            const double dy = ys[i] - ys[j];
            return map_distance(std::sqrt(dx * dx + dy * dy));
        }

        // Monotone mapping from Euclidean distance to edge cost.
        double map_distance(double distance) const {
            switch (weight_kind) {
            case EdgeWeight::rounded_euclidean:
                return std::round(distance);
            case EdgeWeight::floored_euclidean:
                return std::floor(distance);
            default:
                return distance;
            }
        }

        const std::vector<double>& x_coords() const {
            return xs;
        }

        const std::vector<double>& y_coords() const {
            return ys;
        }

    private:
        std::string instance_name;
        std::vector<double> xs, ys;
        std::vector<int> q;
        int max_load;
        EdgeWeight weight_kind;
    };

    namespace detail {

        inline std::string trim(const std::string& s) {
            const auto begin = s.find_first_not_of(" \t\r\n");
            if (begin == std::string::npos) {
                return {};
            }
            const auto end = s.find_last_not_of(" \t\r\n");
            return s.substr(begin, end - begin + 1);
        }

    }  // namespace detail

    // Parses a CVRPLIB/TSPLIB-format instance. The depot is remapped to internal
    // index 0 when DEPOT_SECTION names a node other than the first; customers
    // keep their relative order.
    inline Instance parse_cvrplib(std::istream& in) {
        using Kind = ParseError::Kind;

        std::string name;
        bool has_name = false;
        long long dimension = -1;
        long long capacity = -1;
        bool has_weight = false;
        EdgeWeight weight = EdgeWeight::rounded_euclidean;
        std::vector<double> xs, ys;
        std::vector<long long> demands;
        std::vector<char> coord_seen, demand_seen;
        bool coords_done = false, demands_done = false;
        long long depot_id = 1;

        const auto require_header = [&](const char* section) {
            if (dimension < 0) {
                throw ParseError(Kind::bad_format, std::string("DIMENSION must precede ") + section);
            }
        };

        std::string raw;
        while (std::getline(in, raw)) {
            const std::string line = detail::trim(raw);
            if (line.empty()) {
                continue;
            }
            const auto colon = line.find(':');
            if (colon != std::string::npos) {
                const std::string key = detail::trim(line.substr(0, colon));
                const std::string value = detail::trim(line.substr(colon + 1));
                if (key == "NAME") {
                    name = value;
                    has_name = true;
                } else if (key == "DIMENSION") {
                    dimension = std::stoll(value);
                    if (dimension < 2) {
                        throw ParseError(Kind::bad_format, "DIMENSION must be at least 2");
                    }
                } else if (key == "CAPACITY") {
                    capacity = std::stoll(value);
                    if (capacity <= 0) {
                        throw ParseError(Kind::bad_format, "CAPACITY must be positive");
                    }
                } else if (key == "EDGE_WEIGHT_TYPE") {
                    if (value == "EUC_2D") {
                        weight = EdgeWeight::rounded_euclidean;
                    } else if (value == "FLOOR_2D") {
                        weight = EdgeWeight::floored_euclidean;
                    } else if (value == "EXACT_2D") {
                        weight = EdgeWeight::exact_euclidean;
                    } else {
                        throw ParseError(Kind::unsupported_edge_weight_type, "unsupported EDGE_WEIGHT_TYPE: " + value);
                    }
                    has_weight = true;
                }
                // Other keyword lines (COMMENT, TYPE, ...) are ignored.
                continue;
            }
            if (line == "NODE_COORD_SECTION") {
                require_header("NODE_COORD_SECTION");
                xs.assign(dimension, 0.0);
                ys.assign(dimension, 0.0);
                coord_seen.assign(dimension, 0);
                for (long long row = 0; row < dimension; ++row) {
                    long long id;
                    double cx, cy;
                    if (!std::getline(in, raw) || !(std::istringstream(raw) >> id >> cx >> cy)) {
                        throw ParseError(Kind::dimension_mismatch, "NODE_COORD_SECTION has fewer rows than DIMENSION");
                    }
                    if (id < 1 || id > dimension || coord_seen[id - 1]) {
                        throw ParseError(Kind::bad_format, "invalid or duplicate node id in NODE_COORD_SECTION");
                    }
                    coord_seen[id - 1] = 1;
                    xs[id - 1] = cx;
                    ys[id - 1] = cy;
                }
                coords_done = true;
                continue;
            }
            if (line == "DEMAND_SECTION") {
                require_header("DEMAND_SECTION");
                demands.assign(dimension, 0);
                demand_seen.assign(dimension, 0);
                for (long long row = 0; row < dimension; ++row) {
                    long long id, value;
                    if (!std::getline(in, raw) || !(std::istringstream(raw) >> id >> value)) {
                        throw ParseError(Kind::dimension_mismatch, "DEMAND_SECTION has fewer rows than DIMENSION");
                    }
                    if (id < 1 || id > dimension || demand_seen[id - 1]) {
                        throw ParseError(Kind::bad_format, "invalid or duplicate node id in DEMAND_SECTION");
                    }
                    if (value < 0) {
                        throw ParseError(Kind::bad_format, "demands must be non-negative");
                    }
                    demand_seen[id - 1] = 1;
                    demands[id - 1] = value;
                }
                demands_done = true;
                continue;
            }
            if (line == "DEPOT_SECTION") {
                require_header("DEPOT_SECTION");
                std::vector<long long> ids;
                long long id;
                while (std::getline(in, raw) && (std::istringstream(raw) >> id) && id != -1) {
                    ids.push_back(id);
                }
                if (ids.size() != 1 || ids[0] < 1 || ids[0] > dimension) {
                    throw ParseError(Kind::bad_format, "DEPOT_SECTION must name exactly one valid node");
                }
                depot_id = ids[0];
                continue;
            }
            if (line == "EOF") {
                break;
            }
            // A stray data-looking row here means a section ran past DIMENSION.
            if (std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-') {
                throw ParseError(Kind::dimension_mismatch, "section has more rows than DIMENSION");
            }
            throw ParseError(Kind::bad_format, "unrecognized line: " + line);
        }

        if (!has_name) {
            throw ParseError(Kind::missing_section, "missing NAME");
        }
        if (dimension < 0) {
            throw ParseError(Kind::missing_section, "missing DIMENSION");
        }
        if (capacity < 0) {
            throw ParseError(Kind::missing_section, "missing CAPACITY");
        }
        if (!has_weight) {
            throw ParseError(Kind::missing_section, "missing EDGE_WEIGHT_TYPE");
        }
        if (!coords_done) {
            throw ParseError(Kind::missing_section, "missing NODE_COORD_SECTION");
        }
        if (!demands_done) {
            throw ParseError(Kind::missing_section, "missing DEMAND_SECTION");
        }

        // Remap the depot to internal index 0, customers keep relative order.
        const auto internal_of = [&](long long file_pos) -> long long {
            if (file_pos == depot_id - 1) {
                return 0;
            }
            return file_pos < depot_id - 1 ? file_pos + 1 : file_pos;
        };
        std::vector<double> out_x(dimension), out_y(dimension);
        std::vector<int> out_q(dimension);
        for (long long i = 0; i < dimension; ++i) {
            const long long at = internal_of(i);
            out_x[at] = xs[i];
            out_y[at] = ys[i];
            out_q[at] = static_cast<int>(demands[i]);
        }
        if (out_q[0] != 0) {
            throw ParseError(Kind::bad_format, "depot demand must be zero");
        }
        for (long long i = 1; i < dimension; ++i) {
            if (out_q[i] > capacity) {
                throw ParseError(Kind::demand_exceeds_capacity, "customer demand exceeds vehicle capacity");
            }
        }
        return Instance(name, std::move(out_x), std::move(out_y), std::move(out_q), static_cast<int>(capacity), weight);
    }

    inline Instance parse_cvrplib_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            throw ParseError(ParseError::Kind::bad_format, "cannot open instance file: " + path);
        }
        return parse_cvrplib(in);
    }

    // Per-vertex nearest-neighbor lists, ordered by (edge cost, index), self
    // excluded. All lists share one length: min(n_nn, |V| - 1).
    class NeighborLists {
    public:
        NeighborLists(int n_nn_, int per_vertex_, std::vector<int> flat_)
            : bound_n(n_nn_), per(per_vertex_), flat(std::move(flat_)) { }

        // Requested list length bound.
        int n_nn() const {
            return bound_n;
        }

        // Actual per-vertex list length.
        int length() const {
            return per;
        }

        std::span<const int> of(int v) const {
            return {flat.data() + static_cast<std::size_t>(v) * per, static_cast<std::size_t>(per)};
        }

    private:
        int bound_n;
        int per;
        std::vector<int> flat;
    };

    // Builds the neighbor lists through a kd-tree, optionally splitting the
    // queries across workers. The output is bit-identical for any worker count
    // because each vertex's list is the unique set of k smallest (cost, index)
    // pairs, written to a private slot.
    inline NeighborLists build_neighbor_lists(const Instance& inst, int n_nn, int workers) {
        assert(n_nn >= 1 && workers >= 1);
        const int v_num = inst.vertices_num();
        const int per = std::min(n_nn, v_num - 1);
        std::vector<int> flat(static_cast<std::size_t>(v_num) * per);
        const KdTree tree(inst.x_coords(), inst.y_coords());
        const auto map = [&inst](double d) { return inst.map_distance(d); };
        const auto run = [&](int begin, int end) {
            for (int v = begin; v < end; ++v) {
                const auto list = tree.nearest(v, per, map);
                assert(static_cast<int>(list.size()) == per);
                std::copy(list.begin(), list.end(), flat.begin() + static_cast<std::size_t>(v) * per);
            }
        };
        if (workers == 1 || v_num < 2 * workers) {
            run(0, v_num);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(workers);
            const int chunk = (v_num + workers - 1) / workers;
            for (int w = 0; w < workers; ++w) {
                const int begin = w * chunk;
                const int end = std::min(v_num, begin + chunk);
                if (begin < end) {
                    pool.emplace_back(run, begin, end);
                }
            }
            for (auto& t : pool) {
                t.join();
            }
        }
        return NeighborLists(n_nn, per, std::move(flat));
    }

    // Solver configuration. Integer fields left at 0 mean "derive from the
    // instance" via the accessors below.
    struct SolverParams {
        int n_nn = 1500;               // neighbor list length bound
        int cache_capacity = 50;       // selective vertex cache size C
        int n_cw = 100;                // savings neighbor bound
        long long delta_rm = 1000;     // route minimization iterations
        int n_gs = 25;                 // move generator list length
        double gamma_base = 0.25;      // base sparsification factor
        double delta = 0.5;            // reduction factor behind the non-improving threshold
        double lambda = 2.0;           // sparsification increment factor
        long long delta_co = 100000;   // core optimization iterations (10^6 for long runs)
        double t0_factor = 0.1;        // initial temperature = t0_factor * mean generator arc cost
        double tf_factor = 0.01;       // final temperature = tf_factor * initial temperature
        double eps_similar = 0.02;     // relative gap treated as "similar cost" by the omega update
        double eps_degraded = 0.10;    // relative gap treated as "much worse" by the omega update
        int omega_min = 1;             // shaking intensity lower clamp
        int omega_base_override = 0;   // 0 = ceil(ln |V|)
        int omega_max_override = 0;    // 0 = ceil(3 ln |V|)
        int non_improving_override = 0;  // 0 = ceil(delta * 100)
        int solvers = 1;               // cooperating solver workers x
        std::uint64_t seed = 0;

        int omega_base(int vertices_num) const {
            if (omega_base_override > 0) {
                return omega_base_override;
            }
            return std::max(1, static_cast<int>(std::ceil(std::log(static_cast<double>(vertices_num)))));
        }

        int omega_max(int vertices_num) const {
            if (omega_max_override > 0) {
                return omega_max_override;
            }
            const int cap = static_cast<int>(std::ceil(3.0 * std::log(static_cast<double>(vertices_num))));
            return std::max(cap, omega_base(vertices_num));
        }

        // Consecutive non-improving involvements before a vertex's
        // sparsification factor escalates.
        int non_improving_threshold() const {
            if (non_improving_override > 0) {
                return non_improving_override;
            }
            return static_cast<int>(std::ceil(delta * 100.0));
        }

        void validate() const {
            if (n_nn < 1 || cache_capacity < 1 || n_cw < 1 || delta_rm < 1 || n_gs < 1 || delta_co < 1) {
                throw std::invalid_argument("counts must be positive");
            }
            if (!(gamma_base > 0.0 && gamma_base <= 1.0)) {
                throw std::invalid_argument("gamma_base must lie in (0, 1]");
            }
            if (!(lambda > 1.0)) {
                throw std::invalid_argument("lambda must exceed 1");
            }
            if (!(delta > 0.0 && delta <= 1.0)) {
                throw std::invalid_argument("delta must lie in (0, 1]");
            }
            if (!(t0_factor > 0.0) || !(tf_factor > 0.0) || !(tf_factor < 1.0)) {
                throw std::invalid_argument("temperature factors must be positive with tf_factor < 1");
            }
            if (!(eps_similar >= 0.0) || !(eps_degraded > eps_similar)) {
                throw std::invalid_argument("omega thresholds must satisfy 0 <= eps_similar < eps_degraded");
            }
            if (omega_min < 1 || solvers < 1) {
                throw std::invalid_argument("omega_min and solvers must be at least 1");
            }
        }
    };

}  // namespace cvrp

#endif
