#ifndef CVRP_KDTREE_HPP_
#define CVRP_KDTREE_HPP_

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace cvrp {

    // Static 2-d tree over a fixed point set, median split on alternating axes,
    // leaves of up to 16 points.
    //
    // Queries return the k points nearest to a member point (the point itself is
    // excluded) ordered by (cost, index) where cost is a caller-supplied monotone
    // non-decreasing mapping of the Euclidean distance. Passing the same mapping
    // used for edge costs (round / floor / identity) makes the neighbor ranking
    // agree with the cost matrix instead of the raw metric, and monotonicity keeps
    // the plane-distance pruning exact. Ties in cost are broken by the smaller
    // index, so the result set is unique and independent of traversal order.
    class KdTree {
    public:
        KdTree(std::vector<double> xs_, std::vector<double> ys_) : xs(std::move(xs_)), ys(std::move(ys_)) {
            assert(xs.size() == ys.size());
            const int n = static_cast<int>(xs.size());
            order.resize(n);
            for (int i = 0; i < n; ++i) {
                order[i] = i;
            }
            if (n > 0) {
                nodes.reserve(2 * n / kLeafSize + 2);
                root = build(0, n, 0);
            }
        }

        // Indices of the k nearest points to `query`, ascending (cost, index).
        template <typename MapFn>
        std::vector<int> nearest(int query, int k, const MapFn& map) const {
            assert(query >= 0 && query < static_cast<int>(xs.size()));
            Search s{xs[query], ys[query], query, k, map, {}};
            if (k > 0 && root >= 0) {
                s.heap.reserve(k);
                visit(root, s);
            }
            std::sort(s.heap.begin(), s.heap.end());
            std::vector<int> result(s.heap.size());
            for (std::size_t i = 0; i < s.heap.size(); ++i) {
                result[i] = s.heap[i].second;
            }
            return result;
        }

    private:
        static constexpr int kLeafSize = 16;

        struct Node {
            double split = 0.0;
            int axis = 0;
            int left = -1;    // < 0 marks a leaf
            int right = -1;
            int begin = 0;    // leaf range into `order`
            int end = 0;
        };

        template <typename MapFn>
        struct Search {
            double qx, qy;
            int query;
            int k;
            const MapFn& map;
            std::vector<std::pair<double, int>> heap;  // max-heap on (cost, index)
        };

        int build(int begin, int end, int depth) {
            Node node;
            if (end - begin <= kLeafSize) {
                node.begin = begin;
                node.end = end;
            } else {
                const int axis = depth % 2;
                const int mid = (begin + end) / 2;
                const auto& coord = axis == 0 ? xs : ys;
                std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                                 [&coord](int a, int b) { return coord[a] < coord[b] || (coord[a] == coord[b] && a < b); });
                node.axis = axis;
                node.split = coord[order[mid]];
                node.left = build(begin, mid, depth + 1);
                node.right = build(mid, end, depth + 1);
            }
            const int id = static_cast<int>(nodes.size());
            nodes.push_back(node);
            return id;
        }

        template <typename MapFn>
        void visit(int id, Search<MapFn>& s) const {
            const Node& node = nodes[id];
            if (node.left < 0) {
                for (int i = node.begin; i < node.end; ++i) {
                    const int p = order[i];
                    if (p == s.query) {
                        continue;
                    }
                    const double dx = xs[p] - s.qx;
                    const double dy = ys[p] - s.qy;
                    offer(s, {s.map(std::sqrt(dx * dx + dy * dy)), p});
                }
                return;
            }
            const double q = node.axis == 0 ? s.qx : s.qy;
            const int near = q < node.split ? node.left : node.right;
            const int far = q < node.split ? node.right : node.left;
            visit(near, s);
            // The far subtree only holds points at Euclidean distance >= the plane
            // distance, hence at mapped cost >= map(plane distance).
            if (static_cast<int>(s.heap.size()) < s.k || s.map(std::abs(q - node.split)) <= s.heap.front().first) {
                visit(far, s);
            }
        }

        template <typename MapFn>
        static void offer(Search<MapFn>& s, std::pair<double, int> candidate) {
            if (static_cast<int>(s.heap.size()) < s.k) {
                s.heap.push_back(candidate);
                std::push_heap(s.heap.begin(), s.heap.end());
            } else if (candidate < s.heap.front()) {
                std::pop_heap(s.heap.begin(), s.heap.end());
                s.heap.back() = candidate;
                std::push_heap(s.heap.begin(), s.heap.end());
            }
        }

        std::vector<double> xs, ys;
        std::vector<int> order;
        std::vector<Node> nodes;
        int root = -1;
    };

}  // namespace cvrp

#endif
