#ifndef CVRP_BENCH_HPP_
#define CVRP_BENCH_HPP_

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "instance.hpp"
#include "parallel.hpp"
#include "solution.hpp"

namespace cvrp {

    // --- metric errors ----------------------------------------------------------

    struct NonPositiveBks : std::invalid_argument {
        explicit NonPositiveBks(const std::string& what_) : std::invalid_argument(what_) { }
    };

    struct NonPositiveTime : std::invalid_argument {
        explicit NonPositiveTime(const std::string& what_) : std::invalid_argument(what_) { }
    };

    struct InsufficientData : std::invalid_argument {
        explicit InsufficientData(const std::string& what_) : std::invalid_argument(what_) { }
    };

    // --- metrics ----------------------------------------------------------------

    // Percentage excess of a cost over the best known value; negative when the
    // cost beats it.
    inline double compute_gap(double z, double bks) {
        if (!(bks > 0.0)) {
            throw NonPositiveBks("best known value must be positive, got " + std::to_string(bks));
        }
        return 100.0 * (z - bks) / bks;
    }

    // Sequential-to-parallel time ratio; below 1 reports a slowdown unclamped.
    inline double compute_speedup(double t_seq, double t_par) {
        if (!(t_seq > 0.0) || !(t_par > 0.0)) {
            throw NonPositiveTime("times must be positive, got " + std::to_string(t_seq) + " and " +
                                  std::to_string(t_par));
        }
        return t_seq / t_par;
    }

    // One-tailed paired Wilcoxon signed-rank test for H1: median(a - b) > 0.
    // Zero differences are dropped; tied magnitudes get midranks. The p-value is
    // exact (full sign-assignment distribution) for up to 25 nonzero differences
    // and a continuity-corrected normal approximation beyond.
    inline double wilcoxon_one_tailed(const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size()) {
            throw InsufficientData("paired samples differ in length: " + std::to_string(a.size()) + " vs " +
                                   std::to_string(b.size()));
        }
        std::vector<double> diffs;
        diffs.reserve(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            if (d != 0.0) {
                diffs.push_back(d);
            }
        }
        const int n = static_cast<int>(diffs.size());
        if (n < 5) {
            throw InsufficientData("only " + std::to_string(n) + " nonzero differences, need at least 5");
        }

        // Doubled midranks of |d| stay integral under ties.
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&diffs](int u, int v) { return std::abs(diffs[u]) < std::abs(diffs[v]); });
        std::vector<long long> rank2(n);
        long long tie_term = 0;
        for (int i = 0; i < n;) {
            int j = i;
            while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) {
                ++j;
            }
            const long long group = j - i;
            tie_term += group * group * group - group;
            for (int k = i; k < j; ++k) {
                rank2[order[k]] = i + j + 1;
            }
            i = j;
        }
        long long w2 = 0;
        for (int k = 0; k < n; ++k) {
            if (diffs[k] > 0.0) {
                w2 += rank2[k];
            }
        }

        if (n <= 25) {
            // Count sign assignments whose positive-rank sum reaches the observed
            // one; every subset of doubled ranks is one assignment.
            const long long total = static_cast<long long>(n) * (n + 1);
            std::vector<std::uint64_t> ways(static_cast<std::size_t>(total) + 1, 0);
            ways[0] = 1;
            for (int k = 0; k < n; ++k) {
                for (long long s = total; s >= rank2[k]; --s) {
                    ways[s] += ways[s - rank2[k]];
                }
            }
            std::uint64_t at_least = 0;
            for (long long s = w2; s <= total; ++s) {
                at_least += ways[s];
            }
            return static_cast<double>(at_least) / std::ldexp(1.0, n);
        }

        const double nn = n;
        const double mean = nn * (nn + 1.0) / 4.0;
        const double variance =
            nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - static_cast<double>(tie_term) / 48.0;
        const double w_plus = 0.5 * static_cast<double>(w2);
        const double zstat = (w_plus - mean - 0.5) / std::sqrt(variance);
        return 0.5 * std::erfc(zstat / std::numbers::sqrt2);
    }

    // --- best known solutions -----------------------------------------------------

    // Instance name to best known cost, fed from a two-column CSV (name,value).
    // A leading "name,value" header line is tolerated; blank lines and lines
    // starting with '#' are skipped.
    class BksRegistry {
    public:
        static BksRegistry parse(std::istream& in) {
            BksRegistry registry;
            std::string line;
            bool first = true;
            while (std::getline(in, line)) {
                if (!line.empty() && line.back() == '\r') {
                    line.pop_back();
                }
                const bool header = first && line == "name,value";
                first = false;
                if (line.empty() || line[0] == '#' || header) {
                    continue;
                }
                const auto comma = line.find(',');
                if (comma == std::string::npos || comma == 0) {
                    throw ParseError(ParseError::Kind::bad_format, "best-known-value line needs name,value: " + line);
                }
                const std::string name = line.substr(0, comma);
                const std::string text = line.substr(comma + 1);
                double value = 0.0;
                const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
                if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
                    throw ParseError(ParseError::Kind::bad_format, "bad best-known value for " + name + ": " + text);
                }
                if (!(value > 0.0)) {
                    throw NonPositiveBks("best known value for " + name + " must be positive, got " + text);
                }
                registry.values[name] = value;
            }
            return registry;
        }

        static BksRegistry parse_file(const std::string& path) {
            std::ifstream in(path);
            if (!in) {
                throw ParseError(ParseError::Kind::bad_format, "cannot open best-known-values file: " + path);
            }
            return parse(in);
        }

        std::optional<double> lookup(const std::string& name) const {
            const auto it = values.find(name);
            if (it == values.end()) {
                return std::nullopt;
            }
            return it->second;
        }

        std::size_t size() const {
            return values.size();
        }

    private:
        std::map<std::string, double> values;
    };

    // --- run reports ------------------------------------------------------------

    // One benchmark row: outcome and per-procedure wall times of a single run.
    // gap_pct is empty when the instance has no registered best known value;
    // speedup is empty when no sequential baseline has been recorded.
    struct RunReport {
        std::string instance;
        int solvers = 1;
        std::uint64_t seed = 0;
        double cost = 0.0;
        std::optional<double> gap_pct;
        double total_seconds = 0.0;
        double preprocessing_seconds = 0.0;
        double construction_seconds = 0.0;
        double estimate_seconds = 0.0;
        double routemin_seconds = 0.0;
        double coreopt_seconds = 0.0;
        std::optional<double> speedup;
        double infeasible_pct = 0.0;
        double sync_fraction = 0.0;
        double gen_fraction = 0.0;

        // Everything that runs before the core optimization loop.
        double preopt_seconds() const {
            return preprocessing_seconds + construction_seconds + estimate_seconds + routemin_seconds;
        }
    };

    inline RunReport make_report(const std::string& instance_name, std::uint64_t seed, const RunStats& stats,
                                 const BksRegistry* bks, std::optional<double> baseline_coreopt_seconds) {
        RunReport report;
        report.instance = instance_name;
        report.solvers = stats.solvers;
        report.seed = seed;
        report.cost = stats.final_cost;
        if (bks != nullptr) {
            if (const auto best_known = bks->lookup(instance_name)) {
                report.gap_pct = compute_gap(report.cost, *best_known);
            }
        }
        report.total_seconds = stats.total_seconds;
        report.preprocessing_seconds = stats.preprocessing_seconds;
        report.construction_seconds = stats.construction_seconds;
        report.estimate_seconds = stats.estimate_seconds;
        report.routemin_seconds = stats.routemin_seconds;
        report.coreopt_seconds = stats.coreopt_seconds;
        if (baseline_coreopt_seconds && *baseline_coreopt_seconds > 0.0 && stats.coreopt_seconds > 0.0) {
            report.speedup = compute_speedup(*baseline_coreopt_seconds, stats.coreopt_seconds);
        }
        report.infeasible_pct = stats.infeasible_pct();
        report.sync_fraction = stats.sync_fraction();
        report.gen_fraction = stats.gen_fraction();
        return report;
    }

    namespace detail {

        // Shortest round-trip decimal form.
        inline std::string format_double(double value) {
            std::array<char, 32> buf;
            const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
            return std::string(buf.data(), res.ptr);
        }

    }  // namespace detail

    inline std::string csv_header() {
        return "instance,x,seed,cost,gap_pct,t_total_s,t_preproc_s,t_coreopt_s,speedup,"
               "infeasible_pct,sync_frac,gen_frac";
    }

    inline std::string csv_row(const RunReport& report) {
        std::string out = report.instance;
        out += ',' + std::to_string(report.solvers);
        out += ',' + std::to_string(report.seed);
        out += ',' + detail::format_double(report.cost);
        out += ',';
        if (report.gap_pct) {
            out += detail::format_double(*report.gap_pct);
        }
        out += ',' + detail::format_double(report.total_seconds);
        out += ',' + detail::format_double(report.preopt_seconds());
        out += ',' + detail::format_double(report.coreopt_seconds);
        out += ',';
        if (report.speedup) {
            out += detail::format_double(*report.speedup);
        }
        out += ',' + detail::format_double(report.infeasible_pct);
        out += ',' + detail::format_double(report.sync_fraction);
        out += ',' + detail::format_double(report.gen_fraction);
        return out;
    }

    // Same fields as the CSV columns, plus the fine-grained phase breakdown.
    inline nlohmann::json report_to_json(const RunReport& report) {
        nlohmann::json j;
        j["instance"] = report.instance;
        j["x"] = report.solvers;
        j["seed"] = report.seed;
        j["cost"] = report.cost;
        j["gap_pct"] = report.gap_pct ? nlohmann::json(*report.gap_pct) : nlohmann::json();
        j["t_total_s"] = report.total_seconds;
        j["t_preproc_s"] = report.preopt_seconds();
        j["t_coreopt_s"] = report.coreopt_seconds;
        j["speedup"] = report.speedup ? nlohmann::json(*report.speedup) : nlohmann::json();
        j["infeasible_pct"] = report.infeasible_pct;
        j["sync_frac"] = report.sync_fraction;
        j["gen_frac"] = report.gen_fraction;
        j["phases"] = {{"preprocessing_s", report.preprocessing_seconds},
                       {"construction_s", report.construction_seconds},
                       {"estimate_s", report.estimate_seconds},
                       {"routemin_s", report.routemin_seconds},
                       {"coreopt_s", report.coreopt_seconds}};
        return j;
    }

    // --- command line -------------------------------------------------------------

    namespace detail {

        inline void print_usage(std::ostream& out) {
            out << "usage:\n"
                   "  cvrp solve <instance.vrp> [--seed N] [--solvers X] [--iters N | --long]\n"
                   "             [--exact-costs] [--bks FILE] [--out FILE] [--report FILE] [--runs K]\n"
                   "  cvrp bench <manifest>\n"
                   "\n"
                   "solve runs the solver on one instance and prints a per-run summary;\n"
                   "--out writes the best solution found, --report writes JSON.\n"
                   "bench runs the manifest's instance x solvers x seeds matrix and prints CSV.\n"
                   "manifest lines: instance <path> | solvers <n...> | seeds <n...> | iters <n>\n"
                   "              | bks <path> | exact_costs <0|1>  ('#' starts a comment)\n";
        }

        inline bool parse_integer(const std::string& text, long long& out) {
            const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
            return res.ec == std::errc() && res.ptr == text.data() + text.size();
        }

        inline bool parse_unsigned(const std::string& text, std::uint64_t& out) {
            const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
            return res.ec == std::errc() && res.ptr == text.data() + text.size();
        }

        inline Instance with_exact_costs(const Instance& inst) {
            std::vector<double> xs(inst.vertices_num());
            std::vector<double> ys(inst.vertices_num());
            std::vector<int> demands(inst.vertices_num());
            for (int v = 0; v < inst.vertices_num(); ++v) {
                xs[v] = inst.x(v);
                ys[v] = inst.y(v);
                demands[v] = inst.demand(v);
            }
            return Instance(inst.name(), std::move(xs), std::move(ys), std::move(demands), inst.capacity(),
                            EdgeWeight::exact_euclidean);
        }

        inline std::pair<Solution, RunStats> run_once(const Instance& inst, const SolverParams& params) {
            return params.solvers == 1 ? run_sequential(inst, params) : run_filo2x(inst, params);
        }

        inline void print_run_line(std::ostream& out, const RunReport& report) {
            out << "seed " << report.seed << "  solvers " << report.solvers << "  cost "
                << format_double(report.cost);
            if (report.gap_pct) {
                out << "  gap " << format_double(*report.gap_pct) << '%';
            }
            out << "  total_s " << format_double(report.total_seconds) << "  coreopt_s "
                << format_double(report.coreopt_seconds) << '\n';
        }

        inline int solve_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
            std::string instance_path;
            std::string bks_path;
            std::string out_path;
            std::string report_path;
            SolverParams params;
            bool saw_iters = false;
            bool saw_long = false;
            bool exact_costs = false;
            long long runs = 1;

            for (std::size_t i = 1; i < args.size(); ++i) {
                const std::string& arg = args[i];
                const auto value = [&]() -> const std::string* {
                    return i + 1 < args.size() ? &args[++i] : nullptr;
                };
                if (!arg.empty() && arg[0] != '-') {
                    if (!instance_path.empty()) {
                        err << "unexpected extra argument: " << arg << '\n';
                        print_usage(err);
                        return 3;
                    }
                    instance_path = arg;
                } else if (arg == "--seed") {
                    const std::string* v = value();
                    if (v == nullptr || !parse_unsigned(*v, params.seed)) {
                        err << "--seed needs a non-negative integer\n";
                        return 3;
                    }
                } else if (arg == "--solvers") {
                    const std::string* v = value();
                    long long solvers = 0;
                    if (v == nullptr || !parse_integer(*v, solvers) || solvers < 1) {
                        err << "--solvers needs a positive integer\n";
                        return 3;
                    }
                    params.solvers = static_cast<int>(solvers);
                } else if (arg == "--iters") {
                    const std::string* v = value();
                    if (v == nullptr || !parse_integer(*v, params.delta_co) || params.delta_co < 1) {
                        err << "--iters needs a positive integer\n";
                        return 3;
                    }
                    saw_iters = true;
                } else if (arg == "--long") {
                    params.delta_co = 1000000;
                    saw_long = true;
                } else if (arg == "--exact-costs") {
                    exact_costs = true;
                } else if (arg == "--bks") {
                    const std::string* v = value();
                    if (v == nullptr) {
                        err << "--bks needs a file path\n";
                        return 3;
                    }
                    bks_path = *v;
                } else if (arg == "--out") {
                    const std::string* v = value();
                    if (v == nullptr) {
                        err << "--out needs a file path\n";
                        return 3;
                    }
                    out_path = *v;
                } else if (arg == "--report") {
                    const std::string* v = value();
                    if (v == nullptr) {
                        err << "--report needs a file path\n";
                        return 3;
                    }
                    report_path = *v;
                } else if (arg == "--runs") {
                    const std::string* v = value();
                    if (v == nullptr || !parse_integer(*v, runs) || runs < 1) {
                        err << "--runs needs a positive integer\n";
                        return 3;
                    }
                } else {
                    err << "unknown flag: " << arg << '\n';
                    print_usage(err);
                    return 3;
                }
            }
            if (instance_path.empty()) {
                err << "solve needs an instance file\n";
                print_usage(err);
                return 3;
            }
            if (saw_iters && saw_long) {
                err << "--iters and --long are mutually exclusive\n";
                return 3;
            }

            Instance inst = parse_cvrplib_file(instance_path);
            if (exact_costs) {
                inst = with_exact_costs(inst);
            }
            std::optional<BksRegistry> bks;
            if (!bks_path.empty()) {
                bks = BksRegistry::parse_file(bks_path);
            }

            std::optional<Solution> best;
            std::vector<RunReport> reports;
            const std::uint64_t base_seed = params.seed;
            for (long long k = 0; k < runs; ++k) {
                SolverParams run_params = params;
                run_params.seed = base_seed + static_cast<std::uint64_t>(k);
                auto [solution, stats] = run_once(inst, run_params);
                reports.push_back(
                    make_report(inst.name(), run_params.seed, stats, bks ? &*bks : nullptr, std::nullopt));
                print_run_line(out, reports.back());
                if (!best || solution.cost() < best->cost()) {
                    best = std::move(solution);
                }
            }
            if (runs > 1) {
                double cost_sum = 0.0;
                double gap_sum = 0.0;
                bool all_gaps = true;
                for (const auto& report : reports) {
                    cost_sum += report.cost;
                    all_gaps = all_gaps && report.gap_pct.has_value();
                    gap_sum += report.gap_pct.value_or(0.0);
                }
                out << "best cost " << format_double(best->cost()) << "  mean cost "
                    << format_double(cost_sum / static_cast<double>(runs));
                if (all_gaps) {
                    out << "  mean gap " << format_double(gap_sum / static_cast<double>(runs)) << '%';
                }
                out << '\n';
            }

            if (!out_path.empty()) {
                std::ofstream file(out_path);
                if (!file) {
                    err << "cannot open output file: " << out_path << '\n';
                    return 2;
                }
                best->write(file);
                if (!file) {
                    err << "failed writing output file: " << out_path << '\n';
                    return 2;
                }
            }
            if (!report_path.empty()) {
                nlohmann::json j;
                if (reports.size() == 1) {
                    j = report_to_json(reports.front());
                } else {
                    j = nlohmann::json::array();
                    for (const auto& report : reports) {
                        j.push_back(report_to_json(report));
                    }
                }
                std::ofstream file(report_path);
                if (!file) {
                    err << "cannot open report file: " << report_path << '\n';
                    return 2;
                }
                file << j.dump(2) << '\n';
                if (!file) {
                    err << "failed writing report file: " << report_path << '\n';
                    return 2;
                }
            }
            return 0;
        }

        struct BenchManifest {
            std::vector<std::string> instance_paths;
            std::vector<int> solver_counts{1};
            std::vector<std::uint64_t> seeds{0};
            long long iters = 100000;
            std::string bks_path;
            bool exact_costs = false;
        };

        // Line-based manifest: `key value...` with '#' comments. Relative paths
        // resolve against the manifest's own directory.
        inline BenchManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
            BenchManifest manifest;
            bool saw_solvers = false;
            bool saw_seeds = false;
            const auto resolve = [&base_dir](const std::string& path) {
                const std::filesystem::path p(path);
                return p.is_absolute() ? p.string() : (base_dir / p).string();
            };
            std::string line;
            while (std::getline(in, line)) {
                if (const auto hash = line.find('#'); hash != std::string::npos) {
                    line.erase(hash);
                }
                std::istringstream tokens(line);
                std::string key;
                if (!(tokens >> key)) {
                    continue;
                }
                if (key == "instance") {
                    std::string path;
                    if (!(tokens >> path)) {
                        throw ParseError(ParseError::Kind::bad_format, "manifest: instance needs a path");
                    }
                    manifest.instance_paths.push_back(resolve(path));
                } else if (key == "solvers") {
                    manifest.solver_counts.clear();
                    long long x = 0;
                    std::string token;
                    while (tokens >> token) {
                        if (!parse_integer(token, x) || x < 1) {
                            throw ParseError(ParseError::Kind::bad_format, "manifest: bad solver count: " + token);
                        }
                        manifest.solver_counts.push_back(static_cast<int>(x));
                    }
                    saw_solvers = true;
                } else if (key == "seeds") {
                    manifest.seeds.clear();
                    std::uint64_t seed = 0;
                    std::string token;
                    while (tokens >> token) {
                        if (!parse_unsigned(token, seed)) {
                            throw ParseError(ParseError::Kind::bad_format, "manifest: bad seed: " + token);
                        }
                        manifest.seeds.push_back(seed);
                    }
                    saw_seeds = true;
                } else if (key == "iters") {
                    std::string token;
                    if (!(tokens >> token) || !parse_integer(token, manifest.iters) || manifest.iters < 1) {
                        throw ParseError(ParseError::Kind::bad_format, "manifest: iters needs a positive integer");
                    }
                } else if (key == "bks") {
                    std::string path;
                    if (!(tokens >> path)) {
                        throw ParseError(ParseError::Kind::bad_format, "manifest: bks needs a path");
                    }
                    manifest.bks_path = resolve(path);
                } else if (key == "exact_costs") {
                    std::string token;
                    if (!(tokens >> token) || (token != "0" && token != "1")) {
                        throw ParseError(ParseError::Kind::bad_format, "manifest: exact_costs needs 0 or 1");
                    }
                    manifest.exact_costs = token == "1";
                } else {
                    throw ParseError(ParseError::Kind::bad_format, "manifest: unknown key: " + key);
                }
            }
            if (manifest.instance_paths.empty()) {
                throw ParseError(ParseError::Kind::bad_format, "manifest: no instances listed");
            }
            if ((saw_solvers && manifest.solver_counts.empty()) || (saw_seeds && manifest.seeds.empty())) {
                throw ParseError(ParseError::Kind::bad_format, "manifest: empty solvers or seeds list");
            }
            // Ascending and unique, so the x=1 baseline run comes first.
            std::sort(manifest.solver_counts.begin(), manifest.solver_counts.end());
            manifest.solver_counts.erase(
                std::unique(manifest.solver_counts.begin(), manifest.solver_counts.end()),
                manifest.solver_counts.end());
            return manifest;
        }

        inline int bench_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
            if (args.size() != 2) {
                err << "bench needs exactly one manifest file\n";
                print_usage(err);
                return 3;
            }
            const std::string manifest_path = args[1];
            std::ifstream in(manifest_path);
            if (!in) {
                err << "cannot open manifest: " << manifest_path << '\n';
                return 2;
            }
            const auto manifest =
                parse_manifest(in, std::filesystem::path(manifest_path).parent_path());
            std::optional<BksRegistry> bks;
            if (!manifest.bks_path.empty()) {
                bks = BksRegistry::parse_file(manifest.bks_path);
            }

            out << csv_header() << '\n';
            for (const auto& path : manifest.instance_paths) {
                Instance inst = parse_cvrplib_file(path);
                if (manifest.exact_costs) {
                    inst = with_exact_costs(inst);
                }
                // Core-optimization seconds of the x=1 run, per seed.
                std::map<std::uint64_t, double> baselines;
                for (const int x : manifest.solver_counts) {
                    for (const std::uint64_t seed : manifest.seeds) {
                        SolverParams params;
                        params.solvers = x;
                        params.seed = seed;
                        params.delta_co = manifest.iters;
                        auto [solution, stats] = run_once(inst, params);
                        (void)solution;
                        if (x == 1) {
                            baselines[seed] = stats.coreopt_seconds;
                        }
                        std::optional<double> baseline;
                        if (const auto it = baselines.find(seed); it != baselines.end()) {
                            baseline = it->second;
                        }
                        const auto report = make_report(inst.name(), seed, stats, bks ? &*bks : nullptr, baseline);
                        out << csv_row(report) << '\n';
                        err << inst.name() << "  x " << x << "  seed " << seed << "  cost "
                            << format_double(report.cost) << "  (" << format_double(report.total_seconds)
                            << "s)\n";
                    }
                }
            }
            return 0;
        }

    }  // namespace detail

    // Entry point shared by the binary and the tests. Returns 0 on success, 2 on
    // input parse or file IO failures, 3 on bad command lines.
    inline int cli_main(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
        std::vector<std::string> args(argv + 1, argv + argc);
        if (args.empty()) {
            detail::print_usage(err);
            return 3;
        }
        try {
            if (args[0] == "solve") {
                return detail::solve_command(args, out, err);
            }
            if (args[0] == "bench") {
                return detail::bench_command(args, out, err);
            }
            err << "unknown command: " << args[0] << '\n';
            detail::print_usage(err);
            return 3;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return 2;
        }
    }

}  // namespace cvrp

#endif
