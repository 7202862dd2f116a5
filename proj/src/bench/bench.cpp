#include "dlmi/bench/bench.hpp"

#include "dlmi/core/knn.hpp"
#include "dlmi/util/csv.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <random>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dlmi {

void BenchConfig::validate(std::size_t dataset_size) const {
    if (scenarios.empty()) {
        throw InvalidInput("bench needs at least one scenario");
    }
    for (const auto& s : scenarios) {
        s.validate();
    }
    if (checkpoints.empty()) {
        throw InvalidInput("bench needs at least one checkpoint");
    }
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] == 0 || checkpoints[i] > dataset_size ||
            (i > 0 && checkpoints[i] <= checkpoints[i - 1])) {
            throw InvalidInput("checkpoints must be ascending, positive and within the dataset");
        }
    }
    if (checkpoints.front() < k) {
        throw InvalidInput("first checkpoint is smaller than k");
    }
    if (k == 0 || bucket_size == 0) {
        throw InvalidInput("k and bucket size must be positive");
    }
    for (std::size_t ri : naive_intervals) {
        if (ri == 0) {
            throw InvalidInput("naive rebuild intervals must be positive");
        }
    }
    if (ri_reference != 0 && (ri_reference < k || ri_reference >= dataset_size)) {
        throw InvalidInput("rebuild-interval reference size must lie in [k, dataset size)");
    }
    if (!(ri_min >= 1.0) || ri_per_decade == 0) {
        throw InvalidInput("bad rebuild-interval grid settings");
    }
    policy.validate();
}

namespace {

struct BaselineRun {
    std::size_t size = 0;
    Cost build;
    /// One deterioration curve per scenario TR, in scenario order.
    std::vector<DeteriorationCurve> curves;
};

std::string with_context(const std::string& method, std::size_t checkpoint, const std::exception& e) {
    return method + " at checkpoint " + std::to_string(checkpoint) + ": " + e.what();
}

BaselineRun run_no_rebuild(const Dataset& ordered, const Dataset& queries,
                           const PrefixGroundTruth& truth, std::size_t c, const BenchConfig& cfg) {
    const Dataset initial = ordered.slice(0, c);
    const Dataset stream = ordered.slice(c, ordered.size());
    const auto probe_points = fractional_probe_points(stream.size(), cfg.probe_fraction);
    BuildParams params{cfg.bucket_size, cfg.index};
    ProbeFn probe = [&](const Index& index, std::size_t inserts) {
        return recall_profile(index, queries, truth.at(c + inserts), cfg.k);
    };
    LifecycleReport report = run_lifecycle(initial, stream, RebuildPolicy::none(), probe_points, params, probe);

    std::vector<ProbeSample> samples;
    for (auto& snap : report.snapshots) {
        samples.push_back({snap.inserts, snap.db_size, std::move(*snap.profile)});
    }
    BaselineRun run;
    run.size = c;
    run.build = report.initial_build;
    for (const auto& s : cfg.scenarios) {
        run.curves.push_back(deterioration_curve(samples, s.target_recall));
    }
    return run;
}

BenchRecord baseline_record(const std::string& method, const CostScenario& s, const BaselineRun& run,
                            const DeteriorationCurve& curve, double ri, const BenchConfig& cfg) {
    BenchRecord r;
    r.method = method;
    r.scenario = s;
    r.checkpoint = run.size;
    r.ri = ri;
    r.seed = cfg.seed;
    r.sc_proxy = curve.proxy.mean_over(ri);
    r.bc_proxy = static_cast<double>(run.build.distance_computations);
    r.ac_proxy = amortized_cost(r.sc_proxy, r.bc_proxy, ri, s.querying_frequency);
    if (cfg.wall_clock) {
        r.sc_seconds = curve.seconds.mean_over(ri);
        r.bc_seconds = run.build.seconds;
        r.ac_seconds = amortized_cost(r.sc_seconds, r.bc_seconds, ri, s.querying_frequency);
    }
    return r;
}

}  // namespace

double dynamized_amortized_cost(const ActionLog& log, double total_queries, double current_sc,
                                bool seconds) {
    if (!(total_queries > 0.0)) {
        throw InvalidInput("total queries must be positive");
    }
    const Cost total = log.total_cost();
    const double structural = seconds ? total.seconds : static_cast<double>(total.distance_computations);
    return current_sc + structural / total_queries;
}

BenchResult run_scenario_matrix(const Dataset& ordered, const Dataset& queries,
                                const BenchConfig& cfg) {
    cfg.validate(ordered.size());
    if (queries.empty() || queries.dimension() != ordered.dimension()) {
        throw InvalidInput("bench needs a nonempty query set of the dataset dimension");
    }
    const std::size_t n = ordered.size();
    const PrefixGroundTruth truth(ordered, queries, cfg.k);
    BenchResult result;

    // Baseline runs, one No-rebuild lifecycle per checkpoint; the naive
    // variants are evaluated analytically on the same deterioration curves.
    std::vector<BaselineRun> baselines;
    if (cfg.run_none || cfg.run_naive) {
        for (std::size_t c : cfg.checkpoints) {
            if (c >= n) {
                continue;  // nothing left to stream
            }
            try {
                baselines.push_back(run_no_rebuild(ordered, queries, truth, c, cfg));
            } catch (const std::exception& e) {
                throw std::runtime_error(with_context("baseline", c, e));
            }
        }
    }

    std::vector<std::size_t> intervals = cfg.naive_intervals;
    if (cfg.run_naive && intervals.empty()) {
        const std::size_t ref = cfg.ri_reference ? cfg.ri_reference : cfg.checkpoints.front();
        if (ref >= n) {
            throw InvalidInput("no stream left after the rebuild-interval reference size");
        }
        const auto it = std::find_if(baselines.begin(), baselines.end(),
                                     [&](const BaselineRun& b) { return b.size == ref; });
        const BaselineRun ref_run = it != baselines.end() ? *it : run_no_rebuild(ordered, queries, truth, ref, cfg);
        const auto grid = log_spaced_grid(std::min(cfg.ri_min, static_cast<double>(n - ref)),
                                          static_cast<double>(n - ref), cfg.ri_per_decade);
        for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
            RiTable table;
            table.scenario = cfg.scenarios[i];
            table.reference_size = ref;
            table.build_cost = static_cast<double>(ref_run.build.distance_computations);
            table.result = optimal_rebuild_interval(table.build_cost, ref_run.curves[i].proxy,
                                                    cfg.scenarios[i].querying_frequency, grid);
            intervals.push_back(static_cast<std::size_t>(table.result.best_interval()));
            result.ri_tables.push_back(std::move(table));
        }
    }
    {
        std::set<std::size_t> unique(intervals.begin(), intervals.end());
        result.naive_intervals.assign(unique.begin(), unique.end());
    }

    // Dynamized: grow from empty, profile at each checkpoint.
    struct DynPoint {
        std::size_t size;
        RecallProfile profile;
        Cost structural;
    };
    std::vector<DynPoint> dyn_points;
    if (cfg.run_dynamized) {
        DynamicIndex dyn(ordered.dimension(), cfg.index, cfg.policy);
        std::size_t next = 0;
        try {
            for (std::size_t r = 0; r < n && next < cfg.checkpoints.size(); ++r) {
                dyn.insert(ordered.id(r), ordered.row(r));
                if (r + 1 == cfg.checkpoints[next]) {
                    dyn_points.push_back({r + 1, recall_profile(dyn.index(), queries, truth.at(r + 1), cfg.k),
                                          dyn.log().total_cost()});
                    ++next;
                }
            }
        } catch (const std::exception& e) {
            throw std::runtime_error(with_context("dynamized", next < cfg.checkpoints.size() ? cfg.checkpoints[next] : n, e));
        }
        result.dynamized_log = dyn.log();
        result.dynamized_stalled_sweeps = dyn.stalled_sweeps();
    }

    for (std::size_t si = 0; si < cfg.scenarios.size(); ++si) {
        const CostScenario& s = cfg.scenarios[si];
        for (const auto& p : dyn_points) {
            const SearchCost sc = search_cost_at(p.profile, s.target_recall);
            BenchRecord r;
            r.method = "dynamized";
            r.scenario = s;
            r.checkpoint = p.size;
            r.ri = static_cast<double>(p.size);
            r.seed = cfg.seed;
            r.sc_proxy = sc.proxy;
            r.bc_proxy = static_cast<double>(p.structural.distance_computations);
            r.ac_proxy = amortized_cost(r.sc_proxy, r.bc_proxy, r.ri, s.querying_frequency);
            if (cfg.wall_clock) {
                r.sc_seconds = sc.seconds;
                r.bc_seconds = p.structural.seconds;
                r.ac_seconds = amortized_cost(r.sc_seconds, r.bc_seconds, r.ri, s.querying_frequency);
            }
            result.records.push_back(std::move(r));
        }
        if (cfg.run_none) {
            for (const auto& b : baselines) {
                result.records.push_back(baseline_record("none", s, b, b.curves[si],
                                                         static_cast<double>(n - b.size), cfg));
            }
        }
        if (cfg.run_naive) {
            for (std::size_t ri : result.naive_intervals) {
                const std::string label = RebuildPolicy::naive(ri).label();
                for (const auto& b : baselines) {
                    const double eff = static_cast<double>(std::min(ri, n - b.size));
                    result.records.push_back(baseline_record(label, s, b, b.curves[si], eff, cfg));
                }
            }
        }
    }
    return result;
}

BenchData synthetic_bench_data(const SyntheticParams& params, std::size_t n_queries, StreamMode mode,
                               std::uint64_t seed) {
    if (n_queries == 0) {
        throw InvalidInput("bench needs at least one query");
    }
    SyntheticParams all = params;
    all.n = params.n + n_queries;
    const SyntheticData data = synthetic_dataset(all);
    // Held-out queries: a seeded sample of rows, spread over every cluster.
    std::vector<std::size_t> rows(all.n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(rows.begin(), rows.end(), rng);
    std::vector<std::size_t> query_rows(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_queries));
    std::vector<std::size_t> base_rows(rows.begin() + static_cast<std::ptrdiff_t>(n_queries), rows.end());
    std::sort(query_rows.begin(), query_rows.end());
    std::sort(base_rows.begin(), base_rows.end());

    std::vector<std::uint32_t> clusters;
    clusters.reserve(base_rows.size());
    for (std::size_t r : base_rows) {
        clusters.push_back(data.cluster_of_row[r]);
    }
    BenchData out;
    const auto order = stream_order(base_rows.size(), clusters, mode, seed);
    out.ordered = Dataset(params.dim);
    out.ordered.reserve(base_rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        // Ids follow insertion order so every prefix holds ids 0..c-1.
        out.ordered.append(static_cast<ObjectId>(i), data.dataset.row(base_rows[order[i]]));
    }
    out.queries = Dataset(params.dim);
    for (std::size_t i = 0; i < query_rows.size(); ++i) {
        out.queries.append(static_cast<ObjectId>(i), data.dataset.row(query_rows[i]));
    }
    return out;
}

BenchData ordered_bench_data(const Dataset& base, Dataset queries, std::uint64_t seed) {
    const auto order = stream_order(base.size(), {}, StreamMode::shuffle, seed);
    BenchData out;
    out.ordered = Dataset(base.dimension());
    out.ordered.reserve(base.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.ordered.append(static_cast<ObjectId>(i), base.row(order[i]));
    }
    out.queries = std::move(queries);
    return out;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
    out << "method,QF,TR,checkpoint_size,SC_proxy,SC_seconds,BC_cum_proxy,BC_cum_seconds,RI,AC_proxy,AC_seconds,seed\n";
    for (const auto& r : records) {
        out << r.method << ',' << format_double(r.scenario.querying_frequency) << ','
            << format_double(r.scenario.target_recall) << ',' << r.checkpoint << ','
            << format_double(r.sc_proxy) << ',' << format_double(r.sc_seconds) << ','
            << format_double(r.bc_proxy) << ',' << format_double(r.bc_seconds) << ','
            << format_double(r.ri) << ',' << format_double(r.ac_proxy) << ','
            << format_double(r.ac_seconds) << ',' << r.seed << '\n';
    }
}

void write_ri_csv(std::ostream& out, const std::vector<RiTable>& tables) {
    out << "QF,TR,reference_size,RI,mean_SC,build_share,AC\n";
    for (const auto& t : tables) {
        for (const auto& row : t.result.table) {
            out << format_double(t.scenario.querying_frequency) << ',' << format_double(t.scenario.target_recall)
                << ',' << t.reference_size << ',' << format_double(row.rebuild_interval) << ','
                << format_double(row.mean_search_cost) << ',' << format_double(row.build_share) << ','
                << format_double(row.amortized_cost) << '\n';
        }
    }
}

namespace {

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
    T value{};
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw InvalidInput("bad number '" + std::string(field) + "' on csv line " + std::to_string(line));
    }
    return value;
}

}  // namespace

std::vector<BenchRecord> read_bench_csv(std::istream& in) {
    std::vector<BenchRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) {
            continue;
        }
        std::vector<std::string_view> f;
        std::string_view rest = line;
        while (true) {
            const auto comma = rest.find(',');
            f.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        if (f.size() != 12) {
            throw InvalidInput("csv line " + std::to_string(line_no) + " has " + std::to_string(f.size()) + " fields");
        }
        BenchRecord r;
        r.method = std::string(f[0]);
        r.scenario.querying_frequency = parse_number<double>(f[1], line_no);
        r.scenario.target_recall = parse_number<double>(f[2], line_no);
        r.checkpoint = parse_number<std::size_t>(f[3], line_no);
        r.sc_proxy = parse_number<double>(f[4], line_no);
        r.sc_seconds = parse_number<double>(f[5], line_no);
        r.bc_proxy = parse_number<double>(f[6], line_no);
        r.bc_seconds = parse_number<double>(f[7], line_no);
        r.ri = parse_number<double>(f[8], line_no);
        r.ac_proxy = parse_number<double>(f[9], line_no);
        r.ac_seconds = parse_number<double>(f[10], line_no);
        r.seed = parse_number<std::uint64_t>(f[11], line_no);
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace dlmi
