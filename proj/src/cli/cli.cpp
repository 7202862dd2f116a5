#include "dlmi/cli/cli.hpp"

#include "dlmi/bench/bench.hpp"
#include "dlmi/core/knn.hpp"
#include "dlmi/core/synthetic.hpp"
#include "dlmi/core/vecs_io.hpp"
#include "dlmi/io/config.hpp"
#include "dlmi/io/persistence.hpp"
#include "dlmi/util/timer.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>

namespace dlmi {

namespace {

namespace fs = std::filesystem;

struct GenArgs {
    SyntheticParams p{50000, 32, 20, 1, 10.0, 1.0};
    std::string out;
    std::size_t queries = 0;
    std::string queries_out;
};

struct BuildArgs {
    std::string data;
    std::size_t bucket = 1000;
    std::string model = "mlp";
    std::uint64_t seed = 0;
    std::string out;
};

struct InsertArgs {
    std::string index;
    std::string data;
    bool dynamic = false;
    PolicyConfig policy;
    std::string out;
    std::int64_t first_id = -1;
    std::string log;
};

struct QueryArgs {
    std::string index;
    std::string queries;
    std::size_t k = 30;
    std::size_t budget = 0;
    std::string truth;
    std::string out;
};

struct BenchArgs {
    std::string config;
    std::string out_dir;
};

struct RiArgs {
    std::string config;
    std::size_t reference = 0;
    double qf = 0.0;
    double tr = 0.0;
    std::string out;
};

void open_or_throw(std::ofstream& f, const fs::path& path) {
    f.open(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

void print_stats(std::ostream& out, const IndexStats& s) {
    out << "objects " << s.object_count << "\n"
        << "leaves " << s.leaf_count << "\n"
        << "inner_nodes " << s.inner_count << "\n"
        << "depth " << s.depth << "\n"
        << "avg_leaf_occupancy " << s.average_leaf_occupancy << "\n"
        << "min_leaf_occupancy " << s.min_leaf_occupancy << "\n"
        << "max_leaf_occupancy " << s.max_leaf_occupancy << "\n";
    for (const auto& bin : s.occupancy_histogram) {
        if (bin.leaves) {
            out << "occupancy [" << bin.lo << "," << bin.hi << ") leaves " << bin.leaves << " objects " << bin.objects << "\n";
        }
    }
}

int gen_data(const GenArgs& a, std::ostream& out) {
    SyntheticParams p = a.p;
    p.n += a.queries;
    const SyntheticData data = synthetic_dataset(p);
    if (a.queries == 0) {
        write_fvecs(a.out, data.dataset);
    } else {
        if (a.queries_out.empty()) {
            throw InvalidInput("--queries needs --queries-out");
        }
        write_fvecs(a.out, data.dataset.slice(0, a.p.n));
        Dataset q = data.dataset.slice(a.p.n, p.n);
        Dataset renumbered(q.dimension());
        for (std::size_t r = 0; r < q.size(); ++r) {
            renumbered.append(static_cast<ObjectId>(r), q.row(r));
        }
        write_fvecs(a.queries_out, renumbered);
    }
    out << "wrote " << a.p.n << " vectors of dimension " << a.p.dim << " to " << a.out << "\n";
    return 0;
}

int build(const BuildArgs& a, std::ostream& out) {
    const Dataset data = read_fvecs(a.data);
    IndexOptions opt;
    opt.model.kind = parse_model_kind(a.model);
    opt.seed = a.seed;
    const StaticBuild b = build_static(data, a.bucket, opt);
    save_index(b.index, a.out);
    out << "built " << b.index.stats().leaf_count << " leaves over " << data.size() << " objects; "
        << "build cost " << b.cost.distance_computations << " distance computations, " << b.cost.seconds << " s\n";
    return 0;
}

int insert(const InsertArgs& a, std::ostream& out) {
    Index index = load_index(a.index);
    const Dataset data = read_fvecs(a.data);
    ObjectId next = a.first_id >= 0 ? static_cast<ObjectId>(a.first_id)
                                    : (index.size() ? index.store().max_id() + 1 : 0);
    const std::string target = a.out.empty() ? a.index : a.out;
    if (!a.dynamic) {
        for (std::size_t r = 0; r < data.size(); ++r) {
            index.insert(next++, data.row(r));
        }
        save_index(index, target);
        out << "inserted " << data.size() << " objects; index holds " << index.size() << "\n";
        return 0;
    }
    DynamicIndex dyn(std::move(index), a.policy);
    for (std::size_t r = 0; r < data.size(); ++r) {
        dyn.insert(next++, data.row(r));
    }
    save_index(dyn.index(), target);
    if (!a.log.empty()) {
        std::ofstream f;
        open_or_throw(f, a.log);
        dyn.log().write_csv(f);
    }
    out << "inserted " << data.size() << " objects; index holds " << dyn.index().size() << "; "
        << dyn.log().records().size() << " structural actions, " << dyn.stalled_sweeps() << " stalled sweeps\n";
    return 0;
}

int query(const QueryArgs& a, std::ostream& out) {
    const Index index = load_index(a.index);
    const Dataset queries = read_fvecs(a.queries);
    const std::size_t budget = a.budget ? a.budget : index.stats().leaf_count;
    GroundTruth truth;
    if (!a.truth.empty()) {
        truth = read_ivecs(a.truth);
        if (truth.size() != queries.size() || truth.k < a.k) {
            throw InvalidInput("ground truth does not match the query set and k");
        }
        for (auto& list : truth.neighbors) {
            list.resize(a.k);
        }
        truth.k = a.k;
    } else {
        truth = compute_ground_truth(index.store(), queries, a.k);
    }
    double recall_sum = 0.0;
    std::uint64_t scanned = 0;
    std::size_t visited = 0;
    GroundTruth results{a.k, {}};
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const SearchResult r = index.search(queries.row(q), a.k, budget);
        std::vector<ObjectId> ids;
        for (const auto& n : r.neighbors) {
            ids.push_back(n.id);
        }
        recall_sum += recall(ids, truth.neighbors[q], a.k);
        scanned += r.objects_scanned;
        visited += r.buckets_visited;
        results.neighbors.push_back(std::move(ids));
    }
    if (!a.out.empty()) {
        write_ivecs(a.out, results);
    }
    const double n = static_cast<double>(queries.size());
    out << "queries " << queries.size() << "\n"
        << "budget " << budget << "\n"
        << "mean_recall " << (queries.empty() ? 0.0 : recall_sum / n) << "\n"
        << "mean_objects_scanned " << (queries.empty() ? 0.0 : static_cast<double>(scanned) / n) << "\n"
        << "mean_buckets_visited " << (queries.empty() ? 0.0 : static_cast<double>(visited) / n) << "\n";
    return 0;
}

int bench(const BenchArgs& a, std::ostream& out) {
    RunConfig cfg = a.config.empty() ? default_run_config() : load_run_config(a.config);
    if (!a.out_dir.empty()) {
        cfg.output_dir = a.out_dir;
    }
    const BenchData data = load_bench_data(cfg);
    Timer timer;
    const BenchResult res = run_scenario_matrix(data.ordered, data.queries, cfg.bench);
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    std::ofstream f;
    open_or_throw(f, dir / "bench.csv");
    write_bench_csv(f, res.records);
    f.close();
    open_or_throw(f, dir / "ri_tables.csv");
    write_ri_csv(f, res.ri_tables);
    f.close();
    open_or_throw(f, dir / "actions.csv");
    res.dynamized_log.write_csv(f, cfg.bench.wall_clock);
    f.close();
    open_or_throw(f, dir / "config.json");
    f << to_json(cfg);
    f.close();
    out << res.records.size() << " records in " << cfg.bench.scenarios.size() << " scenario groups written to "
        << (dir / "bench.csv").string() << " (" << timer.seconds() << " s)\n";
    if (!res.naive_intervals.empty()) {
        out << "naive rebuild intervals:";
        for (std::size_t ri : res.naive_intervals) {
            out << ' ' << ri;
        }
        out << "\n";
    }
    if (res.dynamized_stalled_sweeps) {
        out << "warning: " << res.dynamized_stalled_sweeps << " policy sweeps could not restore the bounds\n";
    }
    return 0;
}

int optimize_ri(const RiArgs& a, std::ostream& out, std::ostream& err) {
    RunConfig cfg = a.config.empty() ? default_run_config() : load_run_config(a.config);
    BenchConfig& b = cfg.bench;
    if (a.qf > 0.0 || a.tr > 0.0) {
        CostScenario s{a.qf > 0.0 ? a.qf : 1.0, a.tr > 0.0 ? a.tr : 0.5};
        s.validate();
        b.scenarios = {s};
    }
    const std::size_t ref = a.reference ? a.reference : (b.ri_reference ? b.ri_reference : b.checkpoints.front());
    b.checkpoints = {ref};
    b.ri_reference = ref;
    b.run_dynamized = false;
    b.run_none = false;
    b.run_naive = true;
    b.naive_intervals.clear();
    const BenchData data = load_bench_data(cfg);
    const BenchResult res = run_scenario_matrix(data.ordered, data.queries, b);
    if (a.out.empty()) {
        write_ri_csv(out, res.ri_tables);
    } else {
        std::ofstream f;
        open_or_throw(f, a.out);
        write_ri_csv(f, res.ri_tables);
    }
    for (const auto& t : res.ri_tables) {
        (a.out.empty() ? err : out) << "QF " << t.scenario.querying_frequency << " TR " << t.scenario.target_recall
                                     << ": optimal rebuild interval " << t.result.best_interval() << "\n";
    }
    return 0;
}

int check(const std::string& path, std::ostream& out) {
    // An inconsistent tree is rejected by the loader with a FormatError naming
    // the violation, which surfaces as exit code 1.
    const Index index = load_index(path);
    out << "consistency ok\n";
    print_stats(out, index.stats());
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dynamic learned metric index"};
    app.require_subcommand(1);
    app.fallthrough(false);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic Gaussian-blob dataset as fvecs");
    gen_cmd->add_option("--n", gen.p.n, "Number of vectors")->default_val(gen.p.n);
    gen_cmd->add_option("--dim", gen.p.dim, "Dimension")->default_val(gen.p.dim);
    gen_cmd->add_option("--clusters", gen.p.n_clusters, "Number of blobs")->default_val(gen.p.n_clusters);
    gen_cmd->add_option("--seed", gen.p.seed, "Generator seed")->default_val(gen.p.seed);
    gen_cmd->add_option("--center-scale", gen.p.center_scale, "Std-dev of blob means")->default_val(gen.p.center_scale);
    gen_cmd->add_option("--noise", gen.p.noise, "Std-dev around each mean")->default_val(gen.p.noise);
    gen_cmd->add_option("--out", gen.out, "Output fvecs path")->required();
    gen_cmd->add_option("--queries", gen.queries, "Extra held-out query vectors")->default_val(0);
    gen_cmd->add_option("--queries-out", gen.queries_out, "Output fvecs path for queries");

    BuildArgs bld;
    auto* build_cmd = app.add_subcommand("build", "Build a single-level static index and save it");
    build_cmd->add_option("--data", bld.data, "Input fvecs")->required();
    build_cmd->add_option("--bucket", bld.bucket, "Target objects per bucket")->default_val(bld.bucket);
    build_cmd->add_option("--model", bld.model, "centroid or mlp")->default_val(bld.model)->check(CLI::IsMember({"centroid", "mlp"}));
    build_cmd->add_option("--seed", bld.seed, "Index seed")->default_val(bld.seed);
    build_cmd->add_option("--out", bld.out, "Index file")->required();

    InsertArgs ins;
    auto* insert_cmd = app.add_subcommand("insert", "Stream vectors into a saved index");
    insert_cmd->add_option("--index", ins.index, "Index file")->required();
    insert_cmd->add_option("--data", ins.data, "fvecs with vectors to insert")->required();
    insert_cmd->add_flag("--dynamic", ins.dynamic, "Enforce the restructuring policies after inserts");
    insert_cmd->add_option("--underflow", ins.policy.underflow_min, "Minimum leaf occupancy")->default_val(ins.policy.underflow_min);
    insert_cmd->add_option("--max-avg", ins.policy.max_avg_leaf_occupancy, "Maximum average leaf occupancy")->default_val(ins.policy.max_avg_leaf_occupancy);
    insert_cmd->add_option("--max-depth", ins.policy.max_depth, "Maximum inner levels")->default_val(ins.policy.max_depth);
    insert_cmd->add_option("--fill", ins.policy.target_leaf_fill, "Target fill for new leaves")->default_val(ins.policy.target_leaf_fill);
    insert_cmd->add_option("--check-every", ins.policy.check_every, "Inserts between policy sweeps")->default_val(ins.policy.check_every);
    insert_cmd->add_option("--first-id", ins.first_id, "Id of the first inserted vector (default: next free id)");
    insert_cmd->add_option("--out", ins.out, "Output index file (default: overwrite --index)");
    insert_cmd->add_option("--log", ins.log, "Write the action log as CSV");

    QueryArgs qry;
    auto* query_cmd = app.add_subcommand("query", "k-NN search with a bucket budget, scored against exact results");
    query_cmd->add_option("--index", qry.index, "Index file")->required();
    query_cmd->add_option("--queries", qry.queries, "Query fvecs")->required();
    query_cmd->add_option("--k", qry.k, "Neighbors per query")->default_val(qry.k);
    query_cmd->add_option("--budget", qry.budget, "Leaves to visit (0 = all)")->default_val(0);
    query_cmd->add_option("--truth", qry.truth, "Ground-truth ivecs (default: brute force over the index)");
    query_cmd->add_option("--out", qry.out, "Write result ids as ivecs");

    BenchArgs bch;
    auto* bench_cmd = app.add_subcommand("bench", "Run the scenario matrix and write CSV tables");
    bench_cmd->add_option("--config", bch.config, "JSON run config (default: built-in defaults)");
    bench_cmd->add_option("--out-dir", bch.out_dir, "Override the output directory");

    RiArgs ri;
    auto* ri_cmd = app.add_subcommand("optimize-ri", "Amortized cost over a grid of rebuild intervals");
    ri_cmd->add_option("--config", ri.config, "JSON run config");
    ri_cmd->add_option("--reference", ri.reference, "Database size the index is built at");
    ri_cmd->add_option("--qf", ri.qf, "Single scenario: queries per insert");
    ri_cmd->add_option("--tr", ri.tr, "Single scenario: target recall");
    ri_cmd->add_option("--out", ri.out, "Output CSV (default: stdout)");

    std::string check_path;
    auto* check_cmd = app.add_subcommand("check", "Load an index and report consistency and statistics");
    check_cmd->add_option("--index", check_path, "Index file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen_cmd) return gen_data(gen, out);
        if (*build_cmd) return build(bld, out);
        if (*insert_cmd) return insert(ins, out);
        if (*query_cmd) return query(qry, out);
        if (*bench_cmd) return bench(bch, out);
        if (*ri_cmd) return optimize_ri(ri, out, err);
        if (*check_cmd) return check(check_path, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace dlmi
