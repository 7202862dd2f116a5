#include "dlmi/io/config.hpp"

#include "dlmi/core/vecs_io.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace dlmi {

using nlohmann::json;

RunConfig default_run_config() {
    RunConfig c;
    c.bench.index.model.kind = ModelKind::mlp;
    c.bench.seed = 1;
    c.bench.index.seed = 1;
    for (std::size_t s = 5000; s <= 45000; s += 5000) {
        c.bench.checkpoints.push_back(s);
    }
    return c;
}

namespace {

class Object {
  public:
    Object(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) {
            throw InvalidInput(where_ + " must be an object");
        }
        for (const auto& [key, _] : j_.items()) {
            keys_.insert(key);
        }
    }

    template <typename T>
    void get(const char* key, T& out) {
        if (!j_.contains(key)) {
            return;
        }
        keys_.erase(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw InvalidInput(where_ + "." + key + ": " + e.what());
        }
    }
    bool has(const char* key) const { return j_.contains(key); }
    const json& at(const char* key) {
        keys_.erase(key);
        return j_.at(key);
    }
    std::string path(const char* key) const { return where_ + "." + key; }

    void finish() const {
        if (!keys_.empty()) {
            throw InvalidInput("unknown key " + where_ + "." + *keys_.begin());
        }
    }

  private:
    const json& j_;
    std::string where_;
    std::set<std::string> keys_;
};

void parse_checkpoints(const json& j, std::vector<std::size_t>& out, const std::string& where) {
    if (j.is_array()) {
        out = j.get<std::vector<std::size_t>>();
        return;
    }
    Object o(j, where);
    std::size_t start = 0, step = 0, end = 0;
    o.get("start", start);
    o.get("step", step);
    o.get("end", end);
    o.finish();
    if (start == 0 || step == 0 || end < start) {
        throw InvalidInput(where + " needs start > 0, step > 0 and end >= start");
    }
    out.clear();
    for (std::size_t c = start; c <= end; c += step) {
        out.push_back(c);
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c = default_run_config();
    BenchConfig& b = c.bench;
    Object top(root, "config");

    if (top.has("data")) {
        Object d(top.at("data"), "data");
        d.get("source", c.data.source);
        d.get("n", c.data.synthetic.n);
        d.get("dim", c.data.synthetic.dim);
        d.get("clusters", c.data.synthetic.n_clusters);
        d.get("seed", c.data.synthetic.seed);
        d.get("center_scale", c.data.synthetic.center_scale);
        d.get("noise", c.data.synthetic.noise);
        d.get("queries", c.data.n_queries);
        d.get("fvecs", c.data.fvecs_path);
        d.get("queries_fvecs", c.data.queries_path);
        d.finish();
        if (c.data.source != "synthetic" && c.data.source != "fvecs") {
            throw InvalidInput("data.source must be 'synthetic' or 'fvecs'");
        }
    }
    std::string stream = std::string(to_string(c.stream));
    top.get("stream", stream);
    c.stream = parse_stream_mode(stream);
    top.get("seed", b.seed);
    b.index.seed = b.seed;
    top.get("k", b.k);
    top.get("bucket_size", b.bucket_size);
    if (top.has("model")) {
        Object m(top.at("model"), "model");
        std::string kind = std::string(to_string(b.index.model.kind));
        m.get("kind", kind);
        b.index.model.kind = parse_model_kind(kind);
        m.get("hidden", b.index.model.mlp.hidden);
        m.get("epochs", b.index.model.mlp.epochs);
        m.get("batch_size", b.index.model.mlp.batch_size);
        m.get("learning_rate", b.index.model.mlp.learning_rate);
        m.get("momentum", b.index.model.mlp.momentum);
        m.get("kmeans_max_iterations", b.index.kmeans.max_iterations);
        m.finish();
    }
    if (top.has("policy")) {
        Object p(top.at("policy"), "policy");
        p.get("underflow_min", b.policy.underflow_min);
        p.get("max_avg_leaf_occupancy", b.policy.max_avg_leaf_occupancy);
        p.get("max_depth", b.policy.max_depth);
        p.get("target_leaf_fill", b.policy.target_leaf_fill);
        p.get("check_every", b.policy.check_every);
        p.finish();
    }
    b.index.max_depth = b.policy.max_depth;
    if (top.has("scenarios")) {
        const json& arr = top.at("scenarios");
        if (!arr.is_array()) {
            throw InvalidInput("scenarios must be an array");
        }
        b.scenarios.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Object s(arr[i], "scenarios[" + std::to_string(i) + "]");
            CostScenario cs;
            s.get("qf", cs.querying_frequency);
            s.get("tr", cs.target_recall);
            s.finish();
            b.scenarios.push_back(cs);
        }
    }
    if (top.has("checkpoints")) {
        parse_checkpoints(top.at("checkpoints"), b.checkpoints, "checkpoints");
    }
    if (top.has("methods")) {
        std::vector<std::string> methods;
        top.get("methods", methods);
        b.run_dynamized = b.run_none = b.run_naive = false;
        for (const auto& m : methods) {
            if (m == "dynamized") {
                b.run_dynamized = true;
            } else if (m == "none") {
                b.run_none = true;
            } else if (m == "naive") {
                b.run_naive = true;
            } else {
                throw InvalidInput("unknown method '" + m + "'");
            }
        }
    }
    top.get("naive_intervals", b.naive_intervals);
    if (top.has("ri")) {
        Object r(top.at("ri"), "ri");
        r.get("reference", b.ri_reference);
        r.get("min", b.ri_min);
        r.get("per_decade", b.ri_per_decade);
        r.finish();
    }
    top.get("probe_fraction", b.probe_fraction);
    top.get("wall_clock", b.wall_clock);
    top.get("output_dir", c.output_dir);
    top.finish();
    b.policy.validate();
    for (const auto& s : b.scenarios) {
        s.validate();
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open config " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string to_json(const RunConfig& c) {
    const BenchConfig& b = c.bench;
    json j;
    j["data"] = {
        {"source", c.data.source},
        {"n", c.data.synthetic.n},
        {"dim", c.data.synthetic.dim},
        {"clusters", c.data.synthetic.n_clusters},
        {"seed", c.data.synthetic.seed},
        {"center_scale", c.data.synthetic.center_scale},
        {"noise", c.data.synthetic.noise},
        {"queries", c.data.n_queries},
        {"fvecs", c.data.fvecs_path},
        {"queries_fvecs", c.data.queries_path},
    };
    j["stream"] = std::string(to_string(c.stream));
    j["seed"] = b.seed;
    j["k"] = b.k;
    j["bucket_size"] = b.bucket_size;
    j["model"] = {
        {"kind", std::string(to_string(b.index.model.kind))},
        {"hidden", b.index.model.mlp.hidden},
        {"epochs", b.index.model.mlp.epochs},
        {"batch_size", b.index.model.mlp.batch_size},
        {"learning_rate", b.index.model.mlp.learning_rate},
        {"momentum", b.index.model.mlp.momentum},
        {"kmeans_max_iterations", b.index.kmeans.max_iterations},
    };
    j["policy"] = {
        {"underflow_min", b.policy.underflow_min},
        {"max_avg_leaf_occupancy", b.policy.max_avg_leaf_occupancy},
        {"max_depth", b.policy.max_depth},
        {"target_leaf_fill", b.policy.target_leaf_fill},
        {"check_every", b.policy.check_every},
    };
    json scenarios = json::array();
    for (const auto& s : b.scenarios) {
        scenarios.push_back({{"qf", s.querying_frequency}, {"tr", s.target_recall}});
    }
    j["scenarios"] = scenarios;
    j["checkpoints"] = b.checkpoints;
    json methods = json::array();
    if (b.run_dynamized) methods.push_back("dynamized");
    if (b.run_none) methods.push_back("none");
    if (b.run_naive) methods.push_back("naive");
    j["methods"] = methods;
    j["naive_intervals"] = b.naive_intervals;
    j["ri"] = {{"reference", b.ri_reference}, {"min", b.ri_min}, {"per_decade", b.ri_per_decade}};
    j["probe_fraction"] = b.probe_fraction;
    j["wall_clock"] = b.wall_clock;
    j["output_dir"] = c.output_dir;
    return j.dump(2) + "\n";
}

BenchData load_bench_data(const RunConfig& c) {
    if (c.data.source == "synthetic") {
        return synthetic_bench_data(c.data.synthetic, c.data.n_queries, c.stream, c.bench.seed);
    }
    if (c.stream == StreamMode::shift) {
        throw InvalidInput("shift stream mode needs cluster labels; use a synthetic source");
    }
    if (c.data.fvecs_path.empty() || c.data.queries_path.empty()) {
        throw InvalidInput("fvecs source needs data.fvecs and data.queries_fvecs");
    }
    return ordered_bench_data(read_fvecs(c.data.fvecs_path), read_fvecs(c.data.queries_path), c.bench.seed);
}

}  // namespace dlmi
