#include "dlmi/core/synthetic.hpp"
#include "dlmi/core/vecs_io.hpp"
#include "dlmi/dynamize/policy.hpp"
#include "dlmi/io/config.hpp"
#include "dlmi/io/persistence.hpp"

#include <catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>

using namespace dlmi;

namespace {

Index dynamic_index(ModelKind kind) {
    const Dataset d = synthetic_dataset(6000, 8, 6, 31);
    IndexOptions o;
    o.model.kind = kind;
    o.model.mlp.epochs = 3;
    o.model.mlp.hidden = 16;
    o.seed = 9;
    PolicyConfig p;
    p.check_every = 100;
    p.max_avg_leaf_occupancy = 400;
    p.target_leaf_fill = 200;
    DynamicIndex dyn(8, o, p);
    for (std::size_t r = 0; r < d.size(); ++r) dyn.insert(d.id(r), d.row(r));
    return std::move(dyn.index());
}

void require_field(const std::vector<std::uint8_t>& bytes, const std::string& field) {
    try {
        deserialize_index(bytes);
        FAIL("load succeeded");
    } catch (const FormatError& e) {
        CHECK(e.field() == field);
    }
}

}  // namespace

TEST_CASE("save load save is byte identical and search equivalent") {
    for (auto kind : {ModelKind::centroid, ModelKind::mlp}) {
        const Index original = dynamic_index(kind);
        REQUIRE(original.stats().depth >= 2);
        const auto bytes = serialize_index(original);
        const Index loaded = deserialize_index(bytes);
        CHECK(serialize_index(loaded) == bytes);
        CHECK_FALSE(loaded.check_consistency());
        CHECK(loaded.options().seed == original.options().seed);
        CHECK(loaded.seed_counter() == original.seed_counter());

        const Dataset q = synthetic_dataset(100, 8, 6, 32);
        const std::size_t leaves = original.stats().leaf_count;
        for (std::size_t i = 0; i < q.size(); ++i) {
            for (std::size_t budget : {std::size_t{1}, std::size_t{3}, leaves}) {
                const auto a = original.search(q.row(i), 30, budget);
                const auto b = loaded.search(q.row(i), 30, budget);
                CHECK(a.neighbors == b.neighbors);
                CHECK(a.objects_scanned == b.objects_scanned);
                CHECK(a.buckets_visited == b.buckets_visited);
            }
        }
    }
}

TEST_CASE("file round trip and empty index") {
    const auto dir = std::filesystem::temp_directory_path() / "dlmi_persist";
    std::filesystem::create_directories(dir);
    const Index original = dynamic_index(ModelKind::centroid);
    save_index(original, dir / "a.idx");
    const Index loaded = load_index(dir / "a.idx");
    save_index(loaded, dir / "b.idx");
    CHECK(read_file_bytes(dir / "a.idx") == read_file_bytes(dir / "b.idx"));

    const Index empty(5);
    const Index empty2 = deserialize_index(serialize_index(empty));
    CHECK(empty2.size() == 0);
    CHECK(empty2.dimension() == 5);
    CHECK(empty2.root().is_leaf());
    CHECK_THROWS(load_index(dir / "missing.idx"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("corrupted files are rejected with the failing field") {
    const auto bytes = serialize_index(dynamic_index(ModelKind::centroid));

    auto truncated = bytes;
    truncated.resize(bytes.size() / 2);
    require_field(truncated, "checksum");

    auto flipped = bytes;
    flipped[bytes.size() / 3] ^= 0x40;
    require_field(flipped, "checksum");

    auto magic = bytes;
    magic[0] = 'X';
    require_field(magic, "magic");

    auto version = bytes;
    version[8] = 99;
    require_field(version, "version");

    require_field(std::vector<std::uint8_t>(4, 0), "magic");
    require_field(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 9), "version");
}

TEST_CASE("run config round trips through json") {
    RunConfig cfg = default_run_config();
    cfg.stream = StreamMode::shift;
    cfg.bench.k = 17;
    cfg.bench.scenarios = {{3.0, 0.7}};
    cfg.bench.naive_intervals = {10, 20};
    cfg.bench.policy.underflow_min = 7;
    cfg.data.synthetic.n = 1234;
    cfg.output_dir = "elsewhere";
    const std::string text = to_json(cfg);
    const RunConfig back = parse_run_config(text);
    CHECK(to_json(back) == text);
    CHECK(back.stream == StreamMode::shift);
    CHECK(back.bench.k == 17);
    CHECK(back.bench.scenarios == cfg.bench.scenarios);
    CHECK(back.bench.policy == cfg.bench.policy);
    CHECK(back.bench.index.model == cfg.bench.index.model);
    CHECK(back.data.synthetic.n == 1234);
}

TEST_CASE("run config parsing is strict") {
    CHECK_THROWS(parse_run_config("{\"bogus\": 1}"));
    CHECK_THROWS(parse_run_config("{\"model\": {\"kind\": \"tree\"}}"));
    CHECK_THROWS(parse_run_config("{\"k\": \"ten\"}"));
    CHECK_THROWS(parse_run_config("not json"));
    const auto c = parse_run_config("{\"checkpoints\": {\"start\": 100, \"step\": 100, \"end\": 300}, \"k\": 5}");
    CHECK(c.bench.checkpoints == std::vector<std::size_t>{100, 200, 300});
    CHECK(c.bench.k == 5);
    const auto d = parse_run_config("{}");
    CHECK(to_json(d) == to_json(default_run_config()));
}
