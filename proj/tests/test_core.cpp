#include "dlmi/core/knn.hpp"
#include "dlmi/core/synthetic.hpp"
#include "dlmi/core/topk.hpp"
#include "dlmi/core/vecs_io.hpp"
#include "dlmi/util/csv.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

using namespace dlmi;

namespace {

Dataset small_grid() {
    Dataset d(2);
    ObjectId id = 0;
    for (int x = 0; x < 5; ++x) {
        for (int y = 0; y < 5; ++y) {
            const float v[2] = {static_cast<float>(x), static_cast<float>(y)};
            d.append(id++, v);
        }
    }
    return d;
}

// Reference ranking written without the library: full sort with (d2, id) key.
std::vector<ObjectId> sort_oracle(const Dataset& d, std::span<const float> q, std::size_t k) {
    std::vector<std::pair<double, ObjectId>> all;
    for (std::size_t r = 0; r < d.size(); ++r) {
        double s = 0;
        for (std::size_t j = 0; j < d.dimension(); ++j) {
            const double diff = double(d.row(r)[j]) - double(q[j]);
            s += diff * diff;
        }
        all.emplace_back(s, d.id(r));
    }
    std::sort(all.begin(), all.end());
    std::vector<ObjectId> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(all[i].second);
    return out;
}

std::vector<std::byte> le_record(std::int32_t dim, std::span<const float> values) {
    std::vector<std::byte> out(4 + 4 * values.size());
    std::memcpy(out.data(), &dim, 4);
    std::memcpy(out.data() + 4, values.data(), 4 * values.size());
    return out;
}

}  // namespace

TEST_CASE("euclidean distance examples") {
    const float a[3] = {0, 0, 0};
    const float b[3] = {1, 2, 2};
    CHECK(euclidean_distance(a, b) == 3.0);
    CHECK(squared_distance(a, b) == 9.0);
    CHECK(euclidean_distance(b, b) == 0.0);
    const float c[2] = {1, 1};
    CHECK_THROWS_AS(euclidean_distance(a, c), InvalidInput);
}

TEST_CASE("euclidean distance axioms on random vectors") {
    std::mt19937_64 rng(11);
    std::normal_distribution<float> g;
    for (int t = 0; t < 200; ++t) {
        std::vector<float> x(16), y(16), z(16);
        for (auto* v : {&x, &y, &z})
            for (auto& e : *v) e = g(rng);
        const double xy = euclidean_distance(x, y);
        CHECK(xy >= 0.0);
        CHECK(xy == euclidean_distance(y, x));
        CHECK(xy <= euclidean_distance(x, z) + euclidean_distance(z, y) + 1e-12);
    }
}

TEST_CASE("dataset enforces ids and dimension") {
    Dataset d(2);
    const float v[2] = {1, 2};
    d.append(0, v);
    CHECK_THROWS_AS(d.append(0, v), InvalidInput);
    const float w[3] = {1, 2, 3};
    CHECK_THROWS_AS(d.append(1, w), InvalidInput);
    CHECK(d.contains(0));
    CHECK_FALSE(d.contains(1));
    CHECK_THROWS_AS(d.row_of(7), InvalidInput);

    Dataset undefined;
    undefined.append(5, w);
    CHECK(undefined.dimension() == 3);
    CHECK(undefined.row_of(5) == 0);
}

TEST_CASE("knn bruteforce on a grid") {
    const Dataset d = small_grid();
    const float q[2] = {0, 0};
    auto nn = knn_bruteforce(d, q, 3);
    REQUIRE(nn.size() == 3);
    CHECK(nn[0].id == 0);
    CHECK(nn[0].distance == 0.0);
    // (0,1) id 1 and (1,0) id 5 tie at distance 1; smaller id first
    CHECK(nn[1].id == 1);
    CHECK(nn[2].id == 5);
    CHECK(nn[2].distance == 1.0);
    CHECK_THROWS_AS(knn_bruteforce(d, q, 0), InvalidInput);
    CHECK_THROWS_AS(knn_bruteforce(d, q, 26), InvalidInput);
}

TEST_CASE("knn bruteforce matches an independent sort oracle") {
    const Dataset d = synthetic_dataset(1500, 8, 5, 3);
    const Dataset q = synthetic_dataset(40, 8, 5, 4);
    for (std::size_t i = 0; i < q.size(); ++i) {
        const auto got = knn_bruteforce(d, q.row(i), 30);
        const auto expect = sort_oracle(d, q.row(i), 30);
        std::vector<ObjectId> ids;
        for (const auto& n : got) ids.push_back(n.id);
        CHECK(ids == expect);
        CHECK(std::is_sorted(got.begin(), got.end(),
                             [](const Neighbor& a, const Neighbor& b) { return a.distance < b.distance; }));
    }
}

TEST_CASE("recall examples") {
    std::vector<ObjectId> truth(30);
    std::iota(truth.begin(), truth.end(), 0);
    std::vector<ObjectId> got(truth.begin(), truth.begin() + 27);
    for (ObjectId i = 100; i < 103; ++i) got.push_back(i);
    CHECK(recall(got, truth, 30) == Catch::Approx(0.9).epsilon(0));
    CHECK(recall(got, truth, 30) == 27.0 / 30.0);
    std::vector<ObjectId> half(truth.begin(), truth.begin() + 15);
    CHECK(recall(half, truth, 30) == 0.5);
    CHECK(recall(truth, truth, 30) == 1.0);
    CHECK(recall({}, truth, 30) == 0.0);
}

TEST_CASE("ground truth and prefix ground truth agree") {
    const Dataset d = synthetic_dataset(800, 6, 4, 5);
    const Dataset q = synthetic_dataset(25, 6, 4, 6);
    const auto full = compute_ground_truth(d, q, 10);
    REQUIRE(full.size() == 25);
    PrefixGroundTruth prefix(d, q, 10);
    CHECK(prefix.at(800).neighbors == full.neighbors);
    for (std::size_t m : {10u, 57u, 400u}) {
        const auto expect = compute_ground_truth(d.slice(0, m), q, 10);
        CHECK(prefix.at(m).neighbors == expect.neighbors);
    }
    CHECK_THROWS(prefix.at(5));
    CHECK_THROWS(prefix.at(801));
}

TEST_CASE("topk keeps the k best and reports evictions") {
    TopK top(2);
    CHECK(top.push(5.0, 1).accepted);
    CHECK(top.push(3.0, 2).accepted);
    auto o = top.push(4.0, 3);
    CHECK(o.accepted);
    REQUIRE(o.evicted);
    CHECK(*o.evicted == 1);
    CHECK_FALSE(top.push(4.0, 9).accepted);  // tie loses to smaller id
    auto tie = top.push(4.0, 0);
    CHECK(tie.accepted);
    CHECK(*tie.evicted == 3);
    auto s = top.sorted();
    REQUIRE(s.size() == 2);
    CHECK(s[0].id == 2);
    CHECK(s[1].id == 0);
    CHECK(s[1].distance == 2.0);
}

TEST_CASE("fvecs and ivecs round trip") {
    const Dataset d = synthetic_dataset(50, 7, 3, 9);
    const auto dir = std::filesystem::temp_directory_path() / "dlmi_core_io";
    std::filesystem::create_directories(dir);
    write_fvecs(dir / "a.fvecs", d);
    const Dataset back = read_fvecs(dir / "a.fvecs");
    CHECK(back == d);

    GroundTruth gt{3, {{1, 2, 3}, {4, 5, 6}}};
    write_ivecs(dir / "a.ivecs", gt);
    const auto gt2 = read_ivecs(dir / "a.ivecs");
    CHECK(gt2.k == 3);
    CHECK(gt2.neighbors == gt.neighbors);
    std::filesystem::remove_all(dir);
}

TEST_CASE("fvecs parser handles edge cases") {
    const Dataset empty = parse_fvecs({});
    CHECK(empty.empty());
    CHECK(empty.dimension() == 0);

    const float v[2] = {1.5f, -2.0f};
    auto rec = le_record(2, v);
    const Dataset one = parse_fvecs(rec);
    REQUIRE(one.size() == 1);
    CHECK(one.row(0)[0] == 1.5f);
    CHECK(one.id(0) == 0);

    auto truncated = rec;
    truncated.pop_back();
    CHECK_THROWS_AS(parse_fvecs(truncated), ParseError);

    auto two = rec;
    const float w[3] = {1, 2, 3};
    auto rec3 = le_record(3, w);
    two.insert(two.end(), rec3.begin(), rec3.end());
    CHECK_THROWS_AS(parse_fvecs(two), ParseError);

    auto negative = le_record(-1, {});
    CHECK_THROWS_AS(parse_fvecs(negative), ParseError);

    std::vector<std::byte> partial_header(2);
    CHECK_THROWS_AS(parse_fvecs(partial_header), ParseError);
    CHECK_THROWS(read_fvecs("/nonexistent/dir/x.fvecs"));
}

TEST_CASE("synthetic data is deterministic and clustered") {
    SyntheticParams p{2000, 8, 2, 42, 10.0, 1.0};
    const auto a = synthetic_dataset(p);
    const auto b = synthetic_dataset(p);
    CHECK(a.dataset == b.dataset);
    CHECK(a.cluster_of_row == b.cluster_of_row);
    p.seed = 43;
    CHECK_FALSE(synthetic_dataset(p).dataset == a.dataset);

    // balanced
    const auto ones = std::count(a.cluster_of_row.begin(), a.cluster_of_row.end(), 1u);
    CHECK(ones == 1000);
    // rows lie near their own centre much more than the other
    std::size_t nearer = 0;
    for (std::size_t r = 0; r < a.dataset.size(); ++r) {
        double d[2] = {0, 0};
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t j = 0; j < 8; ++j) {
                const double diff = a.dataset.row(r)[j] - a.centers[c * 8 + j];
                d[c] += diff * diff;
            }
        nearer += (d[a.cluster_of_row[r]] < d[1 - a.cluster_of_row[r]]);
    }
    CHECK(nearer >= 1990);
    CHECK_THROWS_AS(synthetic_dataset(SyntheticParams{0, 8, 2, 1}), InvalidInput);
    CHECK_THROWS_AS(synthetic_dataset(SyntheticParams{10, 0, 2, 1}), InvalidInput);
}

TEST_CASE("format_double round trips") {
    for (double v : {0.0, 1.0, 0.1, 1e-300, 12345.678, -3.25}) {
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
}
