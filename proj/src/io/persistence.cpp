#include "dlmi/io/persistence.hpp"

#include "dlmi/core/vecs_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>

namespace dlmi {

static_assert(std::endian::native == std::endian::little, "persistence assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'D', 'L', 'M', 'I', 'I', 'D', 'X', '\0'};

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks.
    std::size_t done = 0;
    while (done < bytes.size()) {
        const std::size_t chunk = std::min<std::size_t>(bytes.size() - done, 1u << 30);
        crc = crc32(crc, bytes.data() + done, static_cast<uInt>(chunk));
        done += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

class Writer {
  public:
    template <typename T>
    void put(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        buf_.insert(buf_.end(), p, p + sizeof(T));
    }
    template <typename T>
    void put_array(std::span<const T> values) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
        buf_.insert(buf_.end(), p, p + values.size_bytes());
    }
    void put_raw(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    std::vector<std::uint8_t>& bytes() { return buf_; }

  private:
    std::vector<std::uint8_t> buf_;
};

class Reader {
  public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <typename T>
    T get(const char* field) {
        T v;
        need(sizeof(T), field);
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    template <typename T>
    std::vector<T> get_array(std::size_t n, const char* field) {
        if (n > (bytes_.size() - pos_) / sizeof(T)) {
            throw FormatError(field, "length exceeds remaining payload");
        }
        std::vector<T> out(n);
        std::memcpy(out.data(), bytes_.data() + pos_, n * sizeof(T));
        pos_ += n * sizeof(T);
        return out;
    }
    std::size_t remaining() const { return bytes_.size() - pos_; }

  private:
    void need(std::size_t n, const char* field) const {
        if (bytes_.size() - pos_ < n) {
            throw FormatError(field, "unexpected end of payload");
        }
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

void write_model(Writer& w, const ClassifierModel& model) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(model.kind()));
    if (const auto* c = model.as_centroid()) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(c->dimension()));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(c->n_classes()));
        w.put_array(c->active());
        w.put_array(c->centroids());
    } else {
        const auto* m = model.as_mlp();
        w.put<std::uint32_t>(static_cast<std::uint32_t>(m->dimension()));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(m->hidden()));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(m->n_classes()));
        for (const auto* block : {&m->input_mean(), &m->input_scale(), &m->w1(), &m->b1(), &m->w2(), &m->b2()}) {
            w.put_array(std::span<const double>(*block));
        }
    }
}

ClassifierModel read_model(Reader& r) {
    const auto kind = r.get<std::uint8_t>("model kind");
    if (kind == static_cast<std::uint8_t>(ModelKind::centroid)) {
        const auto dim = r.get<std::uint32_t>("centroid dimension");
        const auto k = r.get<std::uint32_t>("centroid classes");
        auto active = r.get_array<std::uint8_t>(k, "centroid active flags");
        auto centroids = r.get_array<float>(static_cast<std::size_t>(k) * dim, "centroid vectors");
        try {
            return ClassifierModel(CentroidModel(dim, std::move(centroids), std::move(active)));
        } catch (const InvalidInput& e) {
            throw FormatError("centroid model", e.what());
        }
    }
    if (kind == static_cast<std::uint8_t>(ModelKind::mlp)) {
        const auto dim = r.get<std::uint32_t>("mlp dimension");
        const auto hidden = r.get<std::uint32_t>("mlp hidden width");
        const auto k = r.get<std::uint32_t>("mlp classes");
        MlpModel m;
        try {
            m = MlpModel(dim, hidden, k);
        } catch (const InvalidInput& e) {
            throw FormatError("mlp model", e.what());
        }
        for (auto* block : {&m.input_mean(), &m.input_scale(), &m.w1(), &m.b1(), &m.w2(), &m.b2()}) {
            *block = r.get_array<double>(block->size(), "mlp parameters");
        }
        return ClassifierModel(std::move(m));
    }
    throw FormatError("model kind", "unknown value " + std::to_string(kind));
}

void write_node(Writer& w, const Node& node) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(node.pos.depth()));
    w.put_array(node.pos.path());
    w.put<std::uint8_t>(node.is_leaf() ? 0 : 1);
    if (!node.is_leaf()) {
        const auto& inner = node.inner();
        w.put<std::uint32_t>(static_cast<std::uint32_t>(inner.children.size()));
        write_model(w, inner.model);
        for (const auto& child : inner.children) {
            write_node(w, *child);
        }
    }
}

std::unique_ptr<Node> read_node(Reader& r, const NodePos& expected, std::size_t& nodes_left,
                                std::vector<Node*>& leaves) {
    if (nodes_left == 0) {
        throw FormatError("node table", "more nodes than the header declares");
    }
    --nodes_left;
    const auto depth = r.get<std::uint32_t>("node position");
    auto path = r.get_array<std::uint32_t>(depth, "node position");
    if (NodePos(path) != expected) {
        throw FormatError("node position", "stored " + NodePos(path).to_string() + " but found at " + expected.to_string());
    }
    auto node = std::make_unique<Node>();
    node->pos = expected;
    const auto kind = r.get<std::uint8_t>("node kind");
    if (kind == 0) {
        node->body = LeafNode{};
        leaves.push_back(node.get());
        return node;
    }
    if (kind != 1) {
        throw FormatError("node kind", "unknown value " + std::to_string(kind));
    }
    const auto n_children = r.get<std::uint32_t>("child count");
    InnerNode inner{read_model(r), {}};
    if (inner.model.n_classes() != n_children) {
        throw FormatError("child count", "does not match the model's class count");
    }
    for (std::uint32_t c = 0; c < n_children; ++c) {
        inner.children.push_back(read_node(r, expected.child(c), nodes_left, leaves));
    }
    node->body = std::move(inner);
    return node;
}

}  // namespace

std::vector<std::uint8_t> serialize_index(const Index& index) {
    Writer w;
    w.put_raw(kMagic, sizeof(kMagic));
    w.put<std::uint32_t>(kIndexFormatVersion);

    const IndexOptions& opt = index.options();
    const Dataset& store = index.store();
    std::size_t node_count = 0;
    std::vector<const Node*> leaves;
    index.for_each_node([&](const Node& n) {
        ++node_count;
        if (n.is_leaf()) {
            leaves.push_back(&n);
        }
    });
    w.put<std::uint32_t>(static_cast<std::uint32_t>(index.dimension()));
    w.put<std::uint64_t>(node_count);
    w.put<std::uint64_t>(store.size());
    w.put<std::uint64_t>(opt.seed);
    w.put<std::uint64_t>(index.seed_counter());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(opt.max_depth));
    w.put<std::uint8_t>(opt.verify_operators ? 1 : 0);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(opt.model.kind));
    w.put<std::uint64_t>(opt.model.mlp.hidden);
    w.put<std::uint64_t>(opt.model.mlp.epochs);
    w.put<std::uint64_t>(opt.model.mlp.batch_size);
    w.put<double>(opt.model.mlp.learning_rate);
    w.put<double>(opt.model.mlp.momentum);
    w.put<std::uint64_t>(opt.kmeans.max_iterations);

    for (std::size_t r = 0; r < store.size(); ++r) {
        w.put<std::uint32_t>(store.id(r));
        w.put_array(store.row(r));
    }
    write_node(w, index.root());
    for (const Node* leaf : leaves) {
        const auto& objects = leaf->leaf().objects;
        w.put<std::uint64_t>(objects.size());
        w.put_array(std::span<const ObjectId>(objects));
    }
    const std::uint32_t crc = crc_of(w.bytes());
    w.put<std::uint32_t>(crc);
    return std::move(w.bytes());
}

Index deserialize_index(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw FormatError("magic", "not an index file");
    }
    if (bytes.size() < sizeof(kMagic) + 8) {
        throw FormatError("version", "file too short");
    }
    std::uint32_t version;
    std::memcpy(&version, bytes.data() + sizeof(kMagic), 4);
    if (version != kIndexFormatVersion) {
        throw FormatError("version", "unsupported version " + std::to_string(version));
    }
    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, bytes.data() + bytes.size() - 4, 4);
    const auto payload = bytes.first(bytes.size() - 4);
    if (crc_of(payload) != stored_crc) {
        throw FormatError("checksum", "crc32 mismatch (file truncated or corrupted)");
    }

    Reader r(payload.subspan(sizeof(kMagic) + 4));
    const auto dim = r.get<std::uint32_t>("dimension");
    std::size_t node_count = r.get<std::uint64_t>("node count");
    const auto object_count = r.get<std::uint64_t>("object count");
    IndexOptions opt;
    opt.seed = r.get<std::uint64_t>("seed");
    const auto seed_counter = r.get<std::uint64_t>("seed counter");
    opt.max_depth = r.get<std::uint32_t>("max depth");
    opt.verify_operators = r.get<std::uint8_t>("verify flag") != 0;
    const auto kind = r.get<std::uint8_t>("model config");
    if (kind > static_cast<std::uint8_t>(ModelKind::mlp)) {
        throw FormatError("model config", "unknown model kind " + std::to_string(kind));
    }
    opt.model.kind = static_cast<ModelKind>(kind);
    opt.model.mlp.hidden = r.get<std::uint64_t>("model config");
    opt.model.mlp.epochs = r.get<std::uint64_t>("model config");
    opt.model.mlp.batch_size = r.get<std::uint64_t>("model config");
    opt.model.mlp.learning_rate = r.get<double>("model config");
    opt.model.mlp.momentum = r.get<double>("model config");
    opt.kmeans.max_iterations = r.get<std::uint64_t>("model config");
    if (dim == 0) {
        throw FormatError("dimension", "must be positive");
    }

    Dataset store(dim);
    if (object_count > r.remaining() / (4 + 4ull * dim)) {
        throw FormatError("object count", "exceeds the vector table");
    }
    store.reserve(object_count);
    for (std::uint64_t i = 0; i < object_count; ++i) {
        const auto id = r.get<std::uint32_t>("vector table");
        const auto v = r.get_array<float>(dim, "vector table");
        try {
            store.append(id, v);
        } catch (const InvalidInput& e) {
            throw FormatError("vector table", e.what());
        }
    }

    std::vector<Node*> leaves;
    std::size_t nodes_left = node_count;
    auto root = read_node(r, NodePos{}, nodes_left, leaves);
    if (nodes_left != 0) {
        throw FormatError("node count", "header declares more nodes than the table holds");
    }
    for (Node* leaf : leaves) {
        const auto n = r.get<std::uint64_t>("bucket table");
        leaf->leaf().objects = r.get_array<ObjectId>(n, "bucket table");
    }
    if (r.remaining() != 0) {
        throw FormatError("bucket table", "trailing bytes before the checksum");
    }

    Index index(dim, opt);
    index.adopt_store(std::move(store));
    index.replace_root(std::move(root));
    index.set_seed_counter(seed_counter);
    if (auto v = index.check_consistency()) {
        throw FormatError("consistency", std::string(to_string(v->kind)) + " at " + v->pos.to_string() + ": " + v->message);
    }
    return index;
}

void save_index(const Index& index, const std::filesystem::path& path) {
    const auto bytes = serialize_index(index);
    write_file_bytes(path, std::as_bytes(std::span<const std::uint8_t>(bytes)));
}

Index load_index(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return deserialize_index({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()});
}

}  // namespace dlmi
