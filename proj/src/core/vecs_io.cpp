#include "dlmi/core/vecs_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

static_assert(std::endian::native == std::endian::little,
              "vecs I/O assumes a little-endian host");

namespace dlmi {
namespace {

template <typename Payload, typename OnRecord>
void parse_records(std::span<const std::byte> bytes, OnRecord&& on_record) {
    std::size_t offset = 0;
    std::int32_t shared_dim = 0;
    std::vector<Payload> payload;
    while (offset < bytes.size()) {
        if (bytes.size() - offset < 4) {
            throw ParseError("truncated record header", offset);
        }
        std::int32_t dim = 0;
        std::memcpy(&dim, bytes.data() + offset, 4);
        if (dim <= 0) {
            throw ParseError("nonpositive record dimension " + std::to_string(dim), offset);
        }
        if (shared_dim == 0) {
            shared_dim = dim;
        } else if (dim != shared_dim) {
            throw ParseError(
                "record dimension " + std::to_string(dim) + " differs from " +
                    std::to_string(shared_dim),
                offset
            );
        }
        const std::size_t body = static_cast<std::size_t>(dim) * 4;
        if (bytes.size() - offset - 4 < body) {
            throw ParseError("truncated record payload", offset + 4);
        }
        payload.resize(static_cast<std::size_t>(dim));
        std::memcpy(payload.data(), bytes.data() + offset + 4, body);
        on_record(std::span<const Payload>{payload});
        offset += 4 + body;
    }
}

template <typename Payload>
void append_record(std::vector<std::byte>& out, std::span<const Payload> values) {
    const auto dim = static_cast<std::int32_t>(values.size());
    const auto* dim_bytes = reinterpret_cast<const std::byte*>(&dim);
    out.insert(out.end(), dim_bytes, dim_bytes + 4);
    const auto* body = reinterpret_cast<const std::byte*>(values.data());
    out.insert(out.end(), body, body + values.size() * 4);
}

}  // namespace

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::byte> bytes(raw.size());
    std::memcpy(bytes.data(), raw.data(), raw.size());
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

Dataset parse_fvecs(std::span<const std::byte> bytes) {
    Dataset dataset;
    ObjectId next_id = 0;
    parse_records<float>(bytes, [&](std::span<const float> values) {
        dataset.append(next_id++, values);
    });
    return dataset;
}

Dataset read_fvecs(const std::filesystem::path& path) {
    return parse_fvecs(read_file_bytes(path));
}

std::vector<std::byte> serialize_fvecs(const Dataset& dataset) {
    std::vector<std::byte> out;
    out.reserve(dataset.size() * (4 + dataset.dimension() * 4));
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        append_record(out, dataset.row(r));
    }
    return out;
}

void write_fvecs(const std::filesystem::path& path, const Dataset& dataset) {
    write_file_bytes(path, serialize_fvecs(dataset));
}

GroundTruth parse_ivecs(std::span<const std::byte> bytes) {
    GroundTruth truth;
    parse_records<std::int32_t>(bytes, [&](std::span<const std::int32_t> values) {
        truth.k = values.size();
        auto& ids = truth.neighbors.emplace_back();
        ids.reserve(values.size());
        for (std::int32_t v : values) {
            ids.push_back(static_cast<ObjectId>(v));
        }
    });
    return truth;
}

GroundTruth read_ivecs(const std::filesystem::path& path) {
    return parse_ivecs(read_file_bytes(path));
}

std::vector<std::byte> serialize_ivecs(const GroundTruth& truth) {
    std::vector<std::byte> out;
    std::vector<std::int32_t> row;
    for (const auto& ids : truth.neighbors) {
        row.assign(ids.begin(), ids.end());
        append_record(out, std::span<const std::int32_t>{row});
    }
    return out;
}

void write_ivecs(const std::filesystem::path& path, const GroundTruth& truth) {
    write_file_bytes(path, serialize_ivecs(truth));
}

}  // namespace dlmi
