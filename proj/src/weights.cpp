#include "lsmvos/weights.hpp"

#include "lsmvos/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace lsmvos {

namespace {

constexpr char kMagic[4] = {'L', 'S', 'M', 'W'};

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <class T>
T get_le(const std::uint8_t* p) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
    return v;
}

std::vector<std::uint8_t> blob_bytes(std::span<const float> blob) {
    std::vector<std::uint8_t> out;
    out.reserve(blob.size() * 4);
    for (float f : blob) put_le(out, std::bit_cast<std::uint32_t>(f));
    return out;
}

} // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

void WeightsContainer::add(const std::string& name, const Tensor& tensor) {
    if (name.empty()) throw ConfigError("weights: entry name must not be empty");
    if (contains(name)) throw ConfigError("weights: duplicate entry '" + name + "'");
    if (tensor.empty()) throw ShapeError("weights: entry '" + name + "' is empty");
    entries_.push_back({name, tensor.shape(), blob_.size() * sizeof(float)});
    blob_.insert(blob_.end(), tensor.data().begin(), tensor.data().end());
}

bool WeightsContainer::contains(const std::string& name) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const WeightEntry& e) { return e.name == name; });
}

const WeightEntry& WeightsContainer::entry(const std::string& name) const {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const WeightEntry& e) { return e.name == name; });
    if (it == entries_.end()) throw ConfigError("weights: no entry named '" + name + "'");
    return *it;
}

Tensor WeightsContainer::get(const std::string& name) const {
    const WeightEntry& e = entry(name);
    const auto first = static_cast<std::ptrdiff_t>(e.offset / sizeof(float));
    const auto count = static_cast<std::ptrdiff_t>(shape_volume(e.shape));
    return Tensor(e.shape, std::vector<float>(blob_.begin() + first, blob_.begin() + first + count));
}

std::uint64_t WeightsContainer::checksum() const { return fnv1a64(blob_bytes(blob_)); }

void save_weights(const WeightsContainer& weights, const std::filesystem::path& path) {
    nlohmann::json manifest;
    manifest["entries"] = nlohmann::json::array();
    for (const auto& e : weights.entries())
        manifest["entries"].push_back({{"name", e.name}, {"shape", e.shape}, {"offset", e.offset}});
    const std::string text = manifest.dump();
    const std::vector<std::uint8_t> blob = blob_bytes(weights.blob());

    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put_le<std::uint32_t>(out, WeightsContainer::kVersion);
    put_le<std::uint64_t>(out, blob.size());
    put_le<std::uint64_t>(out, fnv1a64(blob));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
    out.insert(out.end(), text.begin(), text.end());
    out.insert(out.end(), blob.begin(), blob.end());

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(path.string() + ": cannot open for writing");
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError(path.string() + ": write failed");
}

WeightsContainer load_weights(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(path.string() + ": cannot open weights file");
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const auto fail = [&](const std::string& why) { return IoError(path.string() + ": " + why); };

    constexpr std::size_t kHeader = 4 + 4 + 8 + 8 + 4;
    if (bytes.size() < kHeader) throw fail("truncated header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw fail("bad magic, not an LSMW weights file");
    const auto version = get_le<std::uint32_t>(bytes.data() + 4);
    if (version != WeightsContainer::kVersion) throw fail("unsupported format version " + std::to_string(version));
    const auto blob_len = get_le<std::uint64_t>(bytes.data() + 8);
    const auto checksum = get_le<std::uint64_t>(bytes.data() + 16);
    const auto manifest_len = get_le<std::uint32_t>(bytes.data() + 24);
    if (bytes.size() - kHeader < manifest_len) throw fail("truncated manifest");
    const std::size_t blob_at = kHeader + manifest_len;
    if (bytes.size() - blob_at != blob_len) throw fail("checksum error: blob length does not match header");
    if (blob_len % 4 != 0) throw fail("blob length is not a multiple of 4");
    const std::span<const std::uint8_t> blob(bytes.data() + blob_at, blob_len);
    if (fnv1a64(blob) != checksum) throw fail("checksum error: blob does not match header checksum");

    WeightsContainer w;
    w.blob_.resize(blob_len / 4);
    for (std::size_t i = 0; i < w.blob_.size(); ++i)
        w.blob_[i] = std::bit_cast<float>(get_le<std::uint32_t>(blob.data() + i * 4));

    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(bytes.begin() + kHeader, bytes.begin() + static_cast<std::ptrdiff_t>(blob_at));
        std::uint64_t next = 0;
        for (const auto& e : manifest.at("entries")) {
            WeightEntry entry{e.at("name").get<std::string>(), e.at("shape").get<Shape>(),
                              e.at("offset").get<std::uint64_t>()};
            if (entry.offset < next || entry.offset % 4 != 0) throw fail("manifest offsets overlap or are unaligned");
            next = entry.offset + shape_volume(entry.shape) * 4;
            if (next > blob_len) throw fail("manifest entry '" + entry.name + "' runs past the blob");
            w.entries_.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw fail(std::string("malformed manifest: ") + ex.what());
    }
    return w;
}

} // namespace lsmvos
