#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <zlib.h>

#include "egofilter/egonet.hpp"
#include "json.hpp"

namespace egofilter {

namespace {

constexpr uint32_t kVersion = 1;

void push_u32(std::vector<unsigned char>& buf, uint32_t v) {
    buf.push_back(v & 0xff);
    buf.push_back((v >> 8) & 0xff);
    buf.push_back((v >> 16) & 0xff);
    buf.push_back((v >> 24) & 0xff);
}

uint32_t read_u32(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) |
           (static_cast<uint32_t>(p[3]) << 24);
}

[[noreturn]] void fail(const std::string& why) {
    throw std::runtime_error("egonet weights file: " + why);
}

nlohmann::json config_json(const EgoNetConfig& c) {
    return nlohmann::json{
        {"channels", c.channels},
        {"kernel", c.kernel},
        {"dilations", c.dilations},
        {"convs_share_weights_across_blocks", c.convs_share_weights_across_blocks},
        {"compression_exponent", c.compression_exponent},
        {"magnitude_scale", c.magnitude_scale}};
}

EgoNetConfig config_from_json(const nlohmann::json& j) {
    EgoNetConfig c;
    c.channels = j.at("channels").get<int>();
    c.kernel = j.at("kernel").get<int>();
    c.dilations = j.at("dilations").get<std::vector<int>>();
    c.convs_share_weights_across_blocks =
        j.at("convs_share_weights_across_blocks").get<bool>();
    c.compression_exponent = j.at("compression_exponent").get<double>();
    c.magnitude_scale = j.at("magnitude_scale").get<double>();
    return c;
}

}  // namespace

void save_weights(const EgoNetWeights& weights, const std::string& path) {
    validate(weights.config);
    nlohmann::json manifest = nlohmann::json::array();
    for (const auto& t : weights.tensors) {
        manifest.push_back({{"name", t.name}, {"shape", t.shape}});
    }
    const std::string json = nlohmann::json{{"config", config_json(weights.config)},
                                            {"tensors", manifest}}
                                 .dump();

    std::vector<unsigned char> payload;
    push_u32(payload, kVersion);
    push_u32(payload, static_cast<uint32_t>(json.size()));
    payload.insert(payload.end(), json.begin(), json.end());
    for (const auto& t : weights.tensors) {
        const size_t at = payload.size();
        payload.resize(at + t.data.size() * 4);
        std::memcpy(payload.data() + at, t.data.data(), t.data.size() * 4);
    }
    const uint32_t crc = static_cast<uint32_t>(
        crc32(0L, payload.data(), static_cast<uInt>(payload.size())));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail("cannot open " + path + " for writing");
    f.write("EGOF", 4);
    f.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
    std::vector<unsigned char> tail;
    push_u32(tail, crc);
    f.write(reinterpret_cast<const char*>(tail.data()), 4);
    if (!f) fail("write failed: " + path);
}

EgoNetWeights load_weights(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("cannot open " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 4 || std::memcmp(buf.data(), "EGOF", 4) != 0) {
        fail("bad magic");
    }
    if (buf.size() < 16) fail("truncated header");
    const uint32_t version = read_u32(buf.data() + 4);
    if (version != kVersion) {
        fail("unsupported version " + std::to_string(version));
    }
    const uint32_t json_len = read_u32(buf.data() + 8);
    if (buf.size() < 12 + static_cast<size_t>(json_len)) fail("truncated config block");

    nlohmann::json root;
    try {
        root = nlohmann::json::parse(buf.begin() + 12, buf.begin() + 12 + json_len);
    } catch (const nlohmann::json::exception& e) {
        fail(std::string("corrupt config block: ") + e.what());
    }

    EgoNetWeights w;
    try {
        w.config = config_from_json(root.at("config"));
    } catch (const nlohmann::json::exception& e) {
        fail(std::string("corrupt config block: ") + e.what());
    }
    validate(w.config);

    // Cross-check the manifest against the config-derived tensor list.
    const EgoNetWeights expect = init_weights(w.config, 0);
    const auto& manifest = root.at("tensors");
    if (!manifest.is_array() || manifest.size() != expect.tensors.size()) {
        fail("manifest does not match config");
    }
    size_t data_bytes = 0;
    for (size_t i = 0; i < manifest.size(); ++i) {
        Tensor t;
        t.name = manifest[i].at("name").get<std::string>();
        t.shape = manifest[i].at("shape").get<std::vector<int>>();
        if (t.name != expect.tensors[i].name || t.shape != expect.tensors[i].shape) {
            fail("tensor shape mismatch for " + expect.tensors[i].name);
        }
        t.data.resize(expect.tensors[i].data.size());
        data_bytes += t.data.size() * 4;
        w.tensors.push_back(std::move(t));
    }

    const size_t expected_size = 12 + json_len + data_bytes + 4;
    if (buf.size() < expected_size) fail("truncated tensor data");
    if (buf.size() > expected_size) fail("unexpected trailing bytes");

    const uint32_t stored_crc = read_u32(buf.data() + buf.size() - 4);
    const uint32_t crc = static_cast<uint32_t>(crc32(
        0L, buf.data() + 4, static_cast<uInt>(buf.size() - 8)));
    if (crc != stored_crc) fail("crc mismatch");

    size_t at = 12 + json_len;
    for (auto& t : w.tensors) {
        std::memcpy(t.data.data(), buf.data() + at, t.data.size() * 4);
        at += t.data.size() * 4;
    }
    return w;
}

}  // namespace egofilter
