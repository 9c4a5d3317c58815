#include "egofilter/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace egofilter {

namespace {

uint32_t rd_u32(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) |
           (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t rd_u16(const unsigned char* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::vector<unsigned char>& out, uint32_t v) {
    out.push_back(v & 0xff);
    out.push_back((v >> 8) & 0xff);
    out.push_back((v >> 16) & 0xff);
    out.push_back((v >> 24) & 0xff);
}

void wr_u16(std::vector<unsigned char>& out, uint16_t v) {
    out.push_back(v & 0xff);
    out.push_back((v >> 8) & 0xff);
}

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw std::runtime_error("wav: " + path + ": " + why);
}

}  // namespace

AudioClip read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(path, "cannot open");
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
        std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
        fail(path, "not a RIFF/WAVE file");
    }

    bool have_fmt = false;
    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const unsigned char* hdr = buf.data() + pos;
        uint32_t chunk_size = rd_u32(hdr + 4);
        size_t body = pos + 8;
        if (body + chunk_size > buf.size()) fail(path, "truncated chunk");
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (chunk_size < 16) fail(path, "fmt chunk too small");
            format = rd_u16(buf.data() + body);
            channels = rd_u16(buf.data() + body + 2);
            rate = rd_u32(buf.data() + body + 4);
            bits = rd_u16(buf.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            if (!have_fmt) fail(path, "data chunk before fmt");
            if (format != 1) fail(path, "not PCM");
            if (channels != 1) fail(path, "not mono");
            if (bits != 16) fail(path, "not 16-bit");
            AudioClip clip;
            clip.sample_rate = static_cast<int>(rate);
            size_t n = chunk_size / 2;
            clip.samples.resize(n);
            for (size_t i = 0; i < n; ++i) {
                int16_t s = static_cast<int16_t>(
                    rd_u16(buf.data() + body + 2 * i));
                clip.samples[i] = static_cast<double>(s) / 32768.0;
            }
            return clip;
        }
        pos = body + chunk_size + (chunk_size & 1);
    }
    fail(path, have_fmt ? "no data chunk" : "no fmt chunk");
}

void write_wav(const std::string& path, const AudioClip& clip) {
    const uint32_t data_bytes = static_cast<uint32_t>(clip.size() * 2);
    std::vector<unsigned char> out;
    out.reserve(44 + data_bytes);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    wr_u32(out, 36 + data_bytes);
    out.insert(out.end(), {'W', 'A', 'V', 'E'});
    out.insert(out.end(), {'f', 'm', 't', ' '});
    wr_u32(out, 16);
    wr_u16(out, 1);  // PCM
    wr_u16(out, 1);  // mono
    wr_u32(out, static_cast<uint32_t>(clip.sample_rate));
    wr_u32(out, static_cast<uint32_t>(clip.sample_rate * 2));  // byte rate
    wr_u16(out, 2);   // block align
    wr_u16(out, 16);  // bits
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    wr_u32(out, data_bytes);
    for (double s : clip.samples) {
        long v = std::lround(s * 32768.0);
        if (v > 32767) v = 32767;
        if (v < -32768) v = -32768;
        wr_u16(out, static_cast<uint16_t>(static_cast<int16_t>(v)));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(path, "cannot open for writing");
    f.write(reinterpret_cast<const char*>(out.data()),
            static_cast<std::streamsize>(out.size()));
    if (!f) fail(path, "write failed");
}

}  // namespace egofilter
