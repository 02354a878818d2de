#include "pz/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace pz {

namespace {

std::uint32_t rd_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) |
           static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 |
           static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t rd_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void wr_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void wr_u16(std::ostream& out, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v),
                                static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

WavData read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("read_wav: cannot open " + path);
    std::vector<unsigned char> buf(
        (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
        std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
        throw FormatError("read_wav: not a RIFF/WAVE file: " + path);

    bool have_fmt = false;
    std::uint16_t audio_format = 0, channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    std::size_t data_offset = 0, data_size = 0;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const std::uint32_t csize = rd_u32(buf.data() + pos + 4);
        if (pos + 8 + csize > buf.size())
            throw FormatError("read_wav: truncated chunk in " + path);
        const unsigned char* payload = buf.data() + pos + 8;
        if (std::memcmp(buf.data() + pos, "fmt ", 4) == 0) {
            if (csize < 16) throw FormatError("read_wav: malformed fmt chunk");
            audio_format = rd_u16(payload);
            channels = rd_u16(payload + 2);
            sample_rate = rd_u32(payload + 4);
            bits = rd_u16(payload + 14);
            have_fmt = true;
        } else if (std::memcmp(buf.data() + pos, "data", 4) == 0) {
            data_offset = pos + 8;
            data_size = csize;
            have_data = true;
        }
        pos += 8 + csize + (csize & 1);
    }

    if (!have_fmt || !have_data)
        throw FormatError("read_wav: missing fmt or data chunk in " + path);
    if (audio_format != 1)
        throw FormatError("read_wav: unsupported encoding (PCM only)");
    if (channels != 1)
        throw FormatError("read_wav: expected mono, got " +
                          std::to_string(channels) + " channels");
    if (bits != 16)
        throw FormatError("read_wav: expected 16-bit samples, got " +
                          std::to_string(bits));
    if (data_size % 2 != 0)
        throw FormatError("read_wav: truncated sample data in " + path);

    WavData wav;
    wav.sample_rate = static_cast<double>(sample_rate);
    const std::size_t n = data_size / 2;
    wav.samples.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = static_cast<std::int16_t>(
            rd_u16(buf.data() + data_offset + 2 * i));
        wav.samples[static_cast<Eigen::Index>(i)] = v / 32768.0;
    }
    return wav;
}

void write_wav(const std::string& path, const Vec& samples,
               double sample_rate) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("write_wav: cannot open " + path);

    const auto n = static_cast<std::uint32_t>(samples.size());
    const std::uint32_t data_size = 2 * n;
    const auto rate = static_cast<std::uint32_t>(std::lround(sample_rate));

    out.write("RIFF", 4);
    wr_u32(out, 36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    wr_u32(out, 16);
    wr_u16(out, 1);
    wr_u16(out, 1);
    wr_u32(out, rate);
    wr_u32(out, rate * 2);
    wr_u16(out, 2);
    wr_u16(out, 16);
    out.write("data", 4);
    wr_u32(out, data_size);
    for (Eigen::Index i = 0; i < samples.size(); ++i) {
        long q = std::lround(samples[i] * 32768.0);
        if (q < -32768) q = -32768;
        if (q > 32767) q = 32767;
        wr_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    if (!out) throw FormatError("write_wav: write failed for " + path);
}

std::vector<Frame> frame_stream(const WavData& data, Eigen::Index n,
                                Eigen::Index hop) {
    if (n < 1 || hop < 1)
        throw InvalidInput("frame_stream: frame length and hop must be >= 1");
    std::vector<Frame> frames;
    for (Eigen::Index start = 0; start + n <= data.samples.size();
         start += hop)
        frames.push_back(Frame{data.samples.segment(start, n),
                               data.sample_rate});
    return frames;
}

std::vector<Frame> read_wav_frames(const std::string& path, Eigen::Index n,
                                   Eigen::Index hop) {
    return frame_stream(read_wav(path), n, hop);
}

}  // namespace pz
