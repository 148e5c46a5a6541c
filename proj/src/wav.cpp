// SPDX-License-Identifier: Apache-2.0
#include "hoe/wav.hpp"

#include "hoe/error.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace hoe {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t le32(const unsigned char* p)
{
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::ofstream& out, std::uint16_t v)
{
    const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
    out.write(b, 2);
}

void put32(std::ofstream& out, std::uint32_t v)
{
    const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                       static_cast<char>((v >> 16) & 0xFF), static_cast<char>(v >> 24)};
    out.write(b, 4);
}

}  // namespace

AudioBuffer read_wav(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open WAV file: " + path);
    }
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw DataError(path + ": not a RIFF/WAVE file");
    }

    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t bits = 0;
    const unsigned char* data = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        const std::uint32_t size = le32(chunk + 4);
        const std::size_t body = pos + 8;
        if (body + size > bytes.size()) {
            // Tolerate a truncated data chunk (streaming writers).
            if (std::memcmp(chunk, "data", 4) != 0) {
                throw DataError(path + ": truncated chunk");
            }
        }
        const std::size_t available = std::min<std::size_t>(size, bytes.size() - body);
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (available < 16) {
                throw DataError(path + ": fmt chunk too short");
            }
            format = le16(chunk + 8);
            channels = le16(chunk + 10);
            rate = le32(chunk + 12);
            bits = le16(chunk + 22);
            if (format == kFormatExtensible && available >= 40) {
                format = le16(chunk + 8 + 24);
            }
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = chunk + 8;
            data_size = available;
        }
        pos = body + size + (size & 1U);
    }
    if (channels == 0 || rate == 0) {
        throw DataError(path + ": missing or invalid fmt chunk");
    }
    if (data == nullptr) {
        throw DataError(path + ": missing data chunk");
    }
    const bool pcm16 = format == kFormatPcm && bits == 16;
    const bool float32 = format == kFormatFloat && bits == 32;
    if (!pcm16 && !float32) {
        throw DataError(path + ": only PCM 16-bit and float 32-bit WAV are supported");
    }

    const std::size_t sample_bytes = bits / 8;
    const std::size_t frames = data_size / (sample_bytes * channels);
    AudioBuffer audio;
    audio.sample_rate = rate;
    audio.channels.assign(channels, std::vector<double>(frames));
    for (std::size_t n = 0; n < frames; ++n) {
        for (std::size_t c = 0; c < channels; ++c) {
            const unsigned char* p = data + (n * channels + c) * sample_bytes;
            if (pcm16) {
                audio.channels[c][n] = static_cast<std::int16_t>(le16(p)) / 32768.0;
            } else {
                const std::uint32_t raw = le32(p);
                float f;
                std::memcpy(&f, &raw, sizeof f);
                audio.channels[c][n] = f;
            }
        }
    }
    return audio;
}

AudioBuffer read_wav_channels(const std::vector<std::string>& paths)
{
    if (paths.empty()) {
        throw DataError("no WAV files given");
    }
    AudioBuffer out;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        AudioBuffer a = read_wav(paths[i]);
        if (i == 0) {
            out.sample_rate = a.sample_rate;
        } else if (a.sample_rate != out.sample_rate || a.frames() != out.frames()) {
            throw DataError(paths[i] + ": sample rate or length differs from " + paths[0]);
        }
        for (auto& ch : a.channels) {
            out.channels.push_back(std::move(ch));
        }
    }
    return out;
}

void write_wav(const std::string& path, const AudioBuffer& audio)
{
    const auto channels = static_cast<std::uint16_t>(audio.channels.size());
    if (channels == 0) {
        throw DataError("write_wav: no channels");
    }
    for (const auto& ch : audio.channels) {
        if (ch.size() != audio.frames()) {
            throw DataError("write_wav: channels differ in length");
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write WAV file: " + path);
    }
    const auto rate = static_cast<std::uint32_t>(audio.sample_rate);
    const std::uint32_t data_size = static_cast<std::uint32_t>(audio.frames() * channels * 4);
    out.write("RIFF", 4);
    put32(out, 36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put32(out, 16);
    put16(out, kFormatFloat);
    put16(out, channels);
    put32(out, rate);
    put32(out, rate * channels * 4);
    put16(out, static_cast<std::uint16_t>(channels * 4));
    put16(out, 32);
    out.write("data", 4);
    put32(out, data_size);
    for (std::size_t n = 0; n < audio.frames(); ++n) {
        for (const auto& ch : audio.channels) {
            const float f = static_cast<float>(ch[n]);
            std::uint32_t raw;
            std::memcpy(&raw, &f, sizeof raw);
            put32(out, raw);
        }
    }
    if (!out) {
        throw DataError("error while writing WAV file: " + path);
    }
}

}  // namespace hoe
