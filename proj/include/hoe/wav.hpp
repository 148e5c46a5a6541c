// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace hoe {

struct AudioBuffer {
    double sample_rate = 16000.0;
    std::vector<std::vector<double>> channels;

    std::size_t frames() const { return channels.empty() ? 0 : channels.front().size(); }
};

// Reads a PCM 16-bit or IEEE float 32-bit RIFF/WAVE file, mono or
// multichannel. Throws DataError on anything else.
AudioBuffer read_wav(const std::string& path);

// Concatenates mono files into one multichannel buffer. All files must
// share sample rate and length.
AudioBuffer read_wav_channels(const std::vector<std::string>& paths);

// Writes 32-bit float WAV.
void write_wav(const std::string& path, const AudioBuffer& audio);

}  // namespace hoe
