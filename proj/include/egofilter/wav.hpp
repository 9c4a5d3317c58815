#ifndef EGOFILTER_WAV_HPP
#define EGOFILTER_WAV_HPP

#include <string>

#include "egofilter/audio.hpp"

namespace egofilter {

// RIFF WAV, PCM signed 16-bit little-endian, mono. Samples convert to
// amplitudes by division by 32768; writing clamps to [-1, 1).
AudioClip read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioClip& clip);

}  // namespace egofilter

#endif
