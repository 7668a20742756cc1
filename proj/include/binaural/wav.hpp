// wav.hpp
// RIFF/WAVE reader and writer: integer PCM 16/24-bit and float32,
// multichannel, samples normalized to [-1, 1) doubles.

#ifndef BINAURAL_WAV_HPP
#define BINAURAL_WAV_HPP

#include <string>

#include "binaural/types.hpp"

namespace binaural {

enum class WavFormat { Pcm16, Pcm24, Float32 };

struct WavData {
  int sample_rate_hz = 0;
  WavFormat format = WavFormat::Float32;
  RMatrix samples;  // channels x frames
};

WavData wav_read(const std::string& path);

void wav_write(const std::string& path, const RMatrix& samples, int sample_rate_hz,
               WavFormat format = WavFormat::Float32);

}  // namespace binaural

#endif
