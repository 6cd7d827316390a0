#pragma once

#include "cogspeech/chat.hpp"
#include "cogspeech/common.hpp"

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace cogspeech::acoustics {

struct AudioSignal {
    std::vector<double> samples;  // in [-1, 1]
    int sample_rate = 16000;

    double duration_seconds() const noexcept {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

enum class WavEncoding { Pcm16, Float32 };

/// PCM (8/16/24/32-bit int) or IEEE float WAV, mono or multichannel
/// (channels averaged). Throws DataError for compressed formats.
AudioSignal read_wav(const std::string& path);
AudioSignal parse_wav(std::span<const unsigned char> bytes);
void write_wav(const std::string& path, const AudioSignal& sig, WavEncoding enc = WavEncoding::Pcm16);
std::vector<unsigned char> encode_wav(const AudioSignal& sig, WavEncoding enc = WavEncoding::Pcm16);

/// Concatenates the samples inside the given intervals.
AudioSignal restrict_to(const AudioSignal& sig, const std::vector<chat::Interval>& intervals);

struct FrameConfig {
    double window_ms = 25.0;
    double hop_ms = 10.0;

    std::size_t window_samples(int sr) const;
    std::size_t hop_samples(int sr) const;
    void validate() const;
};

/// Number of full frames that fit in `n` samples.
std::size_t frame_count(std::size_t n, std::size_t win, std::size_t hop);

// --- zero-crossing rate -------------------------------------------------

std::vector<double> frame_zcr(const AudioSignal& sig, const FrameConfig& cfg);
FeatureBlock zcr_stats(const AudioSignal& sig, const FrameConfig& cfg = {});

// --- fundamental frequency ----------------------------------------------

struct PitchConfig {
    double min_hz = 75.0;
    double max_hz = 500.0;
    double voicing_threshold = 0.5;  // normalized cross-correlation peak
    double energy_fraction = 0.02;   // of the max frame RMS
};

/// Per-frame F0 in Hz for voiced frames (unvoiced frames omitted).
std::vector<double> frame_f0(const AudioSignal& sig, const FrameConfig& cfg, const PitchConfig& pitch = {});
FeatureBlock f0_stats(const AudioSignal& sig, const FrameConfig& cfg = {}, const PitchConfig& pitch = {});

// --- MFCC -------------------------------------------------------------

struct MfccConfig {
    std::size_t n_filters = 26;
    std::size_t n_ceps = 14;  // coefficients 1..n_ceps are kept
    double preemphasis = 0.97;
    double low_hz = 0.0;
    double high_hz = 0.0;  // 0 = Nyquist
    double log_floor = 1e-12;
    int delta_width = 2;
};

inline constexpr std::size_t kMfccFeatureCount = 168;

std::size_t fft_size_for(std::size_t window);
/// In-place radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& data);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular mel filterbank: n_filters rows over nfft/2+1 power-spectrum bins.
Matrix mel_filterbank(std::size_t n_filters, std::size_t nfft, int sample_rate, double low_hz, double high_hz);
std::vector<double> mel_filter_centers_hz(std::size_t n_filters, double low_hz, double high_hz);

/// Orthonormal DCT-II of `x` (all coefficients).
std::vector<double> dct_ortho(std::span<const double> x);

/// Pre-emphasis, Hamming window and power spectrum for every full frame.
Matrix power_spectra(const AudioSignal& sig, const FrameConfig& cfg, const MfccConfig& mcfg);
/// Log mel energies per frame (frames x n_filters).
Matrix log_mel_energies(const AudioSignal& sig, const FrameConfig& cfg, const MfccConfig& mcfg);
/// Static cepstra per frame (frames x n_ceps), coefficients 1..n_ceps.
Matrix mfcc_frames(const AudioSignal& sig, const FrameConfig& cfg, const MfccConfig& mcfg = {});
/// Regression deltas over +-width frames with edge replication.
Matrix deltas(const Matrix& frames, int width);

std::vector<std::string> mfcc_feature_names(std::size_t n_ceps = 14);
/// Mean/variance/skewness/kurtosis of 14 static + 14 delta + 14 delta-delta coefficients.
FeatureBlock mfcc_block(const AudioSignal& sig, const FrameConfig& cfg = {}, const MfccConfig& mcfg = {});

// --- pauses and durations ---------------------------------------------

struct PauseConfig {
    double energy_fraction = 0.02;  // VAD threshold as a fraction of max RMS
    double min_pause_s = 0.15;
    double long_pause_s = 0.4;
};

struct SilenceSummary {
    double total_seconds = 0.0;
    double spoken_seconds = 0.0;
    double silent_seconds = 0.0;
    std::vector<double> pauses;  // interior silent runs >= min_pause_s
};

SilenceSummary detect_silences(const AudioSignal& sig, const FrameConfig& cfg, const PauseConfig& pcfg = {});

struct WordCounts {
    int words = 0;
    int fillers = 0;
};

inline constexpr std::size_t kPauseDurationCount = 11;
std::vector<std::string> pause_duration_names();
FeatureBlock pause_and_duration_features(const AudioSignal& sig, const WordCounts& counts, const FrameConfig& cfg = {},
                                         const PauseConfig& pcfg = {});

std::vector<std::string> zcr_names();
std::vector<std::string> f0_names();

}  // namespace cogspeech::acoustics
