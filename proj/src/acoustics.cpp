#include "cogspeech/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>

namespace cogspeech::acoustics {
namespace {

std::uint32_t rd_u32(std::span<const unsigned char> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t rd_u16(std::span<const unsigned char> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

void wr_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void wr_u16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xFF));
    out.push_back(static_cast<unsigned char>(v >> 8));
}

std::vector<double> hamming(std::size_t n) {
    std::vector<double> w(n);
    if (n == 1) {
        w[0] = 1.0;
        return w;
    }
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    return w;
}

double rms(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x * x;
    return std::sqrt(s / static_cast<double>(xs.size()));
}

void push_moments(FeatureBlock& out, const std::vector<std::string>& names, std::size_t& k, std::span<const double> xs) {
    const auto m = compute_moments(xs);
    out.push_back({names[k++], m.mean});
    out.push_back({names[k++], m.variance});
    out.push_back({names[k++], m.skewness});
    out.push_back({names[k++], m.kurtosis});
}

}  // namespace

// --- WAV --------------------------------------------------------------

AudioSignal parse_wav(std::span<const unsigned char> b) {
    if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 || std::memcmp(b.data() + 8, "WAVE", 4) != 0)
        throw DataError("not a RIFF/WAVE file");
    std::size_t pos = 12;
    int format = -1, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    std::span<const unsigned char> data;
    bool have_data = false;
    while (pos + 8 <= b.size()) {
        const std::uint32_t size = rd_u32(b, pos + 4);
        const std::size_t body = pos + 8;
        const std::size_t avail = std::min<std::size_t>(size, b.size() - body);
        if (std::memcmp(b.data() + pos, "fmt ", 4) == 0) {
            if (avail < 16) throw DataError("truncated fmt chunk");
            format = rd_u16(b, body);
            channels = rd_u16(b, body + 2);
            rate = rd_u32(b, body + 4);
            bits = rd_u16(b, body + 14);
            if (format == 0xFFFE) {
                if (avail < 26) throw DataError("truncated extensible fmt chunk");
                format = rd_u16(b, body + 24);
            }
        } else if (std::memcmp(b.data() + pos, "data", 4) == 0) {
            data = b.subspan(body, avail);
            have_data = true;
        }
        pos = body + size + (size & 1u);
    }
    if (format < 0 || !have_data) throw DataError("WAV file lacks fmt or data chunk");
    if (format != 1 && format != 3) throw DataError("unsupported WAV encoding (format tag " + std::to_string(format) + ")");
    if (channels <= 0 || rate == 0) throw DataError("invalid WAV channel count or sample rate");
    if (format == 3 && bits != 32 && bits != 64) throw DataError("unsupported float WAV bit depth");
    if (format == 1 && bits != 8 && bits != 16 && bits != 24 && bits != 32) throw DataError("unsupported PCM bit depth");

    const std::size_t bytes_per = static_cast<std::size_t>(bits) / 8;
    const std::size_t frame_bytes = bytes_per * static_cast<std::size_t>(channels);
    const std::size_t n = data.size() / frame_bytes;
    AudioSignal sig;
    sig.sample_rate = static_cast<int>(rate);
    sig.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
            const std::size_t at = i * frame_bytes + static_cast<std::size_t>(c) * bytes_per;
            double v = 0.0;
            if (format == 3 && bits == 32) {
                float f;
                std::uint32_t u = rd_u32(data, at);
                std::memcpy(&f, &u, 4);
                v = f;
            } else if (format == 3) {
                std::uint64_t u = static_cast<std::uint64_t>(rd_u32(data, at)) | (static_cast<std::uint64_t>(rd_u32(data, at + 4)) << 32);
                std::memcpy(&v, &u, 8);
            } else if (bits == 8) {
                v = (static_cast<double>(data[at]) - 128.0) / 128.0;
            } else if (bits == 16) {
                v = static_cast<std::int16_t>(rd_u16(data, at)) / 32768.0;
            } else if (bits == 24) {
                std::int32_t s = static_cast<std::int32_t>(data[at] | (data[at + 1] << 8) | (data[at + 2] << 16));
                if (s & 0x800000) s -= 0x1000000;
                v = s / 8388608.0;
            } else {
                v = static_cast<std::int32_t>(rd_u32(data, at)) / 2147483648.0;
            }
            acc += v;
        }
        sig.samples[i] = acc / channels;
    }
    for (double x : sig.samples)
        if (!std::isfinite(x)) throw DataError("WAV contains non-finite samples");
    return sig;
}

AudioSignal read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open WAV file " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_wav(bytes);
}

std::vector<unsigned char> encode_wav(const AudioSignal& sig, WavEncoding enc) {
    const std::uint16_t bits = enc == WavEncoding::Pcm16 ? 16 : 32;
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(sig.samples.size() * bits / 8);
    std::vector<unsigned char> out;
    out.reserve(44 + data_bytes);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    wr_u32(out, 36 + data_bytes);
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    wr_u32(out, 16);
    wr_u16(out, enc == WavEncoding::Pcm16 ? 1 : 3);
    wr_u16(out, 1);
    wr_u32(out, static_cast<std::uint32_t>(sig.sample_rate));
    wr_u32(out, static_cast<std::uint32_t>(sig.sample_rate) * bits / 8);
    wr_u16(out, bits / 8);
    wr_u16(out, bits);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    wr_u32(out, data_bytes);
    for (double x : sig.samples) {
        if (enc == WavEncoding::Pcm16) {
            const double q = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
            wr_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
        } else {
            const float f = static_cast<float>(x);
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            wr_u32(out, u);
        }
    }
    return out;
}

void write_wav(const std::string& path, const AudioSignal& sig, WavEncoding enc) {
    const auto bytes = encode_wav(sig, enc);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write WAV file " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

AudioSignal restrict_to(const AudioSignal& sig, const std::vector<chat::Interval>& intervals) {
    AudioSignal out;
    out.sample_rate = sig.sample_rate;
    for (const auto& iv : intervals) {
        const auto a = static_cast<std::size_t>(std::max<std::int64_t>(0, iv.start_ms) * sig.sample_rate / 1000);
        const auto b = static_cast<std::size_t>(std::max<std::int64_t>(0, iv.end_ms) * sig.sample_rate / 1000);
        const auto lo = std::min(a, sig.samples.size());
        const auto hi = std::min(b, sig.samples.size());
        if (hi > lo) out.samples.insert(out.samples.end(), sig.samples.begin() + static_cast<std::ptrdiff_t>(lo),
                                        sig.samples.begin() + static_cast<std::ptrdiff_t>(hi));
    }
    return out;
}

// --- framing ----------------------------------------------------------

std::size_t FrameConfig::window_samples(int sr) const {
    return static_cast<std::size_t>(std::llround(window_ms * sr / 1000.0));
}

std::size_t FrameConfig::hop_samples(int sr) const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(hop_ms * sr / 1000.0)));
}

void FrameConfig::validate() const {
    if (!(hop_ms > 0.0) || window_ms < hop_ms) throw ConfigError("frame config requires window_ms >= hop_ms > 0");
}

std::size_t frame_count(std::size_t n, std::size_t win, std::size_t hop) {
    if (win == 0 || n < win) return 0;
    return 1 + (n - win) / hop;
}

// --- ZCR --------------------------------------------------------------

std::vector<std::string> zcr_names() { return {"zcr_mean", "zcr_variance", "zcr_skewness", "zcr_kurtosis"}; }

std::vector<double> frame_zcr(const AudioSignal& sig, const FrameConfig& cfg) {
    cfg.validate();
    const auto win = cfg.window_samples(sig.sample_rate);
    const auto hop = cfg.hop_samples(sig.sample_rate);
    const auto nf = frame_count(sig.samples.size(), win, hop);
    std::vector<double> out(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        const double* x = sig.samples.data() + f * hop;
        int changes = 0;
        for (std::size_t i = 1; i < win; ++i) changes += (x[i] >= 0.0) != (x[i - 1] >= 0.0);
        out[f] = static_cast<double>(changes) / static_cast<double>(win);
    }
    return out;
}

FeatureBlock zcr_stats(const AudioSignal& sig, const FrameConfig& cfg) {
    const auto z = frame_zcr(sig, cfg);
    const auto names = zcr_names();
    FeatureBlock out;
    if (z.empty()) {
        for (const auto& n : names) out.push_back({n, std::nullopt});
        return out;
    }
    std::size_t k = 0;
    push_moments(out, names, k, z);
    return out;
}

// --- F0 ---------------------------------------------------------------

std::vector<std::string> f0_names() { return {"f0_mean", "f0_min", "f0_max", "f0_median"}; }

std::vector<double> frame_f0(const AudioSignal& sig, const FrameConfig& cfg, const PitchConfig& pitch) {
    cfg.validate();
    const int sr = sig.sample_rate;
    const auto lag_min = static_cast<std::size_t>(std::floor(sr / pitch.max_hz));
    const auto lag_max = static_cast<std::size_t>(std::ceil(sr / pitch.min_hz));
    // The analysis window must hold the longest lag plus a comparison span.
    const auto win = std::max(cfg.window_samples(sr), lag_max + lag_max / 2 + 2);
    const auto hop = cfg.hop_samples(sr);
    const auto nf = frame_count(sig.samples.size(), win, hop);
    if (nf == 0) return {};

    std::vector<double> frame_rms(nf);
    double max_rms = 0.0;
    for (std::size_t f = 0; f < nf; ++f) {
        frame_rms[f] = rms(std::span<const double>(sig.samples.data() + f * hop, win));
        max_rms = std::max(max_rms, frame_rms[f]);
    }
    const double gate = pitch.energy_fraction * max_rms;
    const std::size_t span = win - lag_max - 1;

    std::vector<double> out;
    std::vector<double> x(win), nccf(lag_max + 2, 0.0);
    for (std::size_t f = 0; f < nf; ++f) {
        if (max_rms <= 0.0 || frame_rms[f] < gate) continue;
        const double* src = sig.samples.data() + f * hop;
        // Frames straddling a silence (word edges) are left unvoiced.
        bool steady = true;
        for (std::size_t q = 0; q < 4 && steady; ++q)
            steady = rms(std::span<const double>(src + q * (win / 4), win / 4)) >= gate;
        if (!steady) continue;
        const double mean = mean_of(std::span<const double>(src, win));
        for (std::size_t i = 0; i < win; ++i) x[i] = src[i] - mean;
        double e0 = 0.0;
        for (std::size_t i = 0; i < span; ++i) e0 += x[i] * x[i];
        // Onset frames with a near-silent comparison span give spurious peaks.
        if (e0 <= 0.0 || std::sqrt(e0 / static_cast<double>(span)) < gate) continue;
        double best = 0.0;
        for (std::size_t lag = std::max<std::size_t>(1, lag_min - 1); lag <= lag_max + 1; ++lag) {
            double r = 0.0, el = 0.0;
            for (std::size_t i = 0; i < span; ++i) {
                r += x[i] * x[i + lag];
                el += x[i + lag] * x[i + lag];
            }
            // Lagged spans much weaker than the reference (offsets) are not compared.
            nccf[lag] = el > 0.25 * e0 ? r / std::sqrt(e0 * el) : 0.0;
            if (lag >= lag_min && lag <= lag_max) best = std::max(best, nccf[lag]);
        }
        if (best < pitch.voicing_threshold) continue;
        // Smallest-lag local maximum close to the global best guards against octave errors.
        std::size_t chosen = 0;
        for (std::size_t lag = std::max<std::size_t>(lag_min, 2); lag <= lag_max; ++lag) {
            if (nccf[lag] >= 0.9 * best && nccf[lag] >= nccf[lag - 1] && nccf[lag] >= nccf[lag + 1]) {
                chosen = lag;
                break;
            }
        }
        if (chosen == 0) continue;
        const double a = nccf[chosen - 1], b = nccf[chosen], c = nccf[chosen + 1];
        const double denom = a - 2.0 * b + c;
        const double shift = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
        out.push_back(sr / (static_cast<double>(chosen) + std::clamp(shift, -0.5, 0.5)));
    }
    return out;
}

FeatureBlock f0_stats(const AudioSignal& sig, const FrameConfig& cfg, const PitchConfig& pitch) {
    const auto f0 = frame_f0(sig, cfg, pitch);
    const auto names = f0_names();
    if (f0.empty()) return {{names[0], {}}, {names[1], {}}, {names[2], {}}, {names[3], {}}};
    return {{names[0], mean_of(f0)},
            {names[1], *std::min_element(f0.begin(), f0.end())},
            {names[2], *std::max_element(f0.begin(), f0.end())},
            {names[3], median_of(f0)}};
}

// --- MFCC -------------------------------------------------------------

std::size_t fft_size_for(std::size_t window) {
    std::size_t n = 1;
    while (n < window) n <<= 1;
    return n;
}

void fft(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw DataError("FFT size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_filter_centers_hz(std::size_t n_filters, double low_hz, double high_hz) {
    const double lo = hz_to_mel(low_hz), hi = hz_to_mel(high_hz);
    std::vector<double> centers(n_filters);
    for (std::size_t m = 0; m < n_filters; ++m)
        centers[m] = mel_to_hz(lo + (hi - lo) * static_cast<double>(m + 1) / static_cast<double>(n_filters + 1));
    return centers;
}

Matrix mel_filterbank(std::size_t n_filters, std::size_t nfft, int sample_rate, double low_hz, double high_hz) {
    const std::size_t bins = nfft / 2 + 1;
    const double lo = hz_to_mel(low_hz), hi = hz_to_mel(high_hz);
    std::vector<double> edges(n_filters + 2);
    for (std::size_t m = 0; m < edges.size(); ++m)
        edges[m] = mel_to_hz(lo + (hi - lo) * static_cast<double>(m) / static_cast<double>(n_filters + 1));
    Matrix fb(n_filters, bins);
    for (std::size_t m = 0; m < n_filters; ++m) {
        const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
        for (std::size_t k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
            double w = 0.0;
            if (f > left && f <= center) w = (f - left) / (center - left);
            else if (f > center && f < right) w = (right - f) / (right - center);
            fb(m, k) = w;
        }
    }
    return fb;
}

std::vector<double> dct_ortho(std::span<const double> x) {
    const std::size_t n = x.size();
    // Basis cached per size; rows are output coefficients.
    thread_local std::size_t cached_n = 0;
    thread_local std::vector<double> basis;
    if (cached_n != n) {
        basis.assign(n * n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
            for (std::size_t i = 0; i < n; ++i)
                basis[k * n + i] =
                    scale * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(i) + 1.0) /
                                     (2.0 * static_cast<double>(n)));
        }
        cached_n = n;
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        const double* row = basis.data() + k * n;
        for (std::size_t i = 0; i < n; ++i) s += row[i] * x[i];
        out[k] = s;
    }
    return out;
}

Matrix power_spectra(const AudioSignal& sig, const FrameConfig& cfg, const MfccConfig& mcfg) {
    cfg.validate();
    const auto win = cfg.window_samples(sig.sample_rate);
    const auto hop = cfg.hop_samples(sig.sample_rate);
    const auto nf = frame_count(sig.samples.size(), win, hop);
    const auto nfft = fft_size_for(win);
    const auto bins = nfft / 2 + 1;
    Matrix spec(nf, bins);
    if (nf == 0) return spec;

    std::vector<double> emph(sig.samples.size());
    emph[0] = sig.samples[0];
    for (std::size_t i = 1; i < emph.size(); ++i) emph[i] = sig.samples[i] - mcfg.preemphasis * sig.samples[i - 1];

    const auto w = hamming(win);
    std::vector<std::complex<double>> buf(nfft);
    for (std::size_t f = 0; f < nf; ++f) {
        std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
        for (std::size_t i = 0; i < win; ++i) buf[i] = emph[f * hop + i] * w[i];
        fft(buf);
        for (std::size_t k = 0; k < bins; ++k) spec(f, k) = std::norm(buf[k]);
    }
    return spec;
}

Matrix log_mel_energies(const AudioSignal& sig, const FrameConfig& cfg, const MfccConfig& mcfg) {
    const auto spec = power_spectra(sig, cfg, mcfg);
    const auto nfft = fft_size_for(cfg.window_samples(sig.sample_rate));
    const double high = mcfg.high_hz > 0.0 ? mcfg.high_hz : sig.sample_rate / 2.0;
    const auto fb = mel_filterbank(mcfg.n_filters, nfft, sig.sample_rate, mcfg.low_hz, high);
    Matrix out(spec.rows(), mcfg.n_filters);
    for (std::size_t f = 0; f < spec.rows(); ++f)
        for (std::size_t m = 0; m < mcfg.n_filters; ++m) {
            double e = 0.0;
            for (std::size_t k = 0; k < spec.cols(); ++k) e += fb(m, k) * spec(f, k);
            out(f, m) = std::log(std::max(e, mcfg.log_floor));
        }
    return out;
}

Matrix mfcc_frames(const AudioSignal& sig, const FrameConfig& cfg, const MfccConfig& mcfg) {
    if (mcfg.n_ceps + 1 > mcfg.n_filters) throw ConfigError("n_ceps must be below n_filters");
    const auto logmel = log_mel_energies(sig, cfg, mcfg);
    Matrix out(logmel.rows(), mcfg.n_ceps);
    for (std::size_t f = 0; f < logmel.rows(); ++f) {
        const auto c = dct_ortho(logmel.row(f));
        for (std::size_t j = 0; j < mcfg.n_ceps; ++j) out(f, j) = c[j + 1];
    }
    return out;
}

Matrix deltas(const Matrix& frames, int width) {
    const auto n = static_cast<long>(frames.rows());
    Matrix out(frames.rows(), frames.cols());
    double denom = 0.0;
    for (int k = 1; k <= width; ++k) denom += 2.0 * k * k;
    for (long t = 0; t < n; ++t)
        for (std::size_t j = 0; j < frames.cols(); ++j) {
            double s = 0.0;
            for (int k = 1; k <= width; ++k) {
                const long a = std::min(n - 1, t + k), b = std::max(0L, t - k);
                s += k * (frames(static_cast<std::size_t>(a), j) - frames(static_cast<std::size_t>(b), j));
            }
            out(static_cast<std::size_t>(t), j) = s / denom;
        }
    return out;
}

std::vector<std::string> mfcc_feature_names(std::size_t n_ceps) {
    std::vector<std::string> names;
    for (const char* kind : {"", "delta_", "delta2_"})
        for (std::size_t c = 1; c <= n_ceps; ++c)
            for (const char* stat : {"mean", "variance", "skewness", "kurtosis"})
                names.push_back("mfcc_" + std::string(kind) + std::to_string(c) + "_" + stat);
    return names;
}

FeatureBlock mfcc_block(const AudioSignal& sig, const FrameConfig& cfg, const MfccConfig& mcfg) {
    const auto names = mfcc_feature_names(mcfg.n_ceps);
    FeatureBlock out;
    const auto stat = mfcc_frames(sig, cfg, mcfg);
    if (stat.rows() < 3) {
        for (const auto& n : names) out.push_back({n, std::nullopt});
        return out;
    }
    const auto d1 = deltas(stat, mcfg.delta_width);
    const auto d2 = deltas(d1, mcfg.delta_width);
    std::size_t k = 0;
    for (const Matrix* m : {&stat, &d1, &d2})
        for (std::size_t j = 0; j < m->cols(); ++j) {
            const auto col = m->column(j);
            push_moments(out, names, k, col);
        }
    return out;
}

// --- pauses -----------------------------------------------------------

SilenceSummary detect_silences(const AudioSignal& sig, const FrameConfig& cfg, const PauseConfig& pcfg) {
    cfg.validate();
    SilenceSummary s;
    const std::size_t n = sig.samples.size();
    s.total_seconds = sig.duration_seconds();
    if (n == 0) return s;
    // Non-overlapping hop-length slots; the last slot may be short.
    const auto hop = cfg.hop_samples(sig.sample_rate);
    const std::size_t slots = (n + hop - 1) / hop;
    std::vector<double> level(slots);
    double max_level = 0.0;
    for (std::size_t i = 0; i < slots; ++i) {
        const std::size_t a = i * hop, b = std::min(n, a + hop);
        level[i] = rms(std::span<const double>(sig.samples.data() + a, b - a));
        max_level = std::max(max_level, level[i]);
    }
    const double threshold = pcfg.energy_fraction * max_level;
    auto slot_seconds = [&](std::size_t i) {
        const std::size_t a = i * hop, b = std::min(n, a + hop);
        return static_cast<double>(b - a) / sig.sample_rate;
    };
    std::size_t i = 0;
    while (i < slots) {
        const bool voiced = max_level > 0.0 && level[i] >= threshold;
        std::size_t j = i;
        double dur = 0.0;
        while (j < slots && (max_level > 0.0 && level[j] >= threshold) == voiced) dur += slot_seconds(j++);
        if (voiced) {
            s.spoken_seconds += dur;
        } else {
            s.silent_seconds += dur;
            const bool interior = i > 0 && j < slots;
            if (interior && dur + 1e-9 >= pcfg.min_pause_s) s.pauses.push_back(dur);
        }
        i = j;
    }
    return s;
}

std::vector<std::string> pause_duration_names() {
    return {"pause_total_duration", "pause_mean_duration", "pause_long_count",       "pause_short_count",
            "pause_to_word_ratio",  "filler_count",        "filler_per_word",        "pause_to_speech_duration",
            "pauses_per_minute",    "duration_total_s",    "duration_spoken_s"};
}

FeatureBlock pause_and_duration_features(const AudioSignal& sig, const WordCounts& counts, const FrameConfig& cfg,
                                         const PauseConfig& pcfg) {
    const auto s = detect_silences(sig, cfg, pcfg);
    double total = 0.0, long_count = 0.0, short_count = 0.0;
    for (double p : s.pauses) {
        total += p;
        if (p > pcfg.long_pause_s) long_count += 1;
        else short_count += 1;
    }
    const double n_pauses = static_cast<double>(s.pauses.size());
    const auto names = pause_duration_names();
    return {{names[0], total},
            {names[1], s.pauses.empty() ? 0.0 : total / n_pauses},
            {names[2], long_count},
            {names[3], short_count},
            {names[4], safe_ratio(n_pauses, static_cast<double>(counts.words + counts.fillers))},
            {names[5], static_cast<double>(counts.fillers)},
            {names[6], safe_ratio(counts.fillers, counts.words)},
            {names[7], safe_ratio(total, s.spoken_seconds)},
            {names[8], safe_ratio(n_pauses * 60.0, s.total_seconds)},
            {names[9], s.total_seconds},
            {names[10], s.spoken_seconds}};
}

}  // namespace cogspeech::acoustics
