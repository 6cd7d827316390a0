#include "cogspeech/acoustics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace cogspeech;
using namespace cogspeech::acoustics;

namespace {
AudioSignal tone(double hz, double seconds, int sr = 16000, double amp = 0.5) {
    AudioSignal s;
    s.sample_rate = sr;
    const auto n = static_cast<std::size_t>(seconds * sr);
    for (std::size_t i = 0; i < n; ++i) s.samples.push_back(amp * std::sin(2 * std::numbers::pi * hz * i / sr));
    return s;
}

void append(AudioSignal& a, const AudioSignal& b) { a.samples.insert(a.samples.end(), b.samples.begin(), b.samples.end()); }
}  // namespace

TEST_CASE("wav round trip in both encodings") {
    const auto sig = tone(220, 0.1);
    const auto f32 = parse_wav(encode_wav(sig, WavEncoding::Float32));
    REQUIRE(f32.samples.size() == sig.samples.size());
    CHECK(f32.sample_rate == 16000);
    for (std::size_t i = 0; i < sig.samples.size(); ++i) CHECK(f32.samples[i] == doctest::Approx(sig.samples[i]).epsilon(1e-6));
    const auto pcm = parse_wav(encode_wav(sig));
    double worst = 0;
    for (std::size_t i = 0; i < sig.samples.size(); ++i) worst = std::max(worst, std::abs(pcm.samples[i] - sig.samples[i]));
    CHECK(worst < 1.0 / 32767.0);
}

TEST_CASE("truncated wav is a data error") {
    auto bytes = encode_wav(tone(220, 0.01));
    bytes.resize(20);
    CHECK_THROWS_AS(parse_wav(bytes), DataError);
}

TEST_CASE("fft matches a direct DFT") {
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    std::vector<std::complex<double>> x(64);
    for (auto& v : x) v = {nd(rng), nd(rng)};
    auto y = x;
    fft(y);
    for (std::size_t k = 0; k < x.size(); ++k) {
        std::complex<double> s = 0;
        for (std::size_t n = 0; n < x.size(); ++n)
            s += x[n] * std::polar(1.0, -2 * std::numbers::pi * double(k * n) / double(x.size()));
        CHECK(std::abs(s - y[k]) < 1e-10);
    }
}

TEST_CASE("dct matches the quadratic oracle") {
    const std::vector<double> x{1.0, -2.0, 0.5, 3.0, 0.0, 1.5};
    const auto a = dct_ortho(x);
    const auto b = oracle::dct2(x);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("mel scale inverts") {
    for (double hz : {0.0, 100.0, 1000.0, 7999.0}) CHECK(mel_to_hz(hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-12));
    const auto fb = mel_filterbank(26, 512, 16000, 0, 8000);
    CHECK(fb.rows() == 26);
    CHECK(fb.cols() == 257);
}

TEST_CASE("silence detection finds an interior pause") {
    auto sig = tone(200, 1.0);
    append(sig, tone(200, 0.5, 16000, 0.0));
    append(sig, tone(200, 1.0));
    const auto s = detect_silences(sig, FrameConfig{});
    CHECK(s.total_seconds == doctest::Approx(2.5));
    CHECK(s.spoken_seconds + s.silent_seconds == doctest::Approx(s.total_seconds).epsilon(1e-12));
    REQUIRE(s.pauses.size() == 1);
    CHECK(s.pauses[0] == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("f0 of a steady tone") {
    const auto f0 = frame_f0(tone(150, 0.5), FrameConfig{});
    REQUIRE(!f0.empty());
    for (double v : f0) CHECK(v == doctest::Approx(150).epsilon(0.01));
    CHECK(frame_f0(tone(150, 0.5, 16000, 0.0), FrameConfig{}).empty());
}

TEST_CASE("restrict_to keeps only the listed intervals") {
    const auto sig = tone(100, 1.0);
    const auto r = restrict_to(sig, {{0, 250}, {500, 750}});
    CHECK(r.duration_seconds() == doctest::Approx(0.5));
}

TEST_CASE("mfcc block size and gain invariance") {
    const auto sig = tone(300, 0.5);
    auto loud = sig;
    for (auto& v : loud.samples) v *= 1.8;
    const auto a = mfcc_block(sig);
    const auto b = mfcc_block(loud);
    REQUIRE(a.size() == kMfccFeatureCount);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].value && b[i].value) CHECK(*a[i].value == doctest::Approx(*b[i].value).epsilon(1e-6).scale(1.0));
}
