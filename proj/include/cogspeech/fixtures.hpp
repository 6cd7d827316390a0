#pragma once

#include "cogspeech/acoustics.hpp"
#include "cogspeech/featureset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cogspeech::fixtures {

/// One synthetic picture-description session.
struct Sample {
    std::string id;
    std::string chat;   // CHAT text with time bullets
    std::string trees;  // one bracketed tree per participant utterance
    acoustics::AudioSignal audio;
    int label = 0;
    int mmse = 30;
};

struct CorpusOptions {
    std::size_t n_ad = 6;
    std::size_t n_nonad = 6;
    std::size_t utterances = 8;
    std::uint64_t seed = 7;
    int sample_rate = 16000;
};

std::vector<Sample> make_samples(const CorpusOptions& opt = {});

/// Every word the sample generator can emit (lowercase, no fillers or nonwords).
std::vector<std::string> vocabulary();

struct CorpusLayout {
    std::string corpus_dir;
    std::string resources_dir;
    std::string config_path;
    std::vector<std::string> ids;
};

/// Writes `<out>/corpus/{id}.cha|.trees|.wav`, `<out>/corpus/labels.csv` and a
/// resources directory (norms, dictionary, five embedding spaces, config.json).
CorpusLayout write_corpus(const std::string& out_dir, const CorpusOptions& opt = {});

/// Balanced two-class matrix: the first `informative` columns shift by
/// +/-`shift` with the class, the remaining columns are N(0, 1) noise.
features::Dataset discriminability_dataset(std::size_t n_per_class = 50, std::size_t informative = 10,
                                           std::size_t noise = 499, double shift = 0.75, std::uint64_t seed = 11);

/// Like discriminability_dataset, with planted columns spread over the matrix
/// (every `stride`-th column) and an MMSE target tied to the class.
features::Dataset planted_dataset(std::size_t n_per_class = 40, std::size_t planted = 13, std::size_t total = 509,
                                  double shift = 1.25, std::uint64_t seed = 5);
/// Columns holding the planted signal in planted_dataset.
std::vector<std::size_t> planted_columns(std::size_t planted = 13, std::size_t total = 509);

/// MMSE = 24 + X w + noise, clipped to [0, 30]; all labels absent.
features::Dataset regression_dataset(std::size_t n = 60, std::size_t d = 20, std::size_t informative = 5,
                                     double noise_sd = 0.5, std::uint64_t seed = 3);

/// Two Gaussian blobs in `d` dimensions whose centers are `separation` apart.
features::Dataset blobs_dataset(std::size_t n_per_blob = 50, std::size_t d = 10, double separation = 20.0,
                                std::uint64_t seed = 1);

}  // namespace cogspeech::fixtures
