#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "smilecnn/stats.hpp"
#include "smilecnn/tensor.hpp"

namespace smilecnn {

/// One grayscale frame with its smile annotation. The binary label is
/// derived: au12_intensity > 0, except for low-vs-high datasets (see
/// Dataset::label).
struct Sample {
    Tensor image;  // [H, W], values in [0, 1]
    uint8_t au12_intensity = 0;  // 0..5
    bool any_au_set = false;
    std::string video_id;
    uint32_t frame_index = 0;

    bool operator==(const Sample&) const = default;
};

enum class Provenance { Full, Reduced, Low, High, LowVsHigh, Synthetic };

const char* provenance_name(Provenance p);

/// Immutable ordered collection of samples sharing one image shape, with
/// unique (video, frame) pairs. Subset operations return new datasets.
class Dataset {
public:
    Dataset() = default;

    /// Validates invariants: shared image shape, unique (video, frame),
    /// intensity <= 5, intensity > 0 implies any_au_set.
    static Dataset create(std::vector<Sample> samples, Provenance tag);

    size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    const Sample& operator[](size_t i) const { return samples_[i]; }
    const std::vector<Sample>& samples() const { return samples_; }
    Provenance provenance() const { return tag_; }

    size_t image_height() const;
    size_t image_width() const;

    /// Binary class of sample i. Low-vs-high datasets relabel:
    /// class 0 = intensity {1,2}, class 1 = intensity {4,5}.
    int label(size_t i) const;

    static constexpr int kNumClasses = 2;

    bool operator==(const Dataset&) const = default;

private:
    friend Dataset subset_unchecked(const Dataset&, const std::vector<size_t>&,
                                    Provenance);
    std::vector<Sample> samples_;
    Provenance tag_ = Provenance::Full;
};

struct SplitSpec {
    double train_frac = 0.6;
    double val_frac = 0.2;
    double test_frac = 0.2;
    uint64_t seed = 0;
};

struct Splits {
    Dataset train, val, test;
};

/// Seeded shuffle then contiguous cut: floor(0.6 n) / floor(0.2 n) / rest.
/// The three parts are disjoint and their union is the input.
Splits split(const Dataset& data, const SplitSpec& spec);

/// Keeps every sample with any_au_set and floor(keep_fraction * #neutral)
/// neutral samples chosen uniformly without replacement; original order kept.
Dataset reduce_neutral(const Dataset& data, double keep_fraction, Rng& rng);

enum class IntensityBand { Low, High };

/// Low band removes AU12 intensities {3,4,5}; high band removes {1,2,3}.
/// Neutral and AU12-unset samples stay.
Dataset filter_intensity_band(const Dataset& data, IntensityBand band);

/// Keeps only AU12 intensities {1,2,4,5} and relabels: low {1,2} = class 0,
/// high {4,5} = class 1.
Dataset select_low_vs_high(const Dataset& data);

Tensor crop(const Tensor& image, size_t top, size_t left, size_t height,
            size_t width);

/// Bilinear resampling with corner-aligned source coordinates. Output values
/// stay within [min(input), max(input)].
Tensor resize_bilinear(const Tensor& image, size_t out_height,
                       size_t out_width);

// the crop box used for mouth inputs on 285x378 aligned frames
inline constexpr size_t kMouthBoxHeight = 128;
inline constexpr size_t kMouthBoxWidth = 104;

/// Procedural grayscale faces: elliptical head, two eye blobs and a mouth
/// arc whose curvature and thickness grow with the drawn intensity 0..5,
/// plus sigma=0.05 Gaussian pixel noise and a random +-3 px translation.
/// `intensity_histogram` is a probability distribution over intensities.
Dataset synth_generate(size_t n, size_t height, size_t width,
                       const std::array<double, 6>& intensity_histogram,
                       Rng& rng);

// Dataset binary format: "DSETv001" magic, u32 sample count, then per sample:
// tensor, u8 intensity, u8 any_au_set, u16 video-id length + UTF-8 bytes,
// u32 frame index. Round-trips are bitwise lossless; the provenance tag is
// in-memory lineage and is supplied by the caller on load.
void save_dataset(std::ostream& out, const Dataset& data);
Dataset load_dataset(std::istream& in, Provenance tag = Provenance::Full);
void save_dataset_file(const std::string& path, const Dataset& data);
Dataset load_dataset_file(const std::string& path,
                          Provenance tag = Provenance::Full);

/// P5 PGM, maxval 255, for eyeballing generated images.
void write_pgm(std::ostream& out, const Tensor& image);

/// Builds one sample per (video, frame) pair seen in the records, with blank
/// images of the given size. AU12 rows set the intensity; any row with
/// intensity > 0 sets the any-AU flag. This is the ingestion path for count
/// fixtures and for externally supplied annotation tables.
Dataset dataset_from_annotations(const std::vector<AnnotationRecord>& records,
                                 size_t height, size_t width);

}  // namespace smilecnn
