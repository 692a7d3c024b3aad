#include "smilecnn/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "smilecnn/errors.hpp"

namespace smilecnn {

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Full: return "full";
        case Provenance::Reduced: return "reduced";
        case Provenance::Low: return "low";
        case Provenance::High: return "high";
        case Provenance::LowVsHigh: return "low_vs_high";
        case Provenance::Synthetic: return "synthetic";
    }
    return "?";
}

Dataset Dataset::create(std::vector<Sample> samples, Provenance tag) {
    if (!samples.empty()) {
        const auto& shape = samples.front().image.shape();
        std::vector<std::pair<const std::string*, uint32_t>> keys;
        keys.reserve(samples.size());
        for (const Sample& s : samples) {
            if (s.image.shape() != shape)
                throw std::invalid_argument("dataset: images must share one shape");
            if (s.image.rank() != 2)
                throw std::invalid_argument("dataset: images must be [H, W]");
            if (s.au12_intensity > 5)
                throw std::invalid_argument("dataset: intensity must be 0..5");
            if (s.au12_intensity > 0 && !s.any_au_set)
                throw std::invalid_argument(
                    "dataset: au12 set implies the any-AU flag");
            keys.emplace_back(&s.video_id, s.frame_index);
        }
        std::sort(keys.begin(), keys.end(),
                  [](const auto& a, const auto& b) {
                      const int c = a.first->compare(*b.first);
                      return c != 0 ? c < 0 : a.second < b.second;
                  });
        for (size_t i = 1; i < keys.size(); ++i)
            if (*keys[i].first == *keys[i - 1].first &&
                keys[i].second == keys[i - 1].second)
                throw std::invalid_argument(
                    "dataset: duplicate (video, frame) pair " + *keys[i].first +
                    "/" + std::to_string(keys[i].second));
    }
    Dataset d;
    d.samples_ = std::move(samples);
    d.tag_ = tag;
    return d;
}

size_t Dataset::image_height() const {
    return samples_.empty() ? 0 : samples_.front().image.dim(0);
}

size_t Dataset::image_width() const {
    return samples_.empty() ? 0 : samples_.front().image.dim(1);
}

int Dataset::label(size_t i) const {
    const uint8_t v = samples_[i].au12_intensity;
    if (tag_ == Provenance::LowVsHigh) return v >= 4 ? 1 : 0;
    return v > 0 ? 1 : 0;
}

// subsets of a valid dataset keep every invariant, so skip revalidation
Dataset subset_unchecked(const Dataset& src, const std::vector<size_t>& indices,
                         Provenance tag) {
    Dataset d;
    d.samples_.reserve(indices.size());
    for (size_t i : indices) d.samples_.push_back(src[i]);
    d.tag_ = tag;
    return d;
}

Splits split(const Dataset& data, const SplitSpec& spec) {
    if (data.size() < 5)
        throw std::invalid_argument("split: dataset must have at least 5 samples");
    if (std::abs(spec.train_frac + spec.val_frac + spec.test_frac - 1.0) > 1e-9)
        throw std::invalid_argument("split: fractions must sum to 1");
    const size_t n = data.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(spec.seed);
    rng.shuffle(order);
    const size_t n_train = size_t(std::floor(spec.train_frac * double(n)));
    const size_t n_val = size_t(std::floor(spec.val_frac * double(n)));
    Splits out;
    out.train = subset_unchecked(
        data, {order.begin(), order.begin() + long(n_train)}, data.provenance());
    out.val = subset_unchecked(
        data, {order.begin() + long(n_train), order.begin() + long(n_train + n_val)},
        data.provenance());
    out.test = subset_unchecked(
        data, {order.begin() + long(n_train + n_val), order.end()},
        data.provenance());
    return out;
}

Dataset reduce_neutral(const Dataset& data, double keep_fraction, Rng& rng) {
    if (!(keep_fraction > 0.0) || keep_fraction > 1.0)
        throw std::invalid_argument("reduce_neutral: keep_fraction must be in (0, 1]");
    std::vector<size_t> neutral;
    for (size_t i = 0; i < data.size(); ++i)
        if (!data[i].any_au_set) neutral.push_back(i);
    const size_t keep =
        size_t(std::floor(keep_fraction * double(neutral.size())));
    rng.shuffle(neutral);
    std::vector<bool> kept_neutral(data.size(), false);
    for (size_t k = 0; k < keep; ++k) kept_neutral[neutral[k]] = true;
    std::vector<size_t> indices;
    for (size_t i = 0; i < data.size(); ++i)
        if (data[i].any_au_set || kept_neutral[i]) indices.push_back(i);
    const Provenance tag = data.provenance() == Provenance::Full
                               ? Provenance::Reduced
                               : data.provenance();
    return subset_unchecked(data, indices, tag);
}

Dataset filter_intensity_band(const Dataset& data, IntensityBand band) {
    std::vector<size_t> indices;
    for (size_t i = 0; i < data.size(); ++i) {
        const uint8_t v = data[i].au12_intensity;
        const bool drop = band == IntensityBand::Low ? (v >= 3) : (v >= 1 && v <= 3);
        if (!drop) indices.push_back(i);
    }
    return subset_unchecked(
        data, indices,
        band == IntensityBand::Low ? Provenance::Low : Provenance::High);
}

Dataset select_low_vs_high(const Dataset& data) {
    std::vector<size_t> indices;
    for (size_t i = 0; i < data.size(); ++i) {
        const uint8_t v = data[i].au12_intensity;
        if (v == 1 || v == 2 || v == 4 || v == 5) indices.push_back(i);
    }
    if (indices.empty())
        throw std::invalid_argument("select_low_vs_high: no smile frames in dataset");
    return subset_unchecked(data, indices, Provenance::LowVsHigh);
}

Tensor crop(const Tensor& image, size_t top, size_t left, size_t height,
            size_t width) {
    if (image.rank() != 2)
        throw std::invalid_argument("crop: image must be [H, W]");
    if (height < 1 || width < 1 || top + height > image.dim(0) ||
        left + width > image.dim(1))
        throw std::invalid_argument("crop: box out of bounds");
    Tensor out = Tensor::zeros({height, width});
    for (size_t r = 0; r < height; ++r)
        std::copy(image.data() + (top + r) * image.dim(1) + left,
                  image.data() + (top + r) * image.dim(1) + left + width,
                  out.data() + r * width);
    return out;
}

Tensor resize_bilinear(const Tensor& image, size_t out_height,
                       size_t out_width) {
    if (image.rank() != 2)
        throw std::invalid_argument("resize_bilinear: image must be [H, W]");
    if (out_height < 1 || out_width < 1)
        throw std::invalid_argument("resize_bilinear: output dims must be >= 1");
    const size_t h = image.dim(0), w = image.dim(1);
    Tensor out = Tensor::zeros({out_height, out_width});
    // corner-aligned: source = i * (in-1) / (out-1)
    const double sy =
        out_height > 1 ? double(h - 1) / double(out_height - 1) : 0.0;
    const double sx = out_width > 1 ? double(w - 1) / double(out_width - 1) : 0.0;
    for (size_t i = 0; i < out_height; ++i) {
        const double fy = double(i) * sy;
        const size_t y0 = std::min(size_t(fy), h - 1);
        const size_t y1 = std::min(y0 + 1, h - 1);
        const double wy = fy - double(y0);
        for (size_t j = 0; j < out_width; ++j) {
            const double fx = double(j) * sx;
            const size_t x0 = std::min(size_t(fx), w - 1);
            const size_t x1 = std::min(x0 + 1, w - 1);
            const double wx = fx - double(x0);
            const double top =
                image.at(y0, x0) * (1.0 - wx) + image.at(y0, x1) * wx;
            const double bot =
                image.at(y1, x0) * (1.0 - wx) + image.at(y1, x1) * wx;
            out.at(i, j) = top * (1.0 - wy) + bot * wy;
        }
    }
    return out;
}

// ---- synthetic faces ----

namespace {

void fill_ellipse(Tensor& img, double cy, double cx, double ry, double rx,
                  double value) {
    const size_t h = img.dim(0), w = img.dim(1);
    for (size_t r = 0; r < h; ++r) {
        for (size_t c = 0; c < w; ++c) {
            const double dy = (double(r) - cy) / ry;
            const double dx = (double(c) - cx) / rx;
            if (dy * dy + dx * dx <= 1.0) img.at(r, c) = value;
        }
    }
}

void put_pixel(Tensor& img, long r, long c, double value) {
    if (r < 0 || c < 0 || size_t(r) >= img.dim(0) || size_t(c) >= img.dim(1))
        return;
    img.at(size_t(r), size_t(c)) = value;
}

// Head, eyes and a mouth arc. Curvature, thickness and span of the arc all
// grow with intensity so the mouth region gets strictly brighter per level.
Tensor render_face(size_t h, size_t w, int intensity, long dy, long dx) {
    Tensor img = Tensor::zeros({h, w});
    const double cy = double(h) / 2.0 + double(dy);
    const double cx = double(w) / 2.0 + double(dx);
    fill_ellipse(img, cy, cx, 0.42 * double(h), 0.40 * double(w), 0.35);
    const double eye_r = std::max(1.0, 0.045 * double(h));
    fill_ellipse(img, cy - 0.18 * double(h), cx - 0.16 * double(w), eye_r,
                 eye_r, 0.75);
    fill_ellipse(img, cy - 0.18 * double(h), cx + 0.16 * double(w), eye_r,
                 eye_r, 0.75);

    const double mouth_y = cy + 0.22 * double(h);
    const long half_span =
        std::lround(double(w) * (0.16 + 0.016 * double(intensity)));
    const double curl = 0.12 * double(h) * double(intensity) / 5.0;
    const long thickness = 1 + intensity;
    for (long u = -half_span; u <= half_span; ++u) {
        const double t = double(u) / double(half_span);
        // corners curl upward with intensity
        const long row0 = std::lround(mouth_y - curl * t * t);
        for (long k = 0; k < thickness; ++k)
            put_pixel(img, row0 + k, std::lround(cx) + u, 0.95);
    }
    return img;
}

}  // namespace

Dataset synth_generate(size_t n, size_t height, size_t width,
                       const std::array<double, 6>& intensity_histogram,
                       Rng& rng) {
    if (n < 1) throw std::invalid_argument("synth_generate: n must be >= 1");
    double sum = 0.0;
    for (double p : intensity_histogram) {
        if (p < 0.0)
            throw std::invalid_argument("synth_generate: negative histogram mass");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("synth_generate: histogram must sum to 1");
    std::vector<Sample> samples;
    samples.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        const double u = rng.next_double();
        int intensity = 5;
        double acc = 0.0;
        for (int k = 0; k < 6; ++k) {
            acc += intensity_histogram[size_t(k)];
            if (u < acc) {
                intensity = k;
                break;
            }
        }
        const long dy = long(rng.below(7)) - 3;
        const long dx = long(rng.below(7)) - 3;
        Tensor img = render_face(height, width, intensity, dy, dx);
        for (size_t p = 0; p < img.size(); ++p)
            img[p] = std::clamp(img[p] + rng.normal(0.0, 0.05), 0.0, 1.0);
        Sample s;
        s.image = std::move(img);
        s.au12_intensity = uint8_t(intensity);
        s.any_au_set = intensity > 0;
        s.video_id = "synthetic";
        s.frame_index = uint32_t(i);
        samples.push_back(std::move(s));
    }
    return Dataset::create(std::move(samples), Provenance::Synthetic);
}

// ---- persistence ----

static constexpr char kDatasetMagic[8] = {'D', 'S', 'E', 'T', 'v', '0', '0', '1'};

void save_dataset(std::ostream& out, const Dataset& data) {
    out.write(kDatasetMagic, 8);
    write_u32_le(out, uint32_t(data.size()));
    for (size_t i = 0; i < data.size(); ++i) {
        const Sample& s = data[i];
        write_tensor(out, s.image);
        out.put(char(s.au12_intensity));
        out.put(char(s.any_au_set ? 1 : 0));
        if (s.video_id.size() > 0xFFFF)
            throw std::invalid_argument("save_dataset: video id too long");
        const uint16_t len = uint16_t(s.video_id.size());
        out.put(char(len & 0xFF));
        out.put(char((len >> 8) & 0xFF));
        out.write(s.video_id.data(), long(len));
        write_u32_le(out, s.frame_index);
    }
    if (!out) throw ParseError("save_dataset: write failure");
}

Dataset load_dataset(std::istream& in, Provenance tag) {
    char magic[8];
    if (!in.read(magic, 8))
        throw ParseError("dataset: truncated header at byte offset 0");
    if (std::memcmp(magic, kDatasetMagic, 8) != 0)
        throw ParseError("dataset: bad magic at byte offset 0");
    const uint32_t count = read_u32_le(in);
    std::vector<Sample> samples;
    samples.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        Sample s;
        try {
            s.image = read_tensor(in);
        } catch (const std::exception& e) {
            throw ParseError("dataset: sample " + std::to_string(i) + ": " +
                             e.what());
        }
        const int intensity = in.get();
        const int flag = in.get();
        int len_lo = in.get(), len_hi = in.get();
        if (intensity < 0 || flag < 0 || len_lo < 0 || len_hi < 0)
            throw ParseError("dataset: truncated sample " + std::to_string(i) +
                             " at byte offset " +
                             std::to_string(static_cast<long long>(in.tellg())));
        s.au12_intensity = uint8_t(intensity);
        s.any_au_set = flag != 0;
        const size_t len = size_t(len_lo) | (size_t(len_hi) << 8);
        s.video_id.resize(len);
        if (len > 0 && !in.read(s.video_id.data(), long(len)))
            throw ParseError("dataset: truncated video id in sample " +
                             std::to_string(i));
        s.frame_index = read_u32_le(in);
        samples.push_back(std::move(s));
    }
    return Dataset::create(std::move(samples), tag);
}

void save_dataset_file(const std::string& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    save_dataset(out, data);
}

Dataset load_dataset_file(const std::string& path, Provenance tag) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    return load_dataset(in, tag);
}

void write_pgm(std::ostream& out, const Tensor& image) {
    if (image.rank() != 2)
        throw std::invalid_argument("write_pgm: image must be [H, W]");
    out << "P5\n" << image.dim(1) << " " << image.dim(0) << "\n255\n";
    for (size_t i = 0; i < image.size(); ++i) {
        const double v = std::clamp(image[i], 0.0, 1.0);
        out.put(char(uint8_t(std::lround(v * 255.0))));
    }
}

Dataset dataset_from_annotations(const std::vector<AnnotationRecord>& records,
                                 size_t height, size_t width) {
    // first-appearance order of (video, frame)
    std::vector<Sample> samples;
    std::map<std::pair<std::string, uint32_t>, size_t> index;
    for (const AnnotationRecord& r : records) {
        auto key = std::make_pair(r.video_id, r.frame_index);
        auto it = index.find(key);
        if (it == index.end()) {
            Sample s;
            s.image = Tensor::zeros({height, width});
            s.video_id = r.video_id;
            s.frame_index = r.frame_index;
            it = index.emplace(std::move(key), samples.size()).first;
            samples.push_back(std::move(s));
        }
        Sample& s = samples[it->second];
        if (r.intensity > 0) s.any_au_set = true;
        if (r.au == "AU12") s.au12_intensity = r.intensity;
    }
    return Dataset::create(std::move(samples), Provenance::Full);
}

}  // namespace smilecnn
