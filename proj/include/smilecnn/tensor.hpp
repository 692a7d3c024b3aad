#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "smilecnn/rng.hpp"

namespace smilecnn {

/// Dense n-dimensional array of doubles, row-major. Shapes are fixed at
/// construction; reshape produces a new tensor over the same flat data.
/// Tensors are plain values: copy, move, share across threads for reading.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(const std::vector<size_t>& shape);

    /// Every element drawn from the open interval (-epsilon, +epsilon).
    static Tensor random_uniform(const std::vector<size_t>& shape,
                                 double epsilon, Rng& rng);

    static Tensor from_data(std::vector<size_t> shape,
                            std::vector<double> data);

    const std::vector<size_t>& shape() const { return shape_; }
    size_t rank() const { return shape_.size(); }
    size_t dim(size_t i) const { return shape_[i]; }
    size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& values() const { return data_; }

    double& operator[](size_t i) { return data_[i]; }
    double operator[](size_t i) const { return data_[i]; }

    // rank-2 accessors
    double& at(size_t r, size_t c) { return data_[r * shape_[1] + c]; }
    double at(size_t r, size_t c) const { return data_[r * shape_[1] + c]; }

    /// Same flat data, new shape; element counts must agree.
    Tensor reshape(const std::vector<size_t>& new_shape) const;

    bool operator==(const Tensor& other) const = default;

private:
    std::vector<size_t> shape_;
    std::vector<double> data_;
};

size_t shape_product(const std::vector<size_t>& shape);

/// Standard matrix product of two rank-2 tensors, [r,k] x [k,c] -> [r,c].
Tensor matmul(const Tensor& a, const Tensor& b);

// Binary tensor format: magic "TNSRv001", u32 LE rank, rank x u32 LE dims,
// raw little-endian f64 payload.
void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);

// little-endian primitives shared by the dataset and checkpoint formats
void write_u32_le(std::ostream& out, uint32_t v);
void write_u64_le(std::ostream& out, uint64_t v);
void write_f64_le(std::ostream& out, double v);
uint32_t read_u32_le(std::istream& in);
uint64_t read_u64_le(std::istream& in);
double read_f64_le(std::istream& in);

}  // namespace smilecnn
