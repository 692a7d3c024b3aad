#include "smilecnn/tensor.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace smilecnn {

size_t shape_product(const std::vector<size_t>& shape) {
    size_t n = 1;
    for (size_t d : shape) n *= d;
    return n;
}

static void check_shape(const std::vector<size_t>& shape) {
    if (shape.empty())
        throw std::invalid_argument("tensor shape must not be empty");
    for (size_t d : shape)
        if (d == 0)
            throw std::invalid_argument("tensor dimensions must be >= 1");
}

Tensor Tensor::zeros(const std::vector<size_t>& shape) {
    check_shape(shape);
    Tensor t;
    t.shape_ = shape;
    t.data_.assign(shape_product(shape), 0.0);
    return t;
}

Tensor Tensor::random_uniform(const std::vector<size_t>& shape,
                              double epsilon, Rng& rng) {
    if (!(epsilon > 0.0))
        throw std::invalid_argument("random_uniform: epsilon must be > 0");
    Tensor t = zeros(shape);
    for (double& v : t.data_) v = rng.uniform(-epsilon, epsilon);
    return t;
}

Tensor Tensor::from_data(std::vector<size_t> shape, std::vector<double> data) {
    check_shape(shape);
    if (data.size() != shape_product(shape))
        throw std::invalid_argument("from_data: element count does not match shape");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(data);
    return t;
}

Tensor Tensor::reshape(const std::vector<size_t>& new_shape) const {
    check_shape(new_shape);
    if (shape_product(new_shape) != data_.size())
        throw std::invalid_argument("reshape: element count mismatch");
    Tensor t;
    t.shape_ = new_shape;
    t.data_ = data_;
    return t;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2)
        throw std::invalid_argument("matmul: both operands must be rank 2");
    if (a.dim(1) != b.dim(0))
        throw std::invalid_argument("matmul: inner dimensions disagree");
    const size_t rows = a.dim(0), inner = a.dim(1), cols = b.dim(1);
    Tensor out = Tensor::zeros({rows, cols});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (size_t i = 0; i < rows; ++i) {
        for (size_t k = 0; k < inner; ++k) {
            const double aik = pa[i * inner + k];
            const double* brow = pb + k * cols;
            double* orow = po + i * cols;
            for (size_t j = 0; j < cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

// ---- binary io ----

static constexpr char kTensorMagic[8] = {'T', 'N', 'S', 'R', 'v', '0', '0', '1'};

void write_u32_le(std::ostream& out, uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 4);
}

void write_u64_le(std::ostream& out, uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

void write_f64_le(std::ostream& out, double v) {
    write_u64_le(out, std::bit_cast<uint64_t>(v));
}

static void fail_at(std::istream& in, const std::string& what) {
    const auto pos = in.tellg();
    throw std::runtime_error(what + " at byte offset " +
                             std::to_string(static_cast<long long>(pos)));
}

uint32_t read_u32_le(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) fail_at(in, "truncated file");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

uint64_t read_u64_le(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) fail_at(in, "truncated file");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

double read_f64_le(std::istream& in) {
    return std::bit_cast<double>(read_u64_le(in));
}

void write_tensor(std::ostream& out, const Tensor& t) {
    out.write(kTensorMagic, 8);
    write_u32_le(out, static_cast<uint32_t>(t.rank()));
    for (size_t i = 0; i < t.rank(); ++i)
        write_u32_le(out, static_cast<uint32_t>(t.dim(i)));
    for (size_t i = 0; i < t.size(); ++i) write_f64_le(out, t[i]);
}

Tensor read_tensor(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8)) fail_at(in, "truncated tensor header");
    if (std::memcmp(magic, kTensorMagic, 8) != 0)
        fail_at(in, "bad tensor magic");
    const uint32_t rank = read_u32_le(in);
    if (rank == 0 || rank > 8) fail_at(in, "implausible tensor rank");
    std::vector<size_t> shape(rank);
    for (uint32_t i = 0; i < rank; ++i) {
        shape[i] = read_u32_le(in);
        if (shape[i] == 0) fail_at(in, "zero tensor dimension");
    }
    std::vector<double> data(shape_product(shape));
    for (double& v : data) v = read_f64_le(in);
    return Tensor::from_data(std::move(shape), std::move(data));
}

}  // namespace smilecnn
