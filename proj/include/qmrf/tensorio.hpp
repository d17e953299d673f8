#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace qmrf::tio {

enum class DType : std::uint32_t {
    Real64 = 0,
    Real32 = 1,
    Complex64 = 2,  // interleaved (re, im) float32 pairs
};

const char* dtype_name(DType d);
DType dtype_from_name(const std::string& name);

// number of stored scalars per element (2 for complex)
std::size_t scalars_per_element(DType d);
// bytes per stored scalar
std::size_t scalar_width(DType d);

struct TensorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major array. Real64 data lives in f64, Real32/Complex64 in
// f32, so disk round-trips are bit-exact for every dtype.
class Tensor {
public:
    Tensor() = default;
    Tensor(DType dtype, std::vector<std::size_t> dims);

    static Tensor zeros(DType dtype, std::vector<std::size_t> dims) {
        return Tensor(dtype, std::move(dims));
    }

    DType dtype() const { return dtype_; }
    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t rank() const { return dims_.size(); }
    std::size_t element_count() const;
    std::size_t scalar_count() const { return element_count() * scalars_per_element(dtype_); }

    std::span<float> f32() { return {f32_.data(), f32_.size()}; }
    std::span<const float> f32() const { return {f32_.data(), f32_.size()}; }
    std::span<double> f64() { return {f64_.data(), f64_.size()}; }
    std::span<const double> f64() const { return {f64_.data(), f64_.size()}; }

    std::complex<float>* c64_data();
    const std::complex<float>* c64_data() const;

    bool operator==(const Tensor& other) const;

private:
    DType dtype_ = DType::Real64;
    std::vector<std::size_t> dims_;
    std::vector<float> f32_;
    std::vector<double> f64_;
};

// Writes "<path>" in the QMRF binary format and "<path>.meta.json" beside
// it. extra_meta entries are merged into the sidecar document.
void write_tensor(const std::filesystem::path& path, const Tensor& t,
                  const std::string& kind = "tensor");
void write_tensor(const std::filesystem::path& path, const Tensor& t,
                  const std::string& kind, const nlohmann::json& extra_meta);

Tensor read_tensor(const std::filesystem::path& path);

nlohmann::json read_sidecar(const std::filesystem::path& tensor_path);

// header size in bytes for a tensor of the given rank
std::size_t header_size(std::size_t rank);

}  // namespace qmrf::tio
