#include "qmrf/tensorio.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace qmrf::tio {

namespace {

constexpr char kMagic[4] = {'Q', 'M', 'R', 'F'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "QMRF I/O assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw TensorError("truncated header");
    return v;
}

void check_dims(const std::vector<std::size_t>& dims) {
    if (dims.empty()) throw TensorError("tensor dims must be non-empty");
    for (auto d : dims)
        if (d == 0) throw TensorError("tensor dims must all be >= 1");
}

}  // namespace

const char* dtype_name(DType d) {
    switch (d) {
        case DType::Real64: return "real64";
        case DType::Real32: return "real32";
        case DType::Complex64: return "complex64";
    }
    throw TensorError("unknown dtype");
}

DType dtype_from_name(const std::string& name) {
    if (name == "real64") return DType::Real64;
    if (name == "real32") return DType::Real32;
    if (name == "complex64") return DType::Complex64;
    throw TensorError("unknown dtype name: " + name);
}

std::size_t scalars_per_element(DType d) {
    return d == DType::Complex64 ? 2 : 1;
}

std::size_t scalar_width(DType d) {
    return d == DType::Real64 ? 8 : 4;
}

Tensor::Tensor(DType dtype, std::vector<std::size_t> dims)
    : dtype_(dtype), dims_(std::move(dims)) {
    check_dims(dims_);
    const std::size_t n = scalar_count();
    if (dtype_ == DType::Real64)
        f64_.assign(n, 0.0);
    else
        f32_.assign(n, 0.0f);
}

std::size_t Tensor::element_count() const {
    std::size_t n = 1;
    for (auto d : dims_) n *= d;
    return n;
}

std::complex<float>* Tensor::c64_data() {
    if (dtype_ != DType::Complex64) throw TensorError("tensor is not complex64");
    return reinterpret_cast<std::complex<float>*>(f32_.data());
}

const std::complex<float>* Tensor::c64_data() const {
    if (dtype_ != DType::Complex64) throw TensorError("tensor is not complex64");
    return reinterpret_cast<const std::complex<float>*>(f32_.data());
}

bool Tensor::operator==(const Tensor& other) const {
    return dtype_ == other.dtype_ && dims_ == other.dims_ && f32_ == other.f32_ &&
           f64_ == other.f64_;
}

std::size_t header_size(std::size_t rank) {
    // magic + version + dtype + rank + dims
    return 4 + 4 + 4 + 4 + 8 * rank;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t,
                  const std::string& kind) {
    write_tensor(path, t, kind, nlohmann::json::object());
}

void write_tensor(const std::filesystem::path& path, const Tensor& t,
                  const std::string& kind, const nlohmann::json& extra_meta) {
    check_dims(t.dims());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw TensorError("cannot open for writing: " + path.string());

    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.dtype()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.dims()) put<std::uint64_t>(os, static_cast<std::uint64_t>(d));

    if (t.dtype() == DType::Real64) {
        os.write(reinterpret_cast<const char*>(t.f64().data()),
                 static_cast<std::streamsize>(t.f64().size() * 8));
    } else {
        os.write(reinterpret_cast<const char*>(t.f32().data()),
                 static_cast<std::streamsize>(t.f32().size() * 4));
    }
    if (!os) throw TensorError("write failed: " + path.string());
    os.close();

    nlohmann::json meta = extra_meta;
    meta["kind"] = kind;
    meta["dtype"] = dtype_name(t.dtype());
    meta["dims"] = t.dims();
    std::ofstream ms(path.string() + ".meta.json", std::ios::trunc);
    if (!ms) throw TensorError("cannot write sidecar for: " + path.string());
    ms << meta.dump(2) << "\n";
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw TensorError("cannot open for reading: " + path.string());

    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw TensorError("bad magic in " + path.string());

    const auto version = get<std::uint32_t>(is);
    if (version != kVersion)
        throw TensorError("unsupported format version " + std::to_string(version) +
                          " in " + path.string());

    const auto dtype_code = get<std::uint32_t>(is);
    if (dtype_code > 2) throw TensorError("unknown dtype code in " + path.string());
    const auto dtype = static_cast<DType>(dtype_code);

    const auto rank = get<std::uint32_t>(is);
    if (rank == 0 || rank > 64) throw TensorError("bad rank in " + path.string());
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) {
        d = static_cast<std::size_t>(get<std::uint64_t>(is));
        if (d == 0) throw TensorError("zero extent in " + path.string());
    }

    Tensor t(dtype, dims);
    if (dtype == DType::Real64) {
        is.read(reinterpret_cast<char*>(t.f64().data()),
                static_cast<std::streamsize>(t.f64().size() * 8));
    } else {
        is.read(reinterpret_cast<char*>(t.f32().data()),
                static_cast<std::streamsize>(t.f32().size() * 4));
    }
    if (!is || static_cast<std::size_t>(is.gcount()) !=
                   t.scalar_count() * scalar_width(dtype))
        throw TensorError("truncated payload in " + path.string());
    return t;
}

nlohmann::json read_sidecar(const std::filesystem::path& tensor_path) {
    std::ifstream ms(tensor_path.string() + ".meta.json");
    if (!ms) throw TensorError("missing sidecar for: " + tensor_path.string());
    nlohmann::json j;
    ms >> j;
    return j;
}

}  // namespace qmrf::tio
