#include "qmrf/subspace.hpp"

#include <Eigen/SVD>
#include <cstdint>
#include <cstdio>
#include <cstring>

#include "qmrf/tensorio.hpp"

#include <nlohmann/json.hpp>

namespace qmrf::subspace {

SubspaceBasis compute_basis(const epg::Dictionary& d, std::size_t s) {
    const auto l = static_cast<Eigen::Index>(d.length);
    const auto n = static_cast<Eigen::Index>(d.n_atoms);
    if (s < 1 || static_cast<Eigen::Index>(s) > std::min(l, n))
        throw SubspaceError("subspace rank out of range");

    Eigen::Map<const MatC> atoms(d.atoms.data(), l, n);  // column = atom (row-major source)
    if (!atoms.allFinite()) throw SubspaceError("dictionary atoms contain non-finite values");

    // Atom matrix is n_atoms x l with atoms as rows; the map above views the
    // row-major buffer as its (unconjugated) transpose, so right singular
    // vectors of the atom matrix are conj(U) of this factorization.
    Eigen::BDCSVD<MatC> svd(atoms, Eigen::ComputeThinU);
    if (svd.info() != Eigen::Success) throw SubspaceError("SVD did not converge");

    SubspaceBasis b;
    b.source_l = d.length;
    b.rank = s;
    b.singular_values = svd.singularValues();
    b.v = svd.matrixU().leftCols(static_cast<Eigen::Index>(s)).conjugate();

    // phase convention: largest-magnitude entry of each column real-positive
    for (Eigen::Index c = 0; c < b.v.cols(); ++c) {
        Eigen::Index imax = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < b.v.rows(); ++r) {
            const double m = std::abs(b.v(r, c));
            if (m > best) {
                best = m;
                imax = r;
            }
        }
        if (best > 0.0) b.v.col(c) *= std::conj(b.v(imax, c)) / best;
    }
    return b;
}

MatC compress(const MatC& x_full, const SubspaceBasis& basis) {
    if (x_full.cols() != static_cast<Eigen::Index>(basis.source_l))
        throw SubspaceError("time dimension does not match basis source length");
    return x_full * basis.v;
}

MatC decompress(const MatC& x, const SubspaceBasis& basis) {
    if (x.cols() != static_cast<Eigen::Index>(basis.rank))
        throw SubspaceError("channel dimension does not match basis rank");
    return x * basis.v.adjoint();
}

MatC compress_dictionary(const epg::Dictionary& d, const SubspaceBasis& basis) {
    Eigen::Map<const MatC> atoms_t(d.atoms.data(), static_cast<Eigen::Index>(d.length),
                                   static_cast<Eigen::Index>(d.n_atoms));
    return (basis.v.transpose() * atoms_t).transpose();  // rows: atoms * V

}

std::string grid_hash(const epg::Dictionary& d) {
    // FNV-1a over the grid bytes
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto feed = [&h](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xff;
            h *= 0x100000001b3ull;
        }
    };
    for (const auto& [t1, t2] : d.grid) {
        feed(t1);
        feed(t2);
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void save_basis(const SubspaceBasis& b, const std::filesystem::path& path,
                const std::string& grid_hash) {
    tio::Tensor v(tio::DType::Complex64,
                  {static_cast<std::size_t>(b.v.rows()), static_cast<std::size_t>(b.v.cols())});
    auto* p = v.c64_data();
    for (Eigen::Index r = 0; r < b.v.rows(); ++r)
        for (Eigen::Index c = 0; c < b.v.cols(); ++c)
            p[r * b.v.cols() + c] =
                std::complex<float>(static_cast<float>(b.v(r, c).real()),
                                    static_cast<float>(b.v(r, c).imag()));
    nlohmann::json meta;
    meta["source_l"] = b.source_l;
    meta["s"] = b.rank;
    meta["grid_hash"] = grid_hash;
    meta["singular_values"] = std::vector<double>(
        b.singular_values.data(), b.singular_values.data() + b.singular_values.size());
    tio::write_tensor(path, v, "subspace_basis", meta);
}

SubspaceBasis load_basis(const std::filesystem::path& path) {
    const auto v = tio::read_tensor(path);
    const auto meta = tio::read_sidecar(path);
    SubspaceBasis b;
    b.source_l = meta.at("source_l").get<std::size_t>();
    b.rank = meta.at("s").get<std::size_t>();
    const auto sv = meta.at("singular_values").get<std::vector<double>>();
    b.singular_values = Eigen::Map<const Eigen::VectorXd>(sv.data(),
                                                          static_cast<Eigen::Index>(sv.size()));
    const auto rows = static_cast<Eigen::Index>(v.dims().at(0));
    const auto cols = static_cast<Eigen::Index>(v.dims().at(1));
    b.v.resize(rows, cols);
    const auto* p = v.c64_data();
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            b.v(r, c) = std::complex<double>(p[r * cols + c].real(), p[r * cols + c].imag());
    return b;
}

}  // namespace qmrf::subspace
