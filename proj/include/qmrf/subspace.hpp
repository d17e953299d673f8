#pragma once

#include <Eigen/Dense>
#include <complex>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "qmrf/epg.hpp"

namespace qmrf::subspace {

using MatC = Eigen::MatrixXcd;

struct SubspaceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Top right-singular subspace of the dictionary atom matrix. Columns of
// v are orthonormal, ordered by descending singular value, with the
// largest-magnitude entry of each column rotated real-positive so the
// basis is reproducible across runs.
struct SubspaceBasis {
    MatC v;                            // l x s
    Eigen::VectorXd singular_values;   // all min(l, n_atoms) values
    std::size_t source_l = 0;
    std::size_t rank = 0;
};

SubspaceBasis compute_basis(const epg::Dictionary& d, std::size_t s);

// x_full: n x l (rows are voxels) -> n x s
MatC compress(const MatC& x_full, const SubspaceBasis& basis);
// x: n x s -> n x l
MatC decompress(const MatC& x, const SubspaceBasis& basis);

// dictionary atoms projected into the basis: n_atoms x s
MatC compress_dictionary(const epg::Dictionary& d, const SubspaceBasis& basis);

void save_basis(const SubspaceBasis& b, const std::filesystem::path& path,
                const std::string& grid_hash = "");
SubspaceBasis load_basis(const std::filesystem::path& path);

// stable content hash of a dictionary grid, recorded beside saved bases
std::string grid_hash(const epg::Dictionary& d);

}  // namespace qmrf::subspace
