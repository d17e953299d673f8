#pragma once

#include <complex>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmrf::epg {

using cdbl = std::complex<double>;

struct EpgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// FISP-style acquisition timing. Times are in milliseconds, flip angles
// in degrees.
struct SequenceParams {
    std::vector<double> flip_angles_deg;
    double tr_ms = 10.0;
    double te_ms = 1.908;
    double ti_ms = 18.0;
    bool inversion = true;

    std::size_t length() const { return flip_angles_deg.size(); }
    void validate() const;
};

// Two half-period sinusoidal lobes ramping 10..70 degrees. Stand-in
// schedule; real trains can be loaded with load_flip_schedule.
std::vector<double> default_flip_schedule(std::size_t l);

// One degree value per line; '#' comments and blank lines ignored.
std::vector<double> load_flip_schedule(const std::filesystem::path& path);

struct Fingerprint {
    std::vector<cdbl> signal;
    double t1_s = 0.0;
    double t2_s = 0.0;
};

struct Dictionary {
    // atoms(i, t): fingerprint i sampled at TR index t, row-major n_atoms x l
    std::vector<cdbl> atoms;
    std::size_t n_atoms = 0;
    std::size_t length = 0;
    std::vector<std::pair<double, double>> grid;  // (T1, T2) seconds
    SequenceParams sequence;

    cdbl* atom(std::size_t i) { return atoms.data() + i * length; }
    const cdbl* atom(std::size_t i) const { return atoms.data() + i * length; }
};

inline constexpr std::size_t kDefaultStateCap = 101;

// Transverse signal at TE after each excitation, simulated with the
// extended phase graph (F+, F-, Z) recursion. M0 = 1.
Fingerprint epg_fisp(double t1_s, double t2_s, const SequenceParams& seq,
                     std::size_t state_cap = kDefaultStateCap);

struct GridSpec {
    double t1_min_s = 0.01, t1_max_s = 6.0;
    double t2_min_s = 0.004, t2_max_s = 4.0;
    std::size_t n_t1 = 40, n_t2 = 40;
    bool exclude_t2_above_t1 = true;
};

// Logarithmically spaced values over [lo, hi], inclusive endpoints.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

Dictionary build_dictionary(const GridSpec& grid, const SequenceParams& seq,
                            std::size_t state_cap = kDefaultStateCap);

Dictionary truncate_sequence(const Dictionary& d, std::size_t l_new);
Fingerprint truncate_sequence(const Fingerprint& f, std::size_t l_new);
SequenceParams truncate_sequence(const SequenceParams& s, std::size_t l_new);

void save_dictionary(const Dictionary& d, const std::filesystem::path& dir,
                     const std::string& stem);
Dictionary load_dictionary(const std::filesystem::path& dir, const std::string& stem);

}  // namespace qmrf::epg
