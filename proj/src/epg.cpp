#include "qmrf/epg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "qmrf/tensorio.hpp"

#include <nlohmann/json.hpp>

namespace qmrf::epg {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// RF phase is fixed at 90 degrees (unbalanced FISP regime, no RF
// spoiling); precompute the 3x3 configuration-state rotation.
struct RfMatrix {
    cdbl m[3][3];

    RfMatrix(double alpha_rad, double phi_rad) {
        const double a = alpha_rad;
        const cdbl i(0.0, 1.0);
        const cdbl eip = std::exp(i * phi_rad);
        const cdbl ei2p = std::exp(i * (2.0 * phi_rad));
        const double c2 = std::cos(a / 2.0) * std::cos(a / 2.0);
        const double s2 = std::sin(a / 2.0) * std::sin(a / 2.0);
        const double sa = std::sin(a);
        m[0][0] = c2;
        m[0][1] = ei2p * s2;
        m[0][2] = -i * eip * sa;
        m[1][0] = std::conj(ei2p) * s2;
        m[1][1] = c2;
        m[1][2] = i * std::conj(eip) * sa;
        m[2][0] = -0.5 * i * std::conj(eip) * sa;
        m[2][1] = 0.5 * i * eip * sa;
        m[2][2] = std::cos(a);
    }
};

}  // namespace

void SequenceParams::validate() const {
    if (flip_angles_deg.empty()) throw EpgError("flip angle train must be non-empty");
    if (!(tr_ms > te_ms)) throw EpgError("TR must exceed TE");
    if (te_ms < 0.0) throw EpgError("TE must be >= 0");
    if (ti_ms < 0.0) throw EpgError("TI must be >= 0");
    for (double a : flip_angles_deg)
        if (a < 0.0 || a > 180.0) throw EpgError("flip angles must lie in [0, 180] deg");
}

std::vector<double> default_flip_schedule(std::size_t l) {
    std::vector<double> fa(l);
    for (std::size_t i = 0; i < l; ++i) {
        const double x = l > 1 ? static_cast<double>(i) / static_cast<double>(l) : 0.0;
        fa[i] = 10.0 + 60.0 * std::abs(std::sin(2.0 * std::numbers::pi * x));
    }
    return fa;
}

std::vector<double> load_flip_schedule(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw EpgError("cannot open flip schedule: " + path.string());
    std::vector<double> fa;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        fa.push_back(std::stod(line.substr(begin)));
    }
    if (fa.empty()) throw EpgError("flip schedule file is empty: " + path.string());
    return fa;
}

Fingerprint epg_fisp(double t1_s, double t2_s, const SequenceParams& seq,
                     std::size_t state_cap) {
    if (!(t1_s > 0.0) || !(t2_s > 0.0))
        throw EpgError("relaxation times must be positive");
    if (state_cap < 2) throw EpgError("EPG state order bound must be >= 2");
    seq.validate();

    const std::size_t l = seq.length();
    const std::size_t n_states = std::min(l + 1, state_cap);
    const double t1_ms = t1_s * 1e3;
    const double t2_ms = t2_s * 1e3;
    const double e1 = std::exp(-seq.tr_ms / t1_ms);
    const double e2 = std::exp(-seq.tr_ms / t2_ms);
    const double e2_te = std::exp(-seq.te_ms / t2_ms);

    std::vector<cdbl> fp(n_states, 0.0), fm(n_states, 0.0), z(n_states, 0.0);
    z[0] = 1.0;

    if (seq.inversion) {
        z[0] = -1.0;
        // pure T1 recovery of Z over TI; no transverse magnetization exists
        z[0] = 1.0 + (z[0] - 1.0) * std::exp(-seq.ti_ms / t1_ms);
    }

    const double phi = 90.0 * kDegToRad;
    Fingerprint out;
    out.t1_s = t1_s;
    out.t2_s = t2_s;
    out.signal.resize(l);

    std::vector<cdbl> fp2(n_states), fm2(n_states), z2(n_states);
    for (std::size_t p = 0; p < l; ++p) {
        const RfMatrix rf(seq.flip_angles_deg[p] * kDegToRad, phi);
        for (std::size_t k = 0; k < n_states; ++k) {
            const cdbl a = fp[k], b = fm[k], c = z[k];
            fp2[k] = rf.m[0][0] * a + rf.m[0][1] * b + rf.m[0][2] * c;
            fm2[k] = rf.m[1][0] * a + rf.m[1][1] * b + rf.m[1][2] * c;
            z2[k] = rf.m[2][0] * a + rf.m[2][1] * b + rf.m[2][2] * c;
        }
        fp.swap(fp2);
        fm.swap(fm2);
        z.swap(z2);

        // demodulated echo: transverse decay only between excitation and TE
        out.signal[p] = fp[0] * e2_te;

        // relaxation over the full TR with Z0 regrowth
        for (std::size_t k = 0; k < n_states; ++k) {
            fp[k] *= e2;
            fm[k] *= e2;
            z[k] *= e1;
        }
        z[0] += 1.0 - e1;

        // unit gradient dephasing: F+(k) -> F+(k+1), F-(k) -> F-(k-1)
        for (std::size_t k = n_states - 1; k > 0; --k) fp[k] = fp[k - 1];
        for (std::size_t k = 0; k + 1 < n_states; ++k) fm[k] = fm[k + 1];
        fm[n_states - 1] = 0.0;
        fp[0] = std::conj(fm[0]);
    }
    return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > 0.0)) throw EpgError("grid range must be positive");
    if (n > 1 && !(lo < hi)) throw EpgError("degenerate grid range (min >= max)");
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    const double la = std::log(lo), lb = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = std::exp(la + (lb - la) * static_cast<double>(i) /
                                 static_cast<double>(n - 1));
    return v;
}

Dictionary build_dictionary(const GridSpec& grid, const SequenceParams& seq,
                            std::size_t state_cap) {
    if (grid.n_t1 * grid.n_t2 < 1) throw EpgError("dictionary grid must be non-empty");
    seq.validate();

    const auto t1s = log_grid(grid.t1_min_s, grid.t1_max_s, grid.n_t1);
    const auto t2s = log_grid(grid.t2_min_s, grid.t2_max_s, grid.n_t2);

    Dictionary d;
    d.sequence = seq;
    d.length = seq.length();
    for (double t1 : t1s)
        for (double t2 : t2s) {
            if (grid.exclude_t2_above_t1 && t2 > t1) continue;
            d.grid.emplace_back(t1, t2);
        }
    d.n_atoms = d.grid.size();
    if (d.n_atoms == 0) throw EpgError("dictionary grid is empty after T2<=T1 filter");
    d.atoms.assign(d.n_atoms * d.length, 0.0);

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(d.n_atoms); ++i) {
        const auto [t1, t2] = d.grid[static_cast<std::size_t>(i)];
        const Fingerprint f = epg_fisp(t1, t2, seq, state_cap);
        std::copy(f.signal.begin(), f.signal.end(), d.atom(static_cast<std::size_t>(i)));
    }
    return d;
}

SequenceParams truncate_sequence(const SequenceParams& s, std::size_t l_new) {
    if (l_new < 1 || l_new > s.length())
        throw EpgError("truncation length out of range");
    SequenceParams out = s;
    out.flip_angles_deg.resize(l_new);
    return out;
}

Fingerprint truncate_sequence(const Fingerprint& f, std::size_t l_new) {
    if (l_new < 1 || l_new > f.signal.size())
        throw EpgError("truncation length out of range");
    Fingerprint out = f;
    out.signal.resize(l_new);
    return out;
}

Dictionary truncate_sequence(const Dictionary& d, std::size_t l_new) {
    if (l_new < 1 || l_new > d.length)
        throw EpgError("truncation length out of range");
    Dictionary out;
    out.sequence = truncate_sequence(d.sequence, l_new);
    out.length = l_new;
    out.grid = d.grid;
    out.n_atoms = d.n_atoms;
    out.atoms.resize(out.n_atoms * l_new);
    for (std::size_t i = 0; i < d.n_atoms; ++i)
        std::copy(d.atom(i), d.atom(i) + l_new, out.atom(i));
    return out;
}

void save_dictionary(const Dictionary& d, const std::filesystem::path& dir,
                     const std::string& stem) {
    std::filesystem::create_directories(dir);

    tio::Tensor atoms(tio::DType::Complex64, {d.n_atoms, d.length});
    auto* a = atoms.c64_data();
    for (std::size_t i = 0; i < d.atoms.size(); ++i)
        a[i] = std::complex<float>(static_cast<float>(d.atoms[i].real()),
                                   static_cast<float>(d.atoms[i].imag()));

    tio::Tensor grid(tio::DType::Real64, {d.n_atoms, 2});
    auto g = grid.f64();
    for (std::size_t i = 0; i < d.n_atoms; ++i) {
        g[2 * i] = d.grid[i].first;
        g[2 * i + 1] = d.grid[i].second;
    }

    nlohmann::json meta;
    meta["tr_ms"] = d.sequence.tr_ms;
    meta["te_ms"] = d.sequence.te_ms;
    meta["ti_ms"] = d.sequence.ti_ms;
    meta["inversion"] = d.sequence.inversion;
    meta["flip_angles_deg"] = d.sequence.flip_angles_deg;
    tio::write_tensor(dir / (stem + "_atoms.qmrf"), atoms, "dictionary_atoms", meta);
    tio::write_tensor(dir / (stem + "_grid.qmrf"), grid, "dictionary_grid");
}

Dictionary load_dictionary(const std::filesystem::path& dir, const std::string& stem) {
    const auto atoms = tio::read_tensor(dir / (stem + "_atoms.qmrf"));
    const auto grid = tio::read_tensor(dir / (stem + "_grid.qmrf"));
    const auto meta = tio::read_sidecar(dir / (stem + "_atoms.qmrf"));

    Dictionary d;
    d.n_atoms = atoms.dims().at(0);
    d.length = atoms.dims().at(1);
    d.atoms.resize(d.n_atoms * d.length);
    const auto* a = atoms.c64_data();
    for (std::size_t i = 0; i < d.atoms.size(); ++i)
        d.atoms[i] = cdbl(a[i].real(), a[i].imag());
    d.grid.resize(d.n_atoms);
    auto g = grid.f64();
    for (std::size_t i = 0; i < d.n_atoms; ++i)
        d.grid[i] = {g[2 * i], g[2 * i + 1]};
    d.sequence.tr_ms = meta.at("tr_ms").get<double>();
    d.sequence.te_ms = meta.at("te_ms").get<double>();
    d.sequence.ti_ms = meta.at("ti_ms").get<double>();
    d.sequence.inversion = meta.at("inversion").get<bool>();
    d.sequence.flip_angles_deg = meta.at("flip_angles_deg").get<std::vector<double>>();
    return d;
}

}  // namespace qmrf::epg
