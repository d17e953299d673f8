#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>

#include "oracles/isochromat.hpp"
#include "qmrf/epg.hpp"

using namespace qmrf;

namespace {

epg::SequenceParams paper_timing(std::size_t l, bool inversion = true) {
    epg::SequenceParams seq;
    seq.flip_angles_deg = epg::default_flip_schedule(l);
    seq.tr_ms = 10.0;
    seq.te_ms = 1.908;
    seq.ti_ms = 18.0;
    seq.inversion = inversion;
    return seq;
}

double rel_l2(const std::vector<epg::cdbl>& a, const std::vector<epg::cdbl>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("zero flip angles give zero signal") {
    auto seq = paper_timing(20, false);
    for (auto& a : seq.flip_angles_deg) a = 0.0;
    const auto f = epg::epg_fisp(1.0, 0.1, seq);
    for (const auto& v : f.signal) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("single 90-degree pulse from equilibrium") {
    epg::SequenceParams seq;
    seq.flip_angles_deg = {90.0};
    seq.tr_ms = 10.0;
    seq.te_ms = 1.908;
    seq.inversion = false;
    const double t2 = 0.1;
    const auto f = epg::epg_fisp(1.0, t2, seq);
    CHECK(std::abs(f.signal[0]) ==
          doctest::Approx(std::exp(-seq.te_ms / (t2 * 1e3))).epsilon(1e-12));
}

TEST_CASE("EPG matches isochromat oracle at paper timing") {
    const auto seq = paper_timing(50);
    const auto f = epg::epg_fisp(1.0, 0.1, seq);
    const auto oracle = test::isochromat_fisp(1.0, 0.1, seq, 256);
    CHECK(rel_l2(f.signal, oracle) < 0.01);
}

TEST_CASE("EPG matches oracle across a 5x5 grid") {
    const auto seq = paper_timing(50);
    const auto t1s = epg::log_grid(0.1, 4.0, 5);
    const auto t2s = epg::log_grid(0.02, 1.0, 5);
    for (double t1 : t1s)
        for (double t2 : t2s) {
            if (t2 > t1) continue;
            const auto f = epg::epg_fisp(t1, t2, seq);
            const auto oracle = test::isochromat_fisp(t1, t2, seq, 256);
            CAPTURE(t1);
            CAPTURE(t2);
            CHECK(rel_l2(f.signal, oracle) < 0.01);
        }
}

TEST_CASE("signal magnitude never exceeds M0") {
    const auto seq = paper_timing(200);
    for (double t1 : {0.1, 1.0, 4.0})
        for (double t2 : {0.05, 0.5}) {
            const auto f = epg::epg_fisp(t1, t2, seq);
            for (const auto& v : f.signal) CHECK(std::abs(v) <= 1.0 + 1e-12);
        }
}

TEST_CASE("state order beyond sequence length changes nothing") {
    auto seq = paper_timing(40);
    const auto a = epg::epg_fisp(0.8, 0.08, seq, 41);
    const auto b = epg::epg_fisp(0.8, 0.08, seq, 82);
    double dmax = 0.0;
    for (std::size_t i = 0; i < a.signal.size(); ++i)
        dmax = std::max(dmax, std::abs(a.signal[i] - b.signal[i]));
    CHECK(dmax < 1e-12);
}

TEST_CASE("fingerprint continuous in T1") {
    const auto seq = paper_timing(100);
    const auto a = epg::epg_fisp(1.0, 0.1, seq);
    const auto b = epg::epg_fisp(1.001, 0.1, seq);
    double diff = 0.0, base = 0.0;
    for (std::size_t i = 0; i < a.signal.size(); ++i) {
        diff += std::norm(a.signal[i] - b.signal[i]);
        base += std::norm(a.signal[i]);
    }
    CHECK(std::sqrt(diff / base) < 0.01);
}

TEST_CASE("argument validation") {
    const auto seq = paper_timing(5);
    CHECK_THROWS_AS(epg::epg_fisp(-1.0, 0.1, seq), epg::EpgError);
    CHECK_THROWS_AS(epg::epg_fisp(1.0, 0.0, seq), epg::EpgError);
    CHECK_THROWS_AS(epg::epg_fisp(1.0, 0.1, seq, 1), epg::EpgError);
    epg::SequenceParams bad = seq;
    bad.te_ms = 20.0;  // TE > TR
    CHECK_THROWS_AS(epg::epg_fisp(1.0, 0.1, bad), epg::EpgError);
}

TEST_CASE("dictionary grid cardinality and filter") {
    const auto seq = paper_timing(10);
    epg::GridSpec g;
    g.n_t1 = 10;
    g.n_t2 = 10;
    g.exclude_t2_above_t1 = false;
    const auto dictionary = epg::build_dictionary(g, seq);
    CHECK(dictionary.n_atoms == 100);

    g.exclude_t2_above_t1 = true;
    const auto filtered = epg::build_dictionary(g, seq);
    // brute-force count of the kept pairs
    std::size_t expected = 0;
    for (double t1 : epg::log_grid(g.t1_min_s, g.t1_max_s, g.n_t1))
        for (double t2 : epg::log_grid(g.t2_min_s, g.t2_max_s, g.n_t2))
            if (t2 <= t1) ++expected;
    CHECK(filtered.n_atoms == expected);
    CHECK(filtered.n_atoms < 100);
    for (const auto& [t1, t2] : filtered.grid) CHECK(t2 <= t1);
}

TEST_CASE("default grid spans the published ranges") {
    epg::GridSpec g;
    CHECK(g.t1_min_s == 0.01);
    CHECK(g.t1_max_s == 6.0);
    CHECK(g.t2_min_s == 0.004);
    CHECK(g.t2_max_s == 4.0);
    const auto t1s = epg::log_grid(g.t1_min_s, g.t1_max_s, 7);
    CHECK(t1s.front() == doctest::Approx(0.01));
    CHECK(t1s.back() == doctest::Approx(6.0));
}

TEST_CASE("degenerate range rejected") {
    const auto seq = paper_timing(4);
    epg::GridSpec g;
    g.t1_min_s = 2.0;
    g.t1_max_s = 1.0;
    CHECK_THROWS_AS(epg::build_dictionary(g, seq), epg::EpgError);
}

TEST_CASE("truncate_sequence keeps the head of the train") {
    const auto seq = paper_timing(40);
    epg::GridSpec g;
    g.n_t1 = 3;
    g.n_t2 = 3;
    const auto d = epg::build_dictionary(g, seq);

    const auto t = epg::truncate_sequence(d, 7);
    CHECK(t.length == 7);
    CHECK(t.sequence.length() == 7);
    for (std::size_t i = 0; i < d.n_atoms; ++i)
        for (std::size_t j = 0; j < 7; ++j) CHECK(t.atom(i)[j] == d.atom(i)[j]);

    const auto same = epg::truncate_sequence(d, 40);
    CHECK(same.atoms == d.atoms);
    CHECK_THROWS_AS(epg::truncate_sequence(d, 0), epg::EpgError);
    CHECK_THROWS_AS(epg::truncate_sequence(d, 41), epg::EpgError);
}

TEST_CASE("dictionary save/load round-trip") {
    const auto seq = paper_timing(12);
    epg::GridSpec g;
    g.n_t1 = 4;
    g.n_t2 = 4;
    const auto d = epg::build_dictionary(g, seq);
    const auto dir = std::filesystem::temp_directory_path() / "qmrf_epg_test";
    epg::save_dictionary(d, dir, "dict");
    const auto r = epg::load_dictionary(dir, "dict");
    CHECK(r.n_atoms == d.n_atoms);
    CHECK(r.length == d.length);
    CHECK(r.grid == d.grid);
    CHECK(r.sequence.flip_angles_deg == d.sequence.flip_angles_deg);
    for (std::size_t i = 0; i < d.atoms.size(); ++i) {
        CHECK(std::abs(r.atoms[i] - d.atoms[i]) < 1e-6);
    }
}

TEST_CASE("flip schedule file loader") {
    const auto dir = std::filesystem::temp_directory_path() / "qmrf_epg_test";
    std::filesystem::create_directories(dir);
    const auto p = dir / "flips.txt";
    {
        std::ofstream os(p);
        os << "# comment line\n10.5\n\n20\n 30.25 # trailing\n";
    }
    const auto fa = epg::load_flip_schedule(p);
    CHECK(fa == std::vector<double>{10.5, 20.0, 30.25});
}
