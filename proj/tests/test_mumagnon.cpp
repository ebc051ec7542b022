#include "ferri/dictionary_io.hpp"
#include "ferri/mumagnon.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace ferri;

namespace {

const HalfInt half = HalfInt::from_twice(1);
const HalfInt three_half = HalfInt::from_twice(3);

SpinConfiguration reassemble(const LatticeSpec& lat, const ParsedConfiguration& parse) {
    SpinConfiguration c = neel_configuration(lat);
    for (const auto& s : parse.structures)
        for (int off = 0; off < s.length(); ++off) {
            const int site = (s.start + off) % lat.n_sites;
            c.levels[static_cast<size_t>(site)] = static_cast<uint8_t>(
                (s.values[static_cast<size_t>(off)].twice() + lat.spin(site).twice()) / 2);
        }
    return c;
}

GroundStateVector solve_ring(int n, HalfInt s2 = three_half) {
    auto lat = make_alternating(n, half, s2, Boundary::Ring, 1.0, 0.1);
    return ground_state(HamiltonianSpec{lat}, neel_sector_sz(lat)).first;
}

} // namespace

TEST_CASE("structure parsing") {
    auto lat = make_alternating(14, half, three_half, Boundary::Ring);
    const auto neel = neel_configuration(lat);

    SUBCASE("Neel parses to one full-length gap") {
        const auto p = parse_structures(lat, neel);
        CHECK(p.structures.empty());
        REQUIRE(p.gaps.size() == 1);
        CHECK(p.gaps[0] == 14);
        CHECK(p.in_sector);
    }
    SUBCASE("single mu-magnon is a length-2 small-first structure") {
        const auto p = parse_structures(lat, *create_mumagnon(lat, neel, 0, 1));
        REQUIRE(p.structures.size() == 1);
        CHECK(p.structures[0].length() == 2);
        CHECK(p.structures[0].starts_small);
        CHECK(p.structures[0].values[0] == half);
        CHECK(p.structures[0].values[1] == half);
        CHECK(p.gaps == std::vector<int>{12});
    }
    SUBCASE("structures never straddle the ring seam") {
        // magnon flipped across sites (14,1): compact large-first window
        const auto c = *create_mumagnon(lat, neel, 0, 13);
        const auto p = parse_structures(lat, c);
        REQUIRE(p.structures.size() == 1);
        CHECK(p.structures[0].length() == 2);
        CHECK_FALSE(p.structures[0].starts_small);
        CHECK(p.structures[0].start == 13);
    }
    SUBCASE("split mu-magnon keeps its intact middle in one window") {
        const auto c = split_configuration(lat, 0, 2);
        const auto p = parse_structures(lat, c);
        REQUIRE(p.structures.size() == 1);
        CHECK(p.structures[0].length() == 4);
        CHECK(p.structures[0].values[0] == half);
        CHECK(p.structures[0].values[1] == three_half);
        CHECK(p.structures[0].values[2] == -half);
        CHECK(p.structures[0].values[3] == half);
    }
    SUBCASE("two structures and their gaps") {
        auto c = *create_mumagnon(lat, neel, 0, 1);
        c = *create_mumagnon(lat, c, 4, 5);
        const auto p = parse_structures(lat, c);
        REQUIRE(p.structures.size() == 2);
        CHECK(p.gaps == std::vector<int>{2, 8});
    }
    SUBCASE("configurations outside the Neel sector are flagged") {
        SpinConfiguration c = neel;
        c.levels[0] = 1;  // raise one small spin only
        const auto p = parse_structures(lat, c);
        CHECK_FALSE(p.in_sector);
    }
}

TEST_CASE("parse round-trips over whole sectors") {
    for (int n : {10, 12}) {
        for (auto boundary : {Boundary::Ring, Boundary::Open}) {
            auto lat = make_alternating(n, half, three_half, boundary, 1.0, 0.0);
            auto basis = enumerate_sector(lat, neel_sector_sz(lat));
            for (size_t i = 0; i < basis.size(); ++i) {
                const auto c = basis.config(i);
                const auto p = parse_structures(lat, c);
                REQUIRE(p.in_sector);
                CHECK(reassemble(lat, p) == c);
                int covered = std::accumulate(p.gaps.begin(), p.gaps.end(), 0);
                for (const auto& s : p.structures) covered += s.length();
                CHECK(covered == lat.n_sites);
            }
        }
    }
}

TEST_CASE("mu-magnon counting") {
    auto lat = make_alternating(14, half, three_half, Boundary::Ring);
    const auto neel = neel_configuration(lat);
    CHECK(count_mumagnons(lat, neel) == 0);
    CHECK(count_changed_large_spins(lat, neel) == 0);

    // overlapping pair: two raised small spins, one doubly lowered large spin
    auto overlap = *create_mumagnon(lat, *create_mumagnon(lat, neel, 0, 1), 2, 1);
    CHECK(count_mumagnons(lat, overlap) == 2);
    CHECK(count_changed_large_spins(lat, overlap) == 1);

    // neighboring pair: two raised, two lowered
    auto neigh = *create_mumagnon(lat, *create_mumagnon(lat, neel, 0, 1), 2, 3);
    CHECK(count_mumagnons(lat, neigh) == 2);
    CHECK(count_changed_large_spins(lat, neigh) == 2);
}

TEST_CASE("dictionary built from a small reference ring") {
    const auto ref = solve_ring(10);
    const auto& lat = ref.basis.lattice();
    const auto dict = build_dictionary(ref);

    SUBCASE("singles reproduce measured relative amplitudes") {
        const auto mu = *create_mumagnon(lat, neel_configuration(lat), 0, 1);
        const auto key = key_of(parse_structures(lat, mu).structures[0]);
        REQUIRE(dict.single(key).has_value());
        CHECK(*dict.single(key) == doctest::Approx(relative_amplitude(ref, mu)).epsilon(1e-10));
    }
    SUBCASE("estimates on isolated structures equal their singles entries exactly") {
        for (size_t i = 0; i < ref.basis.size(); ++i) {
            const auto c = ref.basis.config(i);
            const auto p = parse_structures(lat, c);
            if (p.structures.size() != 1 || p.structures[0].length() > dict.max_structure_len)
                continue;
            const auto entry = dict.single(key_of(p.structures[0]));
            REQUIRE(entry.has_value());
            CHECK(approximate_relative_amplitude(lat, c, dict) == *entry);
        }
    }
    SUBCASE("the Neel state estimates to one and unknown structures to zero") {
        CHECK(approximate_relative_amplitude(lat, neel_configuration(lat), dict) == 1.0);
        StructureDictionary empty;
        const auto mu = *create_mumagnon(lat, neel_configuration(lat), 0, 1);
        CHECK(approximate_relative_amplitude(lat, mu, empty) == 0.0);
    }
    SUBCASE("far-separated pairs multiply") {
        auto c = *create_mumagnon(lat, neel_configuration(lat), 0, 1);
        c = *create_mumagnon(lat, c, 6, 7);  // gaps 4 and 4
        const auto mu = *create_mumagnon(lat, neel_configuration(lat), 0, 1);
        const double single = relative_amplitude(ref, mu);
        CHECK(approximate_relative_amplitude(lat, c, dict) ==
              doctest::Approx(single * single).epsilon(5e-3));
    }
    SUBCASE("rejects non-ring references") {
        auto open = make_alternating(10, half, three_half, Boundary::Open, 1.0, 0.1);
        auto gs = ground_state(HamiltonianSpec{open}, neel_sector_sz(open)).first;
        CHECK_THROWS_AS(build_dictionary(gs), std::invalid_argument);
    }
}

TEST_CASE("dictionary JSON round trip") {
    const auto ref = solve_ring(8);
    const auto dict = build_dictionary(ref);
    std::ostringstream os;
    write_dictionary(os, dict);
    std::istringstream is(os.str());
    const auto loaded = read_dictionary(is);
    CHECK(loaded.singles == dict.singles);
    CHECK(loaded.pairs == dict.pairs);
    CHECK(loaded.provenance.n_sites == 8);
    CHECK(loaded.max_structure_len == dict.max_structure_len);

    std::istringstream junk("{\"format\":\"something-else\"}");
    CHECK_THROWS(read_dictionary(junk));
}

TEST_CASE("candidate generation") {
    const auto ref = solve_ring(8);
    const auto& lat = ref.basis.lattice();
    const auto dict = build_dictionary(ref);

    SUBCASE("threshold at or above one keeps only the Neel state") {
        const auto cands = generate_candidates(lat, dict, 1.0);
        REQUIRE(cands.size() == 1);
        CHECK(cands[0] == neel_configuration(lat));
    }
    SUBCASE("no pruning recovers the whole sector") {
        CandidateOptions loose;
        loose.max_mumagnons = lat.n_sites;
        loose.max_deep_lowered = lat.n_sites;
        StructureDictionary everything = dict;
        // make every structure known so only the threshold could prune
        auto basis = enumerate_sector(lat, neel_sector_sz(lat));
        everything.max_structure_len = lat.n_sites;
        for (size_t i = 0; i < basis.size(); ++i) {
            const auto p = parse_structures(lat, basis.config(i));
            for (const auto& s : p.structures)
                everything.singles.emplace(key_of(s), 1.0);
        }
        const auto cands = generate_candidates(lat, everything, 0.0, loose);
        CHECK(cands.size() == basis.size());
        for (size_t i = 0; i + 1 < cands.size(); ++i)
            CHECK(pack(lat, cands[i]) < pack(lat, cands[i + 1]));  // deterministic basis order
    }
    SUBCASE("a Neel-only dictionary yields the Neel product state") {
        StructureDictionary neel_only;
        const auto approx = approximate_ground_state(lat, neel_only, 1e-3);
        REQUIRE(approx.size() == 1);
        CHECK(approx.packed[0] == pack(lat, neel_configuration(lat)));
        CHECK(approx.amp(0) == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("in-sample estimates track the exact amplitudes at the reference size") {
    const auto ref = solve_ring(14);
    const auto& lat = ref.basis.lattice();
    const auto dict = build_dictionary(ref);
    const double a_neel = neel_amplitude(ref);
    std::vector<double> rel_err;
    for (const auto& c : generate_candidates(lat, dict, 1e-3)) {
        const double exact = amplitude(ref, c) / a_neel;
        const double est = approximate_relative_amplitude(lat, c, dict);
        CHECK(exact * est > 0.0);  // sign agreement over every retained configuration
        rel_err.push_back(std::abs(est / exact - 1.0));
    }
    REQUIRE(rel_err.size() > 2000);
    std::sort(rel_err.begin(), rel_err.end());
    CHECK(rel_err[rel_err.size() / 2] < 0.10);
}

TEST_CASE("open-chain split amplitudes track the ring away from the ends") {
    auto ring = make_alternating(12, half, three_half, Boundary::Ring, 1.0, 0.1);
    auto open = make_alternating(12, half, three_half, Boundary::Open, 1.0, 0.1);
    const auto gr = ground_state(HamiltonianSpec{ring}, HalfInt(6)).first;
    const auto go = ground_state(HamiltonianSpec{open}, HalfInt(6)).first;
    for (int d : {0, 2}) {
        const double ring_val = measured_split_amplitude(gr, d, 0);
        // windows at least two sites clear of both chain ends
        for (int m = 4; m + 1 + d < open.n_sites - 2; m += 2) {
            const double open_val = measured_split_amplitude(go, d, m);
            CHECK(std::abs(open_val / ring_val - 1.0) < 0.02);
        }
        // the flipped end spin-1/2 is the exception
        CHECK(std::abs(measured_split_amplitude(go, d, 0) / ring_val - 1.0) > 0.02);
    }
}

TEST_CASE("split mu-magnon fit and measurement") {
    CHECK(split_magnon_fit(0) == doctest::Approx(-0.27295).epsilon(1e-12));
    for (double d = 0; d < 8; d += 1)
        CHECK(std::abs(split_magnon_fit(d + 1)) < std::abs(split_magnon_fit(d)));
    CHECK_THROWS_AS(split_magnon_fit(10.5), std::domain_error);
    CHECK_THROWS_AS(split_magnon_fit(-1.0), std::domain_error);

    auto lat = make_alternating(10, half, three_half, Boundary::Ring);
    CHECK_THROWS_AS(split_configuration(lat, 0, 1), std::invalid_argument);  // odd gap
    CHECK_THROWS_AS(split_configuration(lat, 1, 2), std::invalid_argument);  // large-spin start
    auto open = make_alternating(10, half, three_half, Boundary::Open);
    CHECK_THROWS_AS(split_configuration(open, 6, 4), std::invalid_argument);  // exceeds the chain

    const auto ref = solve_ring(10);
    double prev = 1.0;
    for (int d : {0, 2, 4}) {
        const double a = measured_split_amplitude(ref, d);
        CHECK(a < 0.0);
        CHECK(std::abs(a) < prev);  // strictly decaying with the gap
        prev = std::abs(a);
    }
}
