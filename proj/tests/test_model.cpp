#include <doctest.h>

#include <array>
#include <filesystem>
#include <fstream>

#include "qlr/errors.hpp"
#include "qlr/model.hpp"
#include "qlr/rng.hpp"

using namespace qlr;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
    const auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
    return path;
}

} // namespace

TEST_CASE("fcidump dimer file equals the built-in model") {
    const auto path = temp_file("qlr_dimer.fcidump",
                                "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n"
                                "-1.0 1 2 0 0\n"
                                "4.0 1 1 1 1\n"
                                "4.0 2 2 2 2\n"
                                "0.0 0 0 0 0\n");
    const Hamiltonian a = load_fcidump(path);
    const Hamiltonian b = build_hubbard_dimer(1.0, 4.0);
    CHECK(a.n_orbs == b.n_orbs);
    CHECK(a.n_electrons == b.n_electrons);
    CHECK(a.e_core == b.e_core);
    CHECK(a.h == b.h);
    CHECK(a.eri.raw() == b.eri.raw());
}

TEST_CASE("fcidump reads the generated C2 header") {
    if (!std::filesystem::exists("data/c2_1.242_sto6g.fcidump")) {
        MESSAGE("data fixture missing; skipping");
        return;
    }
    const Hamiltonian H = load_fcidump("data/c2_1.242_sto6g.fcidump");
    CHECK(H.n_orbs == 10);
    CHECK(H.n_electrons == 12);
    CHECK(H.e_core > 0.0);  // nuclear repulsion
}

TEST_CASE("fcidump error paths") {
    SUBCASE("index out of range reports the line") {
        const auto path = temp_file("qlr_bad_index.fcidump",
                                    "&FCI NORB=10,NELEC=2,\n&END\n1.0 1 11 0 0\n");
        CHECK_THROWS_AS(load_fcidump(path), BoundsError);
        try {
            load_fcidump(path);
        } catch (const BoundsError& e) {
            CHECK(std::string(e.what()).find(":3") != std::string::npos);
        }
    }
    SUBCASE("missing NORB") {
        const auto path = temp_file("qlr_nonorb.fcidump", "&FCI NELEC=2,\n&END\n");
        CHECK_THROWS_WITH_AS(load_fcidump(path), doctest::Contains("NORB"), FormatError);
    }
    SUBCASE("missing NELEC") {
        const auto path = temp_file("qlr_nonelec.fcidump", "&FCI NORB=2,\n&END\n");
        CHECK_THROWS_WITH_AS(load_fcidump(path), doctest::Contains("NELEC"), FormatError);
    }
    SUBCASE("conflicting duplicate values") {
        const auto path = temp_file("qlr_conflict.fcidump",
                                    "&FCI NORB=2,NELEC=2,\n&END\n"
                                    "1.0 1 2 1 1\n0.5 2 1 1 1\n");
        CHECK_THROWS_AS(load_fcidump(path), ConflictError);
    }
    SUBCASE("equal duplicates are fine") {
        const auto path = temp_file("qlr_dup_ok.fcidump",
                                    "&FCI NORB=2,NELEC=2,\n&END\n"
                                    "1.0 1 2 1 1\n1.0 2 1 1 1\n");
        CHECK_NOTHROW(load_fcidump(path));
    }
    SUBCASE("comment lines are permitted") {
        const auto path = temp_file("qlr_comments.fcidump",
                                    "# leading comment\n&FCI NORB=2,NELEC=2,\n&END\n"
                                    "# another\n1.0 1 1 0 0\n");
        CHECK(load_fcidump(path).h(0, 0) == 1.0);
    }
    SUBCASE("unsupported index pattern") {
        const auto path = temp_file("qlr_pattern.fcidump",
                                    "&FCI NORB=2,NELEC=2,\n&END\n1.0 1 0 0 0\n");
        CHECK_THROWS_AS(load_fcidump(path), FormatError);
    }
}

TEST_CASE("fcidump permutation order does not matter") {
    const std::string base = "&FCI NORB=4,NELEC=4,\n&END\n";
    const std::string v = "0.25";
    const std::vector<std::array<int, 4>> orders = {{1, 2, 3, 4}, {2, 1, 3, 4}, {1, 2, 4, 3},
                                                    {2, 1, 4, 3}, {3, 4, 1, 2}, {4, 3, 1, 2},
                                                    {3, 4, 2, 1}, {4, 3, 2, 1}};
    std::string all = base;
    for (const auto& o : orders)
        all += v + " " + std::to_string(o[0]) + " " + std::to_string(o[1]) + " " +
               std::to_string(o[2]) + " " + std::to_string(o[3]) + "\n";
    const Hamiltonian a = load_fcidump(temp_file("qlr_perm_all.fcidump", all));
    const Hamiltonian b = load_fcidump(temp_file("qlr_perm_one.fcidump", base + v + " 4 3 2 1\n"));
    CHECK(a.eri.raw() == b.eri.raw());
    CHECK(a.eri(0, 1, 2, 3) == 0.25);
    CHECK(a.eri(3, 2, 1, 0) == 0.25);
}

TEST_CASE("fcidump write/load round trip is bit exact") {
    RngStream rng(5);
    Hamiltonian H;
    H.n_orbs = 3;
    H.n_electrons = 4;
    H.e_core = rng.next() * 1e3;
    H.h = Eigen::MatrixXd::Zero(3, 3);
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q <= p; ++q) H.h(p, q) = H.h(q, p) = rng.next() - 0.5;
    H.eri = EriTable(3);
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q <= p; ++q)
            for (int r = 0; r <= p; ++r)
                for (int s = 0; s <= ((r == p) ? q : r); ++s)
                    H.eri.set(p, q, r, s, (rng.next() - 0.5) / 3.0);

    const auto path = (std::filesystem::temp_directory_path() / "qlr_roundtrip.fcidump").string();
    write_fcidump(H, path);
    const Hamiltonian back = load_fcidump(path);
    CHECK(back.e_core == H.e_core);
    CHECK(back.h == H.h);
    CHECK(back.eri.raw() == H.eri.raw());

    const auto path2 =
        (std::filesystem::temp_directory_path() / "qlr_roundtrip2.fcidump").string();
    write_fcidump(back, path2);
    std::ifstream f1(path), f2(path2);
    const std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
}

TEST_CASE("one-body operator file") {
    SUBCASE("single symmetric entry") {
        const auto path = temp_file("qlr_op1.txt", "x 1 2 0.5\n");
        const auto ops = load_onebody_operators(path, 2);
        REQUIRE(ops.size() == 1);
        CHECK(ops[0].label == "x");
        CHECK(ops[0].mat(0, 1) == 0.5);
        CHECK(ops[0].mat(1, 0) == 0.5);
        CHECK(ops[0].mat(0, 0) == 0.0);
        CHECK(ops[0].spin_diagonal);
    }
    SUBCASE("empty file gives an empty list") {
        const auto path = temp_file("qlr_op_empty.txt", "# nothing here\n");
        CHECK(load_onebody_operators(path, 2).empty());
    }
    SUBCASE("conflicting duplicates") {
        const auto path = temp_file("qlr_op_conflict.txt", "x 1 1 0.3\nx 1 1 0.4\n");
        CHECK_THROWS_AS(load_onebody_operators(path, 2), ConflictError);
    }
    SUBCASE("bad label characters") {
        const auto path = temp_file("qlr_op_badlabel.txt", "x! 1 1 0.3\n");
        CHECK_THROWS_AS(load_onebody_operators(path, 2), FormatError);
    }
    SUBCASE("index out of range") {
        const auto path = temp_file("qlr_op_oob.txt", "x 1 3 0.3\n");
        CHECK_THROWS_AS(load_onebody_operators(path, 2), BoundsError);
    }
    SUBCASE("several labels keep file order") {
        const auto path = temp_file("qlr_op_multi.txt", "z 1 1 1.0\nx 1 2 0.5\nz 2 2 -1.0\n");
        const auto ops = load_onebody_operators(path, 2);
        REQUIRE(ops.size() == 2);
        CHECK(ops[0].label == "z");
        CHECK(ops[1].label == "x");
        CHECK(ops[0].mat(1, 1) == -1.0);
    }
}

TEST_CASE("hubbard dimer fields") {
    const Hamiltonian H = build_hubbard_dimer(1.5, 3.0);
    CHECK(H.n_orbs == 2);
    CHECK(H.n_electrons == 2);
    CHECK(H.h(0, 1) == -1.5);
    CHECK(H.h(0, 0) == 0.0);
    CHECK(H.eri(0, 0, 0, 0) == 3.0);
    CHECK(H.eri(1, 1, 1, 1) == 3.0);
    CHECK(H.eri(0, 0, 1, 1) == 0.0);
    CHECK(H.e_core == 0.0);
}

TEST_CASE("content hash distinguishes Hamiltonians") {
    const Hamiltonian a = build_hubbard_dimer(1.0, 4.0);
    const Hamiltonian b = build_hubbard_dimer(1.0, 4.0 + 1e-14);
    CHECK(content_hash(a) == content_hash(build_hubbard_dimer(1.0, 4.0)));
    CHECK(content_hash(a) != content_hash(b));
}
