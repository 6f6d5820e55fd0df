#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "polyhjb/io.hpp"
#include "polyhjb/problems.hpp"

using namespace polyhjb;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("polyhjb_io_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

}  // namespace

TEST_CASE("matrix market round trip is bit exact") {
    TempDir tmp;
    Matrix M(3, 2);
    M << 1.0, -2.5, 0.0, 1e-17, M_PI, -1.0 / 3.0;
    write_matrix_market(tmp.path / "m.mtx", M);
    Matrix R = read_matrix_market(tmp.path / "m.mtx");
    REQUIRE(R.rows() == 3);
    REQUIRE(R.cols() == 2);
    CHECK((R - M).norm() == 0.0);
}

TEST_CASE("matrix market rejects malformed headers with file context") {
    TempDir tmp;
    std::ofstream(tmp.path / "bad.mtx") << "%%MatrixMarket matrix array real general\n1 1\n1.0\n";
    CHECK_THROWS_WITH_AS(read_matrix_market(tmp.path / "bad.mtx"),
                         doctest::Contains("bad.mtx"), IoError);
}

TEST_CASE("matrix market rejects out-of-range indices") {
    TempDir tmp;
    std::ofstream(tmp.path / "oor.mtx")
        << "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
    CHECK_THROWS_AS(read_matrix_market(tmp.path / "oor.mtx"), IoError);
}

TEST_CASE("vec round trip is bit exact") {
    TempDir tmp;
    Vector v(4);
    v << -0.1, 2e300, 3e-300, 7.0;
    write_vec(tmp.path / "v.vec", v);
    Vector r = read_vec(tmp.path / "v.vec");
    CHECK((r - v).norm() == 0.0);
}

TEST_CASE("coo3 single entry symmetrizes on load") {
    TempDir tmp;
    std::ofstream(tmp.path / "h.coo3") << "%%Coo3 3\n0 1 2 1.0\n";
    SymQuadTensor H = read_coo3(tmp.path / "h.coo3");
    REQUIRE(H.entries().size() == 2);
    CHECK(H.entries()[0].v == doctest::Approx(0.5));
    CHECK(H.entries()[1].v == doctest::Approx(0.5));
}

TEST_CASE("coo3 rejects bad indices with line numbers") {
    TempDir tmp;
    std::ofstream(tmp.path / "h.coo3") << "%%Coo3 2\n0 1 5 1.0\n";
    CHECK_THROWS_WITH_AS(read_coo3(tmp.path / "h.coo3"), doctest::Contains(":2"), IoError);
}

TEST_CASE("system save/load round trip is bit identical") {
    TempDir tmp;
    auto sys = make_burgers(12, 0.07, 1.5, {{0.2, 0.5}, {0.6, 0.8}});
    save_system(tmp.path / "sys", sys);
    QuadraticSystem back = load_system(tmp.path / "sys");
    CHECK((back.E - sys.E).norm() == 0.0);
    CHECK((back.Astiff - sys.Astiff).norm() == 0.0);
    CHECK((back.B - sys.B).norm() == 0.0);
    CHECK((back.C - sys.C).norm() == 0.0);
    REQUIRE(back.H.entries().size() == sys.H.entries().size());
    for (size_t i = 0; i < sys.H.entries().size(); ++i) {
        CHECK(back.H.entries()[i].i == sys.H.entries()[i].i);
        CHECK(back.H.entries()[i].v == sys.H.entries()[i].v);
    }
    CHECK(system_hash(back) == system_hash(sys));
}

TEST_CASE("constrained system round trip keeps G and the forcing") {
    TempDir tmp;
    auto sys = make_oseen_mac(4, 4, 0.1, OseenZbarSpec{0.5, {}}, {0.25, 0.75, 0.25, 0.75}, 1);
    save_system(tmp.path / "sys", sys);
    QuadraticSystem back = load_system(tmp.path / "sys");
    REQUIRE(back.G.has_value());
    CHECK((*back.G - *sys.G).norm() == 0.0);
    REQUIRE(back.zbar.has_value());
    CHECK((*back.zbar - *sys.zbar).norm() == 0.0);
    REQUIRE(back.f_z.has_value());
    CHECK((*back.f_z - *sys.f_z).norm() == 0.0);
}

TEST_CASE("duplicated G column fails rank validation naming G") {
    TempDir tmp;
    auto sys = make_oseen_mac(4, 4, 0.1, OseenZbarSpec{0.0, {}}, {0.25, 0.75, 0.25, 0.75}, 1);
    Matrix G = *sys.G;
    G.col(1) = G.col(0);  // duplicate
    save_system(tmp.path / "sys", sys);
    write_matrix_market(tmp.path / "sys" / "G.mtx", G);
    CHECK_THROWS_WITH_AS(load_system(tmp.path / "sys"), doctest::Contains("G"),
                         SingularOperatorError);
}

TEST_CASE("system hash distinguishes different systems") {
    auto a = make_burgers(8, 0.1, 0.0, {{0.2, 0.8}});
    auto b = make_burgers(8, 0.1, 0.1, {{0.2, 0.8}});
    CHECK(system_hash(a) != system_hash(b));
}
