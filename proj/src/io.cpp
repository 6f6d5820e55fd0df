#include "polyhjb/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace polyhjb {

namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void fail(const fs::path& file, long line, const std::string& what) {
    throw IoError(file.string() + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_in(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    return in;
}

std::ofstream open_out(const fs::path& file) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    return out;
}

}  // namespace

void write_matrix_market(const fs::path& file, const Matrix& M) {
    auto out = open_out(file);
    out << "%%MatrixMarket matrix coordinate real general\n";
    long nnz = 0;
    for (long j = 0; j < M.cols(); ++j)
        for (long i = 0; i < M.rows(); ++i)
            if (M(i, j) != 0.0) ++nnz;
    out << M.rows() << " " << M.cols() << " " << nnz << "\n";
    for (long j = 0; j < M.cols(); ++j)
        for (long i = 0; i < M.rows(); ++i)
            if (M(i, j) != 0.0)
                out << (i + 1) << " " << (j + 1) << " " << fmt17(M(i, j)) << "\n";
}

Matrix read_matrix_market(const fs::path& file) {
    auto in = open_in(file);
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) fail(file, 1, "empty file");
    ++lineno;
    {
        std::istringstream hs(line);
        std::string banner, object, format, field, symmetry;
        hs >> banner >> object >> format >> field >> symmetry;
        if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate" ||
            field != "real" || symmetry != "general")
            fail(file, lineno, "unsupported MatrixMarket header: '" + line + "'");
    }
    long rows = -1, cols = -1, nnz = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ss(line);
        if (!(ss >> rows >> cols >> nnz)) fail(file, lineno, "malformed size line");
        break;
    }
    if (rows < 0) fail(file, lineno, "missing size line");
    Matrix M = Matrix::Zero(rows, cols);
    long seen = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ss(line);
        long i, j;
        double v;
        if (!(ss >> i >> j >> v)) fail(file, lineno, "malformed entry");
        if (i < 1 || i > rows || j < 1 || j > cols)
            fail(file, lineno, "index (" + std::to_string(i) + "," + std::to_string(j) +
                                   ") out of range for " + std::to_string(rows) + "x" +
                                   std::to_string(cols));
        M(i - 1, j - 1) = v;
        ++seen;
    }
    if (seen != nnz)
        fail(file, lineno, "entry count " + std::to_string(seen) + " != declared " +
                               std::to_string(nnz));
    return M;
}

void write_vec(const fs::path& file, const Vector& v) {
    auto out = open_out(file);
    for (long i = 0; i < v.size(); ++i) out << fmt17(v[i]) << "\n";
}

Vector read_vec(const fs::path& file) {
    auto in = open_in(file);
    std::vector<double> vals;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        char* end = nullptr;
        double v = std::strtod(line.c_str(), &end);
        if (end == line.c_str()) fail(file, lineno, "not a number: '" + line + "'");
        vals.push_back(v);
    }
    Vector out(static_cast<long>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i) out[static_cast<long>(i)] = vals[i];
    return out;
}

void write_coo3(const fs::path& file, const SymQuadTensor& H) {
    auto out = open_out(file);
    out << "%%Coo3 " << H.dim() << "\n";
    for (const auto& e : H.entries())
        out << e.i << " " << e.j << " " << e.k << " " << fmt17(e.v) << "\n";
}

SymQuadTensor read_coo3(const fs::path& file) {
    auto in = open_in(file);
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) fail(file, 1, "empty file");
    ++lineno;
    int n = -1;
    {
        std::istringstream hs(line);
        std::string banner;
        hs >> banner >> n;
        if (banner != "%%Coo3" || n < 0) fail(file, lineno, "expected header '%%Coo3 n'");
    }
    std::vector<TensorEntry> raw;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ss(line);
        int i, j, k;
        double v;
        if (!(ss >> i >> j >> k >> v)) fail(file, lineno, "malformed entry");
        if (i < 0 || i >= n || j < 0 || j >= n || k < 0 || k >= n)
            fail(file, lineno, "index out of range for n=" + std::to_string(n));
        raw.push_back({i, j, k, v});
    }
    return symmetrize_tensor(raw, n);
}

void save_system(const fs::path& dir, const QuadraticSystem& sys) {
    fs::create_directories(dir);
    write_matrix_market(dir / "E.mtx", sys.E);
    write_matrix_market(dir / "A.mtx", sys.Astiff);
    write_matrix_market(dir / "B.mtx", sys.B);
    write_matrix_market(dir / "C.mtx", sys.C);
    if (sys.G) write_matrix_market(dir / "G.mtx", *sys.G);
    write_coo3(dir / "H.coo3", sys.H);
    if (sys.zbar) write_vec(dir / "zbar.vec", *sys.zbar);
    if (sys.f_z) write_vec(dir / "fz.vec", *sys.f_z);
    if (sys.f_q) write_vec(dir / "fq.vec", *sys.f_q);
}

QuadraticSystem load_system(const fs::path& dir) {
    QuadraticSystem sys;
    sys.E = read_matrix_market(dir / "E.mtx");
    sys.Astiff = read_matrix_market(dir / "A.mtx");
    sys.B = read_matrix_market(dir / "B.mtx");
    sys.C = read_matrix_market(dir / "C.mtx");
    if (fs::exists(dir / "G.mtx")) sys.G = read_matrix_market(dir / "G.mtx");
    sys.H = read_coo3(dir / "H.coo3");
    if (fs::exists(dir / "zbar.vec")) sys.zbar = read_vec(dir / "zbar.vec");
    if (fs::exists(dir / "fz.vec")) sys.f_z = read_vec(dir / "fz.vec");
    if (fs::exists(dir / "fq.vec")) sys.f_q = read_vec(dir / "fq.vec");
    sys.validate();
    return sys;
}

namespace {

void hash_bytes(std::uint64_t& h, const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
}

void hash_matrix(std::uint64_t& h, const Matrix& M) {
    long shape[2] = {M.rows(), M.cols()};
    hash_bytes(h, shape, sizeof shape);
    hash_bytes(h, M.data(), sizeof(double) * M.size());
}

}  // namespace

std::string system_hash(const QuadraticSystem& sys) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    hash_matrix(h, sys.E);
    hash_matrix(h, sys.Astiff);
    hash_matrix(h, sys.B);
    hash_matrix(h, sys.C);
    if (sys.G) hash_matrix(h, *sys.G);
    for (const auto& e : sys.H.entries()) {
        hash_bytes(h, &e.i, sizeof e.i);
        hash_bytes(h, &e.j, sizeof e.j);
        hash_bytes(h, &e.k, sizeof e.k);
        hash_bytes(h, &e.v, sizeof e.v);
    }
    if (sys.zbar) hash_bytes(h, sys.zbar->data(), sizeof(double) * sys.zbar->size());
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

}  // namespace polyhjb
