#pragma once

#include <filesystem>
#include <string>

#include "polyhjb/model.hpp"

namespace polyhjb {

/// Coordinate MatrixMarket ("%%MatrixMarket matrix coordinate real general");
/// values round-trip bit-exactly via 17 significant digits.
void write_matrix_market(const std::filesystem::path& file, const Matrix& M);
Matrix read_matrix_market(const std::filesystem::path& file);

/// Plain text vector, one value per line.
void write_vec(const std::filesystem::path& file, const Vector& v);
Vector read_vec(const std::filesystem::path& file);

/// Sparse 3-tensor: header "%%Coo3 n", then 0-based "i j k value" lines.
void write_coo3(const std::filesystem::path& file, const SymQuadTensor& H);
SymQuadTensor read_coo3(const std::filesystem::path& file);

/// System directory: E.mtx, A.mtx, B.mtx, C.mtx, optional G.mtx, H.coo3,
/// optional zbar.vec / fz.vec / fq.vec.
void save_system(const std::filesystem::path& dir, const QuadraticSystem& sys);
QuadraticSystem load_system(const std::filesystem::path& dir);

/// FNV-1a hash over the exact byte content of the system matrices; used to
/// tie persisted gains to the system they were computed for.
std::string system_hash(const QuadraticSystem& sys);

}  // namespace polyhjb
