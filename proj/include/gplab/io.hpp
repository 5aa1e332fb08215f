#pragma once

#include <string>
#include <vector>

#include "gplab/fock.hpp"
#include "gplab/grid.hpp"

namespace gplab::io {

// GPF1: "GPF1", uint32 dim, uint32 points[dim], float64 spacing[dim], then row-major (re, im)
// float64 pairs. All little-endian.
void write_field(const std::string& path, const gp::Field& f);
gp::Field read_field(const std::string& path);

// MBF1: "MBF1", uint32 modes, uint32 particles, uint64 dimension, then (re, im) float64 pairs.
void write_state(const std::string& path, const fock::FockVector& psi);
fock::FockVector read_state(const std::string& path);

void write_coo(const std::string& path, const fock::SparseOperator& op);

// Numbers are written with %.17g so the files round-trip exactly.
std::string format_double(double x);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace gplab::io
