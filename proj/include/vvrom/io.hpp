#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "vvrom/common.hpp"

namespace vvrom {

// Little binary helpers shared by the bundle artifacts. Every file starts
// with a 4-byte tag so mixed-up paths fail loudly.

void write_dense(const std::string& path, const MatX& m);
MatX read_dense(const std::string& path);

void write_vector(const std::string& path, const VecX& v);
VecX read_vector(const std::string& path);

void write_sparse(const std::string& path, const SpMat& m);
SpMat read_sparse(const std::string& path);

void write_int_vector(const std::string& path, const std::vector<int>& v);
std::vector<int> read_int_vector(const std::string& path);

}  // namespace vvrom
