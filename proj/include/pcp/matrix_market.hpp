#pragma once

#include <string>

#include "pcp/csr.hpp"

namespace pcp {

// Matrix Market "coordinate real general" interchange, 1-indexed entries.

void mm_write(const std::string& path, const CsrMatrix& a);

CsrMatrix mm_read(const std::string& path);

/// Whitespace-separated vector file, one value per line.
void vec_write(const std::string& path, const std::vector<double>& v);

std::vector<double> vec_read(const std::string& path);

}  // namespace pcp
