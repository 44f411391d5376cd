#include "pcp/matrix_market.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pcp {

void mm_write(const std::string& path, const CsrMatrix& a) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("mm_write: cannot open " + path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.n_rows << " " << a.n_cols << " " << a.nnz() << "\n";
    char buf[64];
    for (int i = 0; i < a.n_rows; ++i) {
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i + 1, a.col_idx[k] + 1, a.values[k]);
            out << buf;
        }
    }
    if (!out) throw std::runtime_error("mm_write: write failed for " + path);
}

CsrMatrix mm_read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("mm_read: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("mm_read: empty file " + path);
    if (line.rfind("%%MatrixMarket matrix coordinate real general", 0) != 0)
        throw std::runtime_error("mm_read: unsupported header in " + path + ": " + line);
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream sizes(line);
    int n_rows = 0, n_cols = 0, nnz = 0;
    if (!(sizes >> n_rows >> n_cols >> nnz))
        throw std::runtime_error("mm_read: malformed size line in " + path);
    std::vector<Triplet> entries;
    entries.reserve(nnz);
    for (int k = 0; k < nnz; ++k) {
        int i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v))
            throw std::runtime_error("mm_read: truncated entry list in " + path);
        entries.push_back({i - 1, j - 1, v});
    }
    return csr_from_triplets(n_rows, n_cols, std::move(entries));
}

void vec_write(const std::string& path, const std::vector<double>& v) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("vec_write: cannot open " + path);
    char buf[64];
    for (double x : v) {
        std::snprintf(buf, sizeof buf, "%.17g\n", x);
        out << buf;
    }
    if (!out) throw std::runtime_error("vec_write: write failed for " + path);
}

std::vector<double> vec_read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("vec_read: cannot open " + path);
    std::vector<double> v;
    double x = 0.0;
    while (in >> x) v.push_back(x);
    if (!in.eof()) throw std::runtime_error("vec_read: malformed value in " + path);
    return v;
}

}  // namespace pcp
