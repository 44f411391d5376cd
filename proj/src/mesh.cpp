#include "pcp/mesh.hpp"

#include <stdexcept>
#include <string>

namespace pcp {

UniformMesh build_mesh(int dims, const std::array<double, 2>& low,
                       const std::array<double, 2>& high,
                       const std::array<int, 2>& counts) {
    if (dims != 1 && dims != 2) {
        throw std::invalid_argument("build_mesh: dims must be 1 or 2, got " +
                                    std::to_string(dims));
    }
    UniformMesh m;
    m.dims = dims;
    for (int a = 0; a < dims; ++a) {
        if (counts[a] < 3) {
            throw std::invalid_argument("build_mesh: axis " +
                                        std::to_string(a) + " needs >= 3 nodes, got " +
                                        std::to_string(counts[a]));
        }
        if (!(high[a] > low[a])) {
            throw std::invalid_argument("build_mesh: axis " +
                                        std::to_string(a) +
                                        " bounds are degenerate");
        }
        m.low[a] = low[a];
        m.high[a] = high[a];
        m.counts[a] = counts[a];
        m.h[a] = (high[a] - low[a]) / (counts[a] - 1);
    }
    if (dims == 1) {
        m.counts[1] = 1;
        m.low[1] = m.high[1] = m.h[1] = 0.0;
    }
    return m;
}

}  // namespace pcp
