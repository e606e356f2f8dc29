#include "qspec/grid_array.hpp"

namespace qspec {

std::vector<double> linspace(double start, double stop, std::size_t count) {
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = start;
        return out;
    }
    const double step = (stop - start) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = start + static_cast<double>(i) * step;
    if (count > 1) out.back() = stop;
    return out;
}

}  // namespace qspec
