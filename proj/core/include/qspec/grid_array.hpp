#pragma once

#include "qspec/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qspec {

struct Axis {
    std::string name;
    std::vector<double> values;

    bool operator==(const Axis&) const = default;
};

/// Index of the grid value nearest to `value`; exact ties go to the lower index.
inline std::size_t nearest_index(std::span<const double> values, double value);

/// Row-major n-dimensional array whose leading dimensions are named parameter
/// axes and whose trailing dimensions hold per-point data.
template <class T>
class NamedGridArray {
public:
    NamedGridArray() = default;
    NamedGridArray(std::vector<Axis> axes, std::vector<std::size_t> trailing, T fill = T{})
        : axes_(std::move(axes)), trailing_(std::move(trailing)) {
        data_.assign(grid_size() * record_size(), fill);
    }

    const std::vector<Axis>& axes() const noexcept { return axes_; }
    const std::vector<std::size_t>& trailing() const noexcept { return trailing_; }

    std::vector<std::size_t> shape() const {
        std::vector<std::size_t> s;
        for (const auto& a : axes_) s.push_back(a.values.size());
        s.insert(s.end(), trailing_.begin(), trailing_.end());
        return s;
    }

    std::size_t grid_size() const noexcept {
        std::size_t n = 1;
        for (const auto& a : axes_) n *= a.values.size();
        return n;
    }

    std::size_t record_size() const noexcept {
        std::size_t n = 1;
        for (auto t : trailing_) n *= t;
        return n;
    }

    std::vector<T>& data() noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    std::span<T> record(std::size_t flat_point) {
        return {data_.data() + flat_point * record_size(), record_size()};
    }
    std::span<const T> record(std::size_t flat_point) const {
        return {data_.data() + flat_point * record_size(), record_size()};
    }

    std::size_t flat_point(std::span<const std::size_t> grid_index) const {
        std::size_t flat = 0;
        for (std::size_t a = 0; a < axes_.size(); ++a) flat = flat * axes_[a].values.size() + grid_index[a];
        return flat;
    }

    std::vector<std::size_t> grid_index(std::size_t flat) const {
        std::vector<std::size_t> idx(axes_.size());
        for (std::size_t a = axes_.size(); a-- > 0;) {
            const std::size_t len = axes_[a].values.size();
            idx[a] = flat % len;
            flat /= len;
        }
        return idx;
    }

    std::size_t axis_position(const std::string& name) const {
        for (std::size_t a = 0; a < axes_.size(); ++a)
            if (axes_[a].name == name) return a;
        throw Error(ErrorKind::UnknownAxis, "unknown axis '" + name + "'", name);
    }

    /// Fixes `name` at grid index `index`, removing that axis.
    NamedGridArray slice_index(const std::string& name, std::size_t index) const {
        const std::size_t pos = axis_position(name);
        if (index >= axes_[pos].values.size())
            throw Error(ErrorKind::UnknownAxis, "index out of range for axis '" + name + "'", name);
        std::vector<Axis> kept;
        for (std::size_t a = 0; a < axes_.size(); ++a)
            if (a != pos) kept.push_back(axes_[a]);
        NamedGridArray out(std::move(kept), trailing_);
        const std::size_t rec = record_size();
        std::vector<std::size_t> full(axes_.size());
        for (std::size_t f = 0; f < out.grid_size(); ++f) {
            const auto sub = out.grid_index(f);
            for (std::size_t a = 0, s = 0; a < axes_.size(); ++a) full[a] = (a == pos) ? index : sub[s++];
            const std::size_t src = flat_point(full);
            std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(src * rec), rec,
                        out.data_.begin() + static_cast<std::ptrdiff_t>(f * rec));
        }
        return out;
    }

    /// Value-addressed slice: nearest grid value, ties to the lower index.
    NamedGridArray slice(const std::string& name, double value) const {
        const std::size_t pos = axis_position(name);
        return slice_index(name, nearest_index(axes_[pos].values, value));
    }

private:
    std::vector<Axis> axes_;
    std::vector<std::size_t> trailing_;
    std::vector<T> data_;
};

inline std::size_t nearest_index(std::span<const double> values, double value) {
    std::size_t best = 0;
    double best_dist = std::abs(values[0] - value);
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double d = std::abs(values[i] - value);
        if (d < best_dist) {
            best = i;
            best_dist = d;
        }
    }
    return best;
}

std::vector<double> linspace(double start, double stop, std::size_t count);

}  // namespace qspec
