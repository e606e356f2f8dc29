#pragma once

#include <array>
#include <string>
#include <string_view>

namespace qspec {

/// Frequency units for energies. Energies are plain frequencies (h = 1),
/// never angular frequencies.
enum class Unit { GHz, MHz, kHz, Hz };

/// Immutable unit context threaded through every computation that needs to
/// relate energies to SI quantities. Default is GHz.
struct UnitContext {
    Unit unit = Unit::GHz;

    /// Multiplier taking a value in this unit to Hz.
    double scale_to_Hz() const noexcept;
    std::string_view name() const noexcept;

    bool operator==(const UnitContext&) const = default;
};

/// Unit names in fixed order; the first entry is the default.
std::array<std::string_view, 4> supported_units() noexcept;

/// Parses "GHz", "MHz", "kHz" or "Hz". Throws Error(InvalidUnit) otherwise.
UnitContext parse_units(std::string_view name);

double to_standard_units(double value, const UnitContext& ctx) noexcept;
double from_standard_units(double value_hz, const UnitContext& ctx) noexcept;
double units_scale_factor(const UnitContext& ctx) noexcept;

}  // namespace qspec
