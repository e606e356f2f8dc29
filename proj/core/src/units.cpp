#include "qspec/units.hpp"

#include "qspec/error.hpp"

namespace qspec {

double UnitContext::scale_to_Hz() const noexcept {
    switch (unit) {
    case Unit::GHz: return 1e9;
    case Unit::MHz: return 1e6;
    case Unit::kHz: return 1e3;
    case Unit::Hz: return 1e0;
    }
    return 1e9;
}

std::string_view UnitContext::name() const noexcept {
    switch (unit) {
    case Unit::GHz: return "GHz";
    case Unit::MHz: return "MHz";
    case Unit::kHz: return "kHz";
    case Unit::Hz: return "Hz";
    }
    return "GHz";
}

std::array<std::string_view, 4> supported_units() noexcept {
    return {"GHz", "MHz", "kHz", "Hz"};
}

UnitContext parse_units(std::string_view name) {
    if (name == "GHz") return {Unit::GHz};
    if (name == "MHz") return {Unit::MHz};
    if (name == "kHz") return {Unit::kHz};
    if (name == "Hz") return {Unit::Hz};
    throw Error(ErrorKind::InvalidUnit, "unsupported unit '" + std::string(name) + "'", "units");
}

double to_standard_units(double value, const UnitContext& ctx) noexcept {
    return value * ctx.scale_to_Hz();
}

double from_standard_units(double value_hz, const UnitContext& ctx) noexcept {
    return value_hz / ctx.scale_to_Hz();
}

double units_scale_factor(const UnitContext& ctx) noexcept { return ctx.scale_to_Hz(); }

}  // namespace qspec
