#include "pshlab/flags.hpp"

namespace pshlab {

std::string describe_flags(std::uint32_t mask) {
    if (mask == flag_ok) return "ok";
    std::string s;
    auto add = [&](std::uint32_t bit, const char* name) {
        if (mask & bit) {
            if (!s.empty()) s += "|";
            s += name;
        }
    };
    add(flag_tolerance_not_met, "tolerance-not-met");
    add(flag_empty_region, "empty-region");
    add(flag_basis_unstable, "basis-unstable");
    add(flag_basis_truncated, "basis-truncated");
    add(flag_point_dropped, "point-dropped");
    return s;
}

} // namespace pshlab
