#pragma once

#include <stdexcept>
#include <string>

namespace msl {

// Three families, mapped one-to-one onto the CLI exit codes 2, 3 and 4.
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct consistency_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define MSL_ERROR(name, base)                                                  \
    struct name : base {                                                       \
        explicit name(const std::string &what) : base(#name ": " + what) {}    \
    };

MSL_ERROR(invalid_sequence, input_error)
MSL_ERROR(invalid_grid, input_error)
MSL_ERROR(variable_mismatch, input_error)
MSL_ERROR(constant_term, input_error)
MSL_ERROR(assumption_b_violation, input_error)
MSL_ERROR(invalid_coefficient, input_error)
MSL_ERROR(no_overlap, input_error)
MSL_ERROR(degenerate_ray, input_error)
MSL_ERROR(singular_parameter, input_error)
MSL_ERROR(nothing_to_do, input_error)
MSL_ERROR(cone_margin, input_error)
MSL_ERROR(pole_proximity, input_error)
MSL_ERROR(divergent_z, input_error)
MSL_ERROR(geometry_error, input_error)
MSL_ERROR(path_collision, input_error)
MSL_ERROR(underdetermined, input_error)
MSL_ERROR(config_error, input_error)

MSL_ERROR(evaluation_error, consistency_error)
MSL_ERROR(inconsistent_cocycle, consistency_error)

MSL_ERROR(unbounded_scan, convergence_error)
MSL_ERROR(estimation_failed, convergence_error)
MSL_ERROR(tail_not_converged, convergence_error)
MSL_ERROR(p_too_large, convergence_error)

#undef MSL_ERROR

} // namespace msl
