#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hinfcf {

enum class Errc {
    invalid_input,
    dimension,
    singular_pencil,
    pole_at_point,
    pole_on_axis,
    not_real,
    near_singular,
    rank_deficient,
    hypothesis_violation,
    invalid_parameter,
    duplicate_edge,
    invalid_laplacian,
    standing_assumption,
    precondition,
    not_bracketing,
    unstabilizable,
    degree_cap,
    schema,
    internal,
};

inline constexpr std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::invalid_input: return "invalid-input";
        case Errc::dimension: return "dimension";
        case Errc::singular_pencil: return "singular-pencil";
        case Errc::pole_at_point: return "pole-at-evaluation-point";
        case Errc::pole_on_axis: return "pole-on-axis";
        case Errc::not_real: return "not-real-valued";
        case Errc::near_singular: return "near-singular";
        case Errc::rank_deficient: return "rank-deficient";
        case Errc::hypothesis_violation: return "hypothesis-violation";
        case Errc::invalid_parameter: return "invalid-parameter";
        case Errc::duplicate_edge: return "duplicate-edge";
        case Errc::invalid_laplacian: return "invalid-laplacian";
        case Errc::standing_assumption: return "standing-assumption-violated";
        case Errc::precondition: return "precondition";
        case Errc::not_bracketing: return "not-bracketing";
        case Errc::unstabilizable: return "unstabilizable-or-degenerate";
        case Errc::degree_cap: return "degree-cap";
        case Errc::schema: return "schema";
        case Errc::internal: return "internal";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace hinfcf
