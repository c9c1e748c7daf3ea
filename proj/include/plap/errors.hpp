#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plap {

/// Invalid user-facing input: malformed config, parameter constraint violations.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A computed quantity violated an invariant the code promises to maintain.
struct internal_error : std::logic_error {
    using std::logic_error::logic_error;
};

/// An iterate left its admissible box; carries the first offending node
/// (node == size() when the violation is the gradient cap, which has no
/// single node).
struct box_violation : std::runtime_error {
    enum class Kind { below_floor, above_ceiling, gradient_cap };
    Kind kind;
    std::size_t node;
    double value;
    double bound;
    box_violation(Kind kind_, std::size_t node_, double value_, double bound_,
                  const std::string& what_)
        : std::runtime_error(what_), kind(kind_), node(node_), value(value_), bound(bound_) {}
};

}  // namespace plap
