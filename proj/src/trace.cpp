#include "pshlab/trace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pshlab {

void Trace::validate(bool require_nonnegative_values) const {
    if (abscissae.size() != values.size() || abscissae.size() != errors.size())
        throw std::invalid_argument("trace: ragged arrays");
    for (std::size_t i = 0; i < abscissae.size(); ++i) {
        if (!std::isfinite(abscissae[i]) || !std::isfinite(values[i]))
            throw std::invalid_argument("trace: nonfinite entry");
        if (i > 0 && !(abscissae[i] > abscissae[i - 1]))
            throw std::invalid_argument("trace: abscissae must be strictly ascending");
        if (!(errors[i] >= 0.0))
            throw std::invalid_argument("trace: negative error estimate");
        if (require_nonnegative_values && !(values[i] >= 0.0))
            throw std::invalid_argument("trace: negative value");
    }
}

double Trace::max_abs_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double Trace::max_error() const {
    double m = 0.0;
    for (double e : errors) m = std::max(m, e);
    return m;
}

double Trace::min_spacing() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < abscissae.size(); ++i)
        m = std::min(m, abscissae[i] - abscissae[i - 1]);
    return m;
}

} // namespace pshlab
