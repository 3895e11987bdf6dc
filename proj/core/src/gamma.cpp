#include "wavesim/gamma.hpp"

#include <cmath>
#include <string>

#include "wavesim/errors.hpp"

namespace wavesim {

double gamma(double x) {
    if (!(x > 0.0)) {
        throw DomainError("gamma: argument must be positive, got " +
                          std::to_string(x));
    }
    return std::tgamma(x);
}

double log_gamma(double x) {
    if (!(x > 0.0)) {
        throw DomainError("log_gamma: argument must be positive, got " +
                          std::to_string(x));
    }
    return std::lgamma(x);
}

}  // namespace wavesim
