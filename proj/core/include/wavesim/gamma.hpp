#pragma once

namespace wavesim {

// Gamma function on the positive half line.  Throws DomainError for x <= 0;
// the planner only ever needs positive arguments and a pole slipping through
// would silently corrupt every moment bound downstream.
double gamma(double x);

// log Gamma on the positive half line, same domain contract.  Plan-size
// formulas evaluate moment constants in log space because Gamma(p(s-1))
// overflows double well inside the supported (p, s) range.
double log_gamma(double x);

}  // namespace wavesim
