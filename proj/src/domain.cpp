#include "thinns/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace thinns {

void DomainSpec::validate() const {
  if (!(l2 > 0.0) || !(l1 >= l2))
    throw std::invalid_argument("domain: require l1 >= l2 > 0");
  if (!(eps > 0.0) || !(eps < l2 / 4.0))
    throw std::invalid_argument("domain: require 0 < eps < l2/4");
  if (!(nu > 0.0)) throw std::invalid_argument("domain: require nu > 0");
  if (n1 < 1 || n2 < 1 || n3 < 0)
    throw std::invalid_argument("domain: require n1, n2 >= 1 and n3 >= 0");
}

double DomainSpec::min_wavenumber() const {
  double best = std::numeric_limits<double>::infinity();
  if (n1 >= 1) best = std::min(best, 1.0 / l1);
  if (n2 >= 1) best = std::min(best, 1.0 / l2);
  if (n3 >= 1) best = std::min(best, 1.0 / eps);
  return best;
}

std::string to_string(const DomainSpec& d) {
  std::ostringstream os;
  os << "l1=" << d.l1 << " l2=" << d.l2 << " eps=" << d.eps << " nu=" << d.nu << " modes=("
     << d.n1 << "," << d.n2 << "," << d.n3 << ")";
  return os.str();
}

}  // namespace thinns
