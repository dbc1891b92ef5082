#include "kapparay/ray_core.hpp"

#include <cmath>
#include <sstream>

#include "kapparay/errors.hpp"

namespace kapparay {

namespace {

double vertical_cosine(double n, double p) {
    if (!(std::abs(p) < n)) {
        std::ostringstream os;
        os << "steep ray: |p| = " << std::abs(p) << " >= n = " << n;
        throw SteepRayError(os.str());
    }
    return std::sqrt((n - p) * (n + p));
}

}  // namespace

double hamiltonian(double n, double p) { return -vertical_cosine(n, p); }

RayRhs ray_rhs(const IndexSample& s, double p) {
    const double w = vertical_cosine(s.n, p);
    return {p / w, s.n * s.n_z / w};
}

KMatrix k_matrix(const IndexSample& s, double p) {
    const double w = vertical_cosine(s.n, p);
    const double w3 = w * w * w;
    KMatrix k;
    k.k11 = p * s.n * s.n_z / w3;
    k.k12 = (s.n_z * s.n_z + s.n * s.n_zz) / w - s.n * s.n * s.n_z * s.n_z / w3;
    k.k21 = s.n * s.n / w3;
    k.k22 = -k.k11;
    return k;
}

double grazing_angle(double n, double p) {
    if (!(std::abs(p) <= n)) throw SteepRayError("grazing angle undefined for |p| > n");
    return std::asin(p / n);
}

}  // namespace kapparay
