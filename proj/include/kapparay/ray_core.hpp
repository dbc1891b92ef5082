#pragma once

// Range-parametrized Hamiltonian ray equations with H(z, p) = -sqrt(n^2 - p^2).
//
//   dz/dr =  dH/dp = p / w
//   dp/dr = -dH/dz = n n_z / w,            w = sqrt(n^2 - p^2)
//
// The variation matrix q = d(p, z) / d(p0, z0) obeys dq/dr = K q with
//
//   K = | -H_zp  -H_zz |
//       |  H_pp   H_zp |

#include "kapparay/environment.hpp"
#include "kapparay/linalg.hpp"

namespace kapparay {

/// Ray position, pulse p = n sin(theta), and variation matrix at range r.
struct RayState {
    double r = 0.0;
    double z = 0.0;
    double p = 0.0;
    Mat2 q = Mat2::identity();
};

struct RayRhs {
    double dz_dr = 0.0;
    double dp_dr = 0.0;
};

struct KMatrix {
    double k11 = 0.0;
    double k12 = 0.0;
    double k21 = 0.0;
    double k22 = 0.0;

    Mat2 matrix() const { return {k11, k12, k21, k22}; }
};

/// -sqrt(n^2 - p^2). Throws SteepRayError when |p| >= n.
double hamiltonian(double n, double p);

RayRhs ray_rhs(const IndexSample& sample, double p);

/// Closed-form second derivatives of H. K22 is -K11 bit for bit.
KMatrix k_matrix(const IndexSample& sample, double p);

/// Grazing angle asin(p / n).
double grazing_angle(double n, double p);

}  // namespace kapparay
