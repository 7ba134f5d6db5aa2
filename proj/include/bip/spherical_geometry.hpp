#pragma once

// Spherical-cap volumes, packing capacity bounds, displacement cosine and
// the minimum separation threshold alpha*, plus the safety-buffer analysis.

#include "bip/types.hpp"

#include <json.hpp>

namespace bip {

// Normalized cap volume in linear and natural-log form. The log value stays
// meaningful when the linear value underflows.
struct CapVolume {
    double linear;
    double log_natural;
};

struct CapacityReport {
    double tau = 0.0;
    int dim = 0;
    CapVolume mu{0.0, 0.0};
    double gv_bound = 0.0;               // 1 / mu
    double log2_gv = 0.0;                // -log2(mu), computed in log domain
    double alpha_star_orthogonal = 0.0;  // sqrt(1 - tau^2) / tau
    double gaussian_approx = 0.0;        // Q(tau sqrt(dim))
};

struct BufferReport {
    double tau = 0.0;
    double delta = 0.0;
    double tau_safe = 0.0;
    CapacityReport capacity_at_tau;
    CapacityReport capacity_at_tau_safe;
    double alpha_star_derivative_at_tau = 0.0;
};

// Normalized volume of the cap {x : cos(x, p) >= tau} on the unit sphere in
// R^dim; independent of the cap center. Strictly decreasing in tau and in dim.
CapVolume cap_volume(double tau, int dim);

// Q(tau sqrt(dim)); a far-tail overestimate of cap_volume, kept as a
// diagnostic only.
double gaussian_cap_approx(double tau, int dim);

CapacityReport gv_bound(double tau, int dim);

// cos(normalize(r + alpha z), r) for unit r,z with p = r.z.
double displaced_cosine(double p, double alpha);

// Unique alpha > 0 at which displaced_cosine(p, alpha) = tau. Requires
// |p| < tau; near-singular tau^2 - p^2 < 1e-12 is rejected.
double alpha_star(double p, double tau);

// d alpha*(0,tau) / d tau = -1 / (tau^2 sqrt(1 - tau^2)).
double alpha_star_derivative_wrt_tau(double tau);

BufferReport safety_buffer_analysis(double tau, double delta, int dim);

// d/d alpha of cos(normalize(r + alpha z), c) at alpha = 0, for unit vectors.
// Negative means the direction is genuinely repulsive w.r.t. c after
// renormalization.
double repulsion_derivative_diagnostic(const Eigen::Ref<const VectorXd>& r,
                                       const Eigen::Ref<const VectorXd>& z,
                                       const Eigen::Ref<const VectorXd>& c);

nlohmann::json to_json(const CapVolume& v);
nlohmann::json to_json(const CapacityReport& r);
nlohmann::json to_json(const BufferReport& r);

}  // namespace bip
