#include "bip/spherical_geometry.hpp"

#include "bip/errors.hpp"
#include "bip/special_functions.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace bip {

namespace {

constexpr double kLn2 = 0.6931471805599453;

void check_tau_dim(double tau, int dim, const char* who) {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw DomainError(std::string(who) + ": tau=" + std::to_string(tau) + " outside (0,1)");
    }
    if (dim < 2) {
        throw DomainError(std::string(who) + ": dim must be >= 2");
    }
}

// JSON cannot carry IEEE infinities; they serialize as the string "inf".
nlohmann::json num_or_inf(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

}  // namespace

CapVolume cap_volume(double tau, int dim) {
    check_tau_dim(tau, dim, "cap_volume");
    const double x = 1.0 - tau * tau;
    const double a = 0.5 * (dim - 1);
    const double b = 0.5;
    CapVolume v;
    v.log_natural = std::log(0.5) + sf::log_reg_inc_beta(x, a, b);
    v.linear = 0.5 * sf::reg_inc_beta(x, a, b);
    return v;
}

double gaussian_cap_approx(double tau, int dim) {
    if (!(tau >= 0.0 && tau < 1.0)) {
        throw DomainError("gaussian_cap_approx: tau outside [0,1)");
    }
    if (dim < 2) throw DomainError("gaussian_cap_approx: dim must be >= 2");
    return sf::q_function(tau * std::sqrt(static_cast<double>(dim)));
}

CapacityReport gv_bound(double tau, int dim) {
    check_tau_dim(tau, dim, "gv_bound");
    CapacityReport r;
    r.tau = tau;
    r.dim = dim;
    r.mu = cap_volume(tau, dim);
    r.gv_bound = 1.0 / r.mu.linear;  // +inf when mu underflows; log2_gv stays exact
    r.log2_gv = -r.mu.log_natural / kLn2;
    r.alpha_star_orthogonal = std::sqrt(1.0 - tau * tau) / tau;
    r.gaussian_approx = gaussian_cap_approx(tau, dim);
    return r;
}

double displaced_cosine(double p, double alpha) {
    if (!(std::fabs(p) < 1.0)) throw DomainError("displaced_cosine: |p| must be < 1");
    if (alpha < 0.0) throw DomainError("displaced_cosine: alpha must be >= 0");
    if (alpha == 0.0) return 1.0;
    const double denom_sq = 1.0 + 2.0 * alpha * p + alpha * alpha;
    if (denom_sq <= 0.0) {
        throw DomainError("displaced_cosine: degenerate configuration");  // impossible for |p|<1
    }
    return (1.0 + alpha * p) / std::sqrt(denom_sq);
}

double alpha_star(double p, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("alpha_star: tau outside (0,1)");
    if (!(std::fabs(p) < tau)) {
        throw DomainError("alpha_star: |p| >= tau has no positive root");
    }
    const double denom = tau * tau - p * p;
    if (denom < 1e-12) {
        throw DomainError("alpha_star: tau^2 - p^2 below 1e-12, root diverges");
    }
    const double s_tau = std::sqrt(1.0 - tau * tau);
    const double s_p = std::sqrt(1.0 - p * p);
    return s_tau * (p * s_tau + tau * s_p) / denom;
}

double alpha_star_derivative_wrt_tau(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw DomainError("alpha_star_derivative_wrt_tau: tau outside (0,1)");
    }
    return -1.0 / (tau * tau * std::sqrt(1.0 - tau * tau));
}

BufferReport safety_buffer_analysis(double tau, double delta, int dim) {
    check_tau_dim(tau, dim, "safety_buffer_analysis");
    if (!(delta > 0.0 && delta < tau)) {
        throw DomainError("safety_buffer_analysis: need 0 < delta < tau");
    }
    BufferReport r;
    r.tau = tau;
    r.delta = delta;
    r.tau_safe = tau - delta;
    r.capacity_at_tau = gv_bound(tau, dim);
    r.capacity_at_tau_safe = gv_bound(r.tau_safe, dim);
    r.alpha_star_derivative_at_tau = alpha_star_derivative_wrt_tau(tau);
    return r;
}

double repulsion_derivative_diagnostic(const Eigen::Ref<const VectorXd>& r,
                                       const Eigen::Ref<const VectorXd>& z,
                                       const Eigen::Ref<const VectorXd>& c) {
    return z.dot(c) - r.dot(z) * r.dot(c);
}

nlohmann::json to_json(const CapVolume& v) {
    return {{"linear", v.linear}, {"ln", v.log_natural}};
}

nlohmann::json to_json(const CapacityReport& r) {
    return {
        {"tau", r.tau},
        {"dim", r.dim},
        {"mu", to_json(r.mu)},
        {"gv_bound", num_or_inf(r.gv_bound)},
        {"log2_gv", r.log2_gv},
        {"alpha_star_orthogonal", r.alpha_star_orthogonal},
        {"gaussian_approx", r.gaussian_approx},
    };
}

nlohmann::json to_json(const BufferReport& r) {
    return {
        {"tau", r.tau},
        {"delta", r.delta},
        {"tau_safe", r.tau_safe},
        {"capacity_at_tau", to_json(r.capacity_at_tau)},
        {"capacity_at_tau_safe", to_json(r.capacity_at_tau_safe)},
        {"alpha_star_derivative_at_tau", r.alpha_star_derivative_at_tau},
    };
}

}  // namespace bip
