#include "witnesslab/witness_math.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "witnesslab/special.hpp"

namespace witnesslab {

namespace {

void plug_in_moments(const std::vector<double>& v, double& mean, double& mean_sq, double& var) {
    double s = 0.0, s2 = 0.0;
    for (double x : v) {
        s += x;
        s2 += x * x;
    }
    const double n = static_cast<double>(v.size());
    mean = s / n;
    mean_sq = s2 / n;
    var = mean_sq - mean * mean;
    if (var < 0.0) var = 0.0;  // rounding guard
}

}  // namespace

WitnessValues::WitnessValues(std::vector<double> vals_p, std::vector<double> vals_q, double c)
    : vals_p_(std::move(vals_p)), vals_q_(std::move(vals_q)), c_(c) {
    if (vals_p_.empty() || vals_q_.empty()) {
        throw std::invalid_argument("WitnessValues: both value vectors must be non-empty");
    }
    if (!(c_ > 0.0 && c_ < 1.0)) {
        throw std::invalid_argument("WitnessValues: c must lie in (0,1)");
    }
    for (const auto* v : {&vals_p_, &vals_q_}) {
        for (double x : *v) {
            if (!std::isfinite(x)) {
                throw std::invalid_argument("WitnessValues: non-finite entry rejected");
            }
        }
    }
    plug_in_moments(vals_p_, mean_p_, mean_sq_p_, var_p_);
    plug_in_moments(vals_q_, mean_q_, mean_sq_q_, var_q_);
}

WitnessValues WitnessValues::from_counts(std::vector<double> vals_p, std::vector<double> vals_q) {
    const double n = static_cast<double>(vals_p.size());
    const double m = static_cast<double>(vals_q.size());
    return WitnessValues(std::move(vals_p), std::move(vals_q), n / (n + m));
}

double mean_discrepancy(const WitnessValues& w) { return w.mean_p() - w.mean_q(); }

double sigma_c(const WitnessValues& w) {
    const double c = w.c();
    const double var = ((1.0 - c) * w.var_p() + c * w.var_q()) / (c * (1.0 - c));
    return std::sqrt(var);
}

double snr(const WitnessValues& w) {
    const double s = sigma_c(w);
    if (s <= 0.0) {
        throw std::domain_error("snr: degenerate witness (sigma_c = 0)");
    }
    return mean_discrepancy(w) / s;
}

double weighted_mse(const WitnessValues& w) {
    const double c = w.c();
    double sp = 0.0;
    for (double v : w.vals_p()) {
        const double e = 1.0 - v;
        sp += e * e;
    }
    double sq = 0.0;
    for (double v : w.vals_q()) sq += v * v;
    return (1.0 - c) * sp / static_cast<double>(w.vals_p().size()) +
           c * sq / static_cast<double>(w.vals_q().size());
}

AffineCalibration affine_calibrate(const WitnessValues& w) {
    const double c = w.c();
    // Moments under the mixture measure (1-c) P + c Q; the calibration is the
    // weighted least-squares fit of the 1/0 target on (h, 1).
    const double e_h = (1.0 - c) * w.mean_p() + c * w.mean_q();
    const double e_h2 = (1.0 - c) * w.mean_sq_p() + c * w.mean_sq_q();
    const double e_th = (1.0 - c) * w.mean_p();  // E[target * h]
    const double det = e_h2 - e_h * e_h;         // variance of h under the mixture
    const double scale = std::max(e_h2, 1.0);
    if (!(det > 1e-14 * scale)) {
        return AffineCalibration{0.0, 1.0 - c, true};
    }
    const double gamma = (e_th - (1.0 - c) * e_h) / det;
    const double nu = (1.0 - c) - gamma * e_h;
    return AffineCalibration{gamma, nu, false};
}

WitnessValues apply_calibration(const WitnessValues& w, const AffineCalibration& cal) {
    std::vector<double> vp = w.vals_p();
    std::vector<double> vq = w.vals_q();
    for (double& v : vp) v = cal.apply(v);
    for (double& v : vq) v = cal.apply(v);
    return WitnessValues(std::move(vp), std::move(vq), w.c());
}

double lemma1_rhs(double c, double snr_value) {
    return c * (1.0 - c) / (1.0 + snr_value * snr_value);
}

double asymptotic_power(double tau_pop, double sigma, std::size_t n_te, std::size_t m_te,
                        double alpha) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("asymptotic_power: sigma must be positive");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("asymptotic_power: alpha must lie in (0,1)");
    }
    const double root_n = std::sqrt(static_cast<double>(n_te + m_te));
    return normal_cdf(root_n * tau_pop / sigma - normal_quantile(1.0 - alpha));
}

double analytic_threshold(double sigma, std::size_t n_te, std::size_t m_te, double alpha) {
    if (sigma < 0.0) {
        throw std::invalid_argument("analytic_threshold: sigma must be nonnegative");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("analytic_threshold: alpha must lie in (0,1)");
    }
    if (sigma == 0.0) return 0.0;
    return sigma / std::sqrt(static_cast<double>(n_te + m_te)) * normal_quantile(1.0 - alpha);
}

double optimal_witness(const DensityPair& dp, const std::vector<double>& x) {
    if (!(dp.c > 0.0 && dp.c < 1.0)) {
        throw std::invalid_argument("optimal_witness: c must lie in (0,1)");
    }
    // log((1-c) p(x)) and log(c q(x)); combine as a two-term log-sum-exp.
    const double lp = std::log1p(-dp.c) + dp.log_p(x);
    const double lq = std::log(dp.c) + dp.log_q(x);
    const bool p_zero = lp == -std::numeric_limits<double>::infinity();
    const bool q_zero = lq == -std::numeric_limits<double>::infinity();
    if (p_zero && q_zero) {
        throw std::domain_error("optimal_witness: point outside the support of both densities");
    }
    if (p_zero) return 0.0;
    if (q_zero) return 1.0;
    if (lp >= lq) {
        return 1.0 / (1.0 + std::exp(lq - lp));
    }
    const double e = std::exp(lp - lq);
    return e / (1.0 + e);
}

}  // namespace witnesslab
