#pragma once

#include <functional>
#include <vector>

namespace witnesslab {

/// Witness evaluations on a P-set and a Q-set plus the sample fraction c.
/// Moments are plug-in (denominator = count) so the loss/SNR identity holds
/// exactly on empirical data.
class WitnessValues {
  public:
    WitnessValues(std::vector<double> vals_p, std::vector<double> vals_q, double c);

    /// Convenience constructor with c = n / (n + m).
    static WitnessValues from_counts(std::vector<double> vals_p, std::vector<double> vals_q);

    const std::vector<double>& vals_p() const { return vals_p_; }
    const std::vector<double>& vals_q() const { return vals_q_; }
    double c() const { return c_; }

    double mean_p() const { return mean_p_; }
    double mean_q() const { return mean_q_; }
    double var_p() const { return var_p_; }
    double var_q() const { return var_q_; }
    double mean_sq_p() const { return mean_sq_p_; }
    double mean_sq_q() const { return mean_sq_q_; }

  private:
    std::vector<double> vals_p_;
    std::vector<double> vals_q_;
    double c_;
    double mean_p_, mean_q_, var_p_, var_q_, mean_sq_p_, mean_sq_q_;
};

/// Scale/shift pair of the loss-minimizing affine transform gamma*h + nu.
struct AffineCalibration {
    double gamma = 1.0;
    double nu = 0.0;
    bool degenerate = false;  // set when the witness was constant

    double apply(double v) const { return gamma * v + nu; }
};

/// A pair of log-densities and the fraction c; input to the closed-form
/// population-optimal witness.
struct DensityPair {
    std::function<double(const std::vector<double>&)> log_p;
    std::function<double(const std::vector<double>&)> log_q;
    double c = 0.5;
};

/// tau = mean of h over the P-set minus mean over the Q-set.
double mean_discrepancy(const WitnessValues& w);

/// sigma_c = sqrt([(1-c) Var_P + c Var_Q] / (c (1-c))), plug-in variances.
double sigma_c(const WitnessValues& w);

/// tau / sigma_c. Throws on a degenerate (zero-variance) witness.
double snr(const WitnessValues& w);

/// Weighted squared loss (1-c) mean_P (1-h)^2 + c mean_Q h^2.
double weighted_mse(const WitnessValues& w_train);

/// Exact minimizer of (gamma, nu) -> weighted_mse(gamma*h + nu), from the
/// 2x2 normal equations on plug-in moments. A constant witness yields the
/// best constant predictor (0, 1-c), flagged degenerate.
AffineCalibration affine_calibrate(const WitnessValues& w_train);

/// Apply a calibration to both value vectors.
WitnessValues apply_calibration(const WitnessValues& w, const AffineCalibration& cal);

/// c(1-c) / (1 + snr^2): the value of the loss at the affine optimum.
double lemma1_rhs(double c, double snr_value);

/// Phi(sqrt(n_te+m_te) * tau_pop / sigma - Phi^{-1}(1-alpha)).
double asymptotic_power(double tau_pop, double sigma, std::size_t n_te, std::size_t m_te,
                        double alpha);

/// t_alpha = sigma / sqrt(n_te+m_te) * Phi^{-1}(1-alpha).
double analytic_threshold(double sigma, std::size_t n_te, std::size_t m_te, double alpha);

/// h*(x) = (1-c) p(x) / ((1-c) p(x) + c q(x)), evaluated stably from the
/// log-densities. Throws when both densities vanish at x.
double optimal_witness(const DensityPair& dp, const std::vector<double>& x);

}  // namespace witnesslab
