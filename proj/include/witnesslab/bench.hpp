#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "witnesslab/baselines.hpp"
#include "witnesslab/core.hpp"
#include "witnesslab/inference.hpp"

namespace witnesslab {

/// Synthetic data generator. Parameter meaning depends on the kind:
///   blob_null       - 2-D nine-mode grid mixture, both samples identical law
///   blob_alt        - Q gets per-mode correlation +-rho (alternating sign)
///   gauss_var_shift - 1-D N(0, var1) vs N(0, var2)
///   mean_shift      - N(0, I_d) vs N(mu e_1, I_d)
///   noise_shift     - Q adds N(0, sigma^2 I) noise to a fraction delta of rows
///   knockout_shift  - Q replaces a fraction delta of component-0 rows
struct GeneratorSpec {
    enum class Kind { blob_null, blob_alt, gauss_var_shift, mean_shift, noise_shift,
                      knockout_shift };
    Kind kind = Kind::blob_null;
    std::size_t dim = 2;
    double rho = 0.5;          // blob_alt mode correlation magnitude
    double var1 = 1.0;         // gauss_var_shift
    double var2 = 1.0;
    double mu = 0.0;           // mean_shift
    double sigma = 1.0;        // noise_shift noise scale
    double delta = 0.5;        // noise/knockout affected fraction
    double separation = 4.0;   // knockout component separation

    static GeneratorSpec blob_null() { return {}; }
    static GeneratorSpec blob_alt(double rho = 0.5);
    static GeneratorSpec gauss_var_shift(double var1, double var2);
    static GeneratorSpec mean_shift(double mu, std::size_t dim);
    static GeneratorSpec noise_shift(double sigma, double delta, std::size_t dim);
    static GeneratorSpec knockout_shift(double delta, std::size_t dim);

    /// Named sigma presets for the noise shift: small/medium/large.
    static double noise_preset(const std::string& name);

    bool is_null() const;
    std::string kind_name() const;
};

GeneratorSpec::Kind generator_kind_from_string(const std::string& name);

/// Draw an (S_P, S_Q) pair of sizes n and m.
std::pair<Sample, Sample> generate(const GeneratorSpec& spec, std::size_t n, std::size_t m,
                                   std::uint64_t seed);

/// Which test the harness runs on each generated pair.
struct TestConfig {
    enum class Method { witness, mmd, f_test };
    Method method = Method::witness;
    PipelineConfig pipeline;          // witness path
    KernelSpec kernel;                // mmd path
    double alpha = 0.05;
};

/// Rejection-rate estimate over repeated trials.
struct PowerReport {
    std::size_t trials = 0;
    std::size_t rejections = 0;
    double power = 0.0;
    double std_err = 0.0;  // sqrt(power (1-power) / trials)
    std::vector<double> p_values;       // one per trial, in trial order
    std::vector<std::uint64_t> seeds;   // derived per-trial seeds
    std::string config_snapshot;

    std::string to_json() const;
    std::string to_csv() const;  // one row per trial: seed, p_value, reject
};

/// Run `trials` generate -> test cycles with splitmix-derived per-trial
/// seeds. Deterministic for a fixed master seed regardless of `workers`.
PowerReport estimate_power(const GeneratorSpec& gen, const TestConfig& test, std::size_t n,
                           std::size_t trials, std::uint64_t seed, unsigned workers = 1);

/// Same harness restricted to null generators; the power field is the
/// Type-I error rate.
PowerReport estimate_type1(const GeneratorSpec& gen, const TestConfig& test, std::size_t n,
                           std::size_t trials, std::uint64_t seed, unsigned workers = 1);

}  // namespace witnesslab
