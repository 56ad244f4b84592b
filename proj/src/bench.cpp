#include "witnesslab/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "witnesslab/rng.hpp"

namespace witnesslab {

GeneratorSpec GeneratorSpec::blob_alt(double rho) {
    GeneratorSpec s;
    s.kind = Kind::blob_alt;
    s.rho = rho;
    return s;
}

GeneratorSpec GeneratorSpec::gauss_var_shift(double var1, double var2) {
    GeneratorSpec s;
    s.kind = Kind::gauss_var_shift;
    s.dim = 1;
    s.var1 = var1;
    s.var2 = var2;
    return s;
}

GeneratorSpec GeneratorSpec::mean_shift(double mu, std::size_t dim) {
    GeneratorSpec s;
    s.kind = Kind::mean_shift;
    s.mu = mu;
    s.dim = dim;
    return s;
}

GeneratorSpec GeneratorSpec::noise_shift(double sigma, double delta, std::size_t dim) {
    GeneratorSpec s;
    s.kind = Kind::noise_shift;
    s.sigma = sigma;
    s.delta = delta;
    s.dim = dim;
    return s;
}

GeneratorSpec GeneratorSpec::knockout_shift(double delta, std::size_t dim) {
    GeneratorSpec s;
    s.kind = Kind::knockout_shift;
    s.delta = delta;
    s.dim = dim;
    return s;
}

double GeneratorSpec::noise_preset(const std::string& name) {
    if (name == "small") return 0.1;
    if (name == "medium") return 1.0;
    if (name == "large") return 10.0;
    throw std::invalid_argument("unknown noise preset: " + name);
}

bool GeneratorSpec::is_null() const {
    switch (kind) {
        case Kind::blob_null: return true;
        case Kind::blob_alt: return rho == 0.0;
        case Kind::gauss_var_shift: return var1 == var2;
        case Kind::mean_shift: return mu == 0.0;
        case Kind::noise_shift: return delta == 0.0 || sigma == 0.0;
        case Kind::knockout_shift: return delta == 0.0;
    }
    return false;
}

std::string GeneratorSpec::kind_name() const {
    switch (kind) {
        case Kind::blob_null: return "blob_null";
        case Kind::blob_alt: return "blob_alt";
        case Kind::gauss_var_shift: return "gauss_var_shift";
        case Kind::mean_shift: return "mean_shift";
        case Kind::noise_shift: return "noise_shift";
        case Kind::knockout_shift: return "knockout_shift";
    }
    return "?";
}

GeneratorSpec::Kind generator_kind_from_string(const std::string& name) {
    if (name == "blob_null") return GeneratorSpec::Kind::blob_null;
    if (name == "blob_alt") return GeneratorSpec::Kind::blob_alt;
    if (name == "gauss_var_shift") return GeneratorSpec::Kind::gauss_var_shift;
    if (name == "mean_shift") return GeneratorSpec::Kind::mean_shift;
    if (name == "noise_shift") return GeneratorSpec::Kind::noise_shift;
    if (name == "knockout_shift") return GeneratorSpec::Kind::knockout_shift;
    throw std::invalid_argument("unknown generator kind: " + name);
}

namespace {

constexpr double kBlobSpacing = 5.0;  // 3x3 grid centers at {0, 5, 10}^2

// One draw from the nine-mode grid mixture. When correlated, mode (i, j)
// uses covariance [[1, r], [r, 1]] with r = rho * (-1)^(i+j).
std::vector<double> blob_draw(Rng& rng, bool correlated, double rho) {
    const auto mode = rng.below(9);
    const auto mi = static_cast<double>(mode % 3);
    const auto mj = static_cast<double>(mode / 3);
    const double z1 = rng.gaussian();
    const double z2 = rng.gaussian();
    double x = z1;
    double y = z2;
    if (correlated) {
        const double r = (static_cast<int>(mode % 3 + mode / 3) % 2 == 0) ? rho : -rho;
        y = r * z1 + std::sqrt(1.0 - r * r) * z2;
    }
    return {mi * kBlobSpacing + x, mj * kBlobSpacing + y};
}

std::vector<double> gaussian_row(Rng& rng, std::size_t dim, double sd, double shift_first) {
    std::vector<double> row(dim);
    for (std::size_t j = 0; j < dim; ++j) row[j] = sd * rng.gaussian();
    row[0] += shift_first;
    return row;
}

void validate(const GeneratorSpec& s) {
    using Kind = GeneratorSpec::Kind;
    if (s.kind == Kind::gauss_var_shift && (!(s.var1 > 0.0) || !(s.var2 > 0.0))) {
        throw std::invalid_argument("gauss_var_shift: variances must be positive");
    }
    if ((s.kind == Kind::noise_shift || s.kind == Kind::knockout_shift) &&
        (s.delta < 0.0 || s.delta > 1.0)) {
        throw std::invalid_argument("shift fraction delta must lie in [0,1]");
    }
    if (s.kind == Kind::blob_alt && (s.rho < 0.0 || s.rho >= 1.0)) {
        throw std::invalid_argument("blob_alt: rho must lie in [0,1)");
    }
    if (s.kind == Kind::noise_shift && s.sigma < 0.0) {
        throw std::invalid_argument("noise_shift: sigma must be nonnegative");
    }
    if (s.dim < 1) {
        throw std::invalid_argument("generator dimension must be at least 1");
    }
}

Sample draw_sample(const GeneratorSpec& s, std::size_t count, Rng& rng, bool is_q) {
    using Kind = GeneratorSpec::Kind;
    Matrix rows;
    rows.reserve(count);
    switch (s.kind) {
        case Kind::blob_null:
            for (std::size_t i = 0; i < count; ++i) rows.push_back(blob_draw(rng, false, 0.0));
            break;
        case Kind::blob_alt:
            for (std::size_t i = 0; i < count; ++i) {
                rows.push_back(blob_draw(rng, is_q, s.rho));
            }
            break;
        case Kind::gauss_var_shift: {
            const double sd = std::sqrt(is_q ? s.var2 : s.var1);
            for (std::size_t i = 0; i < count; ++i) rows.push_back({sd * rng.gaussian()});
            break;
        }
        case Kind::mean_shift:
            for (std::size_t i = 0; i < count; ++i) {
                rows.push_back(gaussian_row(rng, s.dim, 1.0, is_q ? s.mu : 0.0));
            }
            break;
        case Kind::noise_shift:
            for (std::size_t i = 0; i < count; ++i) {
                std::vector<double> row = gaussian_row(rng, s.dim, 1.0, 0.0);
                if (is_q && rng.uniform01() < s.delta) {
                    for (double& v : row) v += s.sigma * rng.gaussian();
                }
                rows.push_back(std::move(row));
            }
            break;
        case Kind::knockout_shift:
            for (std::size_t i = 0; i < count; ++i) {
                bool component_one = rng.uniform01() < 0.5;
                // Knock out: an affected component-0 draw is resampled from
                // component 1.
                if (is_q && !component_one && rng.uniform01() < s.delta) {
                    component_one = true;
                }
                const double center = component_one ? 0.5 * s.separation : -0.5 * s.separation;
                rows.push_back(gaussian_row(rng, s.dim, 1.0, center));
            }
            break;
    }
    return Sample(std::move(rows));
}

double run_one_test(const GeneratorSpec& gen, const TestConfig& test, std::size_t n,
                    std::uint64_t trial_seed) {
    Rng rng(derive_seed(trial_seed, 0));
    const Sample sp = draw_sample(gen, n, rng, false);
    const Sample sq = draw_sample(gen, n, rng, true);
    switch (test.method) {
        case TestConfig::Method::witness: {
            PipelineConfig cfg = test.pipeline;
            cfg.alpha = test.alpha;
            cfg.seed = derive_seed(trial_seed, 1);
            return run_test(sp, sq, cfg).p_value;
        }
        case TestConfig::Method::mmd: {
            return mmd_permutation_test(sp, sq, test.kernel, test.pipeline.permutations,
                                        derive_seed(trial_seed, 1), test.alpha)
                .p_value;
        }
        case TestConfig::Method::f_test: {
            if (sp.dim() != 1) {
                throw std::invalid_argument("f_test requires 1-dimensional data");
            }
            std::vector<double> x, y;
            for (const auto& r : sp.rows()) x.push_back(r[0]);
            for (const auto& r : sq.rows()) y.push_back(r[0]);
            return f_test_equal_variance(x, y);
        }
    }
    throw std::logic_error("unreachable test method");
}

std::string snapshot(const GeneratorSpec& gen, const TestConfig& test, std::size_t n,
                     std::size_t trials, std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["generator"] = gen.kind_name();
    j["dim"] = gen.dim;
    j["rho"] = gen.rho;
    j["var1"] = gen.var1;
    j["var2"] = gen.var2;
    j["mu"] = gen.mu;
    j["sigma"] = gen.sigma;
    j["delta"] = gen.delta;
    j["method"] = test.method == TestConfig::Method::witness
                      ? "witness"
                      : (test.method == TestConfig::Method::mmd ? "mmd" : "f_test");
    j["alpha"] = test.alpha;
    j["n"] = n;
    j["trials"] = trials;
    j["seed"] = seed;
    return j.dump();
}

PowerReport run_harness(const GeneratorSpec& gen, const TestConfig& test, std::size_t n,
                        std::size_t trials, std::uint64_t seed, unsigned workers) {
    if (trials < 1) {
        throw std::invalid_argument("estimate_power: trials must be at least 1");
    }
    validate(gen);
    PowerReport report;
    report.trials = trials;
    report.p_values.assign(trials, 0.0);
    report.seeds.assign(trials, 0);
    for (std::size_t t = 0; t < trials; ++t) report.seeds[t] = derive_seed(seed, t);

    workers = std::max(1u, workers);
    if (workers == 1) {
        for (std::size_t t = 0; t < trials; ++t) {
            report.p_values[t] = run_one_test(gen, test, n, report.seeds[t]);
        }
    } else {
        // Trials are independent; results land in per-trial slots so the
        // merge is order-independent.
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t t = next.fetch_add(1);
                    if (t >= trials) return;
                    report.p_values[t] = run_one_test(gen, test, n, report.seeds[t]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    for (double p : report.p_values) {
        if (p <= test.alpha) ++report.rejections;
    }
    report.power = static_cast<double>(report.rejections) / static_cast<double>(trials);
    report.std_err = std::sqrt(report.power * (1.0 - report.power) / static_cast<double>(trials));
    report.config_snapshot = snapshot(gen, test, n, trials, seed);
    return report;
}

}  // namespace

std::pair<Sample, Sample> generate(const GeneratorSpec& spec, std::size_t n, std::size_t m,
                                   std::uint64_t seed) {
    if (n < 1 || m < 1) {
        throw std::invalid_argument("generate: n and m must be at least 1");
    }
    validate(spec);
    Rng rng(seed);
    Sample sp = draw_sample(spec, n, rng, false);
    Sample sq = draw_sample(spec, m, rng, true);
    return {std::move(sp), std::move(sq)};
}

PowerReport estimate_power(const GeneratorSpec& gen, const TestConfig& test, std::size_t n,
                           std::size_t trials, std::uint64_t seed, unsigned workers) {
    return run_harness(gen, test, n, trials, seed, workers);
}

PowerReport estimate_type1(const GeneratorSpec& gen, const TestConfig& test, std::size_t n,
                           std::size_t trials, std::uint64_t seed, unsigned workers) {
    if (!gen.is_null()) {
        throw std::invalid_argument("estimate_type1: generator is not a null pair");
    }
    return run_harness(gen, test, n, trials, seed, workers);
}

std::string PowerReport::to_json() const {
    nlohmann::ordered_json j;
    j["trials"] = trials;
    j["rejections"] = rejections;
    j["power"] = power;
    j["std_err"] = std_err;
    j["p_values"] = p_values;
    j["seeds"] = seeds;
    j["config"] = nlohmann::ordered_json::parse(config_snapshot.empty() ? "{}" : config_snapshot);
    return j.dump();
}

std::string PowerReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    // alpha is embedded in the config snapshot; recover the per-trial reject
    // flag from it so the CSV stands alone.
    double alpha = 0.05;
    if (!config_snapshot.empty()) {
        const auto j = nlohmann::ordered_json::parse(config_snapshot);
        if (j.contains("alpha")) alpha = j["alpha"].get<double>();
    }
    os << "trial,seed,p_value,reject\n";
    for (std::size_t t = 0; t < trials; ++t) {
        os << t << "," << seeds[t] << "," << p_values[t] << ","
           << (p_values[t] <= alpha ? 1 : 0) << "\n";
    }
    return os.str();
}

}  // namespace witnesslab
