// witnesslab: two-sample testing with a learned witness function.
//
// Subcommands:
//   test       run a two-sample test on two CSV files
//   benchmark  estimate test power on a synthetic generator
//   calibrate  estimate Type-I error on a null generator
//   interpret  report the most extreme test rows under the fitted witness

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "witnesslab/baselines.hpp"
#include "witnesslab/bench.hpp"
#include "witnesslab/core.hpp"
#include "witnesslab/inference.hpp"

namespace {

using namespace witnesslab;

struct CommonOpts {
    double alpha = 0.05;
    int permutations = 999;
    std::string method = "auto";
    double time_limit_s = 60.0;
    double split_ratio = 0.5;
    std::uint64_t seed = 0;
    std::string output;  // empty = stdout
    std::string format = "json";
    unsigned workers = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--alpha", o.alpha, "Significance level")->check(CLI::Range(1e-12, 1.0));
    cmd->add_option("--permutations,-B", o.permutations, "Permutation count B")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--method", o.method, "auto|ridge|gbt|knn|xent|bin|mmd|f_test");
    cmd->add_option("--time-limit", o.time_limit_s, "Witness training budget in seconds");
    cmd->add_option("--split-ratio", o.split_ratio, "Training fraction of each sample")
        ->check(CLI::Range(1e-9, 1.0));
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--output", o.output, "Output path (default: stdout)");
    cmd->add_option("--format", o.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--workers", o.workers, "Worker threads for trial loops");
}

// Invalid runs must never leave partial files behind: write to a sibling
// temp file, then rename atomically.
void emit(const std::string& output, const std::string& payload) {
    if (output.empty()) {
        std::cout << payload << "\n";
        return;
    }
    const std::filesystem::path target(output);
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot open output path: " + output);
        out << payload << "\n";
    }
    std::filesystem::rename(tmp, target);
}

PipelineConfig make_pipeline(const CommonOpts& o) {
    PipelineConfig cfg;
    cfg.ratio = o.split_ratio;
    cfg.alpha = o.alpha;
    cfg.permutations = o.permutations;
    cfg.seed = o.seed;
    cfg.budget.time_limit_s = o.time_limit_s;
    if (o.method == "auto") {
        // defaults
    } else if (o.method == "bin") {
        cfg.binarized = true;
    } else if (o.method != "mmd" && o.method != "f_test") {
        cfg.single_learner = learner_kind_from_string(o.method);
    }
    return cfg;
}

std::vector<double> first_column(const Sample& s) {
    std::vector<double> v;
    v.reserve(s.size());
    for (const auto& r : s.rows()) v.push_back(r[0]);
    return v;
}

unsigned resolve_workers(unsigned flag_value) {
    if (const char* env = std::getenv("WITNESSLAB_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    return std::max(1u, flag_value);
}

int cmd_test(const CommonOpts& o, const std::string& file_p, const std::string& file_q,
             bool header) {
    const Sample sp = load_csv(file_p, header);
    const Sample sq = load_csv(file_q, header);
    if (sp.dim() != sq.dim()) {
        throw std::runtime_error("dimension mismatch between input files");
    }
    TestOutcome outcome;
    if (o.method == "mmd") {
        outcome = mmd_permutation_test(sp, sq, KernelSpec::gaussian_median(), o.permutations,
                                       o.seed, o.alpha);
    } else if (o.method == "f_test") {
        if (sp.dim() != 1) {
            throw std::runtime_error("f_test requires 1-dimensional data");
        }
        outcome.method = "f_test";
        outcome.alpha = o.alpha;
        outcome.seed = o.seed;
        outcome.p_value = f_test_equal_variance(first_column(sp), first_column(sq));
        outcome.reject = outcome.p_value <= o.alpha;
    } else {
        outcome = run_test(sp, sq, make_pipeline(o));
    }
    emit(o.output, outcome.to_json());
    return 0;
}

GeneratorSpec make_generator(const std::string& name, std::size_t dim, double rho, double var1,
                             double var2, double mu, const std::string& sigma, double delta) {
    GeneratorSpec g;
    g.kind = generator_kind_from_string(name);
    g.dim = dim;
    g.rho = rho;
    g.var1 = var1;
    g.var2 = var2;
    g.mu = mu;
    g.delta = delta;
    if (sigma == "small" || sigma == "medium" || sigma == "large") {
        g.sigma = GeneratorSpec::noise_preset(sigma);
    } else {
        g.sigma = std::stod(sigma);
    }
    if (g.kind == GeneratorSpec::Kind::blob_null || g.kind == GeneratorSpec::Kind::blob_alt) {
        g.dim = 2;
    }
    if (g.kind == GeneratorSpec::Kind::gauss_var_shift) g.dim = 1;
    return g;
}

TestConfig make_test_config(const CommonOpts& o) {
    TestConfig tc;
    tc.alpha = o.alpha;
    tc.pipeline = make_pipeline(o);
    if (o.method == "mmd") {
        tc.method = TestConfig::Method::mmd;
        tc.kernel = KernelSpec::gaussian_median();
    } else if (o.method == "f_test") {
        tc.method = TestConfig::Method::f_test;
    }
    return tc;
}

int cmd_bench(const CommonOpts& o, const GeneratorSpec& gen, std::size_t n, std::size_t trials,
              bool type1) {
    const TestConfig tc = make_test_config(o);
    const unsigned workers = resolve_workers(o.workers);
    const PowerReport report = type1 ? estimate_type1(gen, tc, n, trials, o.seed, workers)
                                     : estimate_power(gen, tc, n, trials, o.seed, workers);
    emit(o.output, o.format == "csv" ? report.to_csv() : report.to_json());
    return 0;
}

int cmd_interpret(const CommonOpts& o, const std::string& file_p, const std::string& file_q,
                  bool header, std::size_t top_k) {
    if (top_k < 1) throw std::runtime_error("--top-k must be at least 1");
    const Sample sp = load_csv(file_p, header);
    const Sample sq = load_csv(file_q, header);
    if (sp.dim() != sq.dim()) {
        throw std::runtime_error("dimension mismatch between input files");
    }
    const PipelineResult result = run_test_full(sp, sq, make_pipeline(o));
    const Sample test_p(gather_rows(sp, result.plan.test_p_idx));
    const Sample test_q(gather_rows(sq, result.plan.test_q_idx));
    const InterpretationReport report = interpret(result.witness, test_p, test_q, top_k);
    emit(o.output, o.format == "csv" ? report.to_csv() : report.to_json());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"witness two-sample testing toolkit"};
    app.require_subcommand(1);

    CommonOpts test_opts, bench_opts, cal_opts, interp_opts;
    std::string file_p, file_q;
    bool header = false;
    std::string gen_name = "blob_null";
    std::size_t dim = 2, n = 180, trials = 100, top_k = 10;
    double rho = 0.5, var1 = 1.0, var2 = 1.0, mu = 0.0, delta = 0.5;
    std::string sigma = "1.0";

    auto* t = app.add_subcommand("test", "two-sample test on two CSV files");
    t->add_option("--p", file_p, "CSV file with the P sample")->required();
    t->add_option("--q", file_q, "CSV file with the Q sample")->required();
    t->add_flag("--header", header, "Skip a header row in both files");
    add_common(t, test_opts);

    auto add_generator_flags = [&](CLI::App* cmd) {
        cmd->add_option("--generator", gen_name,
                        "blob_null|blob_alt|gauss_var_shift|mean_shift|noise_shift|knockout_shift");
        cmd->add_option("--dim", dim, "Data dimension (generator permitting)");
        cmd->add_option("--rho", rho, "blob_alt mode correlation");
        cmd->add_option("--var1", var1, "gauss_var_shift: variance of P");
        cmd->add_option("--var2", var2, "gauss_var_shift: variance of Q");
        cmd->add_option("--mu", mu, "mean_shift magnitude");
        cmd->add_option("--sigma", sigma, "noise_shift scale (number or small|medium|large)");
        cmd->add_option("--delta", delta, "affected fraction for noise/knockout shifts");
        cmd->add_option("--n", n, "per-sample size before splitting");
        cmd->add_option("--trials", trials, "number of repeated trials");
    };

    auto* b = app.add_subcommand("benchmark", "power estimate on a synthetic generator");
    add_generator_flags(b);
    add_common(b, bench_opts);

    auto* c = app.add_subcommand("calibrate", "Type-I estimate on a null generator");
    add_generator_flags(c);
    add_common(c, cal_opts);

    auto* i = app.add_subcommand("interpret", "most extreme test rows under the witness");
    i->add_option("--p", file_p, "CSV file with the P sample")->required();
    i->add_option("--q", file_q, "CSV file with the Q sample")->required();
    i->add_flag("--header", header, "Skip a header row in both files");
    i->add_option("--top-k", top_k, "rows to report per direction");
    add_common(i, interp_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (t->parsed()) return cmd_test(test_opts, file_p, file_q, header);
        if (b->parsed()) {
            const GeneratorSpec gen =
                make_generator(gen_name, dim, rho, var1, var2, mu, sigma, delta);
            return cmd_bench(bench_opts, gen, n, trials, false);
        }
        if (c->parsed()) {
            const GeneratorSpec gen =
                make_generator(gen_name, dim, rho, var1, var2, mu, sigma, delta);
            return cmd_bench(cal_opts, gen, n, trials, true);
        }
        if (i->parsed()) return cmd_interpret(interp_opts, file_p, file_q, header, top_k);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
