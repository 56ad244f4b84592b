#include "witnesslab/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "witnesslab/rng.hpp"
#include "witnesslab/special.hpp"

namespace witnesslab {

namespace {

nlohmann::ordered_json outcome_json(const TestOutcome& o) {
    nlohmann::ordered_json j;
    j["tau"] = o.tau;
    j["p_value"] = o.p_value;
    j["method"] = o.method;
    j["B"] = o.B;
    j["T"] = o.T;
    j["sigma_hat"] = o.sigma_hat;
    j["snr_hat"] = o.snr_hat;
    j["reject"] = o.reject;
    j["alpha"] = o.alpha;
    j["seed"] = o.seed;
    return j;
}

void fill_diagnostics(TestOutcome& o, const WitnessValues& w) {
    o.tau = mean_discrepancy(w);
    o.sigma_hat = sigma_c(w);
    o.degenerate = o.sigma_hat <= 0.0;
    o.snr_hat = o.degenerate ? 0.0 : o.tau / o.sigma_hat;
}

}  // namespace

std::string TestOutcome::to_json() const { return outcome_json(*this).dump(); }

TestOutcome permutation_pvalue(const WitnessValues& w, int B, std::uint64_t seed, double alpha) {
    if (B < 1) {
        throw std::invalid_argument("permutation_pvalue: B must be at least 1");
    }
    TestOutcome out;
    out.method = "permutation";
    out.B = B;
    out.alpha = alpha;
    out.seed = seed;
    fill_diagnostics(out, w);

    std::vector<double> pool = w.vals_p();
    pool.insert(pool.end(), w.vals_q().begin(), w.vals_q().end());
    const std::size_t n = w.vals_p().size();
    const std::size_t m = w.vals_q().size();
    const double inv_n = 1.0 / static_cast<double>(n);
    const double inv_m = 1.0 / static_cast<double>(m);
    const double pool_sum = std::accumulate(pool.begin(), pool.end(), 0.0);

    // Sum the selected subset in pool-index order so that two permutations
    // picking the same subset produce bitwise-identical statistics. The
    // reference tau below is the identity subset under the same formula,
    // which makes the tie comparison exact instead of ulp-fuzzy.
    auto subset_tau = [&](const std::size_t* idx) {
        double sum_a = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum_a += pool[idx[i]];
        return sum_a * inv_n - (pool_sum - sum_a) * inv_m;
    };
    std::vector<std::size_t> order(n + m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const double tau_ref = subset_tau(order.data());

    Rng rng(seed);
    int t_count = 0;
    for (int b = 0; b < B; ++b) {
        shuffle(order, rng);
        std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
        if (subset_tau(order.data()) >= tau_ref) ++t_count;
    }
    out.T = t_count;
    out.p_value = static_cast<double>(t_count + 1) / static_cast<double>(B + 1);
    out.reject = out.p_value <= alpha;
    return out;
}

double exact_permutation_pvalue(const WitnessValues& w) {
    const std::size_t n = w.vals_p().size();
    const std::size_t m = w.vals_q().size();
    const std::size_t total = n + m;
    double n_splits = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        n_splits *= static_cast<double>(total - i) / static_cast<double>(i + 1);
        if (n_splits > 1e6) {
            throw std::invalid_argument(
                "exact_permutation_pvalue: C(n+m, n) exceeds the enumeration guard");
        }
    }
    std::vector<double> pool = w.vals_p();
    pool.insert(pool.end(), w.vals_q().begin(), w.vals_q().end());
    const double pool_sum = std::accumulate(pool.begin(), pool.end(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);
    const double inv_m = 1.0 / static_cast<double>(m);
    // reference statistic from the identity subset, with the exact summation
    // order the enumeration below uses, so ties are counted consistently
    double ref_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) ref_sum += pool[i];
    const double tau = ref_sum * inv_n - (pool_sum - ref_sum) * inv_m;

    // Lexicographic enumeration of n-subsets of {0, ..., total-1}.
    std::vector<std::size_t> comb(n);
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    std::size_t hits = 0;
    std::size_t count = 0;
    while (true) {
        double sum_a = 0.0;
        for (std::size_t i : comb) sum_a += pool[i];
        const double tau_perm = sum_a * inv_n - (pool_sum - sum_a) * inv_m;
        if (tau_perm >= tau) ++hits;
        ++count;
        // advance to the next combination, or finish
        std::size_t i = n;
        bool done = true;
        while (i-- > 0) {
            if (comb[i] != i + total - n) {
                done = false;
                break;
            }
        }
        if (done) {
            return static_cast<double>(hits) / static_cast<double>(count);
        }
        ++comb[i];
        for (std::size_t j = i + 1; j < n; ++j) comb[j] = comb[j - 1] + 1;
    }
}

TestOutcome asymptotic_pvalue(const WitnessValues& w, double alpha) {
    TestOutcome out;
    out.method = "asymptotic";
    out.B = 0;
    out.T = 0;
    out.alpha = alpha;
    fill_diagnostics(out, w);
    if (out.degenerate) {
        out.p_value = 1.0;  // conservative
    } else {
        const double total = static_cast<double>(w.vals_p().size() + w.vals_q().size());
        out.p_value = 1.0 - normal_cdf(std::sqrt(total) * out.tau / out.sigma_hat);
        if (out.p_value <= 0.0) out.p_value = std::numeric_limits<double>::min();
    }
    out.reject = out.p_value <= alpha;
    return out;
}

PipelineResult run_test_full(const Sample& sp, const Sample& sq, const PipelineConfig& cfg) {
    SplitPlan plan = split(sp, sq, cfg.ratio, derive_seed(cfg.seed, 0));

    const Sample train_p(gather_rows(sp, plan.train_p_idx));
    const Sample train_q(gather_rows(sq, plan.train_q_idx));
    const LabeledTrainSet train = label_and_weight(train_p, train_q);

    Witness w;
    if (cfg.single_learner) {
        w = fit_single(*cfg.single_learner, train, derive_seed(cfg.seed, 1));
    } else {
        BudgetConfig budget = cfg.budget;
        budget.seed = derive_seed(cfg.seed, 1);
        w = fit_auto(train, budget);
    }
    if (cfg.binarized) w = binarize(w);

    // The witness is evaluated exactly once per test row; everything after
    // this point permutes the values, never the model.
    const Matrix test_p = gather_rows(sp, plan.test_p_idx);
    const Matrix test_q = gather_rows(sq, plan.test_q_idx);
    WitnessValues values(predict(w, test_p), predict(w, test_q), plan.c_test);

    TestOutcome outcome =
        cfg.asymptotic ? asymptotic_pvalue(values, cfg.alpha)
                       : permutation_pvalue(values, cfg.permutations, derive_seed(cfg.seed, 2),
                                            cfg.alpha);
    outcome.seed = cfg.seed;
    return PipelineResult{std::move(outcome), std::move(w), std::move(plan)};
}

TestOutcome run_test(const Sample& sp, const Sample& sq, const PipelineConfig& cfg) {
    return run_test_full(sp, sq, cfg).outcome;
}

InterpretationReport interpret(const Witness& w, const Sample& test_p, const Sample& test_q,
                               std::size_t k) {
    if (k < 1) {
        throw std::invalid_argument("interpret: k must be at least 1");
    }
    const std::vector<double> vp = predict(w, test_p.rows());
    const std::vector<double> vq = predict(w, test_q.rows());

    struct Row {
        double value;
        std::size_t pooled_idx;
        char origin;
        const std::vector<double>* features;
    };
    std::vector<Row> rows;
    rows.reserve(vp.size() + vq.size());
    for (std::size_t i = 0; i < vp.size(); ++i) {
        rows.push_back({vp[i], i, 'P', &test_p.row(i)});
    }
    for (std::size_t i = 0; i < vq.size(); ++i) {
        rows.push_back({vq[i], vp.size() + i, 'Q', &test_q.row(i)});
    }

    InterpretationReport report;
    if (k > rows.size()) {
        report.clamped = true;
        k = rows.size();
    }
    auto fill = [&](std::vector<InterpretEntry>& out, bool top) {
        std::vector<Row> sorted = rows;
        std::sort(sorted.begin(), sorted.end(), [top](const Row& a, const Row& b) {
            if (a.value != b.value) return top ? a.value > b.value : a.value < b.value;
            return a.pooled_idx < b.pooled_idx;
        });
        for (std::size_t i = 0; i < k; ++i) {
            out.push_back({i + 1, sorted[i].origin, sorted[i].value, *sorted[i].features});
        }
    };
    fill(report.top, true);
    fill(report.bottom, false);
    return report;
}

std::string InterpretationReport::to_json() const {
    nlohmann::ordered_json j;
    j["clamped"] = clamped;
    auto block = [](const std::vector<InterpretEntry>& entries) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& e : entries) {
            nlohmann::ordered_json row;
            row["rank"] = e.rank;
            row["origin"] = std::string(1, e.origin);
            row["witness_value"] = e.witness_value;
            row["features"] = e.features;
            arr.push_back(std::move(row));
        }
        return arr;
    };
    j["top"] = block(top);
    j["bottom"] = block(bottom);
    return j.dump();
}

std::string InterpretationReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    const std::size_t d = top.empty() ? 0 : top.front().features.size();
    os << "block,rank,origin,witness_value";
    for (std::size_t j = 0; j < d; ++j) os << ",f" << j;
    os << "\n";
    auto emit = [&](const char* name, const std::vector<InterpretEntry>& entries) {
        for (const auto& e : entries) {
            os << name << "," << e.rank << "," << e.origin << "," << e.witness_value;
            for (double v : e.features) os << "," << v;
            os << "\n";
        }
    };
    emit("top", top);
    emit("bottom", bottom);
    return os.str();
}

double c2st_accuracy(const WitnessValues& w) {
    for (const auto* vals : {&w.vals_p(), &w.vals_q()}) {
        for (double v : *vals) {
            if (v != 0.0 && v != 1.0) {
                throw std::invalid_argument("c2st_accuracy: witness values must be binary");
            }
        }
    }
    if (w.vals_p().size() != w.vals_q().size()) {
        throw std::invalid_argument("c2st_accuracy: requires balanced test sets");
    }
    return 0.5 + 0.5 * mean_discrepancy(w);
}

}  // namespace witnesslab
