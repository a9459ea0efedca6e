// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "support/kge_checks.hpp"
#include "support/op_checks.hpp"
#include "support/path_oracle.hpp"
#include "support/tempdir.hpp"
#include "support/toy_experiment.hpp"
#include "terp/complex.hpp"
#include "terp/train_eval.hpp"

using namespace terp;
using namespace terp::testing;

namespace {

// tolerances and budgets
constexpr double kUnitDrift = 1e-6;
constexpr double kPhaseTol = 1e-9;
constexpr double kPolarTol = 1e-9;
constexpr double kFdTol = 1e-3;
constexpr int kFdInstances = 20;
constexpr double kCycleRank = 2.0;
constexpr double kCompositionRad = 0.5;
constexpr int kOracleGraphs = 50;
constexpr std::size_t kOracleNodes = 12;
constexpr std::size_t kTwoStageQuestions = 100;
constexpr std::size_t kLargeSubgraph = 500;
constexpr std::size_t kStage1K = 15;
constexpr double kMinBundleRatio = 10.0;
constexpr double kMinAgreement = 0.99;
constexpr double kOneHopTarget = 0.90;
constexpr double kTwoHopTarget = 0.80;
constexpr double kToyBudgetSeconds = 15 * 60;
constexpr std::uint64_t kSeeds[] = {0, 1, 2};
constexpr std::size_t kMinSeedWins = 2;
constexpr std::size_t kRoundTripPairs = 100;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int n, bool pass, const std::string& detail, double seconds) {
    std::printf("criterion %d: %s  %s  [%.1fs]\n", n, pass ? "PASS" : "FAIL", detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
}

void info(const std::string& s) {
    std::printf("  %s\n", s.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Config seeded(std::uint64_t seed) {
    Config c = toy_config();
    c.kge.seed = c.model.seed = c.qa.seed = seed;
    return c;
}

ToyConfig toy_for(std::uint64_t seed) {
    ToyConfig t;
    t.seed = seed;
    return t;
}

// One generated benchmark with its trained full model. Kept alive so later
// criteria reuse the seed-0 run instead of retraining.
struct ToyRun {
    std::unique_ptr<TempDir> dir = std::make_unique<TempDir>();
    Config cfg;
    Experiment ex;
    std::unique_ptr<KgeCache> kge;
    std::unique_ptr<TerpModel> full;
    double train_seconds = 0.0;
};

ToyRun& toy_run(std::uint64_t seed) {
    static std::map<std::uint64_t, ToyRun> runs;
    auto it = runs.find(seed);
    if (it != runs.end()) return it->second;
    ToyRun& r = runs[seed];
    const auto t0 = Clock::now();
    r.cfg = seeded(seed);
    r.ex = toy_experiment(*r.dir, toy_for(seed), r.cfg.ppr);
    r.kge = std::make_unique<KgeCache>(r.cfg.kge);
    r.full = std::make_unique<TerpModel>(train_model(r.ex, r.kge->get(r.ex.kg, ModelKind::RotatE), r.cfg));
    r.train_seconds = since(t0);
    return r;
}

std::size_t bucket_count(const EvalReport& rep, const std::string& b) {
    auto it = rep.buckets.find(b);
    return it == rep.buckets.end() ? 0 : it->second.count;
}

EvalReport variant_report(ToyRun& r, const Variant& v) {
    if (v.with_path && v.head == HeadKind::RotateScale && v.features == PathFeatures::Both)
        return evaluate(*r.full, r.ex.test, r.ex.test_sub, r.cfg.infer);
    const auto rows = ablation_run(r.ex, std::span<const Variant>(&v, 1), r.cfg, *r.kge);
    return rows.front().report;
}

// ---------------------------------------------------------------------------

void algebra() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
    double drift = 0.0, phase_err = 0.0, polar_err = 0.0;

    // trained relations and their compositions stay on the unit circle
    const auto kg = add_inverse_relations(cycle_graph());
    std::uniform_int_distribution<RelationId> pick(0, static_cast<RelationId>(kg.num_relations() - 1));
    for (std::size_t epochs : {1u, 10u, 100u, 1000u}) {
        auto cfg = cycle_config();
        cfg.epochs = epochs;
        const auto table = train_kge(kg, cfg);
        for (RelationId r = 0; r < static_cast<RelationId>(kg.num_relations()); ++r)
            for (double m : modulus(table.relation(r))) drift = std::max(drift, std::abs(m - 1.0));
        for (int rep = 0; rep < 200; ++rep) {
            std::vector<RelationId> path(1 + rep % 6);
            for (auto& r : path) r = pick(rng);
            for (double m : modulus(compose_relations(path, table))) drift = std::max(drift, std::abs(m - 1.0));
        }
    }
    const auto big = compositional_graph(7);
    const auto trained = train_kge(big, composition_config(7));
    for (RelationId r = 0; r < static_cast<RelationId>(big.num_relations()); ++r)
        for (double m : modulus(trained.relation(r))) drift = std::max(drift, std::abs(m - 1.0));

    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t d = 1 + rep % 16;
        std::vector<double> ta(d), tb(d);
        for (std::size_t j = 0; j < d; ++j) ta[j] = ang(rng), tb[j] = ang(rng);
        const auto a = from_polar(std::vector<double>(d, 1.0), ta), b = from_polar(std::vector<double>(d, 1.0), tb);
        const auto pab = phase(hadamard(a, b));
        for (std::size_t j = 0; j < d; ++j)
            phase_err = std::max(phase_err, std::abs(wrap_angle(pab[j] - ta[j] - tb[j])));

        const auto v = ComplexVec(random_vector(rng, d, 3.0), random_vector(rng, d, 3.0));
        const auto back = from_polar(modulus(v), phase(v));
        for (std::size_t j = 0; j < d; ++j)
            polar_err = std::max({polar_err, std::abs(back.re[j] - v.re[j]), std::abs(back.im[j] - v.im[j])});
        const auto m = random_vector(rng, d, 3.0);
        const auto w = from_polar(m, ta);
        const auto mw = modulus(w), pw = phase(w);
        for (std::size_t j = 0; j < d; ++j) {
            polar_err = std::max(polar_err, std::abs(mw[j] - std::abs(m[j])));
            if (m[j] > 1e-6) polar_err = std::max(polar_err, std::abs(wrap_angle(pw[j] - ta[j])));
        }
    }
    const double s = since(t0);
    verdict(1, drift <= kUnitDrift && phase_err <= kPhaseTol && polar_err <= kPolarTol && s < 10.0,
            fmt("unit drift %.2e (<=%.0e), phase addition %.2e, polar round trip %.2e (<=%.0e)", drift, kUnitDrift,
                phase_err, polar_err, kPolarTol),
            s);
}

void gradients() {
    const auto t0 = Clock::now();
    FdResult worst;
    auto take = [&](const char* tag, const FdResult& r) {
        info(fmt("%-24s worst rel err %.2e over %zu coords", tag, r.worst, r.checked));
        terp::testing::detail::merge(worst, r, tag);
    };
    take("encoder", check_encoder(201, kFdInstances));
    take("fusion/both", check_fusion(202, kFdInstances));
    take("fusion/textual", check_fusion(203, kFdInstances, PathFeatures::TextualOnly));
    take("fusion/structural", check_fusion(204, kFdInstances, PathFeatures::StructuralOnly));
    take("attention", check_attention(205, kFdInstances));
    take("head/rotate_scale", check_head(206, kFdInstances, HeadKind::RotateScale));
    take("head/rotate", check_head(207, kFdInstances, HeadKind::RotateOnly));
    take("head/complex", check_head(208, kFdInstances, HeadKind::Complex));
    take("score_view/L1", check_score_view(209, kFdInstances, Norm::L1));
    take("score_view/L2", check_score_view(210, kFdInstances, Norm::L2));
    take("qa_loss", check_qa_loss(211, kFdInstances));
    const double s = since(t0);
    verdict(2, worst.worst < kFdTol && s < 120.0,
            fmt("worst relative error %.2e at %s (< %.0e, %d instances each)", worst.worst, worst.where.c_str(), kFdTol,
                kFdInstances),
            s);
}

void kge_sanity() {
    const auto t0 = Clock::now();
    const auto cycle = cycle_graph();
    const auto cyc = train_kge(cycle, cycle_config());
    const double rank = mean_filtered_rank(cyc, cycle, Norm::L1);
    const auto comp = compositional_graph(0);
    const auto tab = train_kge(comp, composition_config(0));
    const double err = composition_error(tab, 0, 1, 2);
    const double s = since(t0);
    verdict(3, rank <= kCycleRank && err < kCompositionRad && s < 180.0,
            fmt("cycle mean filtered rank %.3f (<= %.0f), composition error %.3f rad (< %.1f)", rank, kCycleRank, err,
                kCompositionRad),
            s);
}

void path_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(401);
    std::size_t bad = 0, pairs = 0;
    for (int g = 0; g < kOracleGraphs; ++g) {
        const auto kg = random_graph(rng, kOracleNodes);
        bad += compare_with_oracle(kg, 3).size();
        pairs += kg.num_entities() * kg.num_entities();
    }
    const double s = since(t0);
    verdict(4, bad == 0 && s < 60.0,
            fmt("%zu mismatching pairs out of %zu on %d graphs", bad, pairs, kOracleGraphs), s);
}

bool same_ranking(const std::vector<ScoredCandidate>& a, const std::vector<ScoredCandidate>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].entity != b[i].entity || a[i].s_q != b[i].s_q || a[i].s_p != b[i].s_p || a[i].s != b[i].s)
            return false;
    return true;
}

void two_stage() {
    const auto t0 = Clock::now();
    // (i) k covering the subgraph reproduces exhaustive ranking exactly
    ToyRun& r = toy_run(0);
    std::vector<std::pair<const QuestionInstance*, const Subgraph*>> pool;
    for (auto* split : {&r.ex.train, &r.ex.dev, &r.ex.test}) {
        const auto& subs = split == &r.ex.train ? r.ex.train_sub : split == &r.ex.dev ? r.ex.dev_sub : r.ex.test_sub;
        for (std::size_t i = 0; i < split->size(); ++i) pool.push_back({&(*split)[i], &subs[i]});
    }
    std::mt19937_64 rng(501);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min(pool.size(), kTwoStageQuestions));
    std::size_t identical = 0;
    for (const auto& [q, sg] : pool) {
        InferenceConfig ic = r.cfg.infer;
        ic.stage1_k = sg->size();
        identical += same_ranking(two_stage_infer(*r.full, *q, *sg, ic).ranked,
                                  exhaustive_rank(*r.full, *q, *sg, ic.lambda).ranked);
    }
    info(fmt("k >= |subgraph|: %zu/%zu rankings bit-identical", identical, pool.size()));

    // (ii) k=15 on ~500-entity subgraphs of the large toy
    TempDir dir;
    Config cfg = seeded(0);
    cfg.ppr.max_entities = kLargeSubgraph;  // same cap for training and test pools
    const Experiment ex = toy_experiment(dir, ToyConfig::large(0), cfg.ppr);
    const TerpModel model = train_model(ex, train_kge(ex.kg, cfg.kge), cfg);
    InferenceConfig ic = cfg.infer;
    ic.stage1_k = kStage1K;
    const EvalReport rep = evaluate(model, ex.test, ex.test_sub, ic);
    std::size_t agree = 0, sub_total = 0;
    for (std::size_t i = 0; i < ex.test.size(); ++i) {
        const auto a = two_stage_infer(model, ex.test[i], ex.test_sub[i], ic).ranked;
        const auto b = exhaustive_rank(model, ex.test[i], ex.test_sub[i], ic.lambda).ranked;
        agree += !a.empty() && !b.empty() && a.front().entity == b.front().entity;
        sub_total += ex.test_sub[i].size();
    }
    const double ratio = rep.path_bundles ? static_cast<double>(rep.exhaustive_path_bundles) /
                                                static_cast<double>(rep.path_bundles)
                                          : 0.0;
    const double agreement = static_cast<double>(agree) / static_cast<double>(ex.test.size());
    info(fmt("large toy: %zu test questions, mean subgraph %.0f entities, hits@1 two-stage %.3f",
             ex.test.size(), static_cast<double>(sub_total) / static_cast<double>(ex.test.size()), rep.hits_at_1()));
    info(fmt("path bundles: two-stage %zu, exhaustive %zu", rep.path_bundles, rep.exhaustive_path_bundles));
    const double s = since(t0);
    verdict(5, identical == pool.size() && ratio >= kMinBundleRatio && agreement >= kMinAgreement,
            fmt("bit-identical %zu/%zu; k=%zu bundle reduction %.1fx (>= %.0fx), top-1 agreement %.4f (>= %.2f)",
                identical, pool.size(), kStage1K, ratio, kMinBundleRatio, agreement, kMinAgreement),
            s);
}

void end_to_end() {
    const auto t0 = Clock::now();
    ToyRun& r = toy_run(0);
    const EvalReport rep = evaluate(*r.full, r.ex.test, r.ex.test_sub, r.cfg.infer);
    const double one = rep.bucket_hits("1-hop"), two = rep.bucket_hits("2-hop");
    info(fmt("seed 0 test: all %.3f, 1-hop %.3f (%zu q), 2-hop %.3f (%zu q)", rep.hits_at_1(), one,
             bucket_count(rep, "1-hop"), two, bucket_count(rep, "2-hop")));
    verdict(6, one >= kOneHopTarget && two >= kTwoHopTarget && r.train_seconds <= kToyBudgetSeconds,
            fmt("1-hop %.3f (>= %.2f), 2-hop %.3f (>= %.2f), pipeline %.0fs (<= %.0fs)", one, kOneHopTarget, two,
                kTwoHopTarget, r.train_seconds, kToyBudgetSeconds),
            since(t0) + r.train_seconds);
}

void ablations() {
    const auto t0 = Clock::now();
    const Variant full{true, HeadKind::RotateScale, PathFeatures::Both};
    const Variant no_path{false, HeadKind::RotateScale, PathFeatures::Both};
    const Variant no_path_rot{false, HeadKind::RotateOnly, PathFeatures::Both};
    const Variant path_rot{true, HeadKind::RotateOnly, PathFeatures::Both};
    const Variant textual{true, HeadKind::RotateScale, PathFeatures::TextualOnly};
    const Variant structural{true, HeadKind::RotateScale, PathFeatures::StructuralOnly};
    std::size_t wins_a = 0, wins_b = 0, wins_c = 0, wins_b_path = 0;
    for (std::uint64_t seed : kSeeds) {
        ToyRun& r = toy_run(seed);
        std::map<std::string, EvalReport> rep;
        for (const Variant& v : {full, no_path, no_path_rot, path_rot, textual, structural})
            rep[v.name()] = variant_report(r, v);
        auto two = [&](const Variant& v) { return rep[v.name()].bucket_hits("2-hop"); };
        auto all = [&](const Variant& v) { return rep[v.name()].hits_at_1(); };
        const bool a = two(full) >= two(no_path);
        const bool b = two(no_path) >= two(no_path_rot);
        const bool c = all(full) >= all(textual) && all(full) >= all(structural);
        wins_a += a, wins_b += b, wins_c += c;
        wins_b_path += two(full) >= two(path_rot);
        info(fmt("seed %llu  2-hop: with_path %.3f without_path %.3f without_path:rotate %.3f with_path:rotate %.3f",
                 static_cast<unsigned long long>(seed), two(full), two(no_path), two(no_path_rot), two(path_rot)));
        info(fmt("seed %llu  all: hybrid %.3f textual %.3f structural %.3f  -> a %s b %s c %s",
                 static_cast<unsigned long long>(seed), all(full), all(textual), all(structural), a ? "ok" : "no",
                 b ? "ok" : "no", c ? "ok" : "no"));
    }
    info(fmt("info: rotate_scale >= rotate with paths on %zu/3 seeds", wins_b_path));
    verdict(7, wins_a >= kMinSeedWins && wins_b >= kMinSeedWins && wins_c >= kMinSeedWins,
            fmt("(a) with-path >= without-path on 2-hop %zu/3; (b) rotate_scale >= rotate on 2-hop %zu/3; "
                "(c) hybrid >= single-feature overall %zu/3 (each needs >= %zu)",
                wins_a, wins_b, wins_c, kMinSeedWins),
            since(t0));
}

void lambda_shape() {
    const auto t0 = Clock::now();
    ToyRun& r = toy_run(0);
    const std::vector<double> lambdas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    const auto rows = lambda_sweep(*r.full, r.ex.test, r.ex.test_sub, lambdas, r.cfg.infer.stage1_k);
    std::map<std::pair<double, std::string>, double> h;
    for (const auto& row : rows) h[{row.lambda, row.bucket}] = row.stats.hits_at_1();
    for (double l : lambdas)
        info(fmt("lambda %.1f  all %.3f  1-hop %.3f  2-hop %.3f", l, h[{l, "all"}], h[{l, "1-hop"}], h[{l, "2-hop"}]));
    // every middle weight must beat both ends; gains are read at the best middle weight
    bool above = true;
    double peak = 0.4;
    for (double l : {0.4, 0.6, 0.8}) {
        above = above && h[{l, "all"}] > h[{0.0, "all"}] && h[{l, "all"}] > h[{1.0, "all"}];
        if (h[{l, "all"}] > h[{peak, "all"}]) peak = l;
    }
    const double gain1 = h[{peak, "1-hop"}] - h[{0.0, "1-hop"}], gain2 = h[{peak, "2-hop"}] - h[{0.0, "2-hop"}];
    verdict(8, above && gain2 > gain1,
            fmt("all of lambda 0.4/0.6/0.8 (%.3f/%.3f/%.3f) above ends %.3f / %.3f: %s; gain from lambda 0 to %.1f: "
                "2-hop %+.3f vs 1-hop %+.3f",
                h[{0.4, "all"}], h[{0.6, "all"}], h[{0.8, "all"}], h[{0.0, "all"}], h[{1.0, "all"}],
                above ? "yes" : "no", peak, gain2, gain1),
            since(t0));
}

void determinism() {
    const auto t0 = Clock::now();
    auto run = [] {
        TempDir dir;
        Config cfg = tiny_config();
        const Experiment ex = toy_experiment(dir, tiny_toy(9), cfg.ppr);
        const TerpModel m = train_model(ex, train_kge(ex.kg, cfg.kge), cfg);
        return evaluate(m, ex.test, ex.test_sub, cfg.infer).to_tsv(ex.kg);
    };
    const std::string first = run(), second = run();
    const bool repeat = first == second;

    ToyRun& r = toy_run(0);
    const bool threads = evaluate(*r.full, r.ex.test, r.ex.test_sub, r.cfg.infer, 1).to_tsv(r.ex.kg) ==
                         evaluate(*r.full, r.ex.test, r.ex.test_sub, r.cfg.infer, 4).to_tsv(r.ex.kg);

    TempDir dir;
    r.full->save(dir.file("model.bin"), "kge.bin");
    std::string ref;
    const TerpModel back = TerpModel::load(dir.file("model.bin"), &ref);
    std::mt19937_64 rng(901);
    std::uniform_int_distribution<EntityId> pick(0, static_cast<EntityId>(r.ex.kg.num_entities() - 1));
    std::uniform_int_distribution<std::size_t> qpick(0, r.ex.test.size() - 1);
    std::size_t same = 0;
    for (std::size_t i = 0; i < kRoundTripPairs; ++i) {
        const auto& q = r.ex.test[qpick(rng)].text;
        const EntityId h = pick(rng), c = pick(rng);
        const auto a = r.full->score(q, h, c), b = back.score(q, h, c);
        same += a.s_q == b.s_q && a.s_p == b.s_p;
    }
    verdict(9, repeat && threads && same == kRoundTripPairs && ref == "kge.bin",
            fmt("two runs %s, 1 vs 4 threads %s, checkpoint round trip %zu/%zu identical pairs",
                repeat ? "identical" : "DIFFER", threads ? "identical" : "DIFFER", same, kRoundTripPairs),
            since(t0));
}

}  // namespace

int main() {
    algebra();
    gradients();
    kge_sanity();
    path_oracle();
    two_stage();
    end_to_end();
    ablations();
    lambda_shape();
    determinism();
    std::printf("%d of 9 criteria failed\n", failures);
    return failures;
}
