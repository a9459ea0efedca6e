// Command-line front end: data preparation, KGE and QA training,
// evaluation, single-question answering, lambda sweeps and ablations.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

#include "terp/config.hpp"
#include "terp/kge.hpp"
#include "terp/knowledge_graph.hpp"
#include "terp/model.hpp"
#include "terp/paths.hpp"
#include "terp/toy.hpp"
#include "terp/train_eval.hpp"

using namespace terp;

namespace {

Config load_config(const std::string& path) { return path.empty() ? Config{} : Config::load(path); }

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

std::vector<QuestionInstance> load_questions(const std::string& path, const KnowledgeGraph& kg) {
    QaDataset ds = load_qa(path, kg);
    if (ds.skipped) std::cerr << path << ": skipped " << ds.skipped << " unresolvable lines\n";
    return std::move(ds.instances);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"terp: question answering over knowledge graphs with relation paths"};
    app.require_subcommand(1);

    // drop-edges
    auto* drop = app.add_subcommand("drop-edges", "Remove a random fraction of triples");
    std::string drop_in, drop_out;
    double drop_fraction = 0.5;
    std::uint64_t drop_seed = 0;
    drop->add_option("--in", drop_in, "Input triples")->required();
    drop->add_option("--out", drop_out, "Output triples")->required();
    drop->add_option("--fraction", drop_fraction, "Fraction to remove")->check(CLI::Range(0.0, 1.0));
    drop->add_option("--seed", drop_seed);

    // train-kge
    auto* kge_cmd = app.add_subcommand("train-kge", "Train entity and relation embeddings");
    std::string kge_kg, kge_cfg, kge_out, kge_model;
    std::optional<std::size_t> kge_dim, kge_epochs;
    std::optional<std::uint64_t> kge_seed;
    kge_cmd->add_option("--triples,--kg", kge_kg, "Triples file")->required();
    kge_cmd->add_option("--model", kge_model, "rotate or complex")->check(CLI::IsMember({"rotate", "complex"}));
    kge_cmd->add_option("--dim", kge_dim, "Complex dimension")->check(CLI::PositiveNumber);
    kge_cmd->add_option("--epochs", kge_epochs);
    kge_cmd->add_option("--seed", kge_seed);
    kge_cmd->add_option("--config", kge_cfg, "Config file; the flags above override it");
    kge_cmd->add_option("--out", kge_out, "Embedding checkpoint")->required();

    // paths
    auto* paths_cmd = app.add_subcommand("paths", "List shortest relation paths between two entities");
    std::string paths_kg, paths_from, paths_to;
    std::size_t paths_len = 3, paths_max = 32;
    paths_cmd->add_option("--kg", paths_kg, "Triples file")->required();
    paths_cmd->add_option("--from", paths_from, "Source entity")->required();
    paths_cmd->add_option("--to", paths_to, "Target entity")->required();
    paths_cmd->add_option("--max-length", paths_len);
    paths_cmd->add_option("--max-paths", paths_max);

    // train-qa
    auto* qa_cmd = app.add_subcommand("train-qa", "Train the question answering model");
    std::string qa_kg, qa_file, qa_kge, qa_cfg, qa_out;
    qa_cmd->add_option("--kg", qa_kg, "Triples file")->required();
    qa_cmd->add_option("--qa", qa_file, "Training questions")->required();
    qa_cmd->add_option("--kge", qa_kge, "Embedding checkpoint")->required();
    qa_cmd->add_option("--config", qa_cfg, "Config file");
    qa_cmd->add_option("--out", qa_out, "Model checkpoint")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate hits@1 with two-stage inference");
    std::string ev_model, ev_qa, ev_cfg, ev_tsv;
    std::optional<double> ev_lambda;
    std::optional<std::size_t> ev_k;
    eval_cmd->add_option("--model", ev_model, "Model checkpoint")->required();
    eval_cmd->add_option("--qa", ev_qa, "Questions")->required();
    eval_cmd->add_option("--lambda", ev_lambda, "Path-view weight")->check(CLI::Range(0.0, 1.0));
    eval_cmd->add_option("--k", ev_k, "Stage-1 recall size")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--config", ev_cfg, "Config file (inference and subgraph settings)");
    eval_cmd->add_option("--tsv", ev_tsv, "Write the TSV report here");

    // answer
    auto* ans_cmd = app.add_subcommand("answer", "Answer a single question");
    std::string ans_model, ans_question, ans_cfg;
    std::vector<std::string> ans_topics;
    std::size_t ans_top = 5;
    ans_cmd->add_option("--model", ans_model, "Model checkpoint")->required();
    ans_cmd->add_option("--question", ans_question, "Question text")->required();
    ans_cmd->add_option("--topic", ans_topics, "Topic entity (repeatable)")->required();
    ans_cmd->add_option("--config", ans_cfg, "Config file");
    ans_cmd->add_option("--top", ans_top, "Answers to print");

    // gen-toy
    auto* toy_cmd = app.add_subcommand("gen-toy", "Write the synthetic benchmark");
    std::string toy_dir;
    std::uint64_t toy_seed = 0;
    bool toy_large = false;
    toy_cmd->add_option("--out-dir", toy_dir, "Output directory")->required();
    toy_cmd->add_option("--seed", toy_seed);
    toy_cmd->add_flag("--large", toy_large, "About three times more entities");

    // sweep-lambda
    auto* sweep_cmd = app.add_subcommand("sweep-lambda", "hits@1 for several path-view weights");
    std::string sw_model, sw_qa, sw_cfg, sw_out;
    std::vector<double> sw_lambdas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::optional<std::size_t> sw_k;
    sweep_cmd->add_option("--model", sw_model, "Model checkpoint")->required();
    sweep_cmd->add_option("--qa", sw_qa, "Questions")->required();
    sweep_cmd->add_option("--lambdas", sw_lambdas, "Weights to try")->delimiter(',');
    sweep_cmd->add_option("--k", sw_k, "Stage-1 recall size");
    sweep_cmd->add_option("--config", sw_cfg, "Config file");
    sweep_cmd->add_option("--out", sw_out, "Write the table here");

    // ablate
    auto* abl_cmd = app.add_subcommand("ablate", "Train and evaluate model variants");
    std::string ab_kg, ab_train, ab_test, ab_cfg, ab_out;
    std::vector<std::string> ab_variants{"without_path:rotate_scale", "with_path:rotate:both",
                                         "with_path:rotate_scale:textual_only",
                                         "with_path:rotate_scale:structural_only", "with_path:rotate_scale:both",
                                         "with_path:complex:textual_only"};
    abl_cmd->add_option("--kg", ab_kg, "Triples file")->required();
    abl_cmd->add_option("--train", ab_train, "Training questions")->required();
    abl_cmd->add_option("--test", ab_test, "Test questions")->required();
    abl_cmd->add_option("--config", ab_cfg, "Config file");
    abl_cmd->add_option("--variants", ab_variants, "with_path|without_path:head[:features]")->delimiter(',');
    abl_cmd->add_option("--out", ab_out, "Write the table here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*drop) {
            save_triples(drop_edges(load_triples(drop_in), drop_fraction, drop_seed), drop_out);
        } else if (*kge_cmd) {
            Config cfg = load_config(kge_cfg);
            if (!kge_model.empty()) cfg.kge.model_kind = parse_model_kind(kge_model);
            if (kge_dim) cfg.kge.dim = *kge_dim;
            if (kge_epochs) cfg.kge.epochs = *kge_epochs;
            if (kge_seed) cfg.kge.seed = *kge_seed;
            const KnowledgeGraph kg = add_inverse_relations(load_triples(kge_kg));
            const auto t0 = std::chrono::steady_clock::now();
            const KgeTrainResult r = train_kge_with_history(kg, cfg.kge);
            for (std::size_t e = 0; e < r.epoch_losses.size(); ++e)
                if (e % 10 == 0 || e + 1 == r.epoch_losses.size())
                    std::cerr << "epoch " << e + 1 << " loss " << r.epoch_losses[e] << '\n';
            save_embeddings(r.table, kge_out);
            std::cerr << "trained in " << seconds_since(t0) << " s\n";
        } else if (*paths_cmd) {
            const KnowledgeGraph kg = add_inverse_relations(load_triples(paths_kg));
            const auto h = kg.entities().find(paths_from), c = kg.entities().find(paths_to);
            if (!h) throw Error("unknown entity: " + paths_from);
            if (!c) throw Error("unknown entity: " + paths_to);
            for (const auto& p : enumerate_shortest_paths(kg, *h, *c, paths_len, paths_max)) {
                for (std::size_t i = 0; i < p.steps.size(); ++i)
                    std::cout << (i ? " -> " : "") << kg.relations().label(p.steps[i]);
                std::cout << '\n';
            }
        } else if (*qa_cmd) {
            const Config cfg = load_config(qa_cfg);
            Experiment ex;
            ex.kg = add_inverse_relations(load_triples(qa_kg));
            ex.train = load_questions(qa_file, ex.kg);
            ex.train_sub = extract_subgraphs(ex.kg, ex.train, cfg.ppr);
            const EmbeddingTable table = load_embeddings(qa_kge);
            const auto t0 = std::chrono::steady_clock::now();
            const TerpModel model = train_model(ex, table, cfg, nullptr, [](std::size_t e, double loss) {
                std::cerr << "epoch " << e + 1 << " loss " << loss << '\n';
            });
            model.save(qa_out, qa_kge);
            model.tokenizer().save(qa_out + ".vocab");
            std::cerr << "trained in " << seconds_since(t0) << " s\n";
        } else if (*eval_cmd) {
            Config cfg = load_config(ev_cfg);
            if (ev_lambda) cfg.infer.lambda = *ev_lambda;
            if (ev_k) cfg.infer.stage1_k = *ev_k;
            const TerpModel model = TerpModel::load(ev_model);
            const auto qs = load_questions(ev_qa, model.graph());
            const auto subs = extract_subgraphs(model.graph(), qs, cfg.ppr);
            const EvalReport rep = evaluate(model, qs, subs, cfg.infer);
            std::cout << rep.summary();
            write_text(ev_tsv, rep.to_tsv(model.graph()));
        } else if (*ans_cmd) {
            const Config cfg = load_config(ans_cfg);
            const TerpModel model = TerpModel::load(ans_model);
            QuestionInstance q;
            q.text = ans_question;
            for (const auto& t : ans_topics) {
                const auto id = model.graph().entities().find(t);
                if (!id) throw Error("unknown entity: " + t);
                q.topic_entities.push_back(*id);
            }
            const Subgraph sg = cfg.ppr.max_entities >= model.graph().num_entities()
                                    ? full_subgraph(model.graph())
                                    : ppr_subgraph(model.graph(), q.topic_entities, cfg.ppr);
            const InferenceResult r = two_stage_infer(model, q, sg, cfg.infer);
            for (std::size_t i = 0; i < std::min(ans_top, r.ranked.size()); ++i) {
                const auto& c = r.ranked[i];
                std::cout << model.graph().entities().label(c.entity) << '\t' << c.s << '\t' << c.s_q << '\t'
                          << (c.s_p ? std::to_string(*c.s_p) : std::string("-")) << '\n';
            }
        } else if (*toy_cmd) {
            const ToyConfig tc = toy_large ? ToyConfig::large(toy_seed) : [&] {
                ToyConfig c;
                c.seed = toy_seed;
                return c;
            }();
            const ToyBenchmark bench = generate_toy(tc);
            const ToyFiles files = write_toy(bench, toy_dir);
            Config cfg = toy_config();
            cfg.kge.seed = cfg.model.seed = cfg.qa.seed = toy_seed;
            cfg.save(files.config);
            std::cerr << bench.triples.size() << " triples, " << bench.train.size() << "/" << bench.dev.size() << "/"
                      << bench.test.size() << " questions written to " << toy_dir << '\n';
        } else if (*sweep_cmd) {
            const Config cfg = load_config(sw_cfg);
            const TerpModel model = TerpModel::load(sw_model);
            const auto qs = load_questions(sw_qa, model.graph());
            const auto subs = extract_subgraphs(model.graph(), qs, cfg.ppr);
            const auto rows = lambda_sweep(model, qs, subs, sw_lambdas, sw_k.value_or(cfg.infer.stage1_k));
            const std::string table = sweep_tsv(rows);
            std::cout << table;
            write_text(sw_out, table);
        } else if (*abl_cmd) {
            const Config cfg = load_config(ab_cfg);
            const Experiment ex = load_experiment(ab_kg, ab_train, "", ab_test, cfg.ppr);
            std::vector<Variant> variants;
            for (const auto& v : ab_variants) variants.push_back(parse_variant(v));
            KgeCache kge(cfg.kge);
            const auto rows = ablation_run(ex, variants, cfg, kge);
            const std::string table = ablation_tsv(rows);
            std::cout << table;
            write_text(ab_out, table);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
