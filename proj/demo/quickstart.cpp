// Small end-to-end walk through the library: build a graph in memory, learn
// embeddings, look at relation paths, train the QA model and ask it things.

#include <algorithm>
#include <array>
#include <iomanip>
#include <iostream>

#include "terp/train_eval.hpp"

using namespace terp;

namespace {

QuestionInstance ask(const KnowledgeGraph& kg, const std::string& text, const std::string& topic,
                     const std::string& answer, int hops) {
    QuestionInstance q;
    q.text = text;
    q.topic_entities = {*kg.entities().find(topic)};
    q.answers = {*kg.entities().find(answer)};
    q.hop_annotation = hops;
    return q;
}

}  // namespace

int main() {
    const std::vector<std::array<std::string, 3>> facts = {
        {"ada", "works_for", "initech"},      {"bo", "works_for", "globex"},
        {"cy", "works_for", "initech"},       {"dee", "works_for", "umbrella"},
        {"initech", "based_in", "austin"},    {"globex", "based_in", "springfield"},
        {"umbrella", "based_in", "raccoon_city"}, {"austin", "in_country", "usa"},
        {"springfield", "in_country", "usa"}, {"raccoon_city", "in_country", "canada"},
        {"ada", "lives_in", "austin"},        {"bo", "lives_in", "springfield"},
        {"cy", "lives_in", "austin"},         {"dee", "lives_in", "raccoon_city"},
    };
    Vocabulary ents, rels;
    std::vector<Triple> ts;
    for (const auto& [h, r, t] : facts) ts.push_back({ents.add(h), rels.add(r), ents.add(t)});
    const KnowledgeGraph base(ents, rels, ts);

    Experiment ex;
    ex.kg = add_inverse_relations(base);
    const auto& kg = ex.kg;

    // paths from a person to a country go through the city
    for (const auto& p : enumerate_shortest_paths(kg, *kg.entities().find("ada"), *kg.entities().find("usa"), 3, 8)) {
        std::cout << "ada -> usa:";
        for (RelationId r : p.steps) std::cout << ' ' << kg.relations().label(r);
        std::cout << '\n';
    }

    Config cfg = toy_config();
    cfg.kge.dim = 8;
    cfg.kge.epochs = 200;
    cfg.qa.epochs = 150;
    cfg.qa.learning_rate = 1e-2;
    cfg.qa.batch_size = 4;
    cfg.qa.candidates = 12;
    const EmbeddingTable table = train_kge(kg, cfg.kge);

    auto follow = [&](EntityId e, const char* rel) {
        for (const Edge& edge : kg.out_edges(e))
            if (kg.relations().label(edge.relation) == rel) return edge.neighbor;
        throw Error(std::string("no ") + rel + " edge");
    };
    for (const char* p : {"ada", "bo", "cy", "dee"}) {
        const std::string who = p;
        const EntityId e = *kg.entities().find(who);
        ex.train.push_back(ask(kg, "who employs [" + who + "]", who, kg.entities().label(follow(e, "works_for")), 1));
        const EntityId country = follow(follow(e, "lives_in"), "in_country");
        ex.train.push_back(ask(kg, "which country is [" + who + "] from", who, kg.entities().label(country), 2));
    }
    for (const auto& q : ex.train) ex.train_sub.push_back(full_subgraph(kg, q.answers));

    QaTrainResult log;
    const TerpModel model = train_model(ex, table, cfg, &log);
    std::cout << "qa loss: first epoch " << log.epoch_losses.front() << ", last " << log.epoch_losses.back() << '\n';

    const EvalReport rep = evaluate(model, ex.train, ex.train_sub, cfg.infer);
    std::cout << rep.summary();

    QuestionInstance q;
    q.text = "which country is [cy] from";
    q.topic_entities = {*kg.entities().find("cy")};
    const auto top = two_stage_infer(model, q, full_subgraph(kg), cfg.infer).ranked;
    std::cout << q.text << '\n';
    for (std::size_t i = 0; i < std::min<std::size_t>(3, top.size()); ++i)
        std::cout << "  " << std::setw(14) << std::left << kg.entities().label(top[i].entity) << " " << top[i].s
                  << '\n';
    return 0;
}
