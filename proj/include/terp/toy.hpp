#pragma once

// Synthetic family/affiliation benchmark: a typed knowledge graph with eight
// forward relations and templated 1-hop and 2-hop questions whose answers
// follow from composing those relations.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "terp/error.hpp"

namespace terp {

struct ToyConfig {
    std::size_t persons = 120;
    std::size_t companies = 16;
    std::size_t universities = 8;
    std::size_t cities = 20;
    std::size_t countries = 6;
    std::size_t industries = 6;
    double root_fraction = 0.2;  // persons without a parent
    double train_fraction = 0.8;
    double dev_fraction = 0.1;
    std::uint64_t seed = 0;

    /// Roughly 3x the default entity count; used for the inference-cost
    /// benchmark on ~500-entity subgraphs.
    static ToyConfig large(std::uint64_t seed) {
        ToyConfig c;
        c.persons = 420;
        c.companies = 48;
        c.universities = 20;
        c.cities = 40;
        c.countries = 10;
        c.industries = 10;
        c.seed = seed;
        return c;
    }
};

struct ToyTriple {
    std::string head, relation, tail;
};

struct ToyQuestion {
    std::string text;
    std::vector<std::string> answers;
    int hops = 1;
};

struct ToyBenchmark {
    std::vector<ToyTriple> triples;
    std::vector<ToyQuestion> train, dev, test;
};

namespace detail {

inline std::string label(const char* prefix, std::size_t i, int width) {
    std::string n = std::to_string(i);
    if (static_cast<int>(n.size()) < width) n.insert(0, static_cast<std::size_t>(width) - n.size(), '0');
    return std::string(prefix) + "_" + n;
}

inline std::string fill(const std::string& tpl, const std::string& entity) {
    const auto pos = tpl.find("{}");
    return tpl.substr(0, pos) + "[" + entity + "]" + tpl.substr(pos + 2);
}

}  // namespace detail

inline ToyBenchmark generate_toy(const ToyConfig& cfg) {
    if (cfg.persons < 2 || cfg.companies == 0 || cfg.universities == 0 || cfg.cities == 0 || cfg.countries == 0 ||
        cfg.industries == 0)
        throw Error("gen-toy: every entity type needs at least one member");
    std::mt19937_64 rng(cfg.seed);
    auto pick = [&rng](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

    std::vector<std::string> person, company, university, city, country, industry;
    for (std::size_t i = 0; i < cfg.persons; ++i) person.push_back(detail::label("person", i, 3));
    for (std::size_t i = 0; i < cfg.companies; ++i) company.push_back(detail::label("company", i, 2));
    for (std::size_t i = 0; i < cfg.universities; ++i) university.push_back(detail::label("university", i, 2));
    for (std::size_t i = 0; i < cfg.cities; ++i) city.push_back(detail::label("city", i, 2));
    for (std::size_t i = 0; i < cfg.countries; ++i) country.push_back(detail::label("country", i, 2));
    for (std::size_t i = 0; i < cfg.industries; ++i) industry.push_back(detail::label("industry", i, 2));

    const auto roots = std::max<std::size_t>(1, static_cast<std::size_t>(cfg.root_fraction * static_cast<double>(cfg.persons)));
    std::vector<long> parent(cfg.persons, -1);
    std::vector<std::size_t> works(cfg.persons), studied(cfg.persons), lives(cfg.persons);
    std::vector<std::size_t> hq(cfg.companies), sector(cfg.companies), uni_city(cfg.universities), nation(cfg.cities);
    for (std::size_t i = roots; i < cfg.persons; ++i) parent[i] = static_cast<long>(pick(i));
    for (std::size_t i = 0; i < cfg.persons; ++i) {
        works[i] = pick(cfg.companies);
        studied[i] = pick(cfg.universities);
        lives[i] = pick(cfg.cities);
    }
    for (std::size_t i = 0; i < cfg.companies; ++i) {
        hq[i] = pick(cfg.cities);
        sector[i] = pick(cfg.industries);
    }
    for (std::size_t i = 0; i < cfg.universities; ++i) uni_city[i] = pick(cfg.cities);
    for (std::size_t i = 0; i < cfg.cities; ++i) nation[i] = pick(cfg.countries);

    ToyBenchmark out;
    for (std::size_t i = 0; i < cfg.persons; ++i) {
        if (parent[i] >= 0) out.triples.push_back({person[i], "parent", person[static_cast<std::size_t>(parent[i])]});
        out.triples.push_back({person[i], "works_for", company[works[i]]});
        out.triples.push_back({person[i], "studied_at", university[studied[i]]});
        out.triples.push_back({person[i], "lives_in", city[lives[i]]});
    }
    for (std::size_t i = 0; i < cfg.companies; ++i) {
        out.triples.push_back({company[i], "headquartered_in", city[hq[i]]});
        out.triples.push_back({company[i], "industry", industry[sector[i]]});
    }
    for (std::size_t i = 0; i < cfg.universities; ++i) out.triples.push_back({university[i], "located_in", city[uni_city[i]]});
    for (std::size_t i = 0; i < cfg.cities; ++i) out.triples.push_back({city[i], "in_country", country[nation[i]]});

    std::vector<ToyQuestion> all;
    auto ask = [&](const std::vector<std::string>& templates, const std::string& entity,
                   std::vector<std::string> answers, int hops) {
        std::sort(answers.begin(), answers.end());
        answers.erase(std::unique(answers.begin(), answers.end()), answers.end());
        if (answers.empty()) return;
        all.push_back({detail::fill(templates[pick(templates.size())], entity), std::move(answers), hops});
    };

    std::vector<std::vector<std::size_t>> children(cfg.persons), employees(cfg.companies);
    for (std::size_t i = 0; i < cfg.persons; ++i) {
        if (parent[i] >= 0) children[static_cast<std::size_t>(parent[i])].push_back(i);
        employees[works[i]].push_back(i);
    }

    for (std::size_t i = 0; i < cfg.persons; ++i) {
        const auto& p = person[i];
        ask({"which company does {} work for", "who employs {}"}, p, {company[works[i]]}, 1);
        ask({"where did {} study", "which university did {} attend"}, p, {university[studied[i]]}, 1);
        ask({"which city does {} live in", "where is the home of {}"}, p, {city[lives[i]]}, 1);
        ask({"what industry does the employer of {} belong to"}, p, {industry[sector[works[i]]]}, 2);
        ask({"in which city is the employer of {} headquartered"}, p, {city[hq[works[i]]]}, 2);
        ask({"in which city is the university of {} located"}, p, {city[uni_city[studied[i]]]}, 2);
        ask({"which country does {} live in", "in which country is the home of {}"}, p, {country[nation[lives[i]]]}, 2);
        if (!children[i].empty()) {
            std::vector<std::string> kids;
            for (auto c : children[i]) kids.push_back(person[c]);
            ask({"who are the children of {}"}, p, kids, 1);
        }
        if (parent[i] >= 0) {
            const auto par = static_cast<std::size_t>(parent[i]);
            ask({"who is the parent of {}", "who raised {}"}, p, {person[par]}, 1);
            ask({"which company does the parent of {} work for"}, p, {company[works[par]]}, 2);
            ask({"which city does the parent of {} live in"}, p, {city[lives[par]]}, 2);
            if (parent[par] >= 0)
                ask({"who is the grandparent of {}"}, p, {person[static_cast<std::size_t>(parent[par])]}, 2);
            std::vector<std::string> sibs;
            for (auto s : children[par])
                if (s != i) sibs.push_back(person[s]);
            ask({"who are the siblings of {}"}, p, sibs, 2);
        }
    }
    for (std::size_t i = 0; i < cfg.companies; ++i) {
        ask({"where is {} headquartered", "which city hosts the headquarters of {}"}, company[i], {city[hq[i]]}, 1);
        ask({"what industry is {} in", "what sector does {} operate in"}, company[i], {industry[sector[i]]}, 1);
        ask({"which country is {} headquartered in"}, company[i], {country[nation[hq[i]]]}, 2);
        std::vector<std::string> staff;
        for (auto e : employees[i]) staff.push_back(person[e]);
        ask({"who works for {}"}, company[i], staff, 1);
    }
    for (std::size_t i = 0; i < cfg.universities; ++i) {
        ask({"where is {} located", "which city is {} in"}, university[i], {city[uni_city[i]]}, 1);
        ask({"which country is {} located in"}, university[i], {country[nation[uni_city[i]]]}, 2);
    }
    for (std::size_t i = 0; i < cfg.cities; ++i)
        ask({"which country is {} in", "what country contains {}"}, city[i], {country[nation[i]]}, 1);

    std::shuffle(all.begin(), all.end(), rng);
    const auto n_train = static_cast<std::size_t>(cfg.train_fraction * static_cast<double>(all.size()));
    const auto n_dev = static_cast<std::size_t>(cfg.dev_fraction * static_cast<double>(all.size()));
    out.train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.dev.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train),
                   all.begin() + static_cast<std::ptrdiff_t>(n_train + n_dev));
    out.test.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train + n_dev), all.end());
    return out;
}

struct ToyFiles {
    std::string kb, train, dev, test, config;
};

inline ToyFiles toy_paths(const std::string& dir) {
    const std::filesystem::path d(dir);
    return {(d / "kb.txt").string(), (d / "qa_train.txt").string(), (d / "qa_dev.txt").string(),
            (d / "qa_test.txt").string(), (d / "toy.cfg").string()};
}

/// Writes kb.txt and qa_{train,dev,test}.txt (question, answers, hop count).
inline ToyFiles write_toy(const ToyBenchmark& bench, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const ToyFiles f = toy_paths(dir);
    std::ofstream kb(f.kb);
    if (!kb) throw Error("cannot write " + f.kb);
    for (const auto& t : bench.triples) kb << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
    auto dump = [](const std::vector<ToyQuestion>& qs, const std::string& path) {
        std::ofstream out(path);
        if (!out) throw Error("cannot write " + path);
        for (const auto& q : qs) {
            out << q.text << '\t';
            for (std::size_t i = 0; i < q.answers.size(); ++i) out << (i ? "|" : "") << q.answers[i];
            out << '\t' << q.hops << '\n';
        }
    };
    dump(bench.train, f.train);
    dump(bench.dev, f.dev);
    dump(bench.test, f.test);
    return f;
}

}  // namespace terp
