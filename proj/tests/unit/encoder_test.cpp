#include <gtest/gtest.h>

#include <algorithm>

#include "support/fd.hpp"
#include "support/tempdir.hpp"
#include "terp/encoder.hpp"

using namespace terp;
using namespace terp::testing;

namespace {

Tokenizer movie_tokenizer() {
    Tokenizer t;
    t.add_text("who directed [blade] ?");
    t.add_text("directed_by starred_actors");
    return t;
}

AverageEncoder random_encoder(std::size_t vocab, std::size_t width, std::uint64_t seed) {
    AverageEncoder e(vocab, width);
    std::mt19937_64 rng(seed);
    e.init(rng, 1.0);
    return e;
}

}  // namespace

TEST(Tokenizer, SplitsPunctuationAndLowercases) {
    EXPECT_EQ(Tokenizer::split_words("Who directed [Blade]?"),
              (std::vector<std::string>{"who", "directed", "[", "blade", "]", "?"}));
    const auto t = movie_tokenizer();
    const auto ids = t.tokenize("Who directed [Blade]?");
    ASSERT_EQ(ids.size(), 6u);
    for (TokenId id : ids) EXPECT_NE(id, Tokenizer::kUnknown);
    EXPECT_EQ(t.token(ids[2]), "[");
}

TEST(Tokenizer, SpecialTokensStayWhole) {
    const auto t = movie_tokenizer();
    const auto ids = t.tokenize("<r> directed_by </r>");
    ASSERT_EQ(ids.size(), 3u);
    EXPECT_EQ(ids[0], Tokenizer::kRelOpen);
    EXPECT_EQ(ids[2], Tokenizer::kRelClose);
    EXPECT_EQ(t.token(ids[1]), "directed_by");
    EXPECT_EQ(t.tokenize("<sep> <ent> <unk>"),
              (std::vector<TokenId>{Tokenizer::kSeparator, Tokenizer::kEntity, Tokenizer::kUnknown}));
}

TEST(Tokenizer, UnknownWords) {
    const auto t = movie_tokenizer();
    EXPECT_EQ(t.tokenize("zebra"), (std::vector<TokenId>{Tokenizer::kUnknown}));
    EXPECT_EQ(t.tokenize("who zebra"), (std::vector<TokenId>{*t.vocabulary().find("who"), Tokenizer::kUnknown}));
    EXPECT_TRUE(t.tokenize("   ").empty());
}

TEST(Tokenizer, VocabularyRoundTrip) {
    TempDir dir;
    const auto t = movie_tokenizer();
    t.save(dir.file("vocab.txt"));
    const auto back = Tokenizer::load(dir.file("vocab.txt"));
    EXPECT_EQ(back.vocabulary(), t.vocabulary());
    dir.write("bad.txt", "<r>\n<unk>\n</r>\n<sep>\n<ent>\n");
    EXPECT_THROW(Tokenizer::load(dir.file("bad.txt")), Error);
    dir.write("dup.txt", "<unk>\n<r>\n</r>\n<sep>\n<ent>\nx\nx\n");
    EXPECT_THROW(Tokenizer::load(dir.file("dup.txt")), Error);
}

TEST(Tokenizer, MaskMentions) {
    EXPECT_EQ(Tokenizer::split_words(mask_mentions("who directed [Blade Runner]?")),
              (std::vector<std::string>{"who", "directed", "<ent>", "?"}));
    EXPECT_EQ(mask_mentions("no mention"), "no mention");
    EXPECT_EQ(Tokenizer::split_words(mask_mentions("[a] and [b")),
              (std::vector<std::string>{"<ent>", "and", "[", "b"}));
}

TEST(Encoder, SingleAndRepeatedTokens) {
    const auto e = random_encoder(10, 6, 1);
    const std::vector<TokenId> one{7}, twice{7, 7};
    const auto emb = e.embedding(7);
    EXPECT_EQ(encode_question(e, one), std::vector<double>(emb.begin(), emb.end()));
    const auto a = encode_question(e, twice);
    for (std::size_t k = 0; k < 6; ++k) EXPECT_DOUBLE_EQ(a[k], emb[k]);
}

TEST(Encoder, MeanAndPermutationInvariance) {
    const auto e = random_encoder(20, 5, 2);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<TokenId> pick(0, 19);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<TokenId> toks(1 + rep % 9);
        for (auto& t : toks) t = pick(rng);
        const auto out = e.encode(toks);
        ASSERT_EQ(out.size(), 5u);
        for (std::size_t k = 0; k < 5; ++k) {
            double m = 0;
            for (TokenId t : toks) m += e.embedding(t)[k];
            EXPECT_NEAR(out[k], m / static_cast<double>(toks.size()), 1e-12);
            EXPECT_TRUE(std::isfinite(out[k]));
        }
        auto shuffled = toks;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto p = e.encode(shuffled);
        for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(p[k], out[k], 1e-12);
    }
}

TEST(Encoder, RejectsEmptyAndOutOfRange) {
    const auto e = random_encoder(4, 3, 1);
    EXPECT_THROW(e.encode(std::vector<TokenId>{}), Error);
    EXPECT_THROW(e.encode(std::vector<TokenId>{4}), Error);
    EXPECT_THROW(e.encode(std::vector<TokenId>{-1}), Error);
}

TEST(Encoder, PathTextCountsFiveTokens) {
    const auto tok = movie_tokenizer();
    const auto e = random_encoder(tok.size(), 4, 5);
    const std::vector<TokenId> q{*tok.vocabulary().find("who")};
    const std::vector<std::string> path{"directed_by"};
    const auto seq = path_text_tokens(q, path, tok);
    ASSERT_EQ(seq.size(), 5u);
    EXPECT_EQ(seq[0], q[0]);
    EXPECT_EQ(seq[1], Tokenizer::kSeparator);
    EXPECT_EQ(seq[2], Tokenizer::kRelOpen);
    EXPECT_EQ(seq[4], Tokenizer::kRelClose);
    const auto out = encode_path_text(e, tok, q, path);
    for (std::size_t k = 0; k < 4; ++k) {
        double m = 0;
        for (TokenId t : seq) m += e.embedding(t)[k];
        EXPECT_NEAR(out[k], m / 5.0, 1e-12);
    }
    EXPECT_EQ(out, encode_path_text(e, tok, q, path));
    EXPECT_THROW(path_text_tokens(q, std::vector<std::string>{}, tok), Error);
}

TEST(Encoder, PathOrderInvisibleToAveraging) {
    const auto tok = movie_tokenizer();
    const auto e = random_encoder(tok.size(), 4, 6);
    const std::vector<TokenId> q = tok.tokenize("who directed");
    const std::vector<std::string> ab{"directed_by", "starred_actors"}, ba{"starred_actors", "directed_by"};
    EXPECT_NE(path_text_tokens(q, ab, tok), path_text_tokens(q, ba, tok));
    const auto x = encode_path_text(e, tok, q, ab), y = encode_path_text(e, tok, q, ba);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(x[k], y[k], 1e-12);
}

TEST(Encoder, GradientMatchesFd) {
    auto e = random_encoder(12, 5, 7);
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<TokenId> pick(0, 11);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<TokenId> toks(1 + rep % 6);
        for (auto& t : toks) t = pick(rng);
        const auto w = random_vector(rng, 5);
        auto loss = [&] {
            const auto out = e.encode(toks);
            double s = 0;
            for (std::size_t k = 0; k < 5; ++k) s += w[k] * out[k] * out[k];
            return s;
        };
        e.params().zero_grad();
        const auto out = e.encode(toks);
        std::vector<double> g(5);
        for (std::size_t k = 0; k < 5; ++k) g[k] = 2 * w[k] * out[k];
        e.backward(toks, g);
        const auto r = fd_check_params({{"tokens", &e.params()}}, loss, rng, 30);
        EXPECT_LT(r.worst, 1e-4) << r.where;
    }
}

TEST(Encoder, CheckpointRoundTrip) {
    const auto e = random_encoder(9, 4, 9);
    std::stringstream ss;
    BinaryWriter w(ss);
    e.save(w);
    BinaryReader r(ss);
    AverageEncoder back;
    back.load(r);
    EXPECT_EQ(back.params().value, e.params().value);
    EXPECT_EQ(back.width(), 4u);
}
