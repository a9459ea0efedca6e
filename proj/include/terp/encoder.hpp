#pragma once

// Tokenizer and the default text encoder: trainable token embeddings with
// average pooling. Anything satisfying SequenceEncoder can stand in for it.

#include <cctype>
#include <concepts>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "terp/error.hpp"
#include "terp/knowledge_graph.hpp"
#include "terp/nn.hpp"
#include "terp/text_util.hpp"

namespace terp {

using TokenId = std::int32_t;

class Tokenizer {
public:
    static constexpr TokenId kUnknown = 0;
    static constexpr TokenId kRelOpen = 1;
    static constexpr TokenId kRelClose = 2;
    static constexpr TokenId kSeparator = 3;
    static constexpr TokenId kEntity = 4;

    static constexpr std::string_view kSpecials[] = {"<unk>", "<r>", "</r>", "<sep>", "<ent>"};

    Tokenizer() {
        for (auto s : kSpecials) vocab_.add(s);
    }

    /// Lowercases, then splits on whitespace and punctuation. Punctuation
    /// characters (other than '_') become single-character tokens; special
    /// tokens are kept whole.
    static std::vector<std::string> split_words(std::string_view text) {
        const std::string lower = to_lower(text);
        std::vector<std::string> out;
        std::string cur;
        auto flush = [&] {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        };
        for (std::size_t i = 0; i < lower.size();) {
            const char c = lower[i];
            if (c == '<') {
                bool matched = false;
                for (auto s : kSpecials) {
                    if (std::string_view(lower).substr(i, s.size()) == s) {
                        flush();
                        out.emplace_back(s);
                        i += s.size();
                        matched = true;
                        break;
                    }
                }
                if (matched) continue;
            }
            const auto uc = static_cast<unsigned char>(c);
            if (std::isspace(uc)) {
                flush();
            } else if (std::ispunct(uc) && c != '_') {
                flush();
                out.emplace_back(1, c);
            } else {
                cur.push_back(c);
            }
            ++i;
        }
        flush();
        return out;
    }

    std::vector<TokenId> tokenize(std::string_view text) const {
        std::vector<TokenId> ids;
        for (const auto& w : split_words(text)) ids.push_back(vocab_.find(w).value_or(kUnknown));
        return ids;
    }

    void add_text(std::string_view text) {
        for (const auto& w : split_words(text)) vocab_.add(w);
    }

    std::size_t size() const { return vocab_.size(); }
    const Vocabulary& vocabulary() const { return vocab_; }
    const std::string& token(TokenId id) const { return vocab_.label(id); }

    /// One token per line; the line number is the id.
    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw Error("cannot write vocabulary " + path);
        for (const auto& t : vocab_.labels()) out << t << '\n';
    }

    static Tokenizer load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open vocabulary " + path);
        std::vector<std::string> tokens;
        std::string line;
        while (std::getline(in, line)) tokens.push_back(line);
        return from_tokens(tokens);
    }

    static Tokenizer from_tokens(const std::vector<std::string>& tokens) {
        if (tokens.size() < std::size(kSpecials)) throw Error("vocabulary: missing special tokens");
        for (std::size_t i = 0; i < std::size(kSpecials); ++i)
            if (tokens[i] != kSpecials[i]) throw Error("vocabulary: special tokens out of place");
        Tokenizer t;
        for (const auto& s : tokens) t.vocab_.add(s);
        if (t.vocab_.size() != tokens.size()) throw Error("vocabulary: duplicate token");
        return t;
    }

private:
    Vocabulary vocab_;
};

/// Replaces each bracketed span "[...]" with the entity placeholder token.
inline std::string mask_mentions(std::string_view text) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        const auto open = text.find('[', pos);
        const auto close = open == std::string_view::npos ? open : text.find(']', open + 1);
        if (close == std::string_view::npos) {
            out.append(text.substr(pos));
            return out;
        }
        out.append(text.substr(pos, open - pos));
        out.append(" <ent> ");
        pos = close + 1;
    }
}

template <typename E>
concept SequenceEncoder = requires(E e, const E ce, std::span<const TokenId> tokens, std::span<const double> g) {
    { ce.encode(tokens) } -> std::same_as<std::vector<double>>;
    { e.backward(tokens, g) };
    { ce.width() } -> std::convertible_to<std::size_t>;
};

/// Mean of token embedding vectors.
class AverageEncoder {
public:
    AverageEncoder() = default;
    AverageEncoder(std::size_t vocab_size, std::size_t width) : width_(width), table_(vocab_size * width) {}

    void init(std::mt19937_64& rng, double bound) { table_.fill_uniform(rng, bound); }

    std::size_t width() const { return width_; }
    std::size_t vocab_size() const { return width_ ? table_.size() / width_ : 0; }

    std::vector<double> encode(std::span<const TokenId> tokens) const {
        if (tokens.empty()) throw Error("encoder: empty token sequence");
        std::vector<double> out(width_, 0.0);
        for (TokenId t : tokens) {
            const double* row = row_ptr(t);
            for (std::size_t k = 0; k < width_; ++k) out[k] += row[k];
        }
        const double inv = 1.0 / static_cast<double>(tokens.size());
        for (double& x : out) x *= inv;
        return out;
    }

    void backward(std::span<const TokenId> tokens, std::span<const double> grad_out) {
        const double inv = 1.0 / static_cast<double>(tokens.size());
        for (TokenId t : tokens) {
            double* g = table_.grad.data() + static_cast<std::size_t>(t) * width_;
            for (std::size_t k = 0; k < width_; ++k) g[k] += grad_out[k] * inv;
        }
    }

    std::span<const double> embedding(TokenId t) const { return {row_ptr(t), width_}; }
    Param& params() { return table_; }
    const Param& params() const { return table_; }

    void save(BinaryWriter& w) const {
        w.u64(width_);
        table_.save(w);
    }
    void load(BinaryReader& r) {
        width_ = r.u64();
        table_.load(r);
        if (width_ == 0 || table_.size() % width_ != 0) throw Error("encoder: corrupt checkpoint");
    }

private:
    const double* row_ptr(TokenId t) const {
        if (t < 0 || static_cast<std::size_t>(t) >= vocab_size()) throw Error("encoder: token id out of range");
        return table_.value.data() + static_cast<std::size_t>(t) * width_;
    }

    std::size_t width_ = 0;
    Param table_;
};

static_assert(SequenceEncoder<AverageEncoder>);

/// question tokens, separator, then "<r> name </r>" per relation in order.
inline std::vector<TokenId> path_text_tokens(std::span<const TokenId> question_tokens,
                                             std::span<const std::string> relation_names, const Tokenizer& tok) {
    if (relation_names.empty()) throw Error("path text: empty path");
    std::vector<TokenId> seq(question_tokens.begin(), question_tokens.end());
    seq.push_back(Tokenizer::kSeparator);
    for (const auto& name : relation_names) {
        seq.push_back(Tokenizer::kRelOpen);
        auto ids = tok.tokenize(name);
        seq.insert(seq.end(), ids.begin(), ids.end());
        seq.push_back(Tokenizer::kRelClose);
    }
    return seq;
}

template <SequenceEncoder E>
std::vector<double> encode_question(const E& encoder, std::span<const TokenId> tokens) {
    return encoder.encode(tokens);
}

template <SequenceEncoder E>
std::vector<double> encode_path_text(const E& encoder, const Tokenizer& tok, std::span<const TokenId> question_tokens,
                                     std::span<const std::string> relation_names) {
    return encoder.encode(path_text_tokens(question_tokens, relation_names, tok));
}

}  // namespace terp
