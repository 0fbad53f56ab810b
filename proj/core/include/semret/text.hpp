#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace semret {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;

/// Splits on ASCII whitespace; a piece containing any CJK codepoint is
/// broken into single codepoints. This is the one text pipeline shared by
/// the encoder and the lexical index.
std::vector<std::string> split_terms(std::string_view text);

bool is_cjk(char32_t cp);

/// Token <-> index table. Index 0 is always the unknown token.
class Vocabulary {
public:
    static constexpr TokenId kUnk = 0;
    static constexpr std::string_view kUnkToken = "[UNK]";

    Vocabulary();

    /// Rebuilds a vocabulary from its token list (index order, UNK first).
    static Vocabulary from_tokens(std::vector<std::string> tokens, std::size_t min_freq = 1);

    TokenId lookup(std::string_view token) const;
    std::optional<TokenId> find(std::string_view token) const;
    const std::string& token(TokenId id) const { return tokens_.at(id); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    std::size_t size() const { return tokens_.size(); }
    std::size_t min_freq() const { return min_freq_; }

    /// FNV-1a over the tokens in index order.
    std::uint64_t hash() const;

    bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> index_;
    std::size_t min_freq_ = 1;
};

/// Tokens with frequency >= min_freq, ordered by descending frequency and
/// then lexicographically.
Vocabulary build_vocab(std::span<const std::string> texts, std::size_t min_freq);

/// Maps text through the vocabulary, truncating to max_len. Never returns an
/// empty sequence: empty text yields [UNK].
TokenSeq tokenize(std::string_view text, const Vocabulary& vocab, std::size_t max_len);

} // namespace semret
