#include "semret/text.hpp"

#include "semret/error.hpp"
#include "semret/rng.hpp"

#include <algorithm>
#include <map>

namespace semret {

namespace {

bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Decodes one UTF-8 sequence starting at s[i]; invalid bytes decode as
// themselves with length 1.
std::pair<char32_t, std::size_t> decode_utf8(std::string_view s, std::size_t i)
{
    const auto b0 = static_cast<unsigned char>(s[i]);
    auto cont = [&](std::size_t k) {
        return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    auto bits = [&](std::size_t k) { return static_cast<char32_t>(static_cast<unsigned char>(s[i + k]) & 0x3F); };
    if (b0 < 0x80) return {b0, 1};
    if ((b0 & 0xE0) == 0xC0 && cont(1)) return {((b0 & 0x1F) << 6) | bits(1), 2};
    if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2))
        return {((b0 & 0x0F) << 12) | (bits(1) << 6) | bits(2), 3};
    if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3))
        return {((b0 & 0x07) << 18) | (bits(1) << 12) | (bits(2) << 6) | bits(3), 4};
    return {b0, 1};
}

} // namespace

bool is_cjk(char32_t cp)
{
    return (cp >= 0x4E00 && cp <= 0x9FFF)     // unified ideographs
           || (cp >= 0x3400 && cp <= 0x4DBF)  // extension A
           || (cp >= 0x20000 && cp <= 0x2EBEF) // extensions B-F
           || (cp >= 0xF900 && cp <= 0xFAFF)  // compatibility ideographs
           || (cp >= 0x3000 && cp <= 0x303F)  // CJK punctuation
           || (cp >= 0x3040 && cp <= 0x30FF)  // kana
           || (cp >= 0xFF00 && cp <= 0xFFEF); // full-width forms
}

std::vector<std::string> split_terms(std::string_view text)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        const auto start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (start == i) break;
        const auto piece = text.substr(start, i - start);

        bool cjk = false;
        std::vector<std::size_t> bounds;
        for (std::size_t p = 0; p < piece.size();) {
            bounds.push_back(p);
            const auto [cp, len] = decode_utf8(piece, p);
            cjk = cjk || is_cjk(cp);
            p += len;
        }
        if (!cjk) {
            out.emplace_back(piece);
            continue;
        }
        bounds.push_back(piece.size());
        for (std::size_t b = 0; b + 1 < bounds.size(); ++b)
            out.emplace_back(piece.substr(bounds[b], bounds[b + 1] - bounds[b]));
    }
    return out;
}

Vocabulary::Vocabulary()
{
    tokens_.emplace_back(kUnkToken);
    index_.emplace(std::string(kUnkToken), kUnk);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens, std::size_t min_freq)
{
    if (tokens.empty() || tokens.front() != kUnkToken)
        throw Error("vocabulary must start with " + std::string(kUnkToken));
    Vocabulary v;
    v.tokens_.clear();
    v.index_.clear();
    for (auto& t : tokens) {
        const auto id = static_cast<TokenId>(v.tokens_.size());
        if (!v.index_.emplace(t, id).second) throw Error("duplicate vocabulary token '" + t + "'");
        v.tokens_.push_back(std::move(t));
    }
    v.min_freq_ = min_freq;
    return v;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const
{
    const auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

TokenId Vocabulary::lookup(std::string_view token) const
{
    return find(token).value_or(kUnk);
}

std::uint64_t Vocabulary::hash() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& t : tokens_) {
        h = fnv1a64(t, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

Vocabulary build_vocab(std::span<const std::string> texts, std::size_t min_freq)
{
    std::map<std::string, std::size_t> freq;
    for (const auto& text : texts)
        for (auto& term : split_terms(text)) ++freq[std::move(term)];
    freq.erase(std::string(Vocabulary::kUnkToken));

    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [term, n] : freq)
        if (n >= min_freq) kept.emplace_back(term, n);
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    std::vector<std::string> tokens{std::string(Vocabulary::kUnkToken)};
    for (auto& [term, n] : kept) tokens.push_back(std::move(term));
    return Vocabulary::from_tokens(std::move(tokens), min_freq);
}

TokenSeq tokenize(std::string_view text, const Vocabulary& vocab, std::size_t max_len)
{
    TokenSeq seq;
    for (const auto& term : split_terms(text)) {
        if (seq.size() >= max_len) break;
        seq.push_back(vocab.lookup(term));
    }
    if (seq.empty()) seq.push_back(Vocabulary::kUnk);
    return seq;
}

} // namespace semret
