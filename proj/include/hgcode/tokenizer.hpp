#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace hgcode {

enum class TokenizerKind { ByteLevelBpe, Fallback };

// Byte-level BPE token strings spell raw bytes through the usual reversible
// byte-to-unicode table: printable Latin-1 bytes map to themselves, the other
// 68 bytes map to U+0100 onwards in byte order (so ' ' becomes "Ġ").
std::string bytes_to_unicode(std::string_view bytes);
// Inverse of bytes_to_unicode; throws std::invalid_argument on a character
// outside the table.
std::string unicode_to_bytes(std::string_view symbols);

struct VocabularyError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class Tokenizer {
public:
    // Dependency-free splitter: whitespace, then every ASCII punctuation
    // character on its own, then lower->upper camel-case boundaries.
    // Detokenizing concatenates, so whitespace is not reconstructed.
    static Tokenizer fallback();

    // {"vocab": {token: id}, "merges": ["a b", ...], "byte_level": true}
    static Tokenizer from_json(const nlohmann::json& j);

    TokenizerKind kind() const { return kind_; }

    std::vector<std::string> tokenize(std::string_view text) const;
    std::string detokenize(std::span<const std::string> tokens) const;

    std::optional<std::uint32_t> token_id(std::string_view token) const;
    std::size_t vocab_size() const { return vocab_.size(); }
    std::size_t merge_count() const { return merge_rank_.size(); }

private:
    explicit Tokenizer(TokenizerKind kind) : kind_(kind) {}

    std::vector<std::string> bpe(std::string_view text) const;

    TokenizerKind kind_;
    std::unordered_map<std::string, std::uint32_t> vocab_;
    std::unordered_map<std::string, std::size_t> merge_rank_;  // "left right" -> rank
};

// Throws VocabularyError naming the offending field.
Tokenizer load_vocabulary(const std::filesystem::path& path);

}  // namespace hgcode
