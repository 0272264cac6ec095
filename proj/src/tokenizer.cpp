#include "hgcode/tokenizer.hpp"

#include <array>
#include <cctype>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

namespace hgcode {

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

struct ByteTable {
    std::array<std::uint32_t, 256> to_cp{};
    std::unordered_map<std::uint32_t, unsigned char> from_cp;
};

const ByteTable& byte_table() {
    static const ByteTable table = [] {
        ByteTable t;
        auto direct = [](int b) {
            return (b >= '!' && b <= '~') || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF);
        };
        std::uint32_t next = 256;
        for (int b = 0; b < 256; ++b) {
            t.to_cp[b] = direct(b) ? static_cast<std::uint32_t>(b) : next++;
            t.from_cp[t.to_cp[b]] = static_cast<unsigned char>(b);
        }
        return t;
    }();
    return table;
}

// Splits a byte-to-unicode string into one UTF-8 encoded symbol per byte.
std::vector<std::string> byte_symbols(std::string_view bytes) {
    const auto& table = byte_table();
    std::vector<std::string> out;
    out.reserve(bytes.size());
    for (unsigned char b : bytes) {
        std::string s;
        append_utf8(s, table.to_cp[b]);
        out.push_back(std::move(s));
    }
    return out;
}

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }
bool is_ascii_space(unsigned char c) { return c < 0x80 && std::isspace(c); }
bool is_ascii_lower(unsigned char c) { return c >= 'a' && c <= 'z'; }
bool is_ascii_upper(unsigned char c) { return c >= 'A' && c <= 'Z'; }

}  // namespace

std::string bytes_to_unicode(std::string_view bytes) {
    std::string out;
    for (auto& s : byte_symbols(bytes)) out += s;
    return out;
}

std::string unicode_to_bytes(std::string_view symbols) {
    const auto& table = byte_table();
    std::string out;
    std::size_t i = 0;
    while (i < symbols.size()) {
        const auto c = static_cast<unsigned char>(symbols[i]);
        std::uint32_t cp;
        std::size_t len;
        if (c < 0x80) {
            cp = c;
            len = 1;
        } else if ((c & 0xE0) == 0xC0 && i + 1 < symbols.size()) {
            cp = ((c & 0x1Fu) << 6) | (static_cast<unsigned char>(symbols[i + 1]) & 0x3Fu);
            len = 2;
        } else {
            throw std::invalid_argument(fmt::format("byte {} at offset {} is not a byte-level symbol", c, i));
        }
        auto it = table.from_cp.find(cp);
        if (it == table.from_cp.end()) {
            throw std::invalid_argument(fmt::format("code point U+{:04X} is not a byte-level symbol", cp));
        }
        out.push_back(static_cast<char>(it->second));
        i += len;
    }
    return out;
}

Tokenizer Tokenizer::fallback() { return Tokenizer(TokenizerKind::Fallback); }

Tokenizer Tokenizer::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw VocabularyError("vocabulary file must hold a JSON object");

    auto byte_level = j.find("byte_level");
    if (byte_level == j.end() || !byte_level->is_boolean()) {
        throw VocabularyError("field 'byte_level' must be a boolean");
    }
    if (!byte_level->get<bool>()) throw VocabularyError("field 'byte_level': only byte-level BPE is supported");

    Tokenizer t(TokenizerKind::ByteLevelBpe);

    auto vocab = j.find("vocab");
    if (vocab == j.end() || !vocab->is_object()) throw VocabularyError("field 'vocab' must be an object");
    for (const auto& [token, id] : vocab->items()) {
        if (!id.is_number_unsigned() && !(id.is_number_integer() && id.get<std::int64_t>() >= 0)) {
            throw VocabularyError(fmt::format("field 'vocab': id of '{}' is not a non-negative integer", token));
        }
        t.vocab_.emplace(token, id.get<std::uint32_t>());
    }

    auto merges = j.find("merges");
    if (merges == j.end() || !merges->is_array()) throw VocabularyError("field 'merges' must be an array");
    std::size_t rank = 0;
    for (const auto& m : *merges) {
        if (!m.is_string()) throw VocabularyError(fmt::format("field 'merges'[{}] is not a string", rank));
        const auto rule = m.get<std::string>();
        const auto space = rule.find(' ');
        if (space == std::string::npos || space == 0 || space + 1 == rule.size() ||
            rule.find(' ', space + 1) != std::string::npos) {
            throw VocabularyError(fmt::format("field 'merges'[{}] '{}' is not of the form \"left right\"", rank, rule));
        }
        if (!t.merge_rank_.emplace(rule, rank).second) {
            throw VocabularyError(fmt::format("field 'merges'[{}]: duplicate merge rule '{}'", rank, rule));
        }
        ++rank;
    }
    return t;
}

Tokenizer load_vocabulary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw VocabularyError(fmt::format("cannot open vocabulary file {}", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw VocabularyError(fmt::format("vocabulary file {} is not valid JSON: {}", path.string(), e.what()));
    }
    return Tokenizer::from_json(j);
}

std::vector<std::string> Tokenizer::bpe(std::string_view text) const {
    std::vector<std::string> symbols = byte_symbols(text);
    std::string key;
    while (symbols.size() > 1) {
        std::size_t best_rank = std::numeric_limits<std::size_t>::max();
        std::size_t best_pos = 0;
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
            key.assign(symbols[i]).append(" ").append(symbols[i + 1]);
            auto it = merge_rank_.find(key);
            if (it != merge_rank_.end() && it->second < best_rank) {
                best_rank = it->second;
                best_pos = i;
            }
        }
        if (best_rank == std::numeric_limits<std::size_t>::max()) break;

        const std::string left = symbols[best_pos];
        const std::string right = symbols[best_pos + 1];
        std::vector<std::string> merged;
        merged.reserve(symbols.size());
        for (std::size_t i = 0; i < symbols.size();) {
            if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
                merged.push_back(left + right);
                i += 2;
            } else {
                merged.push_back(std::move(symbols[i]));
                ++i;
            }
        }
        symbols = std::move(merged);
    }
    return symbols;
}

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
    if (kind_ == TokenizerKind::ByteLevelBpe) {
        if (text.empty()) return {};
        return bpe(text);
    }

    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) out.push_back(std::exchange(current, {}));
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (is_ascii_space(c)) {
            flush();
        } else if (is_ascii_punct(c)) {
            flush();
            out.emplace_back(1, static_cast<char>(c));
        } else {
            if (!current.empty() && is_ascii_upper(c) &&
                is_ascii_lower(static_cast<unsigned char>(current.back()))) {
                flush();
            }
            current.push_back(static_cast<char>(c));
        }
    }
    flush();
    return out;
}

std::string Tokenizer::detokenize(std::span<const std::string> tokens) const {
    std::string joined;
    for (const auto& t : tokens) joined += t;
    return kind_ == TokenizerKind::ByteLevelBpe ? unicode_to_bytes(joined) : joined;
}

std::optional<std::uint32_t> Tokenizer::token_id(std::string_view token) const {
    auto it = vocab_.find(std::string(token));
    if (it == vocab_.end()) return std::nullopt;
    return it->second;
}

}  // namespace hgcode
