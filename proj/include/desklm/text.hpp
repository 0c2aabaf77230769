#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace desklm {

struct Utf8Error : std::runtime_error {
    std::size_t byte_offset;
    explicit Utf8Error(std::size_t off)
        : std::runtime_error("invalid UTF-8 at byte offset " + std::to_string(off)),
          byte_offset(off) {}
};

// Decodes one code point starting at s[pos]; advances pos. Throws Utf8Error
// (with base + pos) on malformed input, including overlong forms and
// surrogate code points.
inline std::uint32_t decode_utf8_cp(std::string_view s, std::size_t& pos, std::size_t base = 0) {
    const std::size_t start = pos;
    auto fail = [&]() -> std::uint32_t { throw Utf8Error(base + start); };
    unsigned char c0 = static_cast<unsigned char>(s[pos++]);
    if (c0 < 0x80) return c0;
    int extra;
    std::uint32_t cp;
    if ((c0 & 0xE0) == 0xC0) {
        extra = 1;
        cp = c0 & 0x1F;
    } else if ((c0 & 0xF0) == 0xE0) {
        extra = 2;
        cp = c0 & 0x0F;
    } else if ((c0 & 0xF8) == 0xF0) {
        extra = 3;
        cp = c0 & 0x07;
    } else {
        return fail();
    }
    for (int i = 0; i < extra; ++i) {
        if (pos >= s.size()) return fail();
        unsigned char c = static_cast<unsigned char>(s[pos]);
        if ((c & 0xC0) != 0x80) return fail();
        cp = (cp << 6) | (c & 0x3F);
        ++pos;
    }
    static const std::uint32_t kMinByLen[4] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMinByLen[extra]) return fail();
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return fail();
    return cp;
}

inline std::vector<std::uint32_t> decode_utf8(std::string_view s, std::size_t base = 0) {
    std::vector<std::uint32_t> out;
    out.reserve(s.size());
    std::size_t pos = 0;
    while (pos < s.size()) out.push_back(decode_utf8_cp(s, pos, base));
    return out;
}

inline void encode_utf8_cp(std::uint32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline bool is_ascii_digit(std::uint32_t c) { return c >= '0' && c <= '9'; }

inline bool is_ascii_alpha(std::uint32_t c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Punctuation / symbol code points: ASCII punctuation plus the common
// Unicode punctuation, symbol and currency blocks seen in newswire text.
inline bool is_punct_cp(std::uint32_t c) {
    if (c < 0x80) {
        return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
               (c >= '{' && c <= '~');
    }
    return (c >= 0x00A1 && c <= 0x00BF) || c == 0x00D7 || c == 0x00F7 ||
           (c >= 0x2000 && c <= 0x206F) ||   // general punctuation (dashes, quotes, ellipsis)
           (c >= 0x20A0 && c <= 0x20CF) ||   // currency signs
           (c >= 0x2100 && c <= 0x214F) ||   // letterlike symbols (tm, ohm, ...)
           (c >= 0x2190 && c <= 0x2BFF) ||   // arrows, math operators, misc technical/symbols
           (c >= 0x3000 && c <= 0x303F) ||   // CJK punctuation
           (c >= 0xFE30 && c <= 0xFE4F) ||   // vertical/compat forms
           (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
           (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65);
}

// Anything that is neither a digit nor punctuation counts as letter-like;
// unknown non-ASCII code points are treated as letters rather than symbols.
inline bool is_alpha_cp(std::uint32_t c) {
    if (c < 0x80) return is_ascii_alpha(c);
    return !is_punct_cp(c);
}

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

inline std::vector<std::string_view> split_whitespace(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

}  // namespace desklm
