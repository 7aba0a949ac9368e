// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "loose_json.hpp"

#include <cctype>

#include "bottomup/errors.hpp"
#include "bottomup/text.hpp"

namespace bottomup::detail {

const LooseValue* LooseValue::member(std::string_view key) const {
    for (const auto& [k, v] : members) {
        if (k == key) return &v;
    }
    return nullptr;
}

const LooseValue* LooseValue::member_icase(std::string_view key) const {
    if (const auto* exact = member(key)) return exact;
    for (const auto& [k, v] : members) {
        if (text::to_lower(text::trim(k)) == text::to_lower(key)) return &v;
    }
    return nullptr;
}

namespace {

constexpr int kMaxDepth = 256;

bool is_elision(std::string_view tok) {
    if (tok == "…" || tok == "⋯") return true;
    if (tok.size() < 2) return false;
    for (char c : tok) {
        if (c != '.') return false;
    }
    return true;
}

bool looks_numeric(std::string_view s) {
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
    bool digits = false;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) { ++i; digits = true; }
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) { ++i; digits = true; }
    }
    if (!digits) return false;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
        bool exp = false;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) { ++i; exp = true; }
        if (!exp) return false;
    }
    return i == s.size();
}

void append_utf8(std::string& out, unsigned cp) {
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

class Reader {
public:
    explicit Reader(std::string_view s) : s_(s) {}

    LooseValue value(int depth) {
        if (depth > kMaxDepth) throw SchemaMismatch("scene graph nesting too deep");
        skip_ws();
        if (eof()) throw SchemaMismatch("unexpected end of JSON text");
        const char c = peek();
        if (c == '{') {
            ++pos_;
            LooseValue obj;
            obj.kind = LooseValue::Kind::Object;
            members_into(obj, depth + 1);
            if (!eof() && peek() == '}') ++pos_;
            return obj;
        }
        if (c == '[') {
            ++pos_;
            return array(depth + 1);
        }
        if (c == '"' || c == '\'') {
            LooseValue v;
            v.kind = LooseValue::Kind::String;
            v.text = quoted();
            return v;
        }
        LooseValue v;
        v.text = bare(/*key=*/false);
        if (v.text.empty()) {
            throw SchemaMismatch(std::string("unexpected character '") + c + "' in JSON text");
        }
        v.kind = looks_numeric(v.text) ? LooseValue::Kind::Number : LooseValue::Kind::Bare;
        return v;
    }

private:
    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }

    void skip_separators() {
        while (true) {
            skip_ws();
            if (!eof() && peek() == ',') {
                ++pos_;
                continue;
            }
            return;
        }
    }

    // Reads members until '}' or ']' (left unconsumed) or end of input.
    void members_into(LooseValue& obj, int depth) {
        while (true) {
            skip_separators();
            if (eof()) return;
            const char c = peek();
            if (c == '}' || c == ']') return;
            std::string key;
            if (c == '"' || c == '\'') {
                key = quoted();
            } else {
                key = bare(/*key=*/true);
                if (is_elision(key)) continue;
                if (key.empty()) {
                    throw SchemaMismatch(std::string("unexpected character '") + c + "' where a key was expected");
                }
            }
            skip_ws();
            if (eof() || peek() != ':') {
                if (is_elision(key)) continue;
                throw SchemaMismatch("expected ':' after key \"" + key + "\"");
            }
            ++pos_;
            skip_ws();
            if (!eof() && (peek() == '"' || peek() == '\'')) {
                LooseValue str;
                str.kind = LooseValue::Kind::String;
                str.text = quoted();
                skip_ws();
                if (!eof() && peek() == ':') {
                    // `"outer": "inner": value, ...` -- the braces of the outer
                    // object were dropped; everything up to the enclosing close
                    // belongs to it.
                    ++pos_;
                    LooseValue nested;
                    nested.kind = LooseValue::Kind::Object;
                    nested.members.emplace_back(std::move(str.text), value(depth + 1));
                    members_into(nested, depth + 1);
                    obj.members.emplace_back(std::move(key), std::move(nested));
                    return;
                }
                obj.members.emplace_back(std::move(key), std::move(str));
                continue;
            }
            obj.members.emplace_back(std::move(key), value(depth));
        }
    }

    LooseValue array(int depth) {
        LooseValue arr;
        arr.kind = LooseValue::Kind::Array;
        while (true) {
            skip_separators();
            if (eof()) return arr;
            const char c = peek();
            if (c == ']') {
                ++pos_;
                return arr;
            }
            if (c == '}') return arr;
            LooseValue item = value(depth);
            if (item.kind == LooseValue::Kind::Bare && is_elision(item.text)) continue;
            arr.items.push_back(std::move(item));
        }
    }

    std::string bare(bool key) {
        const std::size_t start = pos_;
        while (!eof()) {
            const char c = peek();
            if (c == ',' || c == ']' || c == '}' || c == '{' || c == '[' || c == '"' || c == '\n') break;
            if (key && c == ':') break;
            ++pos_;
        }
        return text::trim(s_.substr(start, pos_ - start));
    }

    unsigned hex4() {
        if (pos_ + 4 > s_.size()) throw SchemaMismatch("truncated \\u escape");
        unsigned v = 0;
        for (int i = 0; i < 4; ++i) {
            const char h = s_[pos_++];
            v <<= 4;
            if (h >= '0' && h <= '9') v |= static_cast<unsigned>(h - '0');
            else if (h >= 'a' && h <= 'f') v |= static_cast<unsigned>(h - 'a' + 10);
            else if (h >= 'A' && h <= 'F') v |= static_cast<unsigned>(h - 'A' + 10);
            else throw SchemaMismatch("bad hex digit in \\u escape");
        }
        return v;
    }

    std::string quoted() {
        const char q = s_[pos_++];
        std::string out;
        while (true) {
            if (eof()) throw SchemaMismatch("unterminated string in JSON text");
            const char c = s_[pos_++];
            if (c == q) return out;
            if (c != '\\') {
                out.push_back(c);
                continue;
            }
            if (eof()) throw SchemaMismatch("unterminated escape in JSON text");
            const char e = s_[pos_++];
            switch (e) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                case 'b': out.push_back('\b'); break;
                case 'f': out.push_back('\f'); break;
                case 'u': {
                    unsigned cp = hex4();
                    if (cp >= 0xD800 && cp < 0xDC00 && pos_ + 1 < s_.size() && s_[pos_] == '\\' &&
                        s_[pos_ + 1] == 'u') {
                        pos_ += 2;
                        const unsigned lo = hex4();
                        if (lo >= 0xDC00 && lo < 0xE000) {
                            cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
                        } else {
                            append_utf8(out, 0xFFFD);
                            cp = lo;
                        }
                    }
                    append_utf8(out, cp);
                    break;
                }
                default: out.push_back(e); break;
            }
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

LooseValue parse_loose(std::string_view text) {
    Reader reader(text);
    return reader.value(0);
}

}  // namespace bottomup::detail
