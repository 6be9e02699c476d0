#include "dwe/xml.hpp"

#include <cctype>
#include <charconv>

namespace dwe::xml {

std::string Element::attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes)
        if (k == key) return v;
    return {};
}

bool Element::has_attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes)
        if (k == key) return true;
    return false;
}

namespace {

void append_text(const Element& e, std::string& out) {
    for (const auto& child : e.children) {
        if (const auto* t = child.text())
            out += *t;
        else
            append_text(*child.element(), out);
    }
}

void collect(const Element& e, std::string_view tag, std::vector<const Element*>& out) {
    for (const auto& child : e.children) {
        if (const auto* el = child.element()) {
            if (el->name == tag) out.push_back(el);
            collect(*el, tag, out);
        }
    }
}

const Element* find_first(const Element& e, std::string_view tag) {
    for (const auto& child : e.children) {
        if (const auto* el = child.element()) {
            if (el->name == tag) return el;
            if (const auto* hit = find_first(*el, tag)) return hit;
        }
    }
    return nullptr;
}

}  // namespace

std::string Element::text_content() const {
    std::string out;
    append_text(*this, out);
    return out;
}

std::vector<const Element*> Element::descendants(std::string_view tag) const {
    std::vector<const Element*> out;
    collect(*this, tag, out);
    return out;
}

const Element* Element::first(std::string_view tag) const { return find_first(*this, tag); }

std::vector<const Element*> Element::children_named(std::string_view tag) const {
    std::vector<const Element*> out;
    for (const auto& child : children)
        if (const auto* el = child.element(); el && el->name == tag) out.push_back(el);
    return out;
}

namespace {

bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':' ||
           static_cast<unsigned char>(c) >= 0x80;
}

bool is_name_char(char c) {
    return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.';
}

void append_utf8(std::string& out, unsigned long cp) {
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

class Parser {
public:
    Parser(std::string_view text, std::size_t base) : s_(text), base_(base) {}

    Element document() {
        skip_prolog();
        if (eof() || peek() != '<') fail("expected root element");
        Element root = element();
        skip_misc();
        if (!eof()) fail("content after root element");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw XmlError(what, base_ + pos_); }

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }
    bool starts_with(std::string_view p) const { return s_.substr(pos_, p.size()) == p; }

    void expect(std::string_view p) {
        if (!starts_with(p)) fail("expected '" + std::string(p) + "'");
        pos_ += p.size();
    }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }

    void skip_until(std::string_view terminator, const char* what) {
        const auto end = s_.find(terminator, pos_);
        if (end == std::string_view::npos) fail(std::string("unterminated ") + what);
        pos_ = end + terminator.size();
    }

    void skip_doctype() {
        expect("<!DOCTYPE");
        int bracket = 0;
        while (!eof()) {
            const char c = peek();
            if (c == '[') ++bracket;
            else if (c == ']') --bracket;
            else if (c == '"' || c == '\'') {
                const auto end = s_.find(c, pos_ + 1);
                if (end == std::string_view::npos) fail("unterminated literal in DOCTYPE");
                pos_ = end;
            } else if (c == '>' && bracket == 0) {
                ++pos_;
                return;
            }
            ++pos_;
        }
        fail("unterminated DOCTYPE");
    }

    // Comments, processing instructions and whitespace.
    void skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<!--")) skip_until("-->", "comment");
            else if (starts_with("<?")) skip_until("?>", "processing instruction");
            else return;
        }
    }

    void skip_prolog() {
        if (starts_with("\xEF\xBB\xBF")) pos_ += 3;
        for (;;) {
            skip_misc();
            if (starts_with("<!DOCTYPE")) skip_doctype();
            else return;
        }
    }

    std::string name() {
        if (eof() || !is_name_start(peek())) fail("expected a name");
        const auto start = pos_;
        while (!eof() && is_name_char(peek())) ++pos_;
        return std::string(s_.substr(start, pos_ - start));
    }

    void entity(std::string& out) {
        const auto start = pos_;
        ++pos_;  // '&'
        const auto semi = s_.find(';', pos_);
        if (semi == std::string_view::npos || semi - pos_ > 32) {
            pos_ = start;
            fail("unterminated entity reference");
        }
        const auto ref = s_.substr(pos_, semi - pos_);
        pos_ = semi + 1;
        if (ref == "lt") out.push_back('<');
        else if (ref == "gt") out.push_back('>');
        else if (ref == "amp") out.push_back('&');
        else if (ref == "quot") out.push_back('"');
        else if (ref == "apos") out.push_back('\'');
        else if (!ref.empty() && ref.front() == '#') {
            unsigned long cp = 0;
            const bool hex = ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X');
            const auto digits = ref.substr(hex ? 2 : 1);
            auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
            if (digits.empty() || ec != std::errc{} || p != digits.data() + digits.size() || cp > 0x10FFFF) {
                pos_ = start;
                fail("bad character reference");
            }
            append_utf8(out, cp);
        } else {
            bool valid = !ref.empty() && is_name_start(ref.front());
            for (char c : ref) valid = valid && is_name_char(c);
            if (!valid) {
                pos_ = start;
                fail("bad entity reference");
            }
            // DTD-defined entity: kept verbatim.
            out.append(s_.substr(start, pos_ - start));
        }
    }

    std::string attribute_value() {
        if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
        const char quote = peek();
        ++pos_;
        std::string out;
        while (!eof() && peek() != quote) {
            if (peek() == '<') fail("'<' in attribute value");
            if (peek() == '&') entity(out);
            else out.push_back(s_[pos_++]);
        }
        if (eof()) fail("unterminated attribute value");
        ++pos_;
        return out;
    }

    Element element() {
        const auto open_at = pos_;
        if (++depth_ > kMaxDepth) fail("elements nested too deeply");
        expect("<");
        Element e;
        e.name = name();
        for (;;) {
            const bool had_ws = !eof() && std::isspace(static_cast<unsigned char>(peek()));
            skip_ws();
            if (eof()) fail("unterminated start tag <" + e.name + ">");
            if (starts_with("/>")) {
                pos_ += 2;
                --depth_;
                return e;
            }
            if (peek() == '>') {
                ++pos_;
                break;
            }
            if (!had_ws) fail("expected whitespace before attribute");
            auto key = name();
            skip_ws();
            expect("=");
            skip_ws();
            auto value = attribute_value();
            if (e.has_attribute(key)) fail("duplicate attribute '" + key + "'");
            e.attributes.emplace_back(std::move(key), std::move(value));
        }

        std::string text;
        auto flush_text = [&] {
            if (!text.empty()) {
                e.children.push_back(Node{std::move(text)});
                text.clear();
            }
        };
        for (;;) {
            if (eof()) {
                pos_ = open_at;
                fail("element <" + e.name + "> is never closed");
            }
            const char c = peek();
            if (c == '<') {
                if (starts_with("</")) {
                    pos_ += 2;
                    const auto closing = name();
                    if (closing != e.name) fail("mismatched closing tag </" + closing + "> for <" + e.name + ">");
                    skip_ws();
                    expect(">");
                    flush_text();
                    --depth_;
                    return e;
                }
                if (starts_with("<!--")) {
                    skip_until("-->", "comment");
                } else if (starts_with("<![CDATA[")) {
                    pos_ += 9;
                    const auto end = s_.find("]]>", pos_);
                    if (end == std::string_view::npos) fail("unterminated CDATA section");
                    text.append(s_.substr(pos_, end - pos_));
                    pos_ = end + 3;
                } else if (starts_with("<?")) {
                    skip_until("?>", "processing instruction");
                } else {
                    flush_text();
                    e.children.push_back(Node{element()});
                }
            } else if (c == '&') {
                entity(text);
            } else {
                text.push_back(c);
                ++pos_;
            }
        }
    }

    static constexpr int kMaxDepth = 512;

    std::string_view s_;
    std::size_t base_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

}  // namespace

Element parse(std::string_view text, std::size_t base_offset) {
    return Parser(text, base_offset).document();
}

}  // namespace dwe::xml
