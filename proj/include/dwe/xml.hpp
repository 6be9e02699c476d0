#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

// Small non-validating XML reader, sufficient for JATS article metadata.
namespace dwe::xml {

class XmlError : public std::runtime_error {
public:
    XmlError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
    [[nodiscard]] std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

struct Node;

struct Element {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<Node> children;

    /// Empty when absent, like DOM getAttribute.
    [[nodiscard]] std::string attribute(std::string_view key) const;
    [[nodiscard]] bool has_attribute(std::string_view key) const;
    /// Concatenated text of all descendants.
    [[nodiscard]] std::string text_content() const;
    /// All descendant elements with this name, in document order (excluding this one).
    [[nodiscard]] std::vector<const Element*> descendants(std::string_view tag) const;
    /// First descendant with this name or nullptr.
    [[nodiscard]] const Element* first(std::string_view tag) const;
    /// Direct children elements with this name.
    [[nodiscard]] std::vector<const Element*> children_named(std::string_view tag) const;
};

struct Node {
    std::variant<std::string, Element> value;

    [[nodiscard]] const Element* element() const { return std::get_if<Element>(&value); }
    [[nodiscard]] const std::string* text() const { return std::get_if<std::string>(&value); }
};

/// Parses a document and returns its root element. `base_offset` is added to error offsets.
[[nodiscard]] Element parse(std::string_view text, std::size_t base_offset = 0);

}  // namespace dwe::xml
