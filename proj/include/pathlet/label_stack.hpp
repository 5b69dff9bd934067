#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pathlet {

/// A label is a small integer; kBottom is the reserved sentinel for the
/// special link-marker label, rendered as "B" in text form.
using Label = std::int32_t;
inline constexpr Label kBottom = -1;
inline constexpr Label kRootLabel = 0; // l0, shared by every vertex stack

inline bool is_bottom(Label l) { return l == kBottom; }

/// An ordered sequence of labels. Identifies both the area nesting of a
/// vertex (S(v)) and the visibility scope of a pathlet.
class LabelStack {
public:
    LabelStack() = default;
    explicit LabelStack(std::vector<Label> labels) : labels_(std::move(labels)) {}
    LabelStack(std::initializer_list<Label> labels) : labels_(labels) {}

    bool empty() const { return labels_.empty(); }
    std::size_t size() const { return labels_.size(); }
    Label operator[](std::size_t i) const { return labels_[i]; }
    Label last() const { return labels_.back(); }
    const std::vector<Label>& labels() const { return labels_; }

    /// All labels but the last; () for stacks of length <= 1.
    LabelStack parent() const {
        if (labels_.empty()) return {};
        return LabelStack(std::vector<Label>(labels_.begin(), labels_.end() - 1));
    }

    LabelStack appended(Label l) const {
        std::vector<Label> v = labels_;
        v.push_back(l);
        return LabelStack(std::move(v));
    }

    bool ends_with_bottom() const { return !labels_.empty() && is_bottom(labels_.back()); }

    bool contains_bottom() const {
        for (Label l : labels_)
            if (is_bottom(l)) return true;
        return false;
    }

    /// Renders as "(l0 l1 ...)", bottom as "B": "(0 1 B)".
    std::string text() const;
    static std::optional<LabelStack> parse(const std::string& s);

    bool operator==(const LabelStack&) const = default;

    /// Lexicographic order with the bottom label sorted after every
    /// ordinary label; used for deterministic container iteration only.
    std::strong_ordering operator<=>(const LabelStack& o) const {
        auto rank = [](Label l) -> std::int64_t {
            return is_bottom(l) ? INT64_MAX : static_cast<std::int64_t>(l);
        };
        std::size_t n = std::min(labels_.size(), o.labels_.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (auto c = rank(labels_[i]) <=> rank(o.labels_[i]); c != 0) return c;
        }
        return labels_.size() <=> o.labels_.size();
    }

private:
    std::vector<Label> labels_;
};

/// sigma_a followed by sigma_b.
LabelStack concat(const LabelStack& a, const LabelStack& b);

/// a [= b: b starts with the same sequence of labels as a.
bool extends(const LabelStack& a, const LabelStack& b);

/// a [ b: extends(a, b) and b is longer.
bool strictly_extends(const LabelStack& a, const LabelStack& b);

/// a |><| b: longest common prefix; the most nested area containing both.
LabelStack join(const LabelStack& a, const LabelStack& b);

/// a >-> b: the least nested area including A_a but not A_b, i.e. the
/// prefix of a one label past the common prefix (all of a when a [= b).
LabelStack project(const LabelStack& a, const LabelStack& b);

/// Vertex with stack `vertex_stack` belongs to A_area.
bool in_area(const LabelStack& vertex_stack, const LabelStack& area);

} // namespace pathlet
