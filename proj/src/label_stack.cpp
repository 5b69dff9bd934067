#include "pathlet/label_stack.hpp"

#include <sstream>

namespace pathlet {

std::string LabelStack::text() const {
    std::string out = "(";
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (i) out += ' ';
        if (is_bottom(labels_[i]))
            out += 'B';
        else
            out += std::to_string(labels_[i]);
    }
    out += ')';
    return out;
}

std::optional<LabelStack> LabelStack::parse(const std::string& s) {
    if (s.size() < 2 || s.front() != '(' || s.back() != ')') return std::nullopt;
    std::vector<Label> labels;
    std::istringstream in(s.substr(1, s.size() - 2));
    std::string tok;
    while (in >> tok) {
        if (tok == "B") {
            labels.push_back(kBottom);
        } else {
            try {
                std::size_t pos = 0;
                long v = std::stol(tok, &pos);
                if (pos != tok.size() || v < 0) return std::nullopt;
                labels.push_back(static_cast<Label>(v));
            } catch (...) {
                return std::nullopt;
            }
        }
    }
    return LabelStack(std::move(labels));
}

LabelStack concat(const LabelStack& a, const LabelStack& b) {
    std::vector<Label> v = a.labels();
    v.insert(v.end(), b.labels().begin(), b.labels().end());
    return LabelStack(std::move(v));
}

bool extends(const LabelStack& a, const LabelStack& b) {
    if (a.size() > b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

bool strictly_extends(const LabelStack& a, const LabelStack& b) {
    return b.size() > a.size() && extends(a, b);
}

LabelStack join(const LabelStack& a, const LabelStack& b) {
    std::size_t n = std::min(a.size(), b.size());
    std::vector<Label> v;
    for (std::size_t i = 0; i < n && a[i] == b[i]; ++i) v.push_back(a[i]);
    return LabelStack(std::move(v));
}

LabelStack project(const LabelStack& a, const LabelStack& b) {
    if (a.empty() || b.empty()) return {};
    std::size_t common = 0;
    while (common < std::min(a.size(), b.size()) && a[common] == b[common]) ++common;
    std::size_t len = std::min(common + 1, a.size());
    std::vector<Label> v(a.labels().begin(), a.labels().begin() + static_cast<long>(len));
    return LabelStack(std::move(v));
}

bool in_area(const LabelStack& vertex_stack, const LabelStack& area) {
    return extends(area, vertex_stack);
}

} // namespace pathlet
