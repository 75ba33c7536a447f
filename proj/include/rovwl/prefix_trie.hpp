#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <vector>

#include "rovwl/net.hpp"

namespace rovwl {

// Binary trie over prefix bits, one root per address family. A value lives
// at the node whose root path equals the inserted prefix, so every covering
// (equal or less specific) entry of a query lies on the query's root path.
template <typename T>
class PrefixTrie {
public:
    PrefixTrie() = default;
    PrefixTrie(const PrefixTrie& other) { *this = other; }
    PrefixTrie& operator=(const PrefixTrie& other) {
        if (this != &other) {
            root_v4_ = clone(other.root_v4_);
            root_v6_ = clone(other.root_v6_);
            size_ = other.size_;
        }
        return *this;
    }
    PrefixTrie(PrefixTrie&&) noexcept = default;
    PrefixTrie& operator=(PrefixTrie&&) noexcept = default;

    // Value slot for `p`, created on demand.
    T& at(const Prefix& p) {
        Node* n = &root(p.family());
        for (uint8_t i = 0; i < p.length(); ++i) {
            auto& child = n->child[p.bit(i)];
            if (!child) child = std::make_unique<Node>();
            n = child.get();
        }
        if (!n->value) {
            n->value.emplace();
            ++size_;
        }
        return *n->value;
    }

    const T* exact(const Prefix& p) const {
        const Node* n = &root(p.family());
        for (uint8_t i = 0; i < p.length(); ++i) {
            n = n->child[p.bit(i)].get();
            if (!n) return nullptr;
        }
        return n->value ? &*n->value : nullptr;
    }

    // All values whose prefix covers `p`, most specific (longest) first.
    std::vector<const T*> covering(const Prefix& p) const {
        std::vector<const T*> out;
        const Node* n = &root(p.family());
        if (n->value) out.push_back(&*n->value);
        for (uint8_t i = 0; i < p.length() && n; ++i) {
            n = n->child[p.bit(i)].get();
            if (n && n->value) out.push_back(&*n->value);
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

    // Longest-prefix match; walks the full address when `p` is a host route.
    const T* longest_match(const Prefix& p) const {
        const T* best = nullptr;
        const Node* n = &root(p.family());
        if (n->value) best = &*n->value;
        for (uint8_t i = 0; i < p.length() && n; ++i) {
            n = n->child[p.bit(i)].get();
            if (n && n->value) best = &*n->value;
        }
        return best;
    }

    size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

private:
    struct Node {
        std::unique_ptr<Node> child[2];
        std::optional<T> value;
    };

    static std::unique_ptr<Node> clone_ptr(const std::unique_ptr<Node>& n) {
        if (!n) return nullptr;
        auto out = std::make_unique<Node>();
        out->value = n->value;
        out->child[0] = clone_ptr(n->child[0]);
        out->child[1] = clone_ptr(n->child[1]);
        return out;
    }
    static Node clone(const Node& n) {
        Node out;
        out.value = n.value;
        out.child[0] = clone_ptr(n.child[0]);
        out.child[1] = clone_ptr(n.child[1]);
        return out;
    }

    Node& root(Family f) { return f == Family::v4 ? root_v4_ : root_v6_; }
    const Node& root(Family f) const { return f == Family::v4 ? root_v4_ : root_v6_; }

    Node root_v4_;
    Node root_v6_;
    size_t size_ = 0;
};

}  // namespace rovwl
