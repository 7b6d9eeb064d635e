#pragma once

// Single-bit perturbations of a relation: one term's bit index moved by one.

#include <vector>

#include "mtconv/relations.hpp"

namespace perturb {

inline std::vector<mtconv::linear_relation> single_bit(const mtconv::linear_relation& rel, unsigned width) {
    std::vector<mtconv::linear_relation> out;
    for (std::size_t i = 0; i < rel.terms().size(); ++i)
        for (int delta : {-1, 1}) {
            auto terms = rel.terms();
            const int bit = static_cast<int>(terms[i].bit) + delta;
            if (bit < 0 || bit >= static_cast<int>(width)) continue;
            terms[i].bit = static_cast<unsigned>(bit);
            try {
                out.emplace_back(std::move(terms), rel.stream());
            } catch (const std::invalid_argument&) {
                // collides with another term
            }
        }
    return out;
}

}  // namespace perturb
