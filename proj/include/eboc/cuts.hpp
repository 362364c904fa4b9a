// Affine lower-bounding cuts and their pointwise maximum.
#pragma once

#include "eboc/control.hpp"

#include <string>
#include <utility>
#include <vector>

namespace eboc {

struct Cut {
    Vec alpha;       // slope
    double beta = 0; // intercept
    int episode = 0; // which episode produced it
};

double cut_value(const Cut& cut, const Vec& x);

// Append-only collection; the approximation is max over cuts.
struct CutSet {
    std::vector<Cut> cuts;

    std::size_t size() const { return cuts.size(); }
    bool empty() const { return cuts.empty(); }
    void append(Cut cut) { cuts.push_back(std::move(cut)); }
};

// Value of the max and the lowest index attaining it (deterministic
// subgradient selection). Throws std::logic_error on an empty set.
std::pair<double, std::size_t> evaluate_lb(const CutSet& cuts, const Vec& x);

std::string cuts_to_json(const CutSet& cuts);
CutSet cuts_from_json(const std::string& text);

} // namespace eboc
