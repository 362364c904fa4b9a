#include "eboc/cuts.hpp"

#include <stdexcept>

#include "json.hpp"

namespace eboc {

double cut_value(const Cut& cut, const Vec& x) {
    double v = cut.beta;
    for (std::size_t j = 0; j < cut.alpha.size(); ++j) v += cut.alpha[j] * x[j];
    return v;
}

std::pair<double, std::size_t> evaluate_lb(const CutSet& cuts, const Vec& x) {
    if (cuts.empty()) throw std::logic_error("evaluate_lb: empty cut set");
    double best = cut_value(cuts.cuts.front(), x);
    std::size_t best_index = 0;
    for (std::size_t i = 1; i < cuts.cuts.size(); ++i) {
        const double v = cut_value(cuts.cuts[i], x);
        if (v > best) { // strict: ties keep the lowest index
            best = v;
            best_index = i;
        }
    }
    return {best, best_index};
}

std::string cuts_to_json(const CutSet& cuts) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& cut : cuts.cuts) {
        arr.push_back({{"alpha", cut.alpha}, {"beta", cut.beta}, {"episode", cut.episode}});
    }
    return arr.dump();
}

CutSet cuts_from_json(const std::string& text) {
    CutSet out;
    for (const auto& j : nlohmann::json::parse(text)) {
        Cut cut;
        cut.alpha = j.at("alpha").get<std::vector<double>>();
        cut.beta = j.at("beta").get<double>();
        cut.episode = j.at("episode").get<int>();
        out.append(std::move(cut));
    }
    return out;
}

} // namespace eboc
