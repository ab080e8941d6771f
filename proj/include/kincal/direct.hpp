#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace kincal {

// Axis-aligned search domain with strict componentwise ordering.
struct SearchBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int dim() const { return static_cast<int>(lower.size()); }

    void validate() const {
        if (lower.size() != upper.size() || lower.size() == 0)
            throw std::invalid_argument("SearchBox: dimension mismatch");
        for (int i = 0; i < dim(); ++i) {
            if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
                throw std::invalid_argument("SearchBox: lower must be strictly below upper");
        }
    }
};

struct DirectConfig {
    int max_evals = 200;
    double epsilon = 1e-4;  // nontriviality parameter of the potential-optimality test
};

// One cell of the trisection tree, in unit-cube coordinates. Side length per
// dimension is 3^-level; size is the l2 half-diagonal.
struct HyperRect {
    Eigen::VectorXd center;
    std::vector<int> side_levels;
    double f_center = 0.0;
    double size = 0.0;
};

// l2 half-diagonal. Levels are accumulated in sorted order so rects with the
// same level multiset land in the same size group bit-exactly.
inline double rect_size(std::vector<int> levels) {
    std::sort(levels.begin(), levels.end());
    double s = 0.0;
    for (int l : levels)
        s += std::pow(3.0, -2.0 * l);
    return 0.5 * std::sqrt(s);
}

struct DirectResult {
    Eigen::VectorXd x_best;
    double f_best = std::numeric_limits<double>::infinity();
    int evals_used = 0;
};

// Potentially optimal rectangles: indices j for which some K > 0 satisfies
// f_j - K s_j <= f_i - K s_i for all i and f_j - K s_j <= f_min - eps |f_min|.
// Equivalently the lower-right convex hull of the (size, f) cloud. Among rects
// tied at the same size and value only the lowest index is returned.
inline std::vector<int> potentially_optimal(const std::vector<HyperRect>& rects, double f_min,
                                            double epsilon) {
    if (rects.empty())
        throw std::invalid_argument("potentially_optimal: empty collection");

    struct SizeGroup {
        double size;
        double f;
        int index;
    };
    std::vector<SizeGroup> groups;
    for (int i = 0; i < static_cast<int>(rects.size()); ++i) {
        const HyperRect& r = rects[i];
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const SizeGroup& g) { return g.size == r.size; });
        if (it == groups.end())
            groups.push_back(SizeGroup{r.size, r.f_center, i});
        else if (r.f_center < it->f) {
            it->f = r.f_center;
            it->index = i;
        }
    }
    std::sort(groups.begin(), groups.end(),
              [](const SizeGroup& a, const SizeGroup& b) { return a.size < b.size; });

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<int> result;
    for (std::size_t j = 0; j < groups.size(); ++j) {
        double k_low = -kInf;
        for (std::size_t i = 0; i < j; ++i)
            k_low = std::max(k_low, (groups[j].f - groups[i].f) / (groups[j].size - groups[i].size));
        double k_high = kInf;
        for (std::size_t i = j + 1; i < groups.size(); ++i)
            k_high = std::min(k_high, (groups[i].f - groups[j].f) / (groups[i].size - groups[j].size));

        if (!(k_high > 0.0) || k_low > k_high)
            continue;
        if (k_high < kInf && groups[j].f - k_high * groups[j].size > f_min - epsilon * std::abs(f_min))
            continue;
        result.push_back(groups[j].index);
    }
    std::sort(result.begin(), result.end());
    return result;
}

// Splits a rectangle along all of its longest dimensions (at most max_pairs of
// them, two evaluations each), ordering the splits by the best new value per
// dimension. Children partition the parent; the last returned rect is the
// shrunk middle cell, which reuses the parent's evaluation.
template <typename F>
std::vector<HyperRect> trisect(const HyperRect& rect, F&& f_unit,
                               int max_pairs = std::numeric_limits<int>::max()) {
    const int n = static_cast<int>(rect.center.size());
    const int level_min = *std::min_element(rect.side_levels.begin(), rect.side_levels.end());

    std::vector<int> dims;
    for (int i = 0; i < n; ++i) {
        if (rect.side_levels[i] == level_min && static_cast<int>(dims.size()) < max_pairs)
            dims.push_back(i);
    }
    if (dims.empty())
        return {rect};

    const double delta = std::pow(3.0, -(level_min + 1));

    struct DimEval {
        int dim;
        double f_minus, f_plus, w;
    };
    std::vector<DimEval> evals;
    evals.reserve(dims.size());
    for (int i : dims) {
        Eigen::VectorXd cp = rect.center, cm = rect.center;
        cp[i] += delta;
        cm[i] -= delta;
        const double fp = f_unit(cp);
        const double fm = f_unit(cm);
        evals.push_back(DimEval{i, fm, fp, std::min(fm, fp)});
    }
    std::sort(evals.begin(), evals.end(), [](const DimEval& a, const DimEval& b) {
        return a.w != b.w ? a.w < b.w : a.dim < b.dim;
    });

    std::vector<HyperRect> pieces;
    std::vector<int> levels = rect.side_levels;
    for (const DimEval& e : evals) {
        levels[e.dim] += 1;
        HyperRect minus{rect.center, levels, e.f_minus, rect_size(levels)};
        minus.center[e.dim] -= delta;
        HyperRect plus{rect.center, levels, e.f_plus, rect_size(levels)};
        plus.center[e.dim] += delta;
        pieces.push_back(std::move(minus));
        pieces.push_back(std::move(plus));
    }
    pieces.push_back(HyperRect{rect.center, levels, rect.f_center, rect_size(levels)});
    return pieces;
}

// Classic DIRECT over a box: evaluate the center, then repeatedly trisect the
// potentially optimal rectangles until the evaluation budget is exhausted.
// Deterministic; ties in the incumbent keep the first-evaluated point.
template <typename F>
DirectResult minimize(F&& objective, const SearchBox& box, const DirectConfig& cfg) {
    box.validate();
    if (cfg.max_evals < 1)
        throw std::invalid_argument("DirectConfig: max_evals must be at least 1");
    if (cfg.epsilon < 0.0)
        throw std::invalid_argument("DirectConfig: epsilon must be nonnegative");

    const int n = box.dim();
    const Eigen::VectorXd span = box.upper - box.lower;

    DirectResult result;
    Eigen::VectorXd u_best = Eigen::VectorXd::Constant(n, 0.5);
    auto eval_unit = [&](const Eigen::VectorXd& u) {
        const double f = objective(Eigen::VectorXd(box.lower + u.cwiseProduct(span)));
        ++result.evals_used;
        if (f < result.f_best) {
            result.f_best = f;
            u_best = u;
        }
        return f;
    };

    std::vector<HyperRect> rects;
    {
        HyperRect root;
        root.center = Eigen::VectorXd::Constant(n, 0.5);
        root.side_levels.assign(n, 0);
        root.f_center = eval_unit(root.center);
        root.size = rect_size(root.side_levels);
        rects.push_back(std::move(root));
    }

    while (cfg.max_evals - result.evals_used >= 2) {
        const std::vector<int> po = potentially_optimal(rects, result.f_best, cfg.epsilon);
        bool split_any = false;
        for (int idx : po) {
            const int pairs = (cfg.max_evals - result.evals_used) / 2;
            if (pairs == 0)
                break;
            std::vector<HyperRect> pieces = trisect(rects[idx], eval_unit, pairs);
            if (pieces.size() < 2)
                continue;
            rects[idx] = std::move(pieces.back());
            pieces.pop_back();
            for (HyperRect& piece : pieces)
                rects.push_back(std::move(piece));
            split_any = true;
        }
        if (!split_any)
            break;
    }

    result.x_best = box.lower + u_best.cwiseProduct(span);
    return result;
}

}  // namespace kincal
