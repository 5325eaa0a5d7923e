#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "semcons/csv.hpp"
#include "semcons/equivalence.hpp"
#include "semcons/errors.hpp"
#include "semcons/json_io.hpp"
#include "semcons/rational.hpp"

namespace semcons {

// Per-question semantic consistency: the fraction of ordered response
// pairs that land in the same cluster. Kept as the raw integer fraction
// sum(s*(s-1)) / (n*(n-1)) so downstream comparisons stay exact.
struct ConsistencyScore {
    std::string question_id;
    std::string category;
    std::string strategy;
    int n = 0;
    std::vector<int> cluster_sizes; // descending
    long long numerator = 0;        // sum over clusters of s*(s-1)
    long long denominator = 0;      // n*(n-1)
    double value = 0.0;

    Rational exact() const { return Rational(numerator, denominator); }
};

inline ConsistencyScore semantic_consistency(const Clustering& clustering) {
    if (clustering.n < 2) throw DegenerateSampleSizeError(clustering.n);

    ConsistencyScore score;
    score.question_id = clustering.question_id;
    score.strategy = clustering.strategy;
    score.n = clustering.n;

    long long covered = 0;
    for (const auto& cluster : clustering.clusters) {
        if (cluster.empty()) throw Error("BadClustering", "empty cluster");
        long long s = static_cast<long long>(cluster.size());
        covered += s;
        score.cluster_sizes.push_back(static_cast<int>(s));
        score.numerator += s * (s - 1);
    }
    if (covered != clustering.n) {
        throw Error("BadClustering", "clusters do not partition 0..n-1");
    }
    std::sort(score.cluster_sizes.begin(), score.cluster_sizes.end(), std::greater<>());
    score.denominator = static_cast<long long>(clustering.n) * (clustering.n - 1);
    score.value = static_cast<double>(score.numerator) / static_cast<double>(score.denominator);
    return score;
}

// Literal transcription of the pairwise definition, used as the test
// oracle: walk every ordered pair (i, j), i != j, count co-clustered
// pairs, divide by n(n-1).
inline double semantic_consistency_bruteforce(const Clustering& clustering) {
    if (clustering.n < 2) throw DegenerateSampleSizeError(clustering.n);

    std::vector<int> cluster_of(static_cast<std::size_t>(clustering.n), -1);
    for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
        for (int index : clustering.clusters[c]) {
            cluster_of.at(static_cast<std::size_t>(index)) = static_cast<int>(c);
        }
    }

    long long same = 0;
    for (int i = 0; i < clustering.n; ++i) {
        for (int j = 0; j < clustering.n; ++j) {
            if (i == j) continue;
            if (cluster_of[static_cast<std::size_t>(i)] == cluster_of[static_cast<std::size_t>(j)]) {
                ++same;
            }
        }
    }
    return static_cast<double>(same) /
           static_cast<double>(static_cast<long long>(clustering.n) * (clustering.n - 1));
}

struct CategoryScore {
    std::string category;
    std::string strategy;
    std::vector<double> question_values; // in question-id order
    Rational mean_exact;
    double mean = 0.0;
};

inline CategoryScore category_mean(const std::vector<ConsistencyScore>& scores) {
    if (scores.empty()) throw EmptyCategoryError("category mean of zero questions");

    std::vector<const ConsistencyScore*> ordered;
    ordered.reserve(scores.size());
    for (const auto& s : scores) {
        if (s.category != scores.front().category) {
            throw MixedCategoryError("mixed categories: '" + scores.front().category + "' vs '" +
                                     s.category + "'");
        }
        if (s.strategy != scores.front().strategy) {
            throw MixedCategoryError("mixed strategies: '" + scores.front().strategy + "' vs '" +
                                     s.strategy + "'");
        }
        ordered.push_back(&s);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const auto* a, const auto* b) { return a->question_id < b->question_id; });

    CategoryScore out;
    out.category = scores.front().category;
    out.strategy = scores.front().strategy;
    Rational sum;
    for (const auto* s : ordered) {
        out.question_values.push_back(s->value);
        sum = sum + s->exact();
    }
    out.mean_exact = sum.divided_by(static_cast<long long>(ordered.size()));
    out.mean = out.mean_exact.to_double();
    return out;
}

// Left-open right-closed bins over category means. A mean of exactly 0
// (every response its own cluster for every question) counts in the first
// bin so the binning covers the metric's full range.
using BinBoundaries = std::array<Rational, 4>;

inline BinBoundaries default_bin_boundaries() {
    return {Rational(1, 4), Rational(1, 2), Rational(3, 4), Rational(1, 1)};
}

struct StrategyBins {
    std::string strategy;
    BinBoundaries boundaries = default_bin_boundaries();
    std::array<int, 4> counts{0, 0, 0, 0};

    int total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
};

inline StrategyBins bin_histogram(const std::vector<CategoryScore>& scores,
                                  const BinBoundaries& boundaries = default_bin_boundaries()) {
    StrategyBins bins;
    bins.boundaries = boundaries;
    if (!scores.empty()) bins.strategy = scores.front().strategy;
    for (const auto& score : scores) {
        const Rational& x = score.mean_exact;
        if (x < Rational(0, 1) || x > boundaries.back()) {
            throw Error("ValueOutOfRange", "category mean " + x.to_string() + " outside [0, 1]");
        }
        std::size_t bin = 0;
        if (!x.is_zero()) {
            while (bin + 1 < boundaries.size() && x > boundaries[bin]) ++bin;
        }
        ++bins.counts[bin];
    }
    return bins;
}

struct CategoryDelta {
    std::string category;
    Rational baseline_mean;
    Rational variant_mean;
    Rational delta;
};

struct ComparisonReport {
    std::string baseline;
    std::string variant;
    std::vector<CategoryDelta> per_category; // sorted by category
    int increased = 0;
    int decreased = 0;
    int unchanged = 0;
    Rational mean_improvement_exact;
    double mean_improvement = 0.0;
    StrategyBins baseline_bins;
    StrategyBins variant_bins;
};

// Per-category deltas between two strategies over the identical category
// set. Increase/decrease/unchanged counting compares the exact rational
// means, so ties are detected reliably.
inline ComparisonReport compare_strategies(const std::vector<CategoryScore>& baseline,
                                           const std::vector<CategoryScore>& variant) {
    auto sorted_by_category = [](std::vector<CategoryScore> scores) {
        std::sort(scores.begin(), scores.end(),
                  [](const auto& a, const auto& b) { return a.category < b.category; });
        return scores;
    };
    auto base = sorted_by_category(baseline);
    auto vari = sorted_by_category(variant);

    if (base.size() != vari.size()) {
        throw CategoryMismatchError("baseline has " + std::to_string(base.size()) +
                                    " categories, variant has " + std::to_string(vari.size()));
    }
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (base[i].category != vari[i].category) {
            throw CategoryMismatchError("category sets differ: '" + base[i].category + "' vs '" +
                                        vari[i].category + "'");
        }
    }
    if (base.empty()) throw CategoryMismatchError("no categories to compare");

    ComparisonReport report;
    report.baseline = base.front().strategy;
    report.variant = vari.front().strategy;

    Rational delta_sum;
    for (std::size_t i = 0; i < base.size(); ++i) {
        CategoryDelta entry;
        entry.category = base[i].category;
        entry.baseline_mean = base[i].mean_exact;
        entry.variant_mean = vari[i].mean_exact;
        entry.delta = entry.variant_mean - entry.baseline_mean;
        delta_sum = delta_sum + entry.delta;
        int cmp = entry.variant_mean.compare(entry.baseline_mean);
        if (cmp > 0) ++report.increased;
        else if (cmp < 0) ++report.decreased;
        else ++report.unchanged;
        report.per_category.push_back(std::move(entry));
    }
    report.mean_improvement_exact = delta_sum.divided_by(static_cast<long long>(base.size()));
    report.mean_improvement = report.mean_improvement_exact.to_double();
    report.baseline_bins = bin_histogram(base);
    report.variant_bins = bin_histogram(vari);
    return report;
}

// --- persistence -----------------------------------------------------------

inline void to_json(json& j, const StrategyBins& bins) {
    json bounds = json::array();
    for (const auto& b : bins.boundaries) bounds.push_back(b.to_string());
    j = json{{"strategy", bins.strategy}, {"boundaries", bounds}, {"counts", bins.counts}};
}

inline void to_json(json& j, const ComparisonReport& r) {
    json per_category = json::array();
    for (const auto& d : r.per_category) {
        per_category.push_back(json{{"category", d.category},
                                    {"baseline_mean", d.baseline_mean.to_double()},
                                    {"baseline_mean_fraction", d.baseline_mean.to_string()},
                                    {"variant_mean", d.variant_mean.to_double()},
                                    {"variant_mean_fraction", d.variant_mean.to_string()},
                                    {"delta", d.delta.to_double()},
                                    {"delta_fraction", d.delta.to_string()}});
    }
    j = json{{"baseline", r.baseline},
             {"variant", r.variant},
             {"per_category", per_category},
             {"counts",
              json{{"increased", r.increased}, {"decreased", r.decreased}, {"unchanged", r.unchanged}}},
             {"mean_improvement", r.mean_improvement},
             {"mean_improvement_fraction", r.mean_improvement_exact.to_string()},
             {"bins", json{{"baseline", r.baseline_bins}, {"variant", r.variant_bins}}}};
}

inline std::string scores_to_csv(const std::vector<ConsistencyScore>& scores) {
    std::string out = "question_id,category,n,cluster_sizes,value,value_fraction\n";
    for (const auto& s : scores) {
        std::string sizes;
        for (std::size_t i = 0; i < s.cluster_sizes.size(); ++i) {
            if (i > 0) sizes.push_back('+');
            sizes += std::to_string(s.cluster_sizes[i]);
        }
        out += csv_escape(s.question_id) + "," + csv_escape(s.category) + "," + std::to_string(s.n) +
               "," + sizes + "," + format_decimal6(s.value) + "," + std::to_string(s.numerator) +
               "/" + std::to_string(s.denominator) + "\n";
    }
    return out;
}

inline std::vector<ConsistencyScore> scores_from_csv(const std::string& csv,
                                                     const std::string& strategy) {
    auto rows = parse_csv(csv);
    if (rows.empty() || rows[0].size() != 6) {
        throw Error("BadScoresCsv", "unexpected scores csv header");
    }
    std::vector<ConsistencyScore> scores;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 6) throw Error("BadScoresCsv", "bad row in scores csv");
        ConsistencyScore s;
        s.question_id = row[0];
        s.category = row[1];
        s.strategy = strategy;
        s.n = std::stoi(row[2]);
        for (const auto& part : split_and_trim(row[3], '+')) {
            s.cluster_sizes.push_back(std::stoi(part));
        }
        std::size_t slash = row[5].find('/');
        if (slash == std::string::npos) throw Error("BadScoresCsv", "bad value fraction");
        s.numerator = std::stoll(row[5].substr(0, slash));
        s.denominator = std::stoll(row[5].substr(slash + 1));
        s.value = static_cast<double>(s.numerator) / static_cast<double>(s.denominator);
        scores.push_back(std::move(s));
    }
    return scores;
}

} // namespace semcons
