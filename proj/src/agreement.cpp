#include "xmutest/agreement.hpp"

#include <cmath>
#include <map>

#include "xmutest/errors.hpp"

namespace xmutest {

double cohen_kappa(const std::vector<int>& ratings_a, const std::vector<int>& ratings_b) {
    if (ratings_a.size() != ratings_b.size())
        throw ArgumentError("cohen_kappa: rating lists differ in length");
    if (ratings_a.empty()) throw ArgumentError("cohen_kappa: empty rating lists");

    const double n = static_cast<double>(ratings_a.size());
    std::map<int, double> marg_a, marg_b;
    double observed = 0.0;
    for (std::size_t i = 0; i < ratings_a.size(); ++i) {
        if (ratings_a[i] == ratings_b[i]) observed += 1.0;
        marg_a[ratings_a[i]] += 1.0;
        marg_b[ratings_b[i]] += 1.0;
    }
    const double p_o = observed / n;
    double p_e = 0.0;
    for (const auto& [cat, count_a] : marg_a) {
        auto it = marg_b.find(cat);
        if (it != marg_b.end()) p_e += (count_a / n) * (it->second / n);
    }
    if (p_e >= 1.0 - 1e-12) {
        if (p_o >= 1.0 - 1e-12) return 1.0;
        throw UndefinedStatisticError("cohen_kappa: chance agreement is 1 with imperfect observed agreement");
    }
    return (p_o - p_e) / (1.0 - p_e);
}

double fleiss_kappa(const AnnotationMatrix& matrix) {
    const std::size_t n_items = matrix.tallies.size();
    if (n_items < 2) throw ArgumentError("fleiss_kappa: need at least 2 items");
    const int n = matrix.n_annotators;
    if (n < 2) throw ArgumentError("fleiss_kappa: need at least 2 annotators");

    std::size_t n_cats = matrix.tallies.front().size();
    std::vector<double> p_cat(n_cats, 0.0);
    double p_bar = 0.0;
    for (const auto& row : matrix.tallies) {
        if (row.size() != n_cats)
            throw ArgumentError("fleiss_kappa: ragged tally matrix");
        int row_sum = 0;
        double agree = 0.0;
        for (std::size_t j = 0; j < n_cats; ++j) {
            row_sum += row[j];
            agree += static_cast<double>(row[j]) * (row[j] - 1);
            p_cat[j] += row[j];
        }
        if (row_sum != n)
            throw ArgumentError("fleiss_kappa: tally row does not sum to n_annotators");
        p_bar += agree / (static_cast<double>(n) * (n - 1));
    }
    p_bar /= static_cast<double>(n_items);
    double p_e = 0.0;
    for (std::size_t j = 0; j < n_cats; ++j) {
        double pj = p_cat[j] / (static_cast<double>(n_items) * n);
        p_e += pj * pj;
    }
    if (p_e >= 1.0 - 1e-12) {
        if (p_bar >= 1.0 - 1e-12) return 1.0;
        throw UndefinedStatisticError("fleiss_kappa: chance agreement is 1 with imperfect observed agreement");
    }
    return (p_bar - p_e) / (1.0 - p_e);
}

RationaleVector aggregate_rationales(const std::vector<RationaleVector>& vectors) {
    if (vectors.empty()) throw ArgumentError("aggregate_rationales: no vectors");
    const std::size_t len = vectors.front().size();
    for (const auto& v : vectors)
        if (v.size() != len) throw ArgumentError("aggregate_rationales: length mismatch");
    RationaleVector out(len, 0);
    for (std::size_t t = 0; t < len; ++t) {
        int ones = 0;
        for (const auto& v : vectors) ones += v[t];
        out[t] = (2 * ones > static_cast<int>(vectors.size())) ? 1 : 0;
    }
    return out;
}

AnnotationMatrix rationale_annotation_matrix(const Corpus& corpus) {
    AnnotationMatrix m;
    for (const auto& s : corpus.samples) {
        if (s.annotator_rationales.empty()) continue;
        if (m.n_annotators == 0) m.n_annotators = static_cast<int>(s.annotator_rationales.size());
        if (static_cast<int>(s.annotator_rationales.size()) != m.n_annotators)
            throw ValidationError("sample '" + s.id + "': inconsistent annotator count");
        for (std::size_t t = 0; t < s.tokens.size(); ++t) {
            int ones = 0;
            for (const auto& r : s.annotator_rationales) ones += r[t];
            m.tallies.push_back({m.n_annotators - ones, ones});
        }
    }
    return m;
}

}  // namespace xmutest
