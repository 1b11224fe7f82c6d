#pragma once

#include <vector>

#include "xmutest/corpus.hpp"

namespace xmutest {

// Per-item category tallies: items x categories, each row summing to the
// number of annotators.
struct AnnotationMatrix {
    std::vector<std::vector<int>> tallies;
    int n_annotators = 0;
};

// Chance-corrected agreement between two raters over parallel category lists.
// kappa = (p_o - p_e) / (1 - p_e) with marginal-product chance agreement.
double cohen_kappa(const std::vector<int>& ratings_a, const std::vector<int>& ratings_b);

double fleiss_kappa(const AnnotationMatrix& matrix);

// Per-token strict majority vote across annotators (1 iff more than half
// marked 1; for 3 annotators that is >= 2).
RationaleVector aggregate_rationales(const std::vector<RationaleVector>& vectors);

// Builds the items-x-2 tally matrix from per-annotator binary token streams,
// flattening all tokens of all samples that carry full annotator sets.
AnnotationMatrix rationale_annotation_matrix(const Corpus& corpus);

}  // namespace xmutest
