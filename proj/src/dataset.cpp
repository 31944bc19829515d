#include "made/dataset.hpp"

#include <cmath>

#include "made/errors.hpp"

namespace made {

namespace {
std::vector<int> iota(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    return idx;
}
}  // namespace

std::vector<int> Dataset::train_indices() const {
    return train.empty() ? iota(n()) : train;
}

std::vector<int> Dataset::eval_indices() const {
    return eval.empty() ? iota(n()) : eval;
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
    Dataset out;
    const int m = static_cast<int>(rows.size());
    out.y.resize(m);
    out.X.resize(m, p());
    if (trials.size()) out.trials.resize(m);
    if (offsets.size()) out.offsets.resize(m);
    for (int k = 0; k < m; ++k) {
        out.y(k) = y(rows[k]);
        out.X.row(k) = X.row(rows[k]);
        if (trials.size()) out.trials(k) = trials(rows[k]);
        if (offsets.size()) out.offsets(k) = offsets(rows[k]);
    }
    out.dispersion = dispersion;
    return out;
}

void Dataset::validate(const Family& family) const {
    if (y.size() != X.rows()) throw DataError("dataset: y and X row counts differ");
    if (trials.size() && trials.size() != y.size())
        throw DataError("dataset: trials length mismatch");
    if (offsets.size() && offsets.size() != y.size())
        throw DataError("dataset: offsets length mismatch");
    if (!(dispersion > 0.0)) throw DataError("dataset: dispersion must be positive");
    if (!X.allFinite()) throw DataError("dataset: non-finite predictor values");
    for (int i = 0; i < n(); ++i) {
        if (trial(i) <= 0.0) throw DataError("dataset: nonpositive trial count");
        if (!std::isfinite(offset(i))) throw DataError("dataset: non-finite offset");
        if (offset(i) != 0.0 && !family.supports_offset())
            throw DataError("dataset: family '" + family.label() +
                            "' does not support offsets");
        family.require_support(y(i), trial(i));
    }
    for (int i : train)
        if (i < 0 || i >= n()) throw DataError("dataset: train index out of range");
    for (int i : eval)
        if (i < 0 || i >= n()) throw DataError("dataset: eval index out of range");
}

}  // namespace made
