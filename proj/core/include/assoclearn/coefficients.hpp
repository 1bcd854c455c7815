#pragma once

#include <vector>

#include <Eigen/Dense>

#include "assoclearn/layout.hpp"

namespace assoclearn {

/// Column partition (p_1, ..., p_t) of the predictors.
class PredictorPartition {
public:
    PredictorPartition() = default;
    explicit PredictorPartition(std::vector<int> sizes);

    /// t = 1.
    static PredictorPartition global(int p) { return PredictorPartition({p}); }
    /// t = p, one column per block.
    static PredictorPartition local(int p) { return PredictorPartition(std::vector<int>(p, 1)); }

    int num_blocks() const { return static_cast<int>(sizes_.size()); }
    int size(int block) const { return sizes_[block]; }
    int offset(int block) const { return offsets_[block]; }
    int total() const { return total_; }
    const std::vector<int>& sizes() const { return sizes_; }

    bool operator==(const PredictorPartition&) const = default;

private:
    std::vector<int> sizes_;
    std::vector<int> offsets_;
    int total_ = 0;
};

/// β stored stacked (total_dim × p) with block views β_{k,j}.
class CoefficientBlocks {
public:
    CoefficientBlocks(ResponseLayout layout, PredictorPartition partition);
    CoefficientBlocks(ResponseLayout layout, PredictorPartition partition, Eigen::MatrixXd stacked);

    const ResponseLayout& layout() const { return layout_; }
    const PredictorPartition& partition() const { return partition_; }

    Eigen::MatrixXd& stacked() { return values_; }
    const Eigen::MatrixXd& stacked() const { return values_; }

    int num_predictors() const { return partition_.total(); }

    auto block(int effect, int j) {
        return values_.block(layout_.offset(effect), partition_.offset(j), layout_.dim(effect),
                             partition_.size(j));
    }
    auto block(int effect, int j) const {
        return values_.block(layout_.offset(effect), partition_.offset(j), layout_.dim(effect),
                             partition_.size(j));
    }
    /// β_k across all predictors.
    auto effect_rows(int effect) const {
        return values_.middleRows(layout_.offset(effect), layout_.dim(effect));
    }

    double block_norm(int effect, int j) const { return block(effect, j).norm(); }
    double effect_norm(int effect) const { return effect_rows(effect).norm(); }

private:
    ResponseLayout layout_;
    PredictorPartition partition_;
    Eigen::MatrixXd values_;
};

} // namespace assoclearn
