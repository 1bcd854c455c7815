#include "assoclearn/coefficients.hpp"

#include <string>

namespace assoclearn {

PredictorPartition::PredictorPartition(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw InputError("predictor partition is empty");
    for (int s : sizes_) {
        if (s < 1) throw InputError("predictor block sizes must be positive");
        offsets_.push_back(total_);
        total_ += s;
    }
}

CoefficientBlocks::CoefficientBlocks(ResponseLayout layout, PredictorPartition partition)
    : layout_(std::move(layout)), partition_(std::move(partition)),
      values_(Eigen::MatrixXd::Zero(layout_.total_dim(), partition_.total())) {}

CoefficientBlocks::CoefficientBlocks(ResponseLayout layout, PredictorPartition partition,
                                     Eigen::MatrixXd stacked)
    : layout_(std::move(layout)), partition_(std::move(partition)), values_(std::move(stacked)) {
    if (values_.rows() != layout_.total_dim() || values_.cols() != partition_.total()) {
        throw InputError("coefficient matrix is " + std::to_string(values_.rows()) + "x" +
                         std::to_string(values_.cols()) + ", expected " +
                         std::to_string(layout_.total_dim()) + "x" +
                         std::to_string(partition_.total()));
    }
}

} // namespace assoclearn
