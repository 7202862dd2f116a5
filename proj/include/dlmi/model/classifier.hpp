#pragma once

// Trainable categorical classifiers used as the routing model of inner index
// nodes. Two kinds satisfy the same contract: a nearest-centroid model
// (softmax over negated Euclidean distances) and a one-hidden-layer MLP
// trained on k-means labels.

#include "dlmi/core/types.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace dlmi {

enum class ModelKind : std::uint8_t { centroid = 0, mlp = 1 };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct MlpParams {
    std::size_t hidden = 128;
    std::size_t epochs = 30;
    std::size_t batch_size = 256;
    double learning_rate = 0.01;
    double momentum = 0.9;

    friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

struct ModelConfig {
    ModelKind kind = ModelKind::centroid;
    MlpParams mlp;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

class CentroidModel {
  public:
    CentroidModel() = default;
    /// `active[j] == 0` marks a class without training objects; its logit is -inf.
    CentroidModel(std::size_t dimension, std::vector<float> centroids,
                  std::vector<std::uint8_t> active);

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t n_classes() const noexcept { return active_.size(); }
    std::span<const float> centroid(std::size_t j) const {
        return {centroids_.data() + j * dimension_, dimension_};
    }
    std::span<const std::uint8_t> active() const noexcept { return active_; }
    std::span<const float> centroids() const noexcept { return centroids_; }

    void logits(std::span<const float> x, std::span<double> out) const;
    CentroidModel without_class(std::size_t j) const;

    friend bool operator==(const CentroidModel&, const CentroidModel&) = default;

  private:
    std::size_t dimension_ = 0;
    std::vector<float> centroids_;
    std::vector<std::uint8_t> active_;
};

/// ReLU hidden layer, linear output, softmax on top. Inputs are standardized
/// per feature with statistics captured at training time.
class MlpModel {
  public:
    MlpModel() = default;
    MlpModel(std::size_t dimension, std::size_t hidden, std::size_t n_classes);

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t hidden() const noexcept { return hidden_; }
    std::size_t n_classes() const noexcept { return n_classes_; }

    // Row-major parameter blocks.
    std::vector<double>& input_mean() noexcept { return input_mean_; }
    std::vector<double>& input_scale() noexcept { return input_scale_; }
    std::vector<double>& w1() noexcept { return w1_; }  // hidden x dimension
    std::vector<double>& b1() noexcept { return b1_; }
    std::vector<double>& w2() noexcept { return w2_; }  // n_classes x hidden
    std::vector<double>& b2() noexcept { return b2_; }
    const std::vector<double>& input_mean() const noexcept { return input_mean_; }
    const std::vector<double>& input_scale() const noexcept { return input_scale_; }
    const std::vector<double>& w1() const noexcept { return w1_; }
    const std::vector<double>& b1() const noexcept { return b1_; }
    const std::vector<double>& w2() const noexcept { return w2_; }
    const std::vector<double>& b2() const noexcept { return b2_; }

    void logits(std::span<const float> x, std::span<double> out) const;

    /// Trainable parameters flattened in the order w1, b1, w2, b2.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);
    std::size_t parameter_count() const noexcept;

    /// Mean softmax cross-entropy over `rows` of `objects`; fills `gradient`
    /// (same layout as parameters()) when non-null.
    double loss_and_gradient(const Dataset& objects, std::span<const std::size_t> rows,
                             std::span<const std::uint32_t> labels,
                             std::vector<double>* gradient) const;

    MlpModel without_class(std::size_t j) const;

    friend bool operator==(const MlpModel&, const MlpModel&) = default;

  private:
    void standardize(std::span<const float> x, std::span<double> out) const;

    std::size_t dimension_ = 0;
    std::size_t hidden_ = 0;
    std::size_t n_classes_ = 0;
    std::vector<double> input_mean_;
    std::vector<double> input_scale_;
    std::vector<double> w1_;
    std::vector<double> b1_;
    std::vector<double> w2_;
    std::vector<double> b2_;
};

class ClassifierModel {
  public:
    ClassifierModel() = default;
    explicit ClassifierModel(CentroidModel m) : impl_(std::move(m)) {}
    explicit ClassifierModel(MlpModel m) : impl_(std::move(m)) {}

    ModelKind kind() const noexcept;
    std::size_t n_classes() const noexcept;
    std::size_t dimension() const noexcept;

    const CentroidModel* as_centroid() const noexcept { return std::get_if<CentroidModel>(&impl_); }
    const MlpModel* as_mlp() const noexcept { return std::get_if<MlpModel>(&impl_); }
    MlpModel* as_mlp() noexcept { return std::get_if<MlpModel>(&impl_); }

    /// Raw scores; throws InvalidInput on a dimension mismatch.
    std::vector<double> logits(std::span<const float> x) const;
    void logits(std::span<const float> x, std::span<double> out) const;
    /// Probabilities (length n_classes, nonnegative, unit sum).
    std::vector<double> predict_proba(std::span<const float> x) const;
    /// Natural-log probabilities; -inf for impossible classes.
    void log_proba(std::span<const float> x, std::span<double> out) const;
    /// Argmax class, ties to the lower index.
    std::size_t predict(std::span<const float> x) const;

    /// Cost of one prediction in distance-computation equivalents.
    std::uint64_t prediction_cost() const noexcept;

    friend bool operator==(const ClassifierModel&, const ClassifierModel&) = default;

  private:
    std::variant<CentroidModel, MlpModel> impl_;
};

struct TrainResult {
    ClassifierModel model;
    /// Predicted class of every training object.
    std::vector<std::uint32_t> positions;
    /// Training plus placement work, in distance-computation equivalents.
    std::uint64_t cost = 0;
};

/// Fits a classifier on (objects, labels). Throws InvalidInput on an empty
/// object set, a label outside [0, n_classes) or a size mismatch.
TrainResult train_classifier(const Dataset& objects, std::span<const std::uint32_t> labels,
                             std::size_t n_classes, const ModelConfig& config,
                             std::uint64_t seed);

struct RemovalResult {
    ClassifierModel model;
    /// Old class index -> new index; -1 for the removed class.
    std::vector<std::int64_t> remap;
};

/// Drops one output class. Surviving logits are untouched. Throws
/// InvalidInput if the model has a single class or the index is invalid.
RemovalResult remove_output(const ClassifierModel& model, std::size_t class_index);

/// Numerically stable softmax.
void softmax(std::span<const double> logits, std::span<double> out);
void log_softmax(std::span<const double> logits, std::span<double> out);

}  // namespace dlmi
