#include "dlmi/model/classifier.hpp"

#include "dlmi/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace dlmi {

std::string_view to_string(ModelKind kind) {
    return kind == ModelKind::mlp ? "mlp" : "centroid";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "centroid") {
        return ModelKind::centroid;
    }
    if (text == "mlp") {
        return ModelKind::mlp;
    }
    throw InvalidInput("unknown model kind '" + std::string{text} + "'");
}

void softmax(std::span<const double> logits, std::span<double> out) {
    const double top = *std::max_element(logits.begin(), logits.end());
    if (!std::isfinite(top)) {
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
        return;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - top);
        total += out[i];
    }
    for (double& p : out) {
        p /= total;
    }
}

void log_softmax(std::span<const double> logits, std::span<double> out) {
    const double top = *std::max_element(logits.begin(), logits.end());
    if (!std::isfinite(top)) {
        std::fill(out.begin(), out.end(), -std::log(static_cast<double>(out.size())));
        return;
    }
    double total = 0.0;
    for (double z : logits) {
        total += std::exp(z - top);
    }
    const double log_norm = top + std::log(total);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = logits[i] - log_norm;
    }
}

// ---------------------------------------------------------------------------
// CentroidModel

CentroidModel::CentroidModel(std::size_t dimension, std::vector<float> centroids,
                             std::vector<std::uint8_t> active)
    : dimension_(dimension), centroids_(std::move(centroids)), active_(std::move(active)) {
    if (dimension_ == 0 || active_.empty() || centroids_.size() != dimension_ * active_.size()) {
        throw InvalidInput("centroid model shape mismatch");
    }
}

void CentroidModel::logits(std::span<const float> x, std::span<double> out) const {
    const auto& kern = simd::kernels();
    for (std::size_t j = 0; j < n_classes(); ++j) {
        out[j] = active_[j] != 0
                     ? -std::sqrt(kern.l2_squared(x.data(), centroids_.data() + j * dimension_, dimension_))
                     : -std::numeric_limits<double>::infinity();
    }
}

CentroidModel CentroidModel::without_class(std::size_t j) const {
    CentroidModel out = *this;
    const auto begin = out.centroids_.begin() + static_cast<std::ptrdiff_t>(j * dimension_);
    out.centroids_.erase(begin, begin + static_cast<std::ptrdiff_t>(dimension_));
    out.active_.erase(out.active_.begin() + static_cast<std::ptrdiff_t>(j));
    return out;
}

// ---------------------------------------------------------------------------
// MlpModel

MlpModel::MlpModel(std::size_t dimension, std::size_t hidden, std::size_t n_classes)
    : dimension_(dimension)
    , hidden_(hidden)
    , n_classes_(n_classes)
    , input_mean_(dimension, 0.0)
    , input_scale_(dimension, 1.0)
    , w1_(hidden * dimension, 0.0)
    , b1_(hidden, 0.0)
    , w2_(n_classes * hidden, 0.0)
    , b2_(n_classes, 0.0) {
    if (dimension == 0 || hidden == 0 || n_classes == 0) {
        throw InvalidInput("mlp dimensions must be positive");
    }
}

void MlpModel::standardize(std::span<const float> x, std::span<double> out) const {
    for (std::size_t d = 0; d < dimension_; ++d) {
        out[d] = (static_cast<double>(x[d]) - input_mean_[d]) * input_scale_[d];
    }
}

void MlpModel::logits(std::span<const float> x, std::span<double> out) const {
    thread_local std::vector<double> xs;
    thread_local std::vector<double> h;
    xs.resize(dimension_);
    h.resize(hidden_);
    standardize(x, xs);
    const auto& kern = simd::kernels();
    for (std::size_t j = 0; j < hidden_; ++j) {
        const double pre = b1_[j] + kern.dot_f64(w1_.data() + j * dimension_, xs.data(), dimension_);
        h[j] = pre > 0.0 ? pre : 0.0;
    }
    for (std::size_t c = 0; c < n_classes_; ++c) {
        out[c] = b2_[c] + kern.dot_f64(w2_.data() + c * hidden_, h.data(), hidden_);
    }
}

std::size_t MlpModel::parameter_count() const noexcept {
    return w1_.size() + b1_.size() + w2_.size() + b2_.size();
}

std::vector<double> MlpModel::parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto* block : {&w1_, &b1_, &w2_, &b2_}) {
        flat.insert(flat.end(), block->begin(), block->end());
    }
    return flat;
}

void MlpModel::set_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        throw InvalidInput("parameter vector length mismatch");
    }
    std::size_t offset = 0;
    for (auto* block : {&w1_, &b1_, &w2_, &b2_}) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), block->size(), block->begin());
        offset += block->size();
    }
}

namespace {

struct MlpGradient {
    std::vector<double> w1, b1, w2, b2;

    explicit MlpGradient(const MlpModel& m)
        : w1(m.w1().size()), b1(m.b1().size()), w2(m.w2().size()), b2(m.b2().size()) {}

    void zero() {
        for (auto* block : {&w1, &b1, &w2, &b2}) {
            std::fill(block->begin(), block->end(), 0.0);
        }
    }
};

struct MlpScratch {
    std::vector<double> xs, pre, h, z, p, dh;

    explicit MlpScratch(const MlpModel& m)
        : xs(m.dimension()), pre(m.hidden()), h(m.hidden()), z(m.n_classes()), p(m.n_classes()),
          dh(m.hidden()) {}
};

// One sample's cross-entropy; adds its (unscaled) gradient into `grad`.
double accumulate_sample(const MlpModel& m, std::span<const double> xs, std::uint32_t label,
                         MlpGradient* grad, MlpScratch& s) {
    const std::size_t dim = m.dimension();
    const std::size_t hidden = m.hidden();
    const std::size_t classes = m.n_classes();
    const auto& kern = simd::kernels();
    for (std::size_t j = 0; j < hidden; ++j) {
        s.pre[j] = m.b1()[j] + kern.dot_f64(m.w1().data() + j * dim, xs.data(), dim);
        s.h[j] = s.pre[j] > 0.0 ? s.pre[j] : 0.0;
    }
    for (std::size_t c = 0; c < classes; ++c) {
        s.z[c] = m.b2()[c] + kern.dot_f64(m.w2().data() + c * hidden, s.h.data(), hidden);
    }
    log_softmax(s.z, s.p);
    const double loss = -s.p[label];
    if (grad == nullptr) {
        return loss;
    }
    for (double& v : s.p) {
        v = std::exp(v);
    }
    s.p[label] -= 1.0;  // dL/dz

    std::fill(s.dh.begin(), s.dh.end(), 0.0);
    for (std::size_t c = 0; c < classes; ++c) {
        const double dz = s.p[c];
        grad->b2[c] += dz;
        double* gw2 = grad->w2.data() + c * hidden;
        const double* w2 = m.w2().data() + c * hidden;
        for (std::size_t j = 0; j < hidden; ++j) {
            gw2[j] += dz * s.h[j];
            s.dh[j] += w2[j] * dz;
        }
    }
    for (std::size_t j = 0; j < hidden; ++j) {
        if (s.pre[j] <= 0.0) {
            continue;
        }
        const double dpre = s.dh[j];
        grad->b1[j] += dpre;
        double* gw1 = grad->w1.data() + j * dim;
        for (std::size_t d = 0; d < dim; ++d) {
            gw1[d] += dpre * xs[d];
        }
    }
    return loss;
}

void standardize_rows(const MlpModel& m, const Dataset& objects, std::vector<double>& out) {
    const std::size_t dim = m.dimension();
    out.resize(objects.size() * dim);
    for (std::size_t r = 0; r < objects.size(); ++r) {
        auto x = objects.row(r);
        for (std::size_t d = 0; d < dim; ++d) {
            out[r * dim + d] = (static_cast<double>(x[d]) - m.input_mean()[d]) * m.input_scale()[d];
        }
    }
}

}  // namespace

double MlpModel::loss_and_gradient(const Dataset& objects, std::span<const std::size_t> rows,
                                   std::span<const std::uint32_t> labels,
                                   std::vector<double>* gradient) const {
    if (rows.size() != labels.size() || rows.empty()) {
        throw InvalidInput("loss_and_gradient needs one label per row");
    }
    MlpGradient grad(*this);
    MlpScratch scratch(*this);
    double loss = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        standardize(objects.row(rows[i]), scratch.xs);
        loss += accumulate_sample(*this, scratch.xs, labels[i], gradient ? &grad : nullptr, scratch);
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    if (gradient != nullptr) {
        gradient->clear();
        for (const auto* block : {&grad.w1, &grad.b1, &grad.w2, &grad.b2}) {
            for (double g : *block) {
                gradient->push_back(g * inv);
            }
        }
    }
    return loss * inv;
}

MlpModel MlpModel::without_class(std::size_t j) const {
    MlpModel out = *this;
    const auto row = out.w2_.begin() + static_cast<std::ptrdiff_t>(j * hidden_);
    out.w2_.erase(row, row + static_cast<std::ptrdiff_t>(hidden_));
    out.b2_.erase(out.b2_.begin() + static_cast<std::ptrdiff_t>(j));
    --out.n_classes_;
    return out;
}

// ---------------------------------------------------------------------------
// ClassifierModel

ModelKind ClassifierModel::kind() const noexcept {
    return std::holds_alternative<MlpModel>(impl_) ? ModelKind::mlp : ModelKind::centroid;
}

std::size_t ClassifierModel::n_classes() const noexcept {
    return std::visit([](const auto& m) { return m.n_classes(); }, impl_);
}

std::size_t ClassifierModel::dimension() const noexcept {
    return std::visit([](const auto& m) { return m.dimension(); }, impl_);
}

void ClassifierModel::logits(std::span<const float> x, std::span<double> out) const {
    if (x.size() != dimension()) {
        throw InvalidInput(
            "input dimension " + std::to_string(x.size()) + " does not match model dimension " +
            std::to_string(dimension())
        );
    }
    std::visit([&](const auto& m) { m.logits(x, out); }, impl_);
}

std::vector<double> ClassifierModel::logits(std::span<const float> x) const {
    std::vector<double> out(n_classes());
    logits(x, out);
    return out;
}

std::vector<double> ClassifierModel::predict_proba(std::span<const float> x) const {
    std::vector<double> z = logits(x);
    std::vector<double> p(z.size());
    softmax(z, p);
    return p;
}

void ClassifierModel::log_proba(std::span<const float> x, std::span<double> out) const {
    logits(x, out);
    log_softmax(std::span<const double>{out.data(), out.size()}, out);
}

std::size_t ClassifierModel::predict(std::span<const float> x) const {
    thread_local std::vector<double> z;
    z.resize(n_classes());
    logits(x, z);
    return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

std::uint64_t ClassifierModel::prediction_cost() const noexcept {
    if (const auto* mlp = as_mlp()) {
        const std::uint64_t macs = mlp->hidden() * (mlp->dimension() + mlp->n_classes());
        return (macs + mlp->dimension() - 1) / mlp->dimension();
    }
    return n_classes();
}

// ---------------------------------------------------------------------------
// Training

namespace {

void check_training_input(const Dataset& objects, std::span<const std::uint32_t> labels,
                          std::size_t n_classes) {
    if (objects.empty()) {
        throw InvalidInput("cannot train a classifier on an empty object set");
    }
    if (labels.size() != objects.size()) {
        throw InvalidInput("label count does not match object count");
    }
    if (n_classes == 0) {
        throw InvalidInput("n_classes must be positive");
    }
    for (std::uint32_t label : labels) {
        if (label >= n_classes) {
            throw InvalidInput(
                "label " + std::to_string(label) + " outside [0, " + std::to_string(n_classes) + ")"
            );
        }
    }
}

std::pair<CentroidModel, std::uint64_t> train_centroid(const Dataset& objects,
                                                       std::span<const std::uint32_t> labels,
                                                       std::size_t n_classes) {
    const std::size_t dim = objects.dimension();
    std::vector<double> sums(n_classes * dim, 0.0);
    std::vector<std::size_t> counts(n_classes, 0);
    for (std::size_t r = 0; r < objects.size(); ++r) {
        auto x = objects.row(r);
        ++counts[labels[r]];
        double* acc = sums.data() + labels[r] * dim;
        for (std::size_t d = 0; d < dim; ++d) {
            acc[d] += x[d];
        }
    }
    std::vector<float> centroids(n_classes * dim, 0.0F);
    std::vector<std::uint8_t> active(n_classes, 0);
    for (std::size_t j = 0; j < n_classes; ++j) {
        if (counts[j] == 0) {
            continue;
        }
        active[j] = 1;
        const double inv = 1.0 / static_cast<double>(counts[j]);
        for (std::size_t d = 0; d < dim; ++d) {
            centroids[j * dim + d] = static_cast<float>(sums[j * dim + d] * inv);
        }
    }
    return {CentroidModel(dim, std::move(centroids), std::move(active)), objects.size()};
}

std::pair<MlpModel, std::uint64_t> train_mlp(const Dataset& objects,
                                             std::span<const std::uint32_t> labels,
                                             std::size_t n_classes, const MlpParams& params,
                                             std::uint64_t seed) {
    const std::size_t dim = objects.dimension();
    const std::size_t n = objects.size();
    MlpModel m(dim, params.hidden, n_classes);

    for (std::size_t d = 0; d < dim; ++d) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            mean += objects.row(r)[d];
        }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double diff = objects.row(r)[d] - mean;
            var += diff * diff;
        }
        var /= static_cast<double>(n);
        m.input_mean()[d] = mean;
        m.input_scale()[d] = var > 1e-24 ? 1.0 / std::sqrt(var) : 1.0;
    }

    std::mt19937_64 rng(seed);
    auto glorot = [&](std::vector<double>& w, std::size_t fan_in, std::size_t fan_out) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (double& v : w) {
            v = u(rng);
        }
    };
    glorot(m.w1(), dim, params.hidden);
    glorot(m.w2(), params.hidden, n_classes);

    if (n_classes == 1) {
        return {std::move(m), n};
    }

    std::vector<double> xs_all;
    standardize_rows(m, objects, xs_all);

    MlpGradient grad(m);
    MlpGradient velocity(m);
    velocity.zero();
    MlpScratch scratch(m);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t batch = std::max<std::size_t>(1, params.batch_size);

    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            grad.zero();
            for (std::size_t i = start; i < end; ++i) {
                const std::size_t r = order[i];
                accumulate_sample(m, std::span<const double>{xs_all.data() + r * dim, dim}, labels[r],
                                  &grad, scratch);
            }
            const double scale = 1.0 / static_cast<double>(end - start);
            auto step = [&](std::vector<double>& w, std::vector<double>& v, const std::vector<double>& g) {
                for (std::size_t i = 0; i < w.size(); ++i) {
                    v[i] = params.momentum * v[i] - params.learning_rate * g[i] * scale;
                    w[i] += v[i];
                }
            };
            step(m.w1(), velocity.w1, grad.w1);
            step(m.b1(), velocity.b1, grad.b1);
            step(m.w2(), velocity.w2, grad.w2);
            step(m.b2(), velocity.b2, grad.b2);
        }
    }
    // Forward + backward is roughly three forward passes per sample.
    const std::uint64_t macs = params.hidden * (dim + n_classes);
    const std::uint64_t cost = (3 * macs * n * params.epochs + dim - 1) / dim;
    return {std::move(m), cost};
}

}  // namespace

TrainResult train_classifier(const Dataset& objects, std::span<const std::uint32_t> labels,
                             std::size_t n_classes, const ModelConfig& config,
                             std::uint64_t seed) {
    check_training_input(objects, labels, n_classes);
    TrainResult result;
    if (config.kind == ModelKind::mlp) {
        auto [model, cost] = train_mlp(objects, labels, n_classes, config.mlp, seed);
        result.model = ClassifierModel(std::move(model));
        result.cost = cost;
    } else {
        auto [model, cost] = train_centroid(objects, labels, n_classes);
        result.model = ClassifierModel(std::move(model));
        result.cost = cost;
    }
    result.positions.resize(objects.size());
    for (std::size_t r = 0; r < objects.size(); ++r) {
        result.positions[r] = static_cast<std::uint32_t>(result.model.predict(objects.row(r)));
    }
    result.cost += objects.size() * result.model.prediction_cost();
    return result;
}

RemovalResult remove_output(const ClassifierModel& model, std::size_t class_index) {
    const std::size_t classes = model.n_classes();
    if (classes < 2) {
        throw InvalidInput("cannot remove the only output class of a model");
    }
    if (class_index >= classes) {
        throw InvalidInput("class index " + std::to_string(class_index) + " out of range");
    }
    RemovalResult result;
    if (const auto* mlp = model.as_mlp()) {
        result.model = ClassifierModel(mlp->without_class(class_index));
    } else {
        result.model = ClassifierModel(model.as_centroid()->without_class(class_index));
    }
    result.remap.resize(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        result.remap[c] = c < class_index ? static_cast<std::int64_t>(c)
                          : c == class_index ? -1
                                             : static_cast<std::int64_t>(c) - 1;
    }
    return result;
}

}  // namespace dlmi
