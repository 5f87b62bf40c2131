#include "hsn/chebnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "hsn/random.hpp"

namespace hsn {

namespace {

constexpr Eigen::Index kDenseBasisLimit = 256;  // dense T_k cache below this n
constexpr Eigen::Index kChunk = 512;            // samples per GEMM chunk

std::string activationName(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

Activation activationFromName(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "identity") return Activation::identity;
    throw ConfigError("unknown activation '" + s + "'");
}

// ---------------------------------------------------------------------------
// Basis handling. For small graphs every layer multiplies against an owned
// slice of the dense concatenated basis [T_0 | ... | T_K]; larger graphs go
// through the sparse three-term recursion per sample.

struct LayerBasis {
    bool dense = false;
    Eigen::MatrixXd t_sel;  // n x r*(K+1); r = support size for the input layer
};

struct Engine {
    const SpectralOperator* op = nullptr;
    Eigen::Index n = 0;
    std::vector<int> support;               // input rows carrying signal
    std::vector<LayerBasis> basis;          // per layer
    bool dense = false;

    Eigen::Index inputRows() const { return Eigen::Index(support.size()); }
};

Engine buildEngine(const ChebNetModel& model, const std::vector<int>* support_rows) {
    Engine e;
    e.op = &model.spectral;
    e.n = model.spectral.n;
    if (support_rows) {
        e.support = *support_rows;
        std::sort(e.support.begin(), e.support.end());
    } else {
        e.support.resize(size_t(e.n));
        for (Eigen::Index i = 0; i < e.n; ++i) e.support[size_t(i)] = int(i);
    }
    e.dense = e.n <= kDenseBasisLimit;
    if (!e.dense) {
        e.basis.resize(model.layers.size());
        return e;
    }

    int max_order = 0;
    for (const auto& layer : model.layers) max_order = std::max(max_order, layer.order);
    const Eigen::MatrixXd cat = chebBasisCat(model.spectral, max_order);

    e.basis.resize(model.layers.size());
    for (size_t l = 0; l < model.layers.size(); ++l) {
        const int order = model.layers[l].order;
        const Eigen::Index r = l == 0 ? e.inputRows() : e.n;
        LayerBasis lb;
        lb.dense = true;
        lb.t_sel.resize(e.n, r * (order + 1));
        for (int k = 0; k <= order; ++k) {
            if (l == 0) {
                for (Eigen::Index c = 0; c < r; ++c)
                    lb.t_sel.col(k * r + c) = cat.col(Eigen::Index(k) * e.n + e.support[size_t(c)]);
            } else {
                lb.t_sel.middleCols(k * r, r) = cat.middleCols(Eigen::Index(k) * e.n, e.n);
            }
        }
        e.basis[l] = std::move(lb);
    }
    return e;
}

// Z_t = sum_k T_k H_t Theta_k + bias for every sample in a stacked batch.
// V is (B*r x f_in); the result is (B*n x f_out), pre-activation.
void layerForward(const Engine& eng, size_t layer_idx, const ChebLayer& layer,
                  const Eigen::MatrixXd& v, Eigen::Index batch, Eigen::MatrixXd& z) {
    const Eigen::Index n = eng.n;
    const Eigen::Index r = v.rows() / batch;
    const int order = layer.order;
    z.resize(batch * n, layer.f_out);

    if (eng.dense) {
        const Eigen::MatrixXd m = v * layer.theta_cat;  // (B*r) x (K+1)*f_out
        Eigen::MatrixXd s(r * (order + 1), layer.f_out);
        const Eigen::MatrixXd& t_sel = eng.basis[layer_idx].t_sel;
        for (Eigen::Index t = 0; t < batch; ++t) {
            for (int k = 0; k <= order; ++k)
                s.middleRows(Eigen::Index(k) * r, r) =
                    m.block(t * r, Eigen::Index(k) * layer.f_out, r, layer.f_out);
            z.middleRows(t * n, n).noalias() = t_sel * s;
        }
    } else {
        for (Eigen::Index t = 0; t < batch; ++t) {
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, layer.f_in);
            for (Eigen::Index c = 0; c < r; ++c)
                h.row(layer_idx == 0 ? eng.support[size_t(c)] : c) = v.row(t * r + c);
            const auto terms = chebApply(*eng.op, order, h);
            auto zt = z.middleRows(t * n, n);
            zt.setZero();
            for (int k = 0; k <= order; ++k)
                zt.noalias() += terms[size_t(k)] * layer.theta(k);
        }
    }
    z.rowwise() += layer.bias.transpose();
}

// Gradients for one layer given dL/dZ (pre-activation). Returns dL/dV when
// requested (not needed for the input layer).
void layerBackward(const Engine& eng, size_t layer_idx, const ChebLayer& layer,
                   const Eigen::MatrixXd& v, const Eigen::MatrixXd& dz, Eigen::Index batch,
                   Eigen::MatrixXd& dtheta_cat, Eigen::VectorXd& dbias, Eigen::MatrixXd* dv) {
    const Eigen::Index n = eng.n;
    const Eigen::Index r = v.rows() / batch;
    const int order = layer.order;

    dbias += dz.colwise().sum().transpose();

    if (eng.dense) {
        const Eigen::MatrixXd& t_sel = eng.basis[layer_idx].t_sel;
        Eigen::MatrixXd dm(batch * r, (order + 1) * layer.f_out);
        Eigen::MatrixXd ds(r * (order + 1), layer.f_out);
        for (Eigen::Index t = 0; t < batch; ++t) {
            ds.noalias() = t_sel.transpose() * dz.middleRows(t * n, n);
            for (int k = 0; k <= order; ++k)
                dm.block(t * r, Eigen::Index(k) * layer.f_out, r, layer.f_out) =
                    ds.middleRows(Eigen::Index(k) * r, r);
        }
        dtheta_cat.noalias() += v.transpose() * dm;
        if (dv) dv->noalias() = dm * layer.theta_cat.transpose();
    } else {
        for (Eigen::Index t = 0; t < batch; ++t) {
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, layer.f_in);
            for (Eigen::Index c = 0; c < r; ++c)
                h.row(layer_idx == 0 ? eng.support[size_t(c)] : c) = v.row(t * r + c);
            const auto h_terms = chebApply(*eng.op, order, h);
            const auto dz_terms = chebApply(*eng.op, order, dz.middleRows(t * n, n));
            if (dv) dv->middleRows(t * r, r).setZero();
            for (int k = 0; k <= order; ++k) {
                dtheta_cat.middleCols(Eigen::Index(k) * layer.f_out, layer.f_out).noalias() +=
                    h_terms[size_t(k)].transpose() * dz.middleRows(t * n, n);
                if (dv)
                    dv->middleRows(t * r, r).noalias() +=
                        dz_terms[size_t(k)] * layer.theta(k).transpose();
            }
        }
    }
}

void applyActivation(Activation act, Eigen::MatrixXd& z) {
    if (act == Activation::relu) z = z.cwiseMax(0.0);
}

// ---------------------------------------------------------------------------
// Batch assembly. Inputs are stored compact on the support rows; pressure
// channels are z-scored and masked, the trailing channel is the mask itself.

struct BatchData {
    Eigen::MatrixXd inputs;   // (B * support) x channels
    Eigen::VectorXd targets;  // B * n, normalized
    Eigen::Index count = 0;
};

double normalize(double x, const Normalization& nz) { return (x - nz.mean) / nz.std_dev; }

BatchData buildReconBatch(const PressureDataset& ds, const std::vector<int>& support,
                          const Normalization& nz, Eigen::Index begin, Eigen::Index end) {
    const Eigen::Index n = ds.pressures.cols();
    const auto s = Eigen::Index(support.size());
    BatchData batch;
    batch.count = end - begin;
    batch.inputs.resize(batch.count * s, 2);
    batch.targets.resize(batch.count * n);
    for (Eigen::Index t = 0; t < batch.count; ++t) {
        for (Eigen::Index c = 0; c < s; ++c) {
            batch.inputs(t * s + c, 0) = normalize(ds.pressures(begin + t, support[size_t(c)]), nz);
            batch.inputs(t * s + c, 1) = 1.0;
        }
        for (Eigen::Index i = 0; i < n; ++i)
            batch.targets[t * n + i] = normalize(ds.pressures(begin + t, i), nz);
    }
    return batch;
}

BatchData buildPredictorBatch(const PressureDataset& ds, const std::vector<int>& support,
                              const Normalization& nz, int window, Eigen::Index begin,
                              Eigen::Index end) {
    const Eigen::Index n = ds.pressures.cols();
    const auto s = Eigen::Index(support.size());
    const Eigen::Index w = window;
    BatchData batch;
    batch.count = (end - begin) - w;  // windows fully inside [begin, end), target one ahead
    if (batch.count < 1)
        throw WindowTooLong("window " + std::to_string(window) + " leaves no samples in a split of " +
                            std::to_string(end - begin));
    batch.inputs.resize(batch.count * s, w + 1);
    batch.targets.resize(batch.count * n);
    for (Eigen::Index idx = 0; idx < batch.count; ++idx) {
        const Eigen::Index t = begin + w - 1 + idx;  // window [t-w+1, t], target t+1
        for (Eigen::Index c = 0; c < s; ++c) {
            for (Eigen::Index j = 0; j < w; ++j)
                batch.inputs(idx * s + c, j) =
                    normalize(ds.pressures(t - w + 1 + j, support[size_t(c)]), nz);
            batch.inputs(idx * s + c, w) = 1.0;
        }
        for (Eigen::Index i = 0; i < n; ++i)
            batch.targets[idx * n + i] = normalize(ds.pressures(t + 1, i), nz);
    }
    return batch;
}

// Forward over a chunked batch; returns mean squared-norm loss. When grads is
// set, also accumulates analytic gradients over the whole batch.
double runBatch(const ChebNetModel& model, const Engine& eng, const BatchData& batch,
                Gradients* grads, Eigen::VectorXd* outputs) {
    const Eigen::Index n = eng.n;
    const Eigen::Index s = eng.inputRows();
    const size_t layer_count = model.layers.size();

    if (grads) {
        grads->theta_cat.resize(layer_count);
        grads->bias.resize(layer_count);
        for (size_t l = 0; l < layer_count; ++l) {
            grads->theta_cat[l] = Eigen::MatrixXd::Zero(model.layers[l].theta_cat.rows(),
                                                        model.layers[l].theta_cat.cols());
            grads->bias[l] = Eigen::VectorXd::Zero(model.layers[l].f_out);
        }
    }
    if (outputs) outputs->resize(batch.count * n);

    double loss_sum = 0.0;
    std::vector<Eigen::MatrixXd> acts(layer_count + 1);
    for (Eigen::Index chunk_begin = 0; chunk_begin < batch.count; chunk_begin += kChunk) {
        const Eigen::Index chunk = std::min(kChunk, batch.count - chunk_begin);

        acts[0] = batch.inputs.middleRows(chunk_begin * s, chunk * s);
        for (size_t l = 0; l < layer_count; ++l) {
            layerForward(eng, l, model.layers[l], acts[l], chunk, acts[l + 1]);
            applyActivation(model.layers[l].activation, acts[l + 1]);
        }

        const auto& out = acts[layer_count];
        Eigen::VectorXd diff =
            out.col(0) - batch.targets.segment(chunk_begin * n, chunk * n);
        loss_sum += diff.squaredNorm();
        if (outputs) outputs->segment(chunk_begin * n, chunk * n) = out.col(0);

        if (!grads) continue;

        Eigen::MatrixXd dz = (2.0 / double(batch.count)) * diff;
        for (size_t li = layer_count; li-- > 0;) {
            const ChebLayer& layer = model.layers[li];
            if (layer.activation == Activation::relu)
                dz = dz.cwiseProduct((acts[li + 1].array() > 0.0).cast<double>().matrix());
            Eigen::MatrixXd dv;
            layerBackward(eng, li, layer, acts[li], dz, chunk, grads->theta_cat[li],
                          grads->bias[li], li > 0 ? &dv : nullptr);
            dz = std::move(dv);
        }
    }
    return loss_sum / double(batch.count);
}

// ---------------------------------------------------------------------------
// Parameters and optimization.

ChebNetModel initModel(ModelRole role, int window, const Architecture& arch,
                       const SpectralOperator& spectral, std::uint64_t seed) {
    if (arch.orders.empty()) throw ConfigError("architecture needs at least one layer");
    if (arch.hidden_widths.size() + 1 != arch.orders.size())
        throw ConfigError("architecture needs one hidden width per layer transition");
    for (int k : arch.orders)
        if (k < 0) throw ConfigError("Chebyshev orders must be >= 0");
    for (int f : arch.hidden_widths)
        if (f < 1) throw ConfigError("channel widths must be >= 1");

    ChebNetModel model;
    model.role = role;
    model.window = window;
    model.spectral = spectral;

    std::vector<int> widths;
    widths.push_back(model.inputChannels());
    widths.insert(widths.end(), arch.hidden_widths.begin(), arch.hidden_widths.end());
    widths.push_back(1);

    std::mt19937_64 rng(seed);
    for (size_t l = 0; l < arch.orders.size(); ++l) {
        ChebLayer layer;
        layer.order = arch.orders[l];
        layer.f_in = widths[l];
        layer.f_out = widths[l + 1];
        layer.activation = l + 1 == arch.orders.size() ? Activation::identity : arch.activation;
        layer.theta_cat.resize(layer.f_in, (layer.order + 1) * layer.f_out);
        const double bound = std::sqrt(6.0 / double(layer.f_in + layer.f_out));
        for (int k = 0; k <= layer.order; ++k)
            for (int r = 0; r < layer.f_in; ++r)
                for (int c = 0; c < layer.f_out; ++c)
                    layer.theta_cat(r, k * layer.f_out + c) = uniformIn(rng, -bound, bound);
        layer.bias = Eigen::VectorXd::Zero(layer.f_out);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

struct AdamState {
    std::vector<Eigen::MatrixXd> m_theta, v_theta;
    std::vector<Eigen::VectorXd> m_bias, v_bias;
    long step = 0;

    explicit AdamState(const ChebNetModel& model) {
        for (const auto& layer : model.layers) {
            m_theta.push_back(Eigen::MatrixXd::Zero(layer.theta_cat.rows(), layer.theta_cat.cols()));
            v_theta.push_back(Eigen::MatrixXd::Zero(layer.theta_cat.rows(), layer.theta_cat.cols()));
            m_bias.push_back(Eigen::VectorXd::Zero(layer.f_out));
            v_bias.push_back(Eigen::VectorXd::Zero(layer.f_out));
        }
    }

    void update(ChebNetModel& model, const Gradients& grads, const TrainingConfig& cfg) {
        ++step;
        const double bc1 = 1.0 - std::pow(cfg.beta1, double(step));
        const double bc2 = 1.0 - std::pow(cfg.beta2, double(step));
        for (size_t l = 0; l < model.layers.size(); ++l) {
            auto& layer = model.layers[l];
            m_theta[l] = cfg.beta1 * m_theta[l] + (1.0 - cfg.beta1) * grads.theta_cat[l];
            v_theta[l] =
                cfg.beta2 * v_theta[l] + (1.0 - cfg.beta2) * grads.theta_cat[l].cwiseAbs2();
            layer.theta_cat.array() -= cfg.learning_rate * (m_theta[l].array() / bc1) /
                                       ((v_theta[l].array() / bc2).sqrt() + cfg.adam_epsilon);
            m_bias[l] = cfg.beta1 * m_bias[l] + (1.0 - cfg.beta1) * grads.bias[l];
            v_bias[l] = cfg.beta2 * v_bias[l] + (1.0 - cfg.beta2) * grads.bias[l].cwiseAbs2();
            layer.bias.array() -= cfg.learning_rate * (m_bias[l].array() / bc1) /
                                  ((v_bias[l].array() / bc2).sqrt() + cfg.adam_epsilon);
        }
    }
};

Normalization fitNormalization(const PressureDataset& ds, Eigen::Index begin, Eigen::Index end) {
    const auto block = ds.pressures.middleRows(begin, end - begin);
    Normalization nz;
    nz.mean = block.mean();
    const double var = (block.array() - nz.mean).square().mean();
    nz.std_dev = std::sqrt(var);
    if (!(nz.std_dev > 1e-12)) nz.std_dev = 1.0;  // degenerate constant dataset
    return nz;
}

std::vector<int> supportOf(const SensorPlacement& placement) {
    std::vector<int> support = placement.sensors;
    std::sort(support.begin(), support.end());
    return support;
}

void validateTrainingInputs(const PressureDataset& ds, const SensorPlacement& placement,
                            const SpectralOperator& spectral, const DataSplit& split) {
    const Eigen::Index n = ds.pressures.cols();
    if (placement.mask.size() != n)
        throw DimensionMismatch("placement mask does not match dataset width");
    if (spectral.n != n) throw DimensionMismatch("spectral operator does not match dataset width");
    if (split.train_begin < 0 || split.train_end > ds.sampleCount() ||
        split.train_begin >= split.train_end)
        throw ConfigError("invalid training split");
    if (split.val_begin < 0 || split.val_end > ds.sampleCount() || split.val_begin >= split.val_end)
        throw ConfigError("invalid validation split");
}

ChebNetModel trainImpl(ModelRole role, int window, const PressureDataset& ds,
                       const SensorPlacement& placement, const SpectralOperator& spectral,
                       const Architecture& arch, const DataSplit& split, const TrainingConfig& cfg,
                       TrainingRun* run_out) {
    validateTrainingInputs(ds, placement, spectral, split);
    if (cfg.epochs < 1) throw ConfigError("epoch budget must be >= 1");

    const Normalization nz = fitNormalization(ds, split.train_begin, split.train_end);
    ChebNetModel model = initModel(role, window, arch, spectral, cfg.seed);
    model.normalization = nz;

    const std::vector<int> support = supportOf(placement);
    const Engine eng = buildEngine(model, &support);

    const BatchData train =
        role == ModelRole::reconstructor
            ? buildReconBatch(ds, support, nz, split.train_begin, split.train_end)
            : buildPredictorBatch(ds, support, nz, window, split.train_begin, split.train_end);
    const BatchData val =
        role == ModelRole::reconstructor
            ? buildReconBatch(ds, support, nz, split.val_begin, split.val_end)
            : buildPredictorBatch(ds, support, nz, window, split.val_begin, split.val_end);

    TrainingRun run;
    run.config = cfg;
    AdamState adam(model);
    std::vector<ChebLayer> best_layers = model.layers;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Gradients grads;
        const double train_loss = runBatch(model, eng, train, &grads, nullptr);
        adam.update(model, grads, cfg);
        const double val_loss = runBatch(model, eng, val, nullptr, nullptr);
        run.train_loss.push_back(train_loss);
        run.val_loss.push_back(val_loss);
        if (!std::isfinite(val_loss) || !std::isfinite(train_loss))
            throw Divergence("training diverged at epoch " + std::to_string(epoch));
        if (val_loss < best_val) {
            best_val = val_loss;
            best_epoch = epoch;
            best_layers = model.layers;
        }
    }
    model.layers = std::move(best_layers);
    run.best_epoch = best_epoch;
    run.best_val_loss = best_val;
    if (run_out) *run_out = std::move(run);
    return model;
}

}  // namespace

// ---------------------------------------------------------------------------

Eigen::VectorXd maskApply(const Eigen::VectorXd& x, const Eigen::VectorXd& mask) {
    if (x.size() != mask.size())
        throw DimensionMismatch("mask length " + std::to_string(mask.size()) +
                                " does not match signal length " + std::to_string(x.size()));
    return x.cwiseProduct(mask);
}

Eigen::MatrixXd reconstructorInput(const Eigen::VectorXd& pressures, const Eigen::VectorXd& mask) {
    Eigen::MatrixXd input(pressures.size(), 2);
    input.col(0) = maskApply(pressures, mask);
    input.col(1) = mask;
    return input;
}

Eigen::MatrixXd predictorInput(const Eigen::Ref<const Eigen::MatrixXd>& window_rows,
                               const Eigen::VectorXd& mask) {
    const Eigen::Index w = window_rows.rows();
    const Eigen::Index n = window_rows.cols();
    if (mask.size() != n) throw DimensionMismatch("mask length does not match snapshot width");
    Eigen::MatrixXd input(n, w + 1);
    for (Eigen::Index j = 0; j < w; ++j)
        input.col(j) = window_rows.row(j).transpose().cwiseProduct(mask);
    input.col(w) = mask;
    return input;
}

namespace {

// Normalized full-row input: pressure channels z-scored then re-masked by the
// trailing mask channel; physical zeros at unsensed rows stay zeros.
Eigen::MatrixXd normalizeInput(const ChebNetModel& model,
                               const Eigen::Ref<const Eigen::MatrixXd>& input) {
    if (input.cols() != model.inputChannels())
        throw DimensionMismatch("expected " + std::to_string(model.inputChannels()) +
                                " input channels, got " + std::to_string(input.cols()));
    if (input.rows() != model.spectral.n)
        throw DimensionMismatch("input has " + std::to_string(input.rows()) +
                                " rows, graph has " + std::to_string(model.spectral.n));
    Eigen::MatrixXd h = input;
    const Eigen::VectorXd mask = input.col(input.cols() - 1);
    for (Eigen::Index c = 0; c + 1 < h.cols(); ++c)
        h.col(c) = mask.cwiseProduct(
            (h.col(c).array() - model.normalization.mean).matrix() / model.normalization.std_dev);
    return h;
}

Eigen::VectorXd forwardNormalized(const ChebNetModel& model, const Eigen::MatrixXd& h0) {
    const Engine eng = buildEngine(model, nullptr);
    Eigen::MatrixXd act = h0, z;
    for (size_t l = 0; l < model.layers.size(); ++l) {
        layerForward(eng, l, model.layers[l], act, 1, z);
        applyActivation(model.layers[l].activation, z);
        act = std::move(z);
    }
    return act.col(0);
}

}  // namespace

Eigen::VectorXd forward(const ChebNetModel& model,
                        const Eigen::Ref<const Eigen::MatrixXd>& input) {
    const Eigen::VectorXd out_norm = forwardNormalized(model, normalizeInput(model, input));
    if (!out_norm.allFinite()) throw NonFiniteActivation("forward pass produced non-finite values");
    return (out_norm.array() * model.normalization.std_dev + model.normalization.mean).matrix();
}

double lossAndGradients(const ChebNetModel& model, const Eigen::Ref<const Eigen::MatrixXd>& input,
                        const Eigen::VectorXd& target_physical, Gradients* grads) {
    if (target_physical.size() != model.spectral.n)
        throw DimensionMismatch("target length does not match graph size");
    const Engine eng = buildEngine(model, nullptr);

    BatchData batch;
    batch.count = 1;
    batch.inputs = normalizeInput(model, input);
    batch.targets = ((target_physical.array() - model.normalization.mean) /
                     model.normalization.std_dev)
                        .matrix();
    return runBatch(model, eng, batch, grads, nullptr);
}

ChebNetModel trainReconstructor(const PressureDataset& dataset, const SensorPlacement& placement,
                                const SpectralOperator& spectral, const Architecture& arch,
                                const DataSplit& split, const TrainingConfig& cfg,
                                TrainingRun* run) {
    return trainImpl(ModelRole::reconstructor, 0, dataset, placement, spectral, arch, split, cfg,
                     run);
}

ChebNetModel trainPredictor(const PressureDataset& dataset, const SensorPlacement& placement,
                            const SpectralOperator& spectral, const Architecture& arch, int window,
                            const DataSplit& split, const TrainingConfig& cfg, TrainingRun* run) {
    if (window < 1) throw ConfigError("predictor window must be >= 1");
    if (Eigen::Index(window) + 1 > dataset.sampleCount())
        throw WindowTooLong("window exceeds dataset length");
    return trainImpl(ModelRole::predictor, window, dataset, placement, spectral, arch, split, cfg,
                     run);
}

MseReport evaluateMse(const ChebNetModel& model, const PressureDataset& dataset,
                      const SensorPlacement& placement, Eigen::Index begin, Eigen::Index end) {
    const std::vector<int> support = supportOf(placement);
    const Engine eng = buildEngine(model, &support);
    const BatchData batch =
        model.role == ModelRole::reconstructor
            ? buildReconBatch(dataset, support, model.normalization, begin, end)
            : buildPredictorBatch(dataset, support, model.normalization, model.window, begin, end);
    MseReport report;
    report.normalized = runBatch(model, eng, batch, nullptr, nullptr);
    report.physical = report.normalized * model.normalization.std_dev * model.normalization.std_dev;
    report.samples = batch.count;
    return report;
}

Eigen::MatrixXd modelOutputs(const ChebNetModel& model, const PressureDataset& dataset,
                             const SensorPlacement& placement, Eigen::Index begin,
                             Eigen::Index end) {
    const std::vector<int> support = supportOf(placement);
    const Engine eng = buildEngine(model, &support);
    const Eigen::Index n = dataset.pressures.cols();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(end - begin, n);

    Eigen::VectorXd flat;
    if (model.role == ModelRole::reconstructor) {
        const BatchData batch = buildReconBatch(dataset, support, model.normalization, begin, end);
        runBatch(model, eng, batch, nullptr, &flat);
        for (Eigen::Index t = 0; t < batch.count; ++t)
            out.row(t) = flat.segment(t * n, n).transpose();
    } else {
        const BatchData batch =
            buildPredictorBatch(dataset, support, model.normalization, model.window, begin, end);
        runBatch(model, eng, batch, nullptr, &flat);
        // Prediction targets t+1: sample idx predicts dataset row begin+window+idx.
        for (Eigen::Index idx = 0; idx < batch.count; ++idx)
            out.row(model.window + idx) = flat.segment(idx * n, n).transpose();
    }
    out = (out.array() * model.normalization.std_dev + model.normalization.mean).matrix();
    if (model.role == ModelRole::predictor && model.window > 0)
        out.topRows(model.window).setZero();  // rows without a full window are undefined
    return out;
}

nlohmann::json checkpointToJson(const ChebNetModel& model) {
    nlohmann::json doc;
    doc["role"] = model.role == ModelRole::reconstructor ? "reconstructor" : "predictor";
    doc["w"] = model.window;
    nlohmann::json arch;
    arch["K"] = nlohmann::json::array();
    arch["F"] = nlohmann::json::array();
    for (const auto& layer : model.layers) arch["K"].push_back(layer.order);
    for (size_t l = 0; l + 1 < model.layers.size(); ++l) arch["F"].push_back(model.layers[l].f_out);
    arch["activation"] = model.layers.empty()
                             ? "relu"
                             : activationName(model.layers.front().activation);
    doc["arch"] = arch;
    doc["normalization"] = {{"mean", model.normalization.mean},
                            {"std", model.normalization.std_dev}};
    doc["layers"] = nlohmann::json::array();
    for (const auto& layer : model.layers) {
        nlohmann::json thetas = nlohmann::json::array();
        for (int k = 0; k <= layer.order; ++k) {
            nlohmann::json mat = nlohmann::json::array();
            const Eigen::MatrixXd th = layer.theta(k);
            for (Eigen::Index r = 0; r < th.rows(); ++r) {
                nlohmann::json row = nlohmann::json::array();
                for (Eigen::Index c = 0; c < th.cols(); ++c) row.push_back(th(r, c));
                mat.push_back(std::move(row));
            }
            thetas.push_back(std::move(mat));
        }
        nlohmann::json bias = nlohmann::json::array();
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) bias.push_back(layer.bias[i]);
        doc["layers"].push_back({{"Theta", std::move(thetas)}, {"bias", std::move(bias)}});
    }
    return doc;
}

ChebNetModel checkpointFromJson(const nlohmann::json& doc, const SpectralOperator& spectral) {
    ChebNetModel model;
    const std::string role = doc.at("role").get<std::string>();
    if (role == "reconstructor")
        model.role = ModelRole::reconstructor;
    else if (role == "predictor")
        model.role = ModelRole::predictor;
    else
        throw ConfigError("unknown checkpoint role '" + role + "'");
    model.window = doc.at("w").get<int>();
    model.normalization.mean = doc.at("normalization").at("mean").get<double>();
    model.normalization.std_dev = doc.at("normalization").at("std").get<double>();
    model.spectral = spectral;

    const Activation hidden_act = activationFromName(doc.at("arch").at("activation"));
    const auto& layers = doc.at("layers");
    for (size_t l = 0; l < layers.size(); ++l) {
        const auto& thetas = layers[l].at("Theta");
        const auto& bias = layers[l].at("bias");
        ChebLayer layer;
        layer.order = int(thetas.size()) - 1;
        if (layer.order < 0) throw ConfigError("checkpoint layer has no Theta matrices");
        layer.f_in = int(thetas[0].size());
        layer.f_out = int(bias.size());
        layer.activation = l + 1 == layers.size() ? Activation::identity : hidden_act;
        layer.theta_cat.resize(layer.f_in, (layer.order + 1) * layer.f_out);
        for (int k = 0; k <= layer.order; ++k)
            for (int r = 0; r < layer.f_in; ++r)
                for (int c = 0; c < layer.f_out; ++c)
                    layer.theta_cat(r, k * layer.f_out + c) = thetas[size_t(k)][size_t(r)][size_t(c)];
        layer.bias.resize(layer.f_out);
        for (int i = 0; i < layer.f_out; ++i) layer.bias[i] = bias[size_t(i)];
        model.layers.push_back(std::move(layer));
    }
    return model;
}

void saveCheckpoint(const ChebNetModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint '" + path + "'");
    out << checkpointToJson(model).dump(2) << "\n";
}

ChebNetModel loadCheckpoint(const std::string& path, const SpectralOperator& spectral) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("checkpoint '" + path + "' is not valid JSON: " + e.what());
    }
    return checkpointFromJson(doc, spectral);
}

}  // namespace hsn
