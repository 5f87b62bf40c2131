#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsn/graph.hpp"
#include "hsn/hydraulics.hpp"
#include "hsn/placement.hpp"

namespace hsn {

enum class Activation { relu, identity };
enum class ModelRole { reconstructor, predictor };

/// One spectral convolution: Z = sum_k T_k(L_hat) H Theta_k + bias, applied
/// column-block-wise through theta_cat = [Theta_0 | ... | Theta_K].
struct ChebLayer {
    int order = 0;
    int f_in = 0;
    int f_out = 0;
    Eigen::MatrixXd theta_cat;  // f_in x (order+1)*f_out
    Eigen::VectorXd bias;       // f_out
    Activation activation = Activation::relu;

    Eigen::MatrixXd theta(int k) const { return theta_cat.middleCols(k * f_out, f_out); }
};

struct Architecture {
    std::vector<int> orders;         // K per layer
    std::vector<int> hidden_widths;  // F per hidden transition; output width is 1
    Activation activation = Activation::relu;
};

struct Normalization {
    double mean = 0.0;
    double std_dev = 1.0;
};

struct ChebNetModel {
    ModelRole role = ModelRole::reconstructor;
    int window = 0;  // predictor snapshots per input
    std::vector<ChebLayer> layers;
    Normalization normalization;
    SpectralOperator spectral;

    int inputChannels() const { return role == ModelRole::reconstructor ? 2 : window + 1; }
};

struct TrainingConfig {
    int epochs = 500;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
};

/// Sample index ranges into a dataset; [begin, end) half-open.
struct DataSplit {
    Eigen::Index train_begin = 0;
    Eigen::Index train_end = 0;
    Eigen::Index val_begin = 0;
    Eigen::Index val_end = 0;
};

struct TrainingRun {
    TrainingConfig config;
    std::vector<double> train_loss;  // normalized units, one entry per epoch
    std::vector<double> val_loss;
    int best_epoch = -1;
    double best_val_loss = 0.0;
};

/// Hadamard product of a signal with a 0/1 sensor mask.
Eigen::VectorXd maskApply(const Eigen::VectorXd& x, const Eigen::VectorXd& mask);

/// Input block for the static reconstructor: columns [masked pressures, mask].
/// Pressures are physical; normalization happens inside forward().
Eigen::MatrixXd reconstructorInput(const Eigen::VectorXd& pressures, const Eigen::VectorXd& mask);

/// Input block for the one-step predictor: w masked snapshot columns
/// (oldest first) followed by the mask channel. window_rows is w x n.
Eigen::MatrixXd predictorInput(const Eigen::Ref<const Eigen::MatrixXd>& window_rows,
                               const Eigen::VectorXd& mask);

/// Full forward pass: masked z-scoring of the pressure channels, the layer
/// stack, then de-normalization back to pressure units.
Eigen::VectorXd forward(const ChebNetModel& model, const Eigen::Ref<const Eigen::MatrixXd>& input);

struct Gradients {
    std::vector<Eigen::MatrixXd> theta_cat;  // aligned with model.layers
    std::vector<Eigen::VectorXd> bias;
};

/// Squared-error loss ||f(input) - target||^2 in normalized units for one
/// sample, with exact analytic gradients for every Theta_k and bias.
double lossAndGradients(const ChebNetModel& model, const Eigen::Ref<const Eigen::MatrixXd>& input,
                        const Eigen::VectorXd& target_physical, Gradients* grads);

/// Trains the static reconstructor on masked snapshots; returns the
/// best-validation checkpoint.
ChebNetModel trainReconstructor(const PressureDataset& dataset, const SensorPlacement& placement,
                                const SpectralOperator& spectral, const Architecture& arch,
                                const DataSplit& split, const TrainingConfig& cfg,
                                TrainingRun* run = nullptr);

/// Trains the windowed one-step predictor.
ChebNetModel trainPredictor(const PressureDataset& dataset, const SensorPlacement& placement,
                            const SpectralOperator& spectral, const Architecture& arch, int window,
                            const DataSplit& split, const TrainingConfig& cfg,
                            TrainingRun* run = nullptr);

struct MseReport {
    double normalized = 0.0;
    double physical = 0.0;  // normalized * std^2
    Eigen::Index samples = 0;
};

/// Mean of ||f - x||^2 over the sample range (predictor targets are shifted
/// by one step and windows must fit inside the range).
MseReport evaluateMse(const ChebNetModel& model, const PressureDataset& dataset,
                      const SensorPlacement& placement, Eigen::Index begin, Eigen::Index end);

/// Model outputs over [begin, end): reconstruction x_hat_r(t) or one-step
/// prediction x_hat_p(t) (predicted from the window ending at t-1). Rows
/// align with dataset samples; the first valid predictor row is begin+window.
Eigen::MatrixXd modelOutputs(const ChebNetModel& model, const PressureDataset& dataset,
                             const SensorPlacement& placement, Eigen::Index begin,
                             Eigen::Index end);

/// Checkpoint JSON with full double round-trip precision:
/// {role, w, arch:{K, F, activation}, normalization:{mean, std},
///  layers:[{Theta:[[...]], bias:[...]}]}.
nlohmann::json checkpointToJson(const ChebNetModel& model);
ChebNetModel checkpointFromJson(const nlohmann::json& doc, const SpectralOperator& spectral);
void saveCheckpoint(const ChebNetModel& model, const std::string& path);
ChebNetModel loadCheckpoint(const std::string& path, const SpectralOperator& spectral);

}  // namespace hsn
