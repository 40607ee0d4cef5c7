#pragma once

// Sequential dense/dropout networks with a softmax main head and an optional
// softmax auxiliary head tapped after one hidden dense layer.
//
// The LEFT partition is the full-depth stack ending at the main head; the
// RIGHT partition is the prefix up to the tapped layer ending at the
// auxiliary head. Both are ordinary single-output networks after split().

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "greenevo/data.hpp"
#include "greenevo/genome.hpp"
#include "greenevo/record.hpp"
#include "greenevo/rng.hpp"

namespace greenevo {

template <class Scalar>
struct DenseParams {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Matrix weights; ///< fan_out x fan_in
    Vector bias;
    Activation activation = Activation::relu;

    Eigen::Index fan_in() const { return weights.cols(); }
    Eigen::Index fan_out() const { return weights.rows(); }
};

template <class Scalar>
struct Layer {
    LayerKind kind = LayerKind::dense;
    DenseParams<Scalar> dense; ///< empty for dropout
    double rate = 0.0;         ///< dropout only
};

template <class Scalar>
struct AuxHead {
    std::size_t tap = 0; ///< index into Network::layers of the dense layer feeding the head
    DenseParams<Scalar> head;
};

template <class Scalar>
struct Network {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    int input_dim = 0;
    int class_count = 0;
    std::vector<Layer<Scalar>> layers;
    DenseParams<Scalar> main_head;
    std::optional<AuxHead<Scalar>> aux;

    bool has_aux() const noexcept { return aux.has_value(); }
    int dense_count() const;
    std::size_t parameter_count() const;
};

using NetworkF = Network<float>;
using NetworkD = Network<double>;

template <class Scalar>
struct Outputs {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> main; ///< class_count x batch probabilities
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> aux;  ///< empty without an aux head
};

/// Uniform init in [-s, s], s = sqrt(6 / (fan_in + fan_out)); zero biases.
/// `aux_index` counts dense layers; std::nullopt builds a single-output network.
template <class Scalar>
Network<Scalar> build_network(std::span<const LayerSpec> layers, std::optional<int> aux_index, int input_dim,
                              int class_count, Rng& rng);

template <class Scalar = float>
Network<Scalar> build_network(const PhenotypeSpec& spec, int input_dim, int class_count, Rng& rng)
{
    return build_network<Scalar>(spec.layers, spec.aux_index, input_dim, class_count, rng);
}

/// Inference forward pass (dropout disabled). Input is input_dim x batch.
template <class Scalar>
Outputs<Scalar> forward(const Network<Scalar>& net,
                        const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& input);

/// Mean over samples of CE(main) + aux_weight * CE(aux), dropout disabled,
/// accumulated in double.
template <class Scalar>
double joint_loss(const Network<Scalar>& net,
                  const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& input,
                  std::span<const int> labels, double aux_weight = 1.0);

/// Per-head mean cross-entropies {main, aux}.
template <class Scalar>
std::pair<double, double> head_losses(const Network<Scalar>& net,
                                      const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& input,
                                      std::span<const int> labels);

/// Analytic gradient of joint_loss (dropout disabled) in parameter order:
/// for each dense layer W (column-major) then b; main head; aux head.
template <class Scalar>
std::vector<Scalar> joint_loss_gradient(const Network<Scalar>& net,
                                        const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& input,
                                        std::span<const int> labels, double aux_weight = 1.0);

template <class Scalar>
std::vector<Scalar> get_parameters(const Network<Scalar>& net);
template <class Scalar>
void set_parameters(Network<Scalar>& net, std::span<const Scalar> params);

template <class To, class From>
Network<To> network_cast(const Network<From>& net);

struct TrainOptions {
    double aux_weight = 1.0;
};

/// Mini-batch gradient descent on the joint loss for `epochs` passes over
/// `data`, reshuffled each epoch. Loss history holds the full-set joint loss
/// after every epoch; a non-finite loss stops training with diverged = true.
TrainReport train(NetworkF& net, const Dataset& data, int epochs, const Hyperparams& hp, Rng& rng,
                  const TrainOptions& options = {});

/// {left, right}; see the header comment.
template <class Scalar>
std::pair<Network<Scalar>, Network<Scalar>> split(const Network<Scalar>& net);

/// Fraction of samples whose main-head argmax equals the label.
double evaluate_accuracy(const NetworkF& net, const Dataset& data);

/// Max over parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-6),
/// numeric by central differences of joint_loss with step epsilon.
double finite_difference_check(const NetworkD& net, const Eigen::Ref<const Eigen::MatrixXd>& input,
                               std::span<const int> labels, double epsilon, double aux_weight = 1.0);

/// Multiply-accumulates per sample: fan_in * fan_out for every dense layer and head.
template <class Scalar>
std::uint64_t mac_count(const Network<Scalar>& net);
std::uint64_t mac_count(std::span<const LayerSpec> layers, bool with_aux, std::optional<int> aux_index, int input_dim,
                        int class_count);

/// Flat little-endian dump: "GEWT", u32 version, u32 tensor count, then per
/// tensor u32 rows, u32 cols and rows*cols row-major f32 values.
void write_weights(const NetworkF& net, const std::string& path);

extern template struct Network<float>;
extern template struct Network<double>;

} // namespace greenevo
