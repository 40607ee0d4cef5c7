#include "greenevo/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "greenevo/error.hpp"

namespace greenevo {

namespace {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using ConstRef = Eigen::Ref<const Mat<S>>;

constexpr Eigen::Index kInferenceChunk = 512;

template <class S>
void softmax_columns(Mat<S>& z)
{
    const Eigen::Matrix<S, 1, Eigen::Dynamic> mx = z.colwise().maxCoeff();
    z = (z.rowwise() - mx).array().exp().matrix();
    const Eigen::Matrix<S, 1, Eigen::Dynamic> sums = z.colwise().sum();
    z.array().rowwise() /= sums.array();
}

template <class S>
void activate(Mat<S>& z, Activation act)
{
    switch (act) {
    case Activation::relu:
        z = z.cwiseMax(S(0));
        break;
    case Activation::sigmoid:
        z = (S(1) / (S(1) + (-z.array()).exp())).matrix();
        break;
    case Activation::softmax:
        softmax_columns(z);
        break;
    }
}

// dL/dz from dL/da given the activation output a.
template <class S>
Mat<S> activation_backward(const Mat<S>& a, const Mat<S>& da, Activation act)
{
    switch (act) {
    case Activation::relu:
        return (a.array() > S(0)).select(da.array(), S(0)).matrix();
    case Activation::sigmoid:
        return (da.array() * a.array() * (S(1) - a.array())).matrix();
    case Activation::softmax: {
        const Eigen::Matrix<S, 1, Eigen::Dynamic> dot = (da.array() * a.array()).colwise().sum();
        return (a.array() * (da.array().rowwise() - dot.array())).matrix();
    }
    }
    return da;
}

template <class S>
Mat<S> affine(const DenseParams<S>& p, const ConstRef<S>& in)
{
    Mat<S> z(p.weights.rows(), in.cols());
    z.noalias() = p.weights * in;
    z.colwise() += p.bias;
    return z;
}

// Column-wise log-softmax, in double.
template <class S>
Eigen::MatrixXd log_softmax(const Mat<S>& logits)
{
    Eigen::MatrixXd z = logits.template cast<double>();
    const Eigen::RowVectorXd mx = z.colwise().maxCoeff();
    z.rowwise() -= mx;
    const Eigen::RowVectorXd lse = z.array().exp().colwise().sum().log();
    z.rowwise() -= lse;
    return z;
}

template <class S>
double mean_cross_entropy(const Mat<S>& logits, std::span<const int> labels)
{
    const auto logp = log_softmax(logits);
    double sum = 0.0;
    for (Eigen::Index j = 0; j < logp.cols(); ++j) {
        sum -= logp(labels[static_cast<std::size_t>(j)], j);
    }
    return sum / static_cast<double>(logp.cols());
}

template <class S>
struct Pass {
    std::vector<Mat<S>> acts;  // output of each layer
    std::vector<Mat<S>> masks; // dropout masks, training only
    Mat<S> main_logits;
    Mat<S> aux_logits;
};

template <class S>
void run_forward(const Network<S>& net, const ConstRef<S>& x, Pass<S>& pass, Rng* dropout_rng)
{
    if (x.rows() != net.input_dim) {
        throw std::invalid_argument("network input has " + std::to_string(x.rows()) + " rows, expected " +
                                    std::to_string(net.input_dim));
    }
    const std::size_t n = net.layers.size();
    pass.acts.resize(n);
    pass.masks.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const ConstRef<S> in = i == 0 ? x : ConstRef<S>(pass.acts[i - 1]);
        const auto& layer = net.layers[i];
        if (layer.kind == LayerKind::dense) {
            pass.acts[i] = affine(layer.dense, in);
            activate(pass.acts[i], layer.dense.activation);
        } else if (dropout_rng != nullptr && layer.rate > 0.0) {
            const double keep = 1.0 - layer.rate;
            auto& mask = pass.masks[i];
            mask.resize(in.rows(), in.cols());
            for (Eigen::Index k = 0; k < mask.size(); ++k) {
                mask.data()[k] = uniform01(*dropout_rng) < keep ? static_cast<S>(1.0 / keep) : S(0);
            }
            pass.acts[i] = in.cwiseProduct(mask);
        } else {
            pass.masks[i].resize(0, 0);
            pass.acts[i] = in;
        }
    }
    const ConstRef<S> last = n == 0 ? x : ConstRef<S>(pass.acts.back());
    pass.main_logits = affine(net.main_head, last);
    if (net.aux) {
        pass.aux_logits = affine(net.aux->head, ConstRef<S>(pass.acts[net.aux->tap]));
    } else {
        pass.aux_logits.resize(0, 0);
    }
}

template <class S>
struct Grads {
    std::vector<Mat<S>> w;
    std::vector<Vec<S>> b;
    Mat<S> main_w;
    Vec<S> main_b;
    Mat<S> aux_w;
    Vec<S> aux_b;
};

template <class S>
Mat<S> softmax_minus_onehot(const Mat<S>& logits, std::span<const int> labels, S scale)
{
    Mat<S> d = logits;
    softmax_columns(d);
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
        d(labels[static_cast<std::size_t>(j)], j) -= S(1);
    }
    d *= scale;
    return d;
}

template <class S>
Grads<S> run_backward(const Network<S>& net, const ConstRef<S>& x, const Pass<S>& pass, std::span<const int> labels,
                      double aux_weight)
{
    const std::size_t n = net.layers.size();
    const S inv_batch = S(1) / static_cast<S>(x.cols());
    Grads<S> g;
    g.w.resize(n);
    g.b.resize(n);

    const ConstRef<S> last = n == 0 ? x : ConstRef<S>(pass.acts.back());
    const Mat<S> d_main = softmax_minus_onehot(pass.main_logits, labels, inv_batch);
    g.main_w.noalias() = d_main * last.transpose();
    g.main_b = d_main.rowwise().sum();
    if (n == 0) {
        return g;
    }
    Mat<S> da(net.main_head.weights.cols(), x.cols());
    da.noalias() = net.main_head.weights.transpose() * d_main;

    for (std::size_t i = n; i-- > 0;) {
        if (net.aux && net.aux->tap == i) {
            const Mat<S> d_aux = softmax_minus_onehot(pass.aux_logits, labels, static_cast<S>(aux_weight) * inv_batch);
            g.aux_w.noalias() = d_aux * pass.acts[i].transpose();
            g.aux_b = d_aux.rowwise().sum();
            da.noalias() += net.aux->head.weights.transpose() * d_aux;
        }
        const auto& layer = net.layers[i];
        if (layer.kind == LayerKind::dropout) {
            if (pass.masks[i].size() != 0) {
                da = da.cwiseProduct(pass.masks[i]);
            }
            continue;
        }
        const Mat<S> dz = activation_backward(pass.acts[i], da, layer.dense.activation);
        const ConstRef<S> in = i == 0 ? x : ConstRef<S>(pass.acts[i - 1]);
        g.w[i].noalias() = dz * in.transpose();
        g.b[i] = dz.rowwise().sum();
        if (i > 0) {
            da.resize(layer.dense.weights.cols(), x.cols());
            da.noalias() = layer.dense.weights.transpose() * dz;
        }
    }
    return g;
}

template <class S>
DenseParams<S> make_dense(Eigen::Index fan_in, Eigen::Index fan_out, Activation act, Rng& rng)
{
    DenseParams<S> p;
    p.activation = act;
    p.weights.resize(fan_out, fan_in);
    p.bias = Vec<S>::Zero(fan_out);
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (Eigen::Index k = 0; k < p.weights.size(); ++k) {
        p.weights.data()[k] = static_cast<S>(uniform_real(rng, -s, s));
    }
    return p;
}

template <class S, class F>
void for_each_param(Network<S>& net, F&& f)
{
    for (auto& layer : net.layers) {
        if (layer.kind == LayerKind::dense) {
            f(layer.dense.weights.data(), layer.dense.weights.size());
            f(layer.dense.bias.data(), layer.dense.bias.size());
        }
    }
    f(net.main_head.weights.data(), net.main_head.weights.size());
    f(net.main_head.bias.data(), net.main_head.bias.size());
    if (net.aux) {
        f(net.aux->head.weights.data(), net.aux->head.weights.size());
        f(net.aux->head.bias.data(), net.aux->head.bias.size());
    }
}

template <class S>
void append(std::vector<S>& out, const S* data, Eigen::Index size)
{
    out.insert(out.end(), data, data + size);
}

template <class To, class From>
DenseParams<To> cast_dense(const DenseParams<From>& p)
{
    DenseParams<To> out;
    out.weights = p.weights.template cast<To>();
    out.bias = p.bias.template cast<To>();
    out.activation = p.activation;
    return out;
}

void put_u32(std::ofstream& out, std::uint32_t v)
{
    const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                           static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(bytes, 4);
}

template <class M>
void put_tensor(std::ofstream& out, const M& m)
{
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const float f = static_cast<float>(m(r, c));
            std::uint32_t bits = 0;
            std::memcpy(&bits, &f, sizeof bits);
            put_u32(out, bits);
        }
    }
}

} // namespace

template <class Scalar>
int Network<Scalar>::dense_count() const
{
    return static_cast<int>(std::count_if(layers.begin(), layers.end(),
                                          [](const Layer<Scalar>& l) { return l.kind == LayerKind::dense; }));
}

template <class Scalar>
std::size_t Network<Scalar>::parameter_count() const
{
    std::size_t n = 0;
    for_each_param(const_cast<Network&>(*this), [&](const Scalar*, Eigen::Index size) { n += static_cast<std::size_t>(size); });
    return n;
}

template <class Scalar>
Network<Scalar> build_network(std::span<const LayerSpec> layers, std::optional<int> aux_index, int input_dim,
                              int class_count, Rng& rng)
{
    if (input_dim <= 0 || class_count <= 0) {
        throw std::invalid_argument("build_network: input_dim and class_count must be positive");
    }
    Network<Scalar> net;
    net.input_dim = input_dim;
    net.class_count = class_count;
    Eigen::Index width = input_dim;
    int dense_seen = 0;
    std::optional<std::size_t> tap;
    std::optional<Eigen::Index> tap_width;
    for (const auto& spec : layers) {
        Layer<Scalar> layer;
        layer.kind = spec.kind;
        if (spec.kind == LayerKind::dense) {
            if (spec.units <= 0) {
                throw InvalidGenotype("dense layer with no units");
            }
            layer.dense = make_dense<Scalar>(width, spec.units, spec.activation, rng);
            width = spec.units;
            if (aux_index && dense_seen == *aux_index) {
                tap = net.layers.size();
                tap_width = width;
            }
            ++dense_seen;
        } else {
            layer.rate = spec.rate;
        }
        net.layers.push_back(std::move(layer));
    }
    if (aux_index && (!tap || *aux_index > dense_seen - 2 || *aux_index < 0)) {
        throw InvalidGenotype("aux_index " + std::to_string(*aux_index) + " invalid for " + std::to_string(dense_seen) +
                              " dense layers");
    }
    net.main_head = make_dense<Scalar>(width, class_count, Activation::softmax, rng);
    if (tap) {
        net.aux = AuxHead<Scalar>{*tap, make_dense<Scalar>(*tap_width, class_count, Activation::softmax, rng)};
    }
    return net;
}

template <class Scalar>
Outputs<Scalar> forward(const Network<Scalar>& net, const Eigen::Ref<const Mat<Scalar>>& input)
{
    Pass<Scalar> pass;
    run_forward(net, input, pass, nullptr);
    Outputs<Scalar> out;
    out.main = std::move(pass.main_logits);
    softmax_columns(out.main);
    if (net.aux) {
        out.aux = std::move(pass.aux_logits);
        softmax_columns(out.aux);
    }
    return out;
}

template <class Scalar>
std::pair<double, double> head_losses(const Network<Scalar>& net, const Eigen::Ref<const Mat<Scalar>>& input,
                                      std::span<const int> labels)
{
    if (static_cast<std::size_t>(input.cols()) != labels.size()) {
        throw std::invalid_argument("head_losses: label count does not match batch");
    }
    double main = 0.0;
    double aux = 0.0;
    Pass<Scalar> pass;
    for (Eigen::Index start = 0; start < input.cols(); start += kInferenceChunk) {
        const auto cols = std::min(kInferenceChunk, input.cols() - start);
        const auto chunk_labels = labels.subspan(static_cast<std::size_t>(start), static_cast<std::size_t>(cols));
        run_forward<Scalar>(net, input.middleCols(start, cols), pass, nullptr);
        main += mean_cross_entropy(pass.main_logits, chunk_labels) * static_cast<double>(cols);
        if (net.aux) {
            aux += mean_cross_entropy(pass.aux_logits, chunk_labels) * static_cast<double>(cols);
        }
    }
    const auto n = static_cast<double>(input.cols());
    return {main / n, aux / n};
}

template <class Scalar>
double joint_loss(const Network<Scalar>& net, const Eigen::Ref<const Mat<Scalar>>& input, std::span<const int> labels,
                  double aux_weight)
{
    const auto [main, aux] = head_losses(net, input, labels);
    return main + aux_weight * aux;
}

template <class Scalar>
std::vector<Scalar> get_parameters(const Network<Scalar>& net)
{
    std::vector<Scalar> out;
    out.reserve(net.parameter_count());
    for_each_param(const_cast<Network<Scalar>&>(net), [&](const Scalar* data, Eigen::Index size) { append(out, data, size); });
    return out;
}

template <class Scalar>
void set_parameters(Network<Scalar>& net, std::span<const Scalar> params)
{
    if (params.size() != net.parameter_count()) {
        throw std::invalid_argument("set_parameters: size mismatch");
    }
    std::size_t offset = 0;
    for_each_param(net, [&](Scalar* data, Eigen::Index size) {
        std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(offset), size, data);
        offset += static_cast<std::size_t>(size);
    });
}

template <class Scalar>
std::vector<Scalar> joint_loss_gradient(const Network<Scalar>& net, const Eigen::Ref<const Mat<Scalar>>& input,
                                        std::span<const int> labels, double aux_weight)
{
    Pass<Scalar> pass;
    run_forward(net, input, pass, nullptr);
    const auto g = run_backward(net, input, pass, labels, aux_weight);
    std::vector<Scalar> out;
    out.reserve(net.parameter_count());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (net.layers[i].kind == LayerKind::dense) {
            append(out, g.w[i].data(), g.w[i].size());
            append(out, g.b[i].data(), g.b[i].size());
        }
    }
    append(out, g.main_w.data(), g.main_w.size());
    append(out, g.main_b.data(), g.main_b.size());
    if (net.aux) {
        append(out, g.aux_w.data(), g.aux_w.size());
        append(out, g.aux_b.data(), g.aux_b.size());
    }
    return out;
}

template <class To, class From>
Network<To> network_cast(const Network<From>& net)
{
    Network<To> out;
    out.input_dim = net.input_dim;
    out.class_count = net.class_count;
    for (const auto& layer : net.layers) {
        Layer<To> l;
        l.kind = layer.kind;
        l.rate = layer.rate;
        if (layer.kind == LayerKind::dense) {
            l.dense = cast_dense<To>(layer.dense);
        }
        out.layers.push_back(std::move(l));
    }
    out.main_head = cast_dense<To>(net.main_head);
    if (net.aux) {
        out.aux = AuxHead<To>{net.aux->tap, cast_dense<To>(net.aux->head)};
    }
    return out;
}

TrainReport train(NetworkF& net, const Dataset& data, int epochs, const Hyperparams& hp, Rng& rng,
                  const TrainOptions& options)
{
    if (epochs < 1) {
        throw std::invalid_argument("train: budget must be at least one epoch");
    }
    if (data.empty()) {
        throw std::invalid_argument("train: empty training data");
    }
    if (hp.batch_size < 1) {
        throw std::invalid_argument("train: batch size must be positive");
    }
    const auto x = data.matrix();
    const auto n = data.size();
    const auto batch = std::min<std::size_t>(static_cast<std::size_t>(hp.batch_size), n);
    const auto lr = static_cast<float>(hp.learning_rate);

    TrainReport report;
    report.initial_loss = joint_loss<float>(net, x, data.labels, options.aux_weight);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Mat<float> xb;
    std::vector<int> yb;
    Pass<float> pass;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const auto b = std::min(batch, n - start);
            xb.resize(net.input_dim, static_cast<Eigen::Index>(b));
            yb.resize(b);
            for (std::size_t j = 0; j < b; ++j) {
                xb.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(order[start + j]));
                yb[j] = data.labels[order[start + j]];
            }
            run_forward<float>(net, xb, pass, &rng);
            const auto g = run_backward<float>(net, xb, pass, yb, options.aux_weight);
            for (std::size_t i = 0; i < net.layers.size(); ++i) {
                if (net.layers[i].kind == LayerKind::dense) {
                    net.layers[i].dense.weights.noalias() -= lr * g.w[i];
                    net.layers[i].dense.bias.noalias() -= lr * g.b[i];
                }
            }
            net.main_head.weights.noalias() -= lr * g.main_w;
            net.main_head.bias.noalias() -= lr * g.main_b;
            if (net.aux) {
                net.aux->head.weights.noalias() -= lr * g.aux_w;
                net.aux->head.bias.noalias() -= lr * g.aux_b;
            }
        }
        const double loss = joint_loss<float>(net, x, data.labels, options.aux_weight);
        report.loss_history.push_back(loss);
        report.epochs_run = epoch + 1;
        report.final_loss = loss;
        if (!std::isfinite(loss)) {
            report.diverged = true;
            break;
        }
    }
    return report;
}

template <class Scalar>
std::pair<Network<Scalar>, Network<Scalar>> split(const Network<Scalar>& net)
{
    Network<Scalar> left = net;
    left.aux.reset();
    Network<Scalar> right;
    right.input_dim = net.input_dim;
    right.class_count = net.class_count;
    if (net.aux) {
        right.layers.assign(net.layers.begin(), net.layers.begin() + static_cast<std::ptrdiff_t>(net.aux->tap + 1));
        right.main_head = net.aux->head;
    } else {
        right = left;
    }
    return {std::move(left), std::move(right)};
}

double evaluate_accuracy(const NetworkF& net, const Dataset& data)
{
    if (data.empty()) {
        throw std::invalid_argument("evaluate_accuracy: empty data");
    }
    const auto x = data.matrix();
    std::size_t correct = 0;
    for (Eigen::Index start = 0; start < x.cols(); start += kInferenceChunk) {
        const auto cols = std::min(kInferenceChunk, x.cols() - start);
        const auto out = forward<float>(net, x.middleCols(start, cols));
        for (Eigen::Index j = 0; j < cols; ++j) {
            Eigen::Index arg = 0;
            out.main.col(j).maxCoeff(&arg);
            correct += arg == data.labels[static_cast<std::size_t>(start + j)] ? 1 : 0;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

double finite_difference_check(const NetworkD& net, const Eigen::Ref<const Eigen::MatrixXd>& input,
                               std::span<const int> labels, double epsilon, double aux_weight)
{
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("finite_difference_check: epsilon must be positive");
    }
    const auto analytic = joint_loss_gradient<double>(net, input, labels, aux_weight);
    auto params = get_parameters(net);
    NetworkD probe = net;
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double saved = params[k];
        params[k] = saved + epsilon;
        set_parameters<double>(probe, params);
        const double up = joint_loss<double>(probe, input, labels, aux_weight);
        params[k] = saved - epsilon;
        set_parameters<double>(probe, params);
        const double down = joint_loss<double>(probe, input, labels, aux_weight);
        params[k] = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(analytic[k] - numeric) / denom);
    }
    return worst;
}

template <class Scalar>
std::uint64_t mac_count(const Network<Scalar>& net)
{
    std::uint64_t macs = 0;
    for (const auto& layer : net.layers) {
        if (layer.kind == LayerKind::dense) {
            macs += static_cast<std::uint64_t>(layer.dense.fan_in()) * static_cast<std::uint64_t>(layer.dense.fan_out());
        }
    }
    macs += static_cast<std::uint64_t>(net.main_head.fan_in()) * static_cast<std::uint64_t>(net.main_head.fan_out());
    if (net.aux) {
        macs += static_cast<std::uint64_t>(net.aux->head.fan_in()) * static_cast<std::uint64_t>(net.aux->head.fan_out());
    }
    return macs;
}

std::uint64_t mac_count(std::span<const LayerSpec> layers, bool with_aux, std::optional<int> aux_index, int input_dim,
                        int class_count)
{
    std::uint64_t macs = 0;
    std::uint64_t width = static_cast<std::uint64_t>(input_dim);
    int dense_seen = 0;
    for (const auto& l : layers) {
        if (l.kind != LayerKind::dense) {
            continue;
        }
        macs += width * static_cast<std::uint64_t>(l.units);
        width = static_cast<std::uint64_t>(l.units);
        if (with_aux && aux_index && dense_seen == *aux_index) {
            macs += width * static_cast<std::uint64_t>(class_count);
        }
        ++dense_seen;
    }
    return macs + width * static_cast<std::uint64_t>(class_count);
}

void write_weights(const NetworkF& net, const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write weights to '" + path + "'");
    }
    std::uint32_t tensors = 2 * static_cast<std::uint32_t>(net.dense_count()) + 2 + (net.aux ? 2 : 0);
    out.write("GEWT", 4);
    put_u32(out, 1);
    put_u32(out, tensors);
    for (const auto& layer : net.layers) {
        if (layer.kind == LayerKind::dense) {
            put_tensor(out, layer.dense.weights);
            put_tensor(out, layer.dense.bias);
        }
    }
    put_tensor(out, net.main_head.weights);
    put_tensor(out, net.main_head.bias);
    if (net.aux) {
        put_tensor(out, net.aux->head.weights);
        put_tensor(out, net.aux->head.bias);
    }
    if (!out) {
        throw Error("failed writing weights to '" + path + "'");
    }
}

template struct Network<float>;
template struct Network<double>;

#define GREENEVO_INSTANTIATE(S)                                                                                        \
    template Network<S> build_network<S>(std::span<const LayerSpec>, std::optional<int>, int, int, Rng&);             \
    template Outputs<S> forward<S>(const Network<S>&, const Eigen::Ref<const Mat<S>>&);                                \
    template double joint_loss<S>(const Network<S>&, const Eigen::Ref<const Mat<S>>&, std::span<const int>, double);   \
    template std::pair<double, double> head_losses<S>(const Network<S>&, const Eigen::Ref<const Mat<S>>&,              \
                                                      std::span<const int>);                                           \
    template std::vector<S> joint_loss_gradient<S>(const Network<S>&, const Eigen::Ref<const Mat<S>>&,                 \
                                                   std::span<const int>, double);                                      \
    template std::vector<S> get_parameters<S>(const Network<S>&);                                                      \
    template void set_parameters<S>(Network<S>&, std::span<const S>);                                                  \
    template std::pair<Network<S>, Network<S>> split<S>(const Network<S>&);                                            \
    template std::uint64_t mac_count<S>(const Network<S>&);

GREENEVO_INSTANTIATE(float)
GREENEVO_INSTANTIATE(double)
#undef GREENEVO_INSTANTIATE

template Network<double> network_cast<double, float>(const Network<float>&);
template Network<float> network_cast<float, double>(const Network<double>&);
template Network<float> network_cast<float, float>(const Network<float>&);
template Network<double> network_cast<double, double>(const Network<double>&);

} // namespace greenevo
