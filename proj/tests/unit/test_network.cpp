#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "builders.hpp"
#include "oracles.hpp"
#include "greenevo/data.hpp"
#include "greenevo/error.hpp"
#include "greenevo/network.hpp"

using namespace greenevo;

namespace {

std::vector<LayerSpec> dense_stack(std::initializer_list<int> units, Activation act = Activation::relu)
{
    std::vector<LayerSpec> out;
    for (int u : units) {
        out.push_back({LayerKind::dense, u, act, 0.0});
    }
    return out;
}

Eigen::MatrixXf random_input(int rows, int cols, Rng& rng)
{
    Eigen::MatrixXf x(rows, cols);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.data()[i] = static_cast<float>(uniform_real(rng, -1, 1));
    }
    return x;
}

std::vector<LayerSpec> random_layers(Rng& rng, int max_dense, int max_units)
{
    std::vector<LayerSpec> layers;
    const auto dense = uniform_int(rng, 2, max_dense);
    for (std::int64_t i = 0; i < dense; ++i) {
        const auto act = uniform_index(rng, 2) == 0 ? Activation::relu : Activation::sigmoid;
        layers.push_back({LayerKind::dense, static_cast<int>(uniform_int(rng, 1, max_units)), act, 0.0});
        if (bernoulli(rng, 0.3)) {
            layers.push_back({LayerKind::dropout, 0, Activation::relu, uniform_real(rng, 0, 0.5)});
        }
    }
    return layers;
}

// Zero-initialised biases can put a ReLU exactly on its kink, where central
// differences see a one-sided slope. Random biases move every unit off it.
void randomize_parameters(NetworkD& net, Rng& rng)
{
    auto params = get_parameters(net);
    for (auto& p : params) {
        p = uniform_real(rng, -1, 1);
    }
    set_parameters<double>(net, params);
}

} // namespace

TEST_CASE("build: aux head wiring and output sizes")
{
    Rng rng(1);
    const auto layers = dense_stack({7, 5});
    const auto net = build_network<float>(layers, 0, 4, 10, rng);
    REQUIRE(net.has_aux());
    CHECK(net.aux->tap == 0);
    CHECK(net.aux->head.fan_in() == 7);
    CHECK(net.aux->head.fan_out() == 10);
    CHECK(net.main_head.fan_in() == 5);
    CHECK(net.main_head.fan_out() == 10);
    CHECK(net.dense_count() == 2);
    CHECK(mac_count(net) == 4 * 7 + 7 * 5 + 5 * 10 + 7 * 10);

    // Weights lie inside the scaled-uniform bound with zero biases.
    const double s = std::sqrt(6.0 / (4 + 7));
    CHECK(net.layers[0].dense.weights.cwiseAbs().maxCoeff() <= s);
    CHECK(net.layers[0].dense.bias.isZero());

    const auto x = random_input(4, 13, rng);
    const auto out = forward<float>(net, x);
    CHECK(out.main.rows() == 10);
    CHECK(out.aux.rows() == 10);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        CHECK(std::abs(out.main.col(j).sum() - 1.0f) <= 1e-6);
        CHECK(std::abs(out.aux.col(j).sum() - 1.0f) <= 1e-6);
    }
}

TEST_CASE("build: invalid aux index")
{
    Rng rng(2);
    const auto layers = dense_stack({3, 3});
    CHECK_THROWS_AS(build_network<float>(layers, 2, 4, 2, rng), InvalidGenotype);
    CHECK_THROWS(build_network<float>(layers, 0, 0, 2, rng));
}

TEST_CASE("split: partitions reproduce the heads exactly")
{
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto layers = random_layers(rng, 5, 16);
        int dense = 0;
        for (const auto& l : layers) {
            dense += l.kind == LayerKind::dense;
        }
        const int aux = static_cast<int>(uniform_int(rng, 0, dense - 2));
        const auto net = build_network<float>(layers, aux, 6, 4, rng);
        const auto [left, right] = split(net);
        CHECK_FALSE(left.has_aux());
        CHECK_FALSE(right.has_aux());
        CHECK(right.dense_count() == aux + 1);
        const auto x = random_input(6, 10, rng);
        const auto full = forward<float>(net, x);
        CHECK((forward<float>(left, x).main - full.main).cwiseAbs().maxCoeff() == 0.0f);
        CHECK((forward<float>(right, x).main - full.aux).cwiseAbs().maxCoeff() == 0.0f);
    }
    const auto net = build_network<float>(dense_stack({3, 3, 3}), 1, 2, 2, rng);
    const auto right_layers = split(net).second.layers.size() + 1; // hidden prefix plus head
    CHECK(right_layers == 1 + 2);
}

TEST_CASE("joint loss is the sum of the head losses")
{
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const auto net = build_network<double>(random_layers(rng, 4, 8), 0, 5, 3, rng);
        Eigen::MatrixXd x = random_input(5, 9, rng).cast<double>();
        std::vector<int> y;
        for (int j = 0; j < 9; ++j) {
            y.push_back(static_cast<int>(uniform_index(rng, 3)));
        }
        const auto [main, aux] = head_losses<double>(net, x, y);
        CHECK(std::abs(joint_loss<double>(net, x, y) - (main + aux)) <= 1e-12);
        CHECK(std::abs(joint_loss<double>(net, x, y, 0.5) - (main + 0.5 * aux)) <= 1e-12);
    }
}

TEST_CASE("finite differences agree with the analytic gradient")
{
    Rng rng(5);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto layers = random_layers(rng, 3, 5);
        int dense = 0;
        for (const auto& l : layers) {
            dense += l.kind == LayerKind::dense;
        }
        auto net = build_network<double>(layers, static_cast<int>(uniform_int(rng, 0, dense - 2)), 3, 3, rng);
        randomize_parameters(net, rng);
        Eigen::MatrixXd x = random_input(3, 4, rng).cast<double>();
        const std::vector<int> y{0, 1, 2, 1};
        const double err = finite_difference_check(net, x, y, 1e-5);
        worst = std::max(worst, err);
        CHECK(err == finite_difference_check(net, x, y, 1e-5));
    }
    CHECK(worst < 1e-5);

    SUBCASE("zero weights stay finite")
    {
        auto net = build_network<double>(dense_stack({2, 2}), 0, 2, 2, rng);
        auto params = get_parameters(net);
        std::fill(params.begin(), params.end(), 0.0);
        set_parameters<double>(net, params);
        Eigen::MatrixXd x(2, 2);
        x << 1, -1, -1, 1;
        const double err = finite_difference_check(net, x, std::vector<int>{0, 1}, 1e-5);
        CHECK(std::isfinite(err));
        CHECK(err < 1e-5);
    }
    CHECK_THROWS(finite_difference_check(build_network<double>(dense_stack({2, 2}), 0, 2, 2, rng),
                                         Eigen::MatrixXd::Ones(2, 1), std::vector<int>{0}, 0.0));
}

TEST_CASE("train")
{
    const auto ds = synthetic_dataset(2, 100, 4, 10.0, 7);
    Rng rng(6);
    const Hyperparams hp{0.1, 16};

    SUBCASE("loss falls on a separable task")
    {
        auto net = build_network<float>(dense_stack({8, 8}), 0, 4, 2, rng);
        const auto report = train(net, ds, 30, hp, rng);
        CHECK(report.epochs_run == 30);
        CHECK(report.loss_history.size() == 30);
        CHECK(report.final_loss < report.initial_loss);
        CHECK_FALSE(report.diverged);
    }
    SUBCASE("zero budget is rejected")
    {
        auto net = build_network<float>(dense_stack({8, 8}), 0, 4, 2, rng);
        CHECK_THROWS(train(net, ds, 0, hp, rng));
    }
    SUBCASE("zero learning rate leaves the loss unchanged")
    {
        auto net = build_network<float>(dense_stack({8, 8}), 0, 4, 2, rng);
        const auto report = train(net, ds, 5, {0.0, 16}, rng);
        for (double l : report.loss_history) {
            CHECK(std::abs(l - report.initial_loss) <= 1e-12);
        }
    }
    SUBCASE("deterministic given the seed")
    {
        Rng a(99);
        Rng b(99);
        auto na = build_network<float>(dense_stack({8, 8}), 0, 4, 2, a);
        auto nb = build_network<float>(dense_stack({8, 8}), 0, 4, 2, b);
        CHECK(train(na, ds, 3, hp, a).loss_history == train(nb, ds, 3, hp, b).loss_history);
        CHECK(get_parameters(na) == get_parameters(nb));
    }
    SUBCASE("an exploding learning rate is reported as divergence")
    {
        auto net = build_network<float>(dense_stack({8, 8}, Activation::relu), 0, 4, 2, rng);
        const auto report = train(net, ds, 50, {1e12, 16}, rng);
        CHECK(report.diverged);
    }
}

TEST_CASE("evaluate_accuracy")
{
    Rng rng(7);
    const auto net = build_network<float>(dense_stack({6, 6}), 0, 5, 10, rng);

    SUBCASE("labels equal to predictions give 1")
    {
        auto ds = synthetic_dataset(10, 20, 5, 1.0, 3);
        const auto out = forward<float>(net, ds.matrix());
        for (Eigen::Index j = 0; j < out.main.cols(); ++j) {
            Eigen::Index arg = 0;
            out.main.col(j).maxCoeff(&arg);
            ds.labels[static_cast<std::size_t>(j)] = static_cast<int>(arg);
        }
        CHECK(evaluate_accuracy(net, ds) == 1.0);
    }
    SUBCASE("unrelated labels give chance accuracy")
    {
        auto ds = synthetic_dataset(10, 100, 5, 1.0, 4);
        std::vector<int> labels;
        for (int c = 0; c < 10; ++c) {
            labels.insert(labels.end(), 100, c);
        }
        shuffle(labels.begin(), labels.end(), rng);
        ds.labels = labels;
        CHECK(std::abs(evaluate_accuracy(net, ds) - 0.10) <= 0.03);
    }
    SUBCASE("empty data is an error")
    {
        Dataset empty;
        empty.dims = 5;
        empty.class_count = 10;
        CHECK_THROWS(evaluate_accuracy(net, empty));
    }
}

TEST_CASE("synthetic data: separation drives accuracy")
{
    Rng rng(8);
    const auto easy = split(synthetic_dataset(2, 200, 6, 10.0, 1), {0.5, 0.4, 0.1, 1, true});
    auto net = build_network<float>(dense_stack({4, 4}), 0, 6, 2, rng);
    train(net, easy.train, 30, {0.1, 16}, rng);
    CHECK(evaluate_accuracy(net, easy.validation) > 0.95);

    const auto hard = split(synthetic_dataset(4, 200, 6, 0.0, 2), {0.5, 0.4, 0.1, 1, true});
    auto net2 = build_network<float>(dense_stack({8, 8}), 0, 6, 4, rng);
    train(net2, hard.train, 10, {0.05, 16}, rng);
    CHECK(std::abs(evaluate_accuracy(net2, hard.validation) - 0.25) <= 0.08);
}

TEST_CASE("weight dump layout")
{
    oracle::TempDir dir("greenevo_weights");
    Rng rng(9);
    const auto net = build_network<float>(dense_stack({3, 2}), 0, 4, 2, rng);
    const auto path = dir.file("w.bin");
    write_weights(net, path);
    std::ifstream in(path, std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    CHECK(std::string(magic, 4) == "GEWT");
    std::uint32_t version = 0;
    std::uint32_t tensors = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&tensors), 4);
    CHECK(version == 1);
    CHECK(tensors == 8); // W,b for two hidden layers, main head, aux head
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 4);
    in.read(reinterpret_cast<char*>(&cols), 4);
    CHECK(rows == 3);
    CHECK(cols == 4);
    float first = 0;
    in.read(reinterpret_cast<char*>(&first), 4);
    CHECK(first == net.layers[0].dense.weights(0, 0));
    float second = 0;
    in.read(reinterpret_cast<char*>(&second), 4);
    CHECK(second == net.layers[0].dense.weights(0, 1));

    const auto expected = 12 + 4 * 8 * 2 + 4 * (3 * 4 + 3 + 2 * 3 + 2 + 2 * 2 + 2 + 2 * 3 + 2);
    CHECK(std::filesystem::file_size(path) == static_cast<std::uintmax_t>(expected));
}
