#pragma once

#include "ecgaf/nn/layers.hpp"
#include "ecgaf/nn/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ecgaf::nn {

enum class ModelKind { Main, Secondary };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

/// Reference trainable-parameter counts reported for the original models.
inline constexpr std::size_t kReferenceMainParameters = 262'344;
inline constexpr std::size_t kReferenceSecondaryParameters = 119'458;

struct ModelConfig {
    ModelKind kind = ModelKind::Main;
    std::size_t growth_rate = 6;
    std::size_t layers_per_block = 12;
    std::size_t blocks = 3;
    std::size_t input_rows = 20;
    std::size_t input_cols = 375;
    std::size_t stem_channels = 12;  // 2 * growth_rate by default
    std::size_t num_classes = 4;

    /// Main: k = 6, 20 x 375. Secondary: k = 4, 20 x 225.
    static ModelConfig for_kind(ModelKind kind);

    bool operator==(const ModelConfig&) const = default;
};

/// DenseNet over (batch, 1, rows, cols) spectrogram segments:
/// stem 3x3 conv -> [dense block -> transition] x (blocks - 1) -> dense block
/// -> BN -> ReLU -> global average pool -> affine logits.
class DenseNet {
public:
    DenseNet(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const { return config_; }
    std::uint64_t seed() const { return seed_; }

    /// Training-path forward; caches activations for backward().
    Tensor forward(const Tensor& input, Mode mode);
    /// Back-propagates d(loss)/d(logits), accumulating parameter gradients;
    /// returns d(loss)/d(input).
    Tensor backward(const Tensor& grad_logits);
    /// Eval-mode logits with no side effects; safe to call concurrently.
    Tensor infer(const Tensor& input) const;

    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
    std::vector<Buffer> buffers();
    void zero_grad();

    std::size_t parameter_count() const;
    /// Stem + block convs + transition convs + classifier affine.
    std::size_t depth() const;

    /// Copies parameters and running statistics from a model with identical shapes.
    void copy_state_from(const DenseNet& donor);

    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    static DenseNet load(std::istream& in);
    static DenseNet load(const std::filesystem::path& path);

private:
    void check_input(const Tensor& input) const;
    void collect(std::vector<Parameter*>& params, std::vector<Buffer>& buffers);

    ModelConfig config_;
    std::uint64_t seed_;
    Conv2dLayer stem_;
    std::vector<DenseBlock> blocks_;
    std::vector<Transition> transitions_;
    ClassifierHead head_;
};

/// Convenience: the full-size model of the given kind.
DenseNet build_model(ModelKind kind, std::uint64_t seed = 0);

}  // namespace ecgaf::nn
