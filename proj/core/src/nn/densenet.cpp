#include "ecgaf/nn/densenet.hpp"

#include "ecgaf/types.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

namespace ecgaf::nn {

namespace {

constexpr std::array<char, 8> kMagic{'E', 'C', 'G', 'A', 'F', 'N', 'N', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> bytes{};
    for (std::size_t i = 0; i < 8; ++i) {
        bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    }
    out.write(bytes.data(), 8);
}

std::uint64_t read_u64(std::istream& in) {
    std::array<unsigned char, 8> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), 8);
    if (!in) {
        throw DataError("model file truncated");
    }
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    }
    return v;
}

nlohmann::json shape_json(const Shape& s) { return nlohmann::json::array({s.n, s.c, s.h, s.w}); }

}  // namespace

std::string to_string(ModelKind kind) { return kind == ModelKind::Main ? "main" : "secondary"; }

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "main") {
        return ModelKind::Main;
    }
    if (s == "secondary") {
        return ModelKind::Secondary;
    }
    throw std::invalid_argument("unknown model kind '" + s + "' (expected main|secondary)");
}

ModelConfig ModelConfig::for_kind(ModelKind kind) {
    ModelConfig c;
    c.kind = kind;
    c.growth_rate = kind == ModelKind::Main ? 6 : 4;
    c.input_cols = kind == ModelKind::Main ? 375 : 225;
    c.stem_channels = 2 * c.growth_rate;
    return c;
}

DenseNet::DenseNet(const ModelConfig& config, std::uint64_t seed) : config_(config), seed_(seed) {
    if (config.blocks == 0 || config.layers_per_block == 0 || config.growth_rate == 0 ||
        config.stem_channels == 0 || config.num_classes < 2) {
        throw std::invalid_argument("invalid DenseNet configuration");
    }
    std::mt19937_64 rng(seed);
    stem_ = Conv2dLayer("stem", 1, config.stem_channels, 3, rng);
    std::size_t channels = config.stem_channels;
    std::size_t rows = config.input_rows;
    std::size_t cols = config.input_cols;
    for (std::size_t b = 0; b < config.blocks; ++b) {
        const std::string prefix = "block" + std::to_string(b);
        blocks_.emplace_back(prefix, channels, rows, config.layers_per_block, config.growth_rate, rng);
        channels = blocks_.back().out_channels();
        if (b + 1 < config.blocks) {
            if (rows < 2 || cols < 2) {
                throw std::invalid_argument("input too small for the requested number of transitions");
            }
            transitions_.emplace_back("transition" + std::to_string(b), channels, rows, rng);
            channels = transitions_.back().out_channels();
            rows /= 2;
            cols /= 2;
        }
    }
    head_ = ClassifierHead("head", channels, rows, config.num_classes, rng);
}

void DenseNet::check_input(const Tensor& input) const {
    const Shape& s = input.shape();
    if (s.c != 1 || s.h != config_.input_rows || s.w != config_.input_cols || s.n == 0) {
        throw std::invalid_argument("model expects input (n,1," + std::to_string(config_.input_rows) +
                                    "," + std::to_string(config_.input_cols) + "), got " + s.str());
    }
}

Tensor DenseNet::forward(const Tensor& input, Mode mode) {
    check_input(input);
    Tensor x = stem_.forward(input, mode);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        x = blocks_[b].forward(x, mode);
        if (b < transitions_.size()) {
            x = transitions_[b].forward(x, mode);
        }
    }
    return head_.forward(x, mode);
}

Tensor DenseNet::backward(const Tensor& grad_logits) {
    Tensor g = head_.backward(grad_logits);
    for (std::size_t b = blocks_.size(); b-- > 0;) {
        if (b < transitions_.size()) {
            g = transitions_[b].backward(g);
        }
        g = blocks_[b].backward(g);
    }
    return stem_.backward(g);
}

Tensor DenseNet::infer(const Tensor& input) const {
    check_input(input);
    Tensor x = stem_.infer(input);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        x = blocks_[b].infer(x);
        if (b < transitions_.size()) {
            x = transitions_[b].infer(x);
        }
    }
    return head_.infer(x);
}

void DenseNet::collect(std::vector<Parameter*>& params, std::vector<Buffer>& buffers) {
    stem_.collect(params, buffers);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        blocks_[b].collect(params, buffers);
        if (b < transitions_.size()) {
            transitions_[b].collect(params, buffers);
        }
    }
    head_.collect(params, buffers);
}

std::vector<Parameter*> DenseNet::parameters() {
    std::vector<Parameter*> params;
    std::vector<Buffer> buffers;
    collect(params, buffers);
    return params;
}

std::vector<const Parameter*> DenseNet::parameters() const {
    auto mutable_params = const_cast<DenseNet*>(this)->parameters();
    return {mutable_params.begin(), mutable_params.end()};
}

std::vector<Buffer> DenseNet::buffers() {
    std::vector<Parameter*> params;
    std::vector<Buffer> buffers;
    collect(params, buffers);
    return buffers;
}

void DenseNet::zero_grad() {
    for (Parameter* p : parameters()) {
        p->grad.fill(0.0);
    }
}

std::size_t DenseNet::parameter_count() const {
    std::size_t total = 0;
    for (const Parameter* p : parameters()) {
        total += p->value.size();
    }
    return total;
}

std::size_t DenseNet::depth() const {
    return 1 + config_.blocks * config_.layers_per_block + (config_.blocks - 1) + 1;
}

void DenseNet::copy_state_from(const DenseNet& donor) {
    auto& src = const_cast<DenseNet&>(donor);
    auto dst_params = parameters();
    auto src_params = src.parameters();
    auto dst_buffers = buffers();
    auto src_buffers = src.buffers();
    if (dst_params.size() != src_params.size() || dst_buffers.size() != src_buffers.size()) {
        throw std::invalid_argument("warm start: donor model has a different layout");
    }
    for (std::size_t i = 0; i < dst_params.size(); ++i) {
        if (dst_params[i]->value.shape() != src_params[i]->value.shape()) {
            throw std::invalid_argument("warm start: shape mismatch at " + dst_params[i]->name);
        }
    }
    for (std::size_t i = 0; i < dst_buffers.size(); ++i) {
        if (dst_buffers[i].value->shape() != src_buffers[i].value->shape()) {
            throw std::invalid_argument("warm start: shape mismatch at " + dst_buffers[i].name);
        }
    }
    for (std::size_t i = 0; i < dst_params.size(); ++i) {
        dst_params[i]->value = src_params[i]->value;
    }
    for (std::size_t i = 0; i < dst_buffers.size(); ++i) {
        *dst_buffers[i].value = *src_buffers[i].value;
    }
}

// Container: 8-byte magic, u64 header length, JSON header, then every
// parameter followed by every buffer as little-endian IEEE-754 doubles.
void DenseNet::save(std::ostream& out) const {
    auto& self = const_cast<DenseNet&>(*this);
    const auto params = self.parameters();
    const auto bufs = self.buffers();

    nlohmann::json header;
    header["format"] = "ecgaf-densenet";
    header["version"] = 1;
    header["kind"] = to_string(config_.kind);
    header["growth_rate"] = config_.growth_rate;
    header["layers_per_block"] = config_.layers_per_block;
    header["blocks"] = config_.blocks;
    header["input_rows"] = config_.input_rows;
    header["input_cols"] = config_.input_cols;
    header["stem_channels"] = config_.stem_channels;
    header["num_classes"] = config_.num_classes;
    header["seed"] = seed_;
    std::size_t count = 0;
    auto tensors = nlohmann::json::array();
    for (const Parameter* p : params) {
        tensors.push_back({{"name", p->name}, {"shape", shape_json(p->value.shape())}});
        count += p->value.size();
    }
    for (const Buffer& b : bufs) {
        tensors.push_back({{"name", b.name}, {"shape", shape_json(b.value->shape())}});
        count += b.value->size();
    }
    header["tensors"] = std::move(tensors);
    header["num_values"] = count;

    const std::string text = header.dump();
    out.write(kMagic.data(), kMagic.size());
    write_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const Parameter* p : params) {
        for (double v : p->value.values()) {
            write_u64(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    for (const Buffer& b : bufs) {
        for (double v : b.value->values()) {
            write_u64(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    if (!out) {
        throw std::runtime_error("failed to write model");
    }
}

void DenseNet::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    save(out);
}

DenseNet DenseNet::load(std::istream& in) {
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) {
        throw DataError("not a DenseNet model file");
    }
    const std::uint64_t header_len = read_u64(in);
    if (header_len > (1u << 26)) {
        throw DataError("model header too large");
    }
    std::string text(header_len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(header_len));
    if (!in) {
        throw DataError("model file truncated");
    }

    nlohmann::json header;
    ModelConfig cfg;
    std::uint64_t seed = 0;
    try {
        header = nlohmann::json::parse(text);
        if (header.at("format") != "ecgaf-densenet" || header.at("version") != 1) {
            throw DataError("unsupported model format");
        }
        cfg.kind = model_kind_from_string(header.at("kind").get<std::string>());
        cfg.growth_rate = header.at("growth_rate").get<std::size_t>();
        cfg.layers_per_block = header.at("layers_per_block").get<std::size_t>();
        cfg.blocks = header.at("blocks").get<std::size_t>();
        cfg.input_rows = header.at("input_rows").get<std::size_t>();
        cfg.input_cols = header.at("input_cols").get<std::size_t>();
        cfg.stem_channels = header.at("stem_channels").get<std::size_t>();
        cfg.num_classes = header.at("num_classes").get<std::size_t>();
        seed = header.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model header: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("malformed model header: ") + e.what());
    }

    DenseNet model(cfg, seed);
    auto params = model.parameters();
    auto bufs = model.buffers();
    std::vector<Tensor*> targets;
    std::vector<std::string> names;
    for (Parameter* p : params) {
        targets.push_back(&p->value);
        names.push_back(p->name);
    }
    for (Buffer& b : bufs) {
        targets.push_back(b.value);
        names.push_back(b.name);
    }
    const auto& listed = header.at("tensors");
    if (listed.size() != targets.size()) {
        throw DataError("model tensor list does not match architecture");
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const Shape& s = targets[i]->shape();
        if (listed[i].at("name") != names[i] || listed[i].at("shape") != shape_json(s)) {
            throw DataError("model tensor '" + names[i] + "' does not match architecture");
        }
        for (double& v : targets[i]->values()) {
            v = std::bit_cast<double>(read_u64(in));
        }
    }
    return model;
}

DenseNet DenseNet::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open model '" + path.string() + "'");
    }
    return load(in);
}

DenseNet build_model(ModelKind kind, std::uint64_t seed) {
    return DenseNet(ModelConfig::for_kind(kind), seed);
}

}  // namespace ecgaf::nn
