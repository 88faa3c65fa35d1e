#include "stockcnn/nn/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "stockcnn/io.hpp"

namespace stockcnn::nn {

namespace {

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v)
    {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        u32(static_cast<std::uint32_t>(bits));
        u32(static_cast<std::uint32_t>(bits >> 32));
    }
    void raw(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in)
        : in_(in)
    {
    }
    std::uint8_t u8()
    {
        need(1);
        return in_[pos_++];
    }
    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64()
    {
        const std::uint64_t lo = u32();
        const std::uint64_t hi = u32();
        return std::bit_cast<double>(lo | (hi << 32));
    }
    std::string_view raw(std::size_t n)
    {
        need(n);
        std::string_view s(reinterpret_cast<const char*>(in_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    bool done() const noexcept { return pos_ == in_.size(); }
    std::size_t remaining() const noexcept { return in_.size() - pos_; }

private:
    void need(std::size_t n) const
    {
        if (in_.size() - pos_ < n) throw Error(ErrorKind::Io, "checkpoint truncated");
    }
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> encode_checkpoint(const ModelSpec& spec, const Params<float>& params)
{
    Writer w;
    w.raw(kCheckpointMagic);
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(spec.input.size()));
    for (std::size_t d : spec.input) w.u32(static_cast<std::uint32_t>(d));
    w.u32(static_cast<std::uint32_t>(spec.layers.size()));
    for (const LayerSpec& l : spec.layers) {
        w.u8(static_cast<std::uint8_t>(l.kind));
        w.u32(static_cast<std::uint32_t>(l.units));
        w.u32(static_cast<std::uint32_t>(l.kernel));
        w.f64(l.rate);
    }
    w.u32(static_cast<std::uint32_t>(params.tensors.size()));
    for (const auto& t : params.tensors) {
        w.u32(static_cast<std::uint32_t>(t.shape.size()));
        for (std::size_t d : t.shape) w.u32(static_cast<std::uint32_t>(d));
        for (float v : t.data) w.f32(v);
    }
    return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes)
{
    Reader r(bytes);
    if (r.raw(kCheckpointMagic.size()) != kCheckpointMagic) throw Error(ErrorKind::Io, "not a checkpoint");
    if (r.u32() != kCheckpointVersion) throw Error(ErrorKind::Io, "unsupported checkpoint version");

    Checkpoint c;
    const std::uint32_t rank = r.u32();
    for (std::uint32_t i = 0; i < rank; ++i) c.spec.input.push_back(r.u32());
    const std::uint32_t layers = r.u32();
    for (std::uint32_t i = 0; i < layers; ++i) {
        LayerSpec l{static_cast<LayerKind>(r.u8())};
        l.units = r.u32();
        l.kernel = r.u32();
        l.rate = r.f64();
        c.spec.layers.push_back(l);
    }
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        Shape shape;
        const std::uint32_t tr = r.u32();
        for (std::uint32_t k = 0; k < tr; ++k) shape.push_back(r.u32());
        if (element_count(shape) > r.remaining() / 4) throw Error(ErrorKind::Io, "checkpoint truncated");
        Tensor<float> t(shape);
        for (float& v : t.data) v = r.f32();
        c.params.tensors.push_back(std::move(t));
    }
    if (!r.done()) throw Error(ErrorKind::Io, "trailing bytes in checkpoint");
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const ModelSpec& spec, const Params<float>& params)
{
    const auto bytes = encode_checkpoint(spec, params);
    io::write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Params<float> load_checkpoint(const std::filesystem::path& path, const ModelSpec& expected)
{
    const std::string raw = io::read_file(path);
    Checkpoint c = decode_checkpoint(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
    if (!(c.spec == expected)) {
        throw Error(ErrorKind::SpecMismatch,
                    "checkpoint holds " + c.spec.describe() + ", expected " + expected.describe());
    }
    const auto shapes = expected.param_shapes();
    if (shapes.size() != c.params.tensors.size()) {
        throw Error(ErrorKind::SpecMismatch, "checkpoint tensor count does not match spec");
    }
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (c.params.tensors[i].shape != shapes[i]) {
            throw Error(ErrorKind::SpecMismatch, "checkpoint tensor " + std::to_string(i) + " has shape " +
                                                     shape_string(c.params.tensors[i].shape));
        }
    }
    return std::move(c.params);
}

} // namespace stockcnn::nn
