#include "i3net/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include <json.hpp>

#include "i3net/errors.hpp"

namespace i3net::model {

using nlohmann::json;

std::string config_to_json(const ModelConfig& cfg) {
    json j;
    j["channels"] = cfg.channels;
    j["n_blocks"] = cfg.n_blocks;
    j["cvb_positions"] = cfg.cvb_positions;
    j["window"] = cfg.window;
    j["s_in"] = cfg.s_in;
    j["scale"] = cfg.scale;
    j["variant"] = variant_name(cfg.variant);
    j["global_residual"] = cfg.global_residual;
    j["token_expansion"] = cfg.token_expansion;
    j["channel_expansion"] = cfg.channel_expansion;
    return j.dump();
}

ModelConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("model config JSON: ") + e.what());
    }
    ModelConfig cfg;
    try {
        cfg.channels = j.at("channels").get<int>();
        cfg.n_blocks = j.at("n_blocks").get<int>();
        cfg.cvb_positions = j.at("cvb_positions").get<std::vector<int>>();
        cfg.window = j.at("window").get<int>();
        cfg.s_in = j.at("s_in").get<int>();
        cfg.scale = j.at("scale").get<int>();
        cfg.variant = variant_from_name(j.at("variant").get<std::string>());
        cfg.global_residual = j.at("global_residual").get<bool>();
        cfg.token_expansion = j.at("token_expansion").get<int>();
        cfg.channel_expansion = j.at("channel_expansion").get<int>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("model config JSON: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

namespace {

constexpr std::uint32_t kVersion = 1;

struct ByteSink {
    std::vector<std::uint8_t> bytes;
    void put(const void* p, size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        bytes.insert(bytes.end(), b, b + n);
    }
    void u16(std::uint16_t x) {
        std::uint8_t b[2] = {std::uint8_t(x), std::uint8_t(x >> 8)};
        put(b, 2);
    }
    void u32(std::uint32_t x) {
        std::uint8_t b[4];
        for (int i = 0; i < 4; ++i) b[i] = std::uint8_t(x >> (8 * i));
        put(b, 4);
    }
    void u64(std::uint64_t x) {
        std::uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = std::uint8_t(x >> (8 * i));
        put(b, 8);
    }
    void f32_payload(const float* p, size_t n) {
        for (size_t i = 0; i < n; ++i) {
            std::uint32_t bits;
            std::memcpy(&bits, p + i, 4);
            u32(bits);
        }
    }
};

std::uint64_t fnv1a_bytes(const std::uint8_t* p, size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

struct ByteReader {
    const std::uint8_t* p;
    size_t n, pos = 0;
    const std::string& path;

    void need(size_t k, const char* what) {
        if (pos + k > n)
            throw FormatError(path + ": truncated checkpoint (while reading " + what + ")");
    }
    std::uint16_t u16(const char* what) {
        need(2, what);
        std::uint16_t x = std::uint16_t(p[pos]) | std::uint16_t(p[pos + 1]) << 8;
        pos += 2;
        return x;
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t x = 0;
        for (int i = 0; i < 4; ++i) x |= std::uint32_t(p[pos + i]) << (8 * i);
        pos += 4;
        return x;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t x = 0;
        for (int i = 0; i < 8; ++i) x |= std::uint64_t(p[pos + i]) << (8 * i);
        pos += 8;
        return x;
    }
    std::string str(size_t k, const char* what) {
        need(k, what);
        std::string s(reinterpret_cast<const char*>(p + pos), k);
        pos += k;
        return s;
    }
};

void write_tensor_entry(ByteSink& sink, const std::string& name, const Tensor<float>& t) {
    sink.u16(static_cast<std::uint16_t>(name.size()));
    sink.put(name.data(), name.size());
    sink.bytes.push_back(0); // dtype f32
    sink.bytes.push_back(4); // ndim
    for (int d : t.dim) sink.u32(static_cast<std::uint32_t>(d));
    sink.u64(static_cast<std::uint64_t>(t.size() * 4));
    sink.f32_payload(t.data(), t.size());
}

} // namespace

void save_checkpoint(const std::string& path, I3Net<float>& net, train::Adam* opt,
                     const TrainStatePayload* state) {
    ByteSink sink;
    sink.put("I3CK", 4);
    sink.u32(kVersion);
    sink.u32(state ? 1u : 0u);
    const std::string cfg = config_to_json(net.cfg);
    sink.u32(static_cast<std::uint32_t>(cfg.size()));
    sink.put(cfg.data(), cfg.size());

    auto params = net.params();
    std::uint32_t n_tensors = static_cast<std::uint32_t>(params.size());
    if (opt) n_tensors += static_cast<std::uint32_t>(2 * params.size());
    sink.u32(n_tensors);
    for (auto& p : params) write_tensor_entry(sink, p.name, *p.value);
    if (opt) {
        auto& m = opt->moments_m();
        auto& v = opt->moments_v();
        for (size_t i = 0; i < params.size(); ++i) {
            write_tensor_entry(sink, "opt.m." + params[i].name, m[i]);
            write_tensor_entry(sink, "opt.v." + params[i].name, v[i]);
        }
    }
    if (state) {
        json j;
        j["step"] = state->step;
        j["epoch"] = state->epoch;
        j["seed"] = state->seed;
        j["best_psnr"] = state->best_psnr;
        j["best_found"] = state->best_found;
        const std::string s = j.dump();
        sink.u32(static_cast<std::uint32_t>(s.size()));
        sink.put(s.data(), s.size());
    }
    sink.u64(fnv1a_bytes(sink.bytes.data(), sink.bytes.size()));

    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open for write: " + path);
    size_t wrote = std::fwrite(sink.bytes.data(), 1, sink.bytes.size(), f);
    std::fclose(f);
    if (wrote != sink.bytes.size()) throw IoError("short write: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open: " + path);
    std::fseek(f, 0, SEEK_END);
    long len = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    std::vector<std::uint8_t> bytes(static_cast<size_t>(len > 0 ? len : 0));
    size_t got = bytes.empty() ? 0 : std::fread(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
    if (got != bytes.size()) throw IoError("short read: " + path);
    if (bytes.size() < 4 + 4 + 4 + 8) throw FormatError(path + ": truncated checkpoint (header)");
    if (std::memcmp(bytes.data(), "I3CK", 4) != 0) throw FormatError(path + ": bad magic");

    // Hash covers everything before the trailing u64.
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) stored |= std::uint64_t(bytes[bytes.size() - 8 + i]) << (8 * i);
    if (fnv1a_bytes(bytes.data(), bytes.size() - 8) != stored)
        throw FormatError(path + ": manifest hash mismatch");

    ByteReader r{bytes.data(), bytes.size() - 8, 4, path};
    const std::uint32_t version = r.u32("version");
    if (version != kVersion)
        throw FormatError(path + ": unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t flags = r.u32("flags");
    const std::uint32_t cfg_len = r.u32("config length");
    LoadedCheckpoint out;
    out.config = config_from_json(r.str(cfg_len, "config"));
    const std::uint32_t n_tensors = r.u32("tensor count");
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        const std::uint16_t name_len = r.u16("tensor name length");
        std::string name = r.str(name_len, "tensor name");
        r.need(2, "tensor dtype/ndim");
        const std::uint8_t dtype = r.p[r.pos++];
        const std::uint8_t ndim = r.p[r.pos++];
        if (dtype != 0) throw FormatError(path + ": entry " + name + " has unsupported dtype");
        if (ndim != 4) throw FormatError(path + ": entry " + name + " has unsupported rank");
        int dims[4];
        for (int d = 0; d < 4; ++d) dims[d] = static_cast<int>(r.u32("tensor dims"));
        const std::uint64_t byte_len = r.u64("tensor payload length");
        const std::uint64_t expect = std::uint64_t(dims[0]) * dims[1] * dims[2] * dims[3] * 4;
        if (byte_len != expect)
            throw FormatError(path + ": entry " + name + " payload length mismatch");
        r.need(byte_len, "tensor payload");
        Tensor<float> t(dims[0], dims[1], dims[2], dims[3]);
        for (size_t e = 0; e < t.size(); ++e) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) bits |= std::uint32_t(r.p[r.pos + 4 * e + b]) << (8 * b);
            std::memcpy(&t.v[e], &bits, 4);
        }
        r.pos += byte_len;
        if (!out.tensors.emplace(std::move(name), std::move(t)).second)
            throw FormatError(path + ": duplicate tensor entry");
    }
    if (flags & 1u) {
        const std::uint32_t state_len = r.u32("state length");
        json j;
        try {
            j = json::parse(r.str(state_len, "state"));
            TrainStatePayload st;
            st.step = j.at("step").get<std::int64_t>();
            st.epoch = j.at("epoch").get<int>();
            st.seed = j.at("seed").get<std::uint64_t>();
            st.best_psnr = j.at("best_psnr").get<double>();
            st.best_found = j.at("best_found").get<bool>();
            out.state = st;
        } catch (const json::exception& e) {
            throw FormatError(path + ": train state JSON: " + e.what());
        }
    }
    if (r.pos != r.n) throw FormatError(path + ": trailing bytes before manifest hash");
    return out;
}

I3Net<float> model_from_checkpoint(const LoadedCheckpoint& ck) {
    I3Net<float> net(ck.config);
    for (auto& p : net.params()) {
        auto it = ck.tensors.find(p.name);
        if (it == ck.tensors.end())
            throw FormatError("checkpoint is missing parameter " + p.name);
        if (it->second.dim != p.value->dim)
            throw FormatError("checkpoint parameter " + p.name + " has shape " +
                              it->second.shape_str() + ", model expects " + p.value->shape_str());
        *p.value = it->second;
    }
    return net;
}

void apply_optimizer_state(const LoadedCheckpoint& ck, train::Adam& opt) {
    auto& params = opt.params();
    for (size_t i = 0; i < params.size(); ++i) {
        auto m = ck.tensors.find("opt.m." + params[i].name);
        auto v = ck.tensors.find("opt.v." + params[i].name);
        if (m == ck.tensors.end() || v == ck.tensors.end())
            throw FormatError("checkpoint is missing optimizer state for " + params[i].name);
        opt.moments_m()[i] = m->second;
        opt.moments_v()[i] = v->second;
    }
    if (ck.state) opt.set_step_count(ck.state->step);
}

} // namespace i3net::model
