#include "metaenc/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "metaenc/errors.hpp"
#include "metaenc/train.hpp"

namespace metaenc {

namespace {

constexpr char kMagic[4] = {'M', 'A', 'E', '1'};
constexpr int kVersion = 1;

static_assert(sizeof(double) == 8);

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v),
                            static_cast<unsigned char>(v >> 8),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<char*>(buf), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw IoError(path + ": truncated checkpoint");
    return static_cast<std::uint32_t>(buf[0]) | (static_cast<std::uint32_t>(buf[1]) << 8) |
           (static_cast<std::uint32_t>(buf[2]) << 16) |
           (static_cast<std::uint32_t>(buf[3]) << 24);
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    ckpt.model.validate();
    nlohmann::json header;
    header["version"] = ckpt.version;
    header["mode"] = mode_name(ckpt.model.mode);
    header["n"] = ckpt.model.full_dim();
    header["h"] = ckpt.model.hidden_dim();
    header["r"] = ckpt.model.reduced_dim();
    header["gn"] = {{"iterations", ckpt.model.gn.iterations},
                    {"damping", ckpt.model.gn.damping},
                    {"cg_tol", ckpt.model.gn.cg_tol}};
    header["seed"] = ckpt.seed;
    header["config_digest"] = ckpt.config_digest;

    const Tensor params = model_param_vector(ckpt.model);
    header["param_count"] = params.numel();

    const std::string head = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out.write(kMagic, 4);
    write_u32(out, static_cast<std::uint32_t>(head.size()));
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    // doubles written little-endian; this code targets little-endian hosts
    out.write(reinterpret_cast<const char*>(params.data.data()),
              static_cast<std::streamsize>(params.numel() * sizeof(double)));
    if (!out) throw IoError(path + ": write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open for reading");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError(path + ": bad checkpoint magic");
    const std::uint32_t head_len = read_u32(in, path);
    std::string head(head_len, '\0');
    in.read(head.data(), head_len);
    if (!in) throw IoError(path + ": truncated header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(head);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": invalid header JSON: " + e.what());
    }
    if (header.value("version", -1) != kVersion)
        throw IoError(path + ": unsupported checkpoint version " +
                      std::to_string(header.value("version", -1)));

    const std::size_t n = header.at("n");
    const std::size_t h = header.at("h");
    const std::size_t r = header.at("r");
    const std::size_t expected = header.at("param_count");
    if (expected != param_count(r, h, n) + param_count(n, h, r))
        throw IoError(path + ": header dims do not match declared param_count");

    std::vector<double> params(expected);
    in.read(reinterpret_cast<char*>(params.data()),
            static_cast<std::streamsize>(expected * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != expected * sizeof(double))
        throw IoError(path + ": payload shorter than header-declared length");

    Checkpoint ckpt;
    ckpt.version = kVersion;
    ckpt.seed = header.value("seed", 0ULL);
    ckpt.config_digest = header.value("config_digest", std::string{});
    ckpt.model.mode = mode_from_name(header.at("mode"));
    ckpt.model.gn.iterations = header.at("gn").at("iterations");
    ckpt.model.gn.damping = header.at("gn").at("damping");
    ckpt.model.gn.cg_tol = header.at("gn").at("cg_tol");
    ckpt.model.decoder = init_mlp(r, h, n, 0);
    ckpt.model.encoder0 = init_mlp(n, h, r, 0);
    load_model_params(ckpt.model, Tensor::vector(std::move(params)));
    ckpt.model.validate();
    return ckpt;
}

}  // namespace metaenc
