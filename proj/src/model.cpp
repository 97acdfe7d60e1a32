#include "metaenc/model.hpp"

#include "metaenc/errors.hpp"

namespace metaenc {

std::string mode_name(EncoderMode m) {
    return m == EncoderMode::direct ? "direct" : "gauss_newton";
}

EncoderMode mode_from_name(const std::string& name) {
    if (name == "direct") return EncoderMode::direct;
    if (name == "gauss_newton") return EncoderMode::gauss_newton;
    throw ConfigError("unknown encoder mode '" + name + "'");
}

void AutoencoderModel::validate() const {
    decoder.validate();
    encoder0.validate();
    if (decoder.in_dim() != encoder0.out_dim() || decoder.out_dim() != encoder0.in_dim())
        throw ShapeError("model: decoder " + std::to_string(decoder.in_dim()) + "->" +
                         std::to_string(decoder.out_dim()) + " does not pair with encoder " +
                         std::to_string(encoder0.in_dim()) + "->" +
                         std::to_string(encoder0.out_dim()));
    if (mode == EncoderMode::gauss_newton) gn.validate();
}

AutoencoderModel make_model(std::size_t n, std::size_t h, std::size_t r,
                            EncoderMode mode, std::uint64_t seed, const GnConfig& gn) {
    AutoencoderModel m;
    m.decoder = init_mlp(r, h, n, seed);
    m.encoder0 = init_mlp(n, h, r, seed + 1);
    m.mode = mode;
    m.gn = gn;
    m.validate();
    return m;
}

Tensor encode(const AutoencoderModel& m, const Tensor& x) {
    if (m.mode == EncoderMode::direct) return mlp_apply(m.encoder0, x);
    return gauss_newton_encode_escalating(m.decoder, m.encoder0, x, m.gn);
}

Tensor decode(const AutoencoderModel& m, const Tensor& u) {
    return mlp_apply(m.decoder, u);
}

Codec make_codec(const AutoencoderModel& m) {
    Codec c;
    c.full_dim = m.full_dim();
    c.reduced_dim = m.reduced_dim();
    c.encode = [m](const Tensor& x) { return encode(m, x); };
    c.decode = [m](const Tensor& u) { return decode(m, u); };
    return c;
}

}  // namespace metaenc
