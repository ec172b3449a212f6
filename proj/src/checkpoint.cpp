#include "ssbnn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace ssbnn {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'B', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::ostream& f, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    f.write(reinterpret_cast<char*>(b), 8);
}

void put_f64(std::ostream& f, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(f, bits);
}

std::uint64_t get_u64(std::istream& f, const std::string& path) {
    unsigned char b[8];
    f.read(reinterpret_cast<char*>(b), 8);
    if (f.gcount() != 8) throw CheckpointError(path + ": truncated checkpoint");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& f, const std::string& path) {
    std::uint64_t bits = get_u64(f, path);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void put_tensor(std::ostream& f, const Tensor& t) {
    put_u64(f, t.shape.size());
    for (std::size_t d : t.shape) put_u64(f, d);
    for (double v : t.data) put_f64(f, v);
}

Tensor get_tensor(std::istream& f, const std::string& path) {
    std::size_t rank = get_u64(f, path);
    if (rank > 4) throw CheckpointError(path + ": corrupt tensor rank");
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = get_u64(f, path);
    Tensor t(shape);
    for (double& v : t.data) v = get_f64(f, path);
    return t;
}

void put_opt_leaf(std::ostream& f, const ad::NodePtr& p) {
    put_u64(f, p ? 1 : 0);
    if (p) put_tensor(f, p->value);
}

ad::NodePtr get_opt_leaf(std::istream& f, const std::string& path) {
    if (get_u64(f, path) == 0) return nullptr;
    return ad::leaf(get_tensor(f, path));
}

void put_string(std::ostream& f, const std::string& s) {
    put_u64(f, s.size());
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& f, const std::string& path) {
    std::size_t n = get_u64(f, path);
    if (n > (1u << 26)) throw CheckpointError(path + ": corrupt string length");
    std::string s(n, '\0');
    f.read(s.data(), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(f.gcount()) != n)
        throw CheckpointError(path + ": truncated checkpoint");
    return s;
}

void put_rng(std::ostream& f, const SeededRng& r) {
    put_u64(f, r.seed());
    put_u64(f, r.stream());
    put_u64(f, r.counter());
}

SeededRng get_rng(std::istream& f, const std::string& path) {
    std::uint64_t seed = get_u64(f, path);
    std::uint64_t stream = get_u64(f, path);
    SeededRng r(seed, stream);
    r.set_counter(get_u64(f, path));
    return r;
}

}  // namespace

void checkpoint_save(const std::string& path, const Network& net, std::uint64_t seed,
                     const NetRng& rng) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw CheckpointError(path + ": cannot open for writing");
    f.write(kMagic, 4);
    put_u64(f, kVersion);
    put_u64(f, seed);

    put_u64(f, net.cfg.widths.size());
    for (std::size_t w : net.cfg.widths) put_u64(f, w);
    put_u64(f, static_cast<std::uint64_t>(net.cfg.activation));
    put_u64(f, static_cast<std::uint64_t>(net.cfg.likelihood));
    put_u64(f, static_cast<std::uint64_t>(net.cfg.parameterization));
    const auto& p = net.cfg.prior;
    put_u64(f, static_cast<std::uint64_t>(p.kind));
    put_f64(f, p.sigma0_sq);
    put_f64(f, p.a0);
    put_f64(f, p.b0);
    put_f64(f, p.d0_sq);
    put_f64(f, p.c_reg_sq);
    put_u64(f, p.lambda.size());
    for (double l : p.lambda) put_f64(f, l);
    put_f64(f, net.relax.temperature);
    put_u64(f, net.relax.hard_forward ? 1 : 0);

    put_u64(f, net.layers.size());
    for (const auto& st : net.layers) {
        put_u64(f, st.fan_in);
        put_u64(f, st.fan_out);
        put_u64(f, st.is_output ? 1 : 0);
        put_opt_leaf(f, st.mu);
        put_opt_leaf(f, st.rho);
        put_opt_leaf(f, st.gamma_logit);
        put_opt_leaf(f, st.mu_local);
        put_opt_leaf(f, st.rho_local);
        put_opt_leaf(f, st.mu_local2);
        put_opt_leaf(f, st.rho_local2);
    }
    put_opt_leaf(f, net.global.mu_1);
    put_opt_leaf(f, net.global.rho_1);
    put_opt_leaf(f, net.global.mu_2);
    put_opt_leaf(f, net.global.rho_2);

    put_u64(f, rng.weight.size());
    for (std::size_t l = 0; l < rng.weight.size(); ++l) {
        put_rng(f, rng.weight[l]);
        put_rng(f, rng.z[l]);
        put_rng(f, rng.scale[l]);
    }
    put_string(f, "end");
}

CheckpointState checkpoint_load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError(path + ": cannot open");
    char magic[4];
    f.read(magic, 4);
    if (f.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
        throw CheckpointError(path + ": not a checkpoint file (bad magic)");
    std::uint64_t version = get_u64(f, path);
    if (version != kVersion)
        throw CheckpointError(path + ": unsupported checkpoint version " +
                              std::to_string(version));
    CheckpointState st;
    st.seed = get_u64(f, path);

    auto& cfg = st.net.cfg;
    std::size_t nw = get_u64(f, path);
    if (nw > 1024) throw CheckpointError(path + ": corrupt width count");
    cfg.widths.resize(nw);
    for (auto& w : cfg.widths) w = get_u64(f, path);
    cfg.activation = static_cast<Activation>(get_u64(f, path));
    cfg.likelihood = static_cast<Likelihood>(get_u64(f, path));
    cfg.parameterization = static_cast<Parameterization>(get_u64(f, path));
    auto& p = cfg.prior;
    p.kind = static_cast<PriorKind>(get_u64(f, path));
    p.sigma0_sq = get_f64(f, path);
    p.a0 = get_f64(f, path);
    p.b0 = get_f64(f, path);
    p.d0_sq = get_f64(f, path);
    p.c_reg_sq = get_f64(f, path);
    std::size_t nl = get_u64(f, path);
    if (nl > 1024) throw CheckpointError(path + ": corrupt lambda count");
    p.lambda.resize(nl);
    for (auto& l : p.lambda) l = get_f64(f, path);
    st.net.relax.temperature = get_f64(f, path);
    st.net.relax.hard_forward = get_u64(f, path) != 0;

    std::size_t n_layers = get_u64(f, path);
    if (n_layers > 1024) throw CheckpointError(path + ": corrupt layer count");
    for (std::size_t l = 0; l < n_layers; ++l) {
        LayerVariationalState layer;
        layer.fan_in = get_u64(f, path);
        layer.fan_out = get_u64(f, path);
        layer.is_output = get_u64(f, path) != 0;
        layer.mu = get_opt_leaf(f, path);
        layer.rho = get_opt_leaf(f, path);
        layer.gamma_logit = get_opt_leaf(f, path);
        layer.mu_local = get_opt_leaf(f, path);
        layer.rho_local = get_opt_leaf(f, path);
        layer.mu_local2 = get_opt_leaf(f, path);
        layer.rho_local2 = get_opt_leaf(f, path);
        st.net.layers.push_back(std::move(layer));
    }
    st.net.global.mu_1 = get_opt_leaf(f, path);
    st.net.global.rho_1 = get_opt_leaf(f, path);
    st.net.global.mu_2 = get_opt_leaf(f, path);
    st.net.global.rho_2 = get_opt_leaf(f, path);

    std::size_t n_rng = get_u64(f, path);
    if (n_rng > 1024) throw CheckpointError(path + ": corrupt rng count");
    for (std::size_t l = 0; l < n_rng; ++l) {
        st.rng.weight.push_back(get_rng(f, path));
        st.rng.z.push_back(get_rng(f, path));
        st.rng.scale.push_back(get_rng(f, path));
    }
    if (get_string(f, path) != "end")
        throw CheckpointError(path + ": corrupt trailer");
    return st;
}

}  // namespace ssbnn
