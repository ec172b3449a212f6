#include "ssbnn/dataset.hpp"

#include <cmath>

namespace ssbnn {

namespace {

/// Deterministic sparse-MLP teacher weights: rows past the declared
/// active count are zero, giving a teacher with known (s, B).
std::vector<Tensor> build_teacher_weights(const TeacherSpec& spec, std::uint64_t seed) {
    SeededRng rng(seed, 710);
    std::vector<Tensor> mats;
    for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
        std::size_t I = spec.widths[l], O = spec.widths[l + 1];
        bool is_output = l + 2 == spec.widths.size();
        std::size_t act = is_output || l >= spec.active.size()
                              ? O
                              : std::min(spec.active[l], O);
        Tensor W({O, I + 1});
        for (std::size_t j = 0; j < O; ++j)
            for (std::size_t i = 0; i <= I; ++i) {
                double v = spec.weight_bound * (2.0 * rng.uniform() - 1.0);
                W.at(j, i) = j < act ? v : 0.0;
            }
        mats.push_back(std::move(W));
    }
    return mats;
}

double swish_scalar(double x) { return x / (1.0 + std::exp(-x)); }

}  // namespace

double teacher_eval(const TeacherSpec& spec, const double* x, std::uint64_t seed) {
    switch (spec.kind) {
        case TeacherKind::Constant:
            return spec.constant;
        case TeacherKind::Sin:
            return std::sin(2.0 * M_PI * x[0]);
        case TeacherKind::Product: {
            double p = 1.0;
            for (std::size_t j = 0; j < spec.input_dim; ++j) p *= std::sin(M_PI * x[j]);
            return p;
        }
        case TeacherKind::SparseMlp: {
            auto mats = build_teacher_weights(spec, seed);
            std::vector<double> h(x, x + spec.input_dim);
            for (std::size_t l = 0; l < mats.size(); ++l) {
                const Tensor& W = mats[l];
                std::vector<double> out(W.rows());
                for (std::size_t j = 0; j < W.rows(); ++j) {
                    double s = W.at(j, 0);
                    for (std::size_t i = 0; i < h.size(); ++i) s += W.at(j, i + 1) * h[i];
                    out[j] = l + 1 < mats.size() ? swish_scalar(s) : s;
                }
                h = std::move(out);
            }
            return h[0];
        }
    }
    throw ValueError("teacher_eval: unknown teacher kind");
}

namespace {

Dataset make_split(const TeacherSpec& spec, std::size_t n, double noise_sigma,
                   std::uint64_t seed, std::uint64_t stream, const char* tag) {
    if (n < 2) throw ValueError("gen_synthetic: need n >= 2");
    std::size_t p = spec.kind == TeacherKind::SparseMlp ? spec.widths.front()
                                                        : spec.input_dim;
    SeededRng rng(seed, stream);
    Dataset d;
    d.split_tag = tag;
    d.inputs = Tensor({n, p});
    d.targets = Tensor({n, 1});
    std::vector<double> row(p);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            row[j] = rng.uniform();
            d.inputs.at(i, j) = row[j];
        }
        double eta = teacher_eval(spec, row.data(), seed);
        d.targets.at(i, 0) = eta + (noise_sigma > 0 ? noise_sigma * rng.normal() : 0.0);
    }
    return d;
}

}  // namespace

SyntheticPair gen_synthetic(const TeacherSpec& spec, std::size_t n_train,
                            std::size_t n_test, double noise_sigma, std::uint64_t seed) {
    SyntheticPair pair;
    pair.train = make_split(spec, n_train, noise_sigma, seed, 700, "train");
    pair.test = make_split(spec, n_test, noise_sigma, seed, 701, "test");
    return pair;
}

SyntheticPair gen_synthetic_images(std::size_t n_train, std::size_t n_test,
                                   std::uint64_t seed) {
    constexpr std::size_t kPixels = 28 * 28;
    constexpr std::size_t kClasses = 10;
    SeededRng proto_rng(seed, 720);
    std::vector<double> prototypes(kClasses * kPixels);
    for (double& v : prototypes) v = 255.0 * proto_rng.uniform();

    auto make = [&](std::size_t n, std::uint64_t stream, const char* tag) {
        SeededRng rng(seed, stream);
        Dataset d;
        d.split_tag = tag;
        d.inputs = Tensor({n, kPixels});
        d.labels.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            int c = static_cast<int>(rng.next_u64() % kClasses);
            d.labels[i] = c;
            for (std::size_t j = 0; j < kPixels; ++j) {
                double v = prototypes[c * kPixels + j] + 64.0 * rng.normal();
                v = std::min(255.0, std::max(0.0, v));
                d.inputs.at(i, j) = std::floor(v);  // byte-valued, IDX round-trips
            }
        }
        return d;
    };
    SyntheticPair pair;
    pair.train = make(n_train, 721, "train");
    pair.test = make(n_test, 722, "test");
    return pair;
}

}  // namespace ssbnn
