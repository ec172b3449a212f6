#pragma once

#include "ssbnn/rng.hpp"
#include "ssbnn/tensor.hpp"

#include <vector>

namespace ssbnn {

struct Dataset {
    Tensor inputs;            // [n x p]
    Tensor targets;           // [n x k] regression targets
    std::vector<int> labels;  // class ids for classification
    std::string split_tag;    // "train" or "test"

    bool is_classification() const { return !labels.empty(); }
    std::size_t size() const { return inputs.rows(); }

    void validate() const {
        if (!inputs.all_finite()) throw ValueError("dataset: non-finite inputs");
        if (is_classification()) {
            if (labels.size() != inputs.rows())
                throw ValueError("dataset: label count " + std::to_string(labels.size()) +
                                 " != row count " + std::to_string(inputs.rows()));
        } else if (targets.rows() != inputs.rows()) {
            throw ValueError("dataset: target rows " + std::to_string(targets.rows()) +
                             " != input rows " + std::to_string(inputs.rows()));
        }
    }
};

/// Teacher families for synthetic regression data.
enum class TeacherKind { Constant, Sin, Product, SparseMlp };

struct TeacherSpec {
    TeacherKind kind = TeacherKind::Sin;
    std::size_t input_dim = 1;
    double constant = 0.0;
    // sparse MLP teacher: widths and per-layer active node counts
    std::vector<std::size_t> widths;
    std::vector<std::size_t> active;  // s_l active nodes per hidden layer
    double weight_bound = 1.0;        // B_l scale on teacher weights
};

/// Evaluates the noise-free teacher on one input row.
double teacher_eval(const TeacherSpec& spec, const double* x, std::uint64_t seed);

struct SyntheticPair {
    Dataset train;
    Dataset test;
};

/// x ~ U[0,1]^p, y = teacher(x) + N(0, noise_sigma^2). Deterministic in
/// the seed; the test split uses an independent stream.
SyntheticPair gen_synthetic(const TeacherSpec& spec, std::size_t n_train,
                            std::size_t n_test, double noise_sigma, std::uint64_t seed);

/// Deterministic 10-class image-like dataset (28x28 inputs in [0,255])
/// used as an offline stand-in for digit classification.
SyntheticPair gen_synthetic_images(std::size_t n_train, std::size_t n_test,
                                   std::uint64_t seed);

}  // namespace ssbnn
