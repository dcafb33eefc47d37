#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparc/encoder.hpp"
#include "sparc/phrase.hpp"
#include "sparc/sparse_rep.hpp"
#include "sparc/vocab.hpp"

namespace sparc {

struct ModelConfig {
    EncoderConfig enc;
    int d_p = 32;                 // dense phrase head width
    std::vector<int> orders{1, 2};
    int max_span_len = 20;        // J
    std::uint64_t seed = 0;
};

/// Everything the engine trains: encoder layers, per-role/order attention
/// heads, and the dense phrase heads, plus the vocabulary they were built on.
struct ModelParams {
    ModelConfig cfg;
    Vocabulary vocab;
    EncoderParams encoder;
    SparcParams sparc;
    DensePhraseParams dense;
};

ModelParams init_model(const ModelConfig& cfg, Vocabulary vocab);

/// Gradient container mirroring the trainable tensors of ModelParams.
struct ModelGrads {
    EncoderGrads encoder;
    std::array<std::vector<SparcHeadGrads>, 2> sparc;  // [role][order index]
    Mat dense_doc_start, dense_doc_end, dense_q_start, dense_q_end;
};

ModelGrads zero_grads(const ModelParams& params);
void scale_grads(ModelGrads& g, double factor);
void add_grads(ModelGrads& into, const ModelGrads& from);

/// Flat view of one tensor; params and grads expose them in identical order,
/// which is what the optimizer and the finite-difference checks iterate.
struct TensorRef {
    std::string name;
    double* data;
    std::size_t size;
};

/// Trainable tensors only: embeddings are frozen and never appear here.
std::vector<TensorRef> trainable_tensors(ModelParams& params);
std::vector<TensorRef> grad_tensors(ModelGrads& grads);

/// FNV-1a fingerprint over config + vocabulary + every parameter tensor
/// (embeddings included); indexes record it and queries verify it.
std::uint64_t model_hash(const ModelParams& params);

void save_model(const ModelParams& params, const std::string& path);
ModelParams load_model(const std::string& path);

}  // namespace sparc
