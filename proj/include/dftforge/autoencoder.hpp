#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dftforge/tensor.hpp"
#include "dftforge/util.hpp"

namespace dftforge {

// Multi-task autoencoder: encoder f (input->hidden->embed, ReLU between,
// final layer linear), decoder g (embed->hidden->input, same scheme) and a
// strictly linear classifier h (embed->labels). Trained jointly on
//   L = L1 + alpha*L2 + beta*L3
// with L1 the mean squared reconstruction error, L2 the softmax cross
// entropy of the label head and L3 a margin contrastive loss over
// L2-normalized embeddings, averaged over all B(B-1)/2 unordered pairs.

struct AutoencoderConfig {
    std::size_t input_dim = 512;
    std::size_t hidden_dim = 256;
    std::size_t embed_dim = 128;
    std::size_t label_dim = 4;

    double alpha = 0.01;
    double beta = 0.01;
    double margin = 1.0;

    // Training hyperparameters (Adam).
    double lr = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t batch_size = 16;
    std::size_t epochs = 200;
    std::uint64_t seed = 1;

    std::string to_json() const;
    static AutoencoderConfig from_json(const std::string& text);
};

struct DenseLayer {
    Mat W;                 // out_dim x in_dim
    std::vector<double> b; // out_dim

    static DenseLayer make(std::size_t out_dim, std::size_t in_dim) {
        DenseLayer l;
        l.W = Mat(out_dim, in_dim);
        l.b.assign(out_dim, 0.0);
        return l;
    }
    std::size_t param_count() const { return W.a.size() + b.size(); }
};

struct Batch {
    Mat X; // B x input_dim
    Mat Y; // B x label_dim, one-hot rows
};

struct LossBreakdown {
    double l1 = 0, l2 = 0, l3 = 0, total = 0;
    double alpha = 0, beta = 0;
};

// Everything the backward pass needs from the shared forward pass.
struct ForwardCache {
    Mat h1_pre, h1; // B x hidden
    Mat z;          // B x embed
    Mat h2_pre, h2; // B x hidden
    Mat x_hat;      // B x input
    Mat logits;     // B x label
    Mat probs;      // B x label (softmax rows)
    Mat z_norm;     // B x embed (L2-normalized rows)
    std::vector<double> z_row_norm; // per-row ||z||
};

struct Gradients {
    DenseLayer enc1, enc2, dec1, dec2, cls; // same shapes as the model

    void require_finite() const;
};

class AutoencoderModel {
public:
    AutoencoderConfig cfg;
    DenseLayer enc1, enc2; // f
    DenseLayer dec1, dec2; // g
    DenseLayer cls;        // h

    // Uniform fan-in-scaled init, biases zero, deterministic under seed.
    static AutoencoderModel init(const AutoencoderConfig& cfg);

    std::vector<double> encode(const std::vector<double>& x) const;

    ForwardCache forward(const Mat& X) const;

    LossBreakdown joint_loss(const Batch& batch, ForwardCache* cache = nullptr) const;
    Gradients backward(const Batch& batch, const ForwardCache& fc) const;

    std::size_t param_count() const;

    std::string to_json() const;
    static AutoencoderModel from_json(const std::string& text);
};

// The individual loss terms, exposed for direct checking.
double reconstruction_loss(const Mat& X, const Mat& X_hat);
double classification_loss(const Mat& logits, const Mat& Y); // max-shifted softmax CE
double contrastive_loss(const Mat& Z, const Mat& Y, double margin);

struct TrainSample {
    std::vector<double> x;
    std::array<int, 4> y;
};

struct EpochLog {
    std::size_t epoch = 0;
    LossBreakdown loss; // averaged over the epoch's batches
};

struct TrainResult {
    AutoencoderModel model;
    std::vector<EpochLog> log;
    std::vector<std::string> warnings;
    bool diverged = false; // true if training aborted on non-finite loss
};

// Mini-batch Adam over the joint loss. Seeded shuffling, deterministic and
// bit-reproducible for a fixed config. Zero feature vectors are dropped with
// a warning; batches of size < 2 at the epoch tail are skipped (the
// contrastive term needs pairs). On divergence the last epoch-end checkpoint
// is returned.
TrainResult train(const std::vector<TrainSample>& corpus, const AutoencoderConfig& cfg);

std::string training_log_csv(const std::vector<EpochLog>& log);

} // namespace dftforge
