#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "tuplemax/errors.hpp"
#include "tuplemax/losses.hpp"

namespace tuplemax {

// One example: T frames of d features each, plus its class label.
struct FeatureSequence {
  Eigen::MatrixXd frames;  // T x d, one row per frame
  int label = 0;
};

// One recurrent layer: cell_size memory cells, optionally followed by a
// linear projection (projection_size > 0) whose output feeds both the next
// layer and this layer's own recurrence.
struct RecurrentLayerSpec {
  int cell_size = 0;
  int projection_size = 0;  // 0 = no projection

  int output_size() const { return projection_size > 0 ? projection_size : cell_size; }
};

struct ModelConfig {
  int input_dim = 8;
  int max_seq_len = 64;  // frames beyond this are truncated before anything else
  std::vector<RecurrentLayerSpec> layers{{32, 16}, {24, 16}, {16, 0}};
  int num_classes = 6;

  void validate() const;
  int concat_dim() const { return 2 * input_dim; }
  int embedding_dim() const { return layers.back().output_size(); }
};

// Parameters of one recurrent layer. Gate rows within the packed 4H x *
// matrices are ordered: input gate, forget gate, cell candidate, output gate.
struct LayerParameters {
  Eigen::MatrixXd w_input;       // 4H x layer_input_dim
  Eigen::MatrixXd w_recurrent;   // 4H x output_size (recurrence reads the projected output)
  Eigen::VectorXd bias;          // 4H
  Eigen::MatrixXd w_projection;  // projection_size x H; 0x0 when no projection
};

// All trainable arrays. The canonical array order (used for serialization,
// gradient flattening and the norm clip) is: for each layer in order
// w_input, w_recurrent, bias, w_projection; then w_head, b_head. Elements
// within an array are visited in Eigen's column-major storage order.
struct ModelParameters {
  std::vector<LayerParameters> layers;
  Eigen::MatrixXd w_head;  // num_classes x embedding_dim
  Eigen::VectorXd b_head;  // num_classes
};

// Gradients mirror the parameter layout exactly.
using ParameterGradients = ModelParameters;

template <typename Params, typename Fn>
void for_each_array(Params& params, Fn&& fn) {
  for (auto& layer : params.layers) {
    fn(layer.w_input.data(), layer.w_input.size());
    fn(layer.w_recurrent.data(), layer.w_recurrent.size());
    fn(layer.bias.data(), layer.bias.size());
    if (layer.w_projection.size() > 0) fn(layer.w_projection.data(), layer.w_projection.size());
  }
  fn(params.w_head.data(), params.w_head.size());
  fn(params.b_head.data(), params.b_head.size());
}

// Per-timestep activations kept for backpropagation through time.
struct LayerTrace {
  std::vector<Eigen::VectorXd> input;        // x_t fed to this layer
  std::vector<Eigen::VectorXd> gate_input;   // i_t (post-sigmoid)
  std::vector<Eigen::VectorXd> gate_forget;  // f_t
  std::vector<Eigen::VectorXd> gate_cell;    // g_t (post-tanh candidate)
  std::vector<Eigen::VectorXd> gate_output;  // o_t
  std::vector<Eigen::VectorXd> cell;         // c_t
  std::vector<Eigen::VectorXd> cell_tanh;    // tanh(c_t)
  std::vector<Eigen::VectorXd> output;       // r_t (projection applied when configured)
};

struct ForwardTrace {
  int seq_len = 0;  // post-subsampling length
  std::vector<LayerTrace> layers;
  Eigen::VectorXd embedding;  // last-frame output of the top layer, pre-ReLU
  Eigen::VectorXd relu_out;
  Logits logits;
};

// Concatenates every two neighboring frames: sequence length halves, frame
// dimension doubles; an odd trailing frame is dropped. Throws
// SequenceTooShortError for T < 2.
Eigen::MatrixXd concat_subsample(const Eigen::MatrixXd& frames);

// Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)]; biases zero
// except the forget gate block, which starts at 1.
ModelParameters init_parameters(const ModelConfig& cfg, std::uint64_t seed);

ParameterGradients zero_gradients(const ModelConfig& cfg);

// Throws InvalidInputError when parameter shapes disagree with the config.
void validate_parameters(const ModelConfig& cfg, const ModelParameters& params);

// Truncates to max_seq_len, applies concat_subsample, runs the recurrent
// stack, takes the last frame, applies ReLU and the linear head. Returns the
// full trace with the logits.
ForwardTrace forward(const ModelConfig& cfg, const ModelParameters& params,
                     const Eigen::MatrixXd& frames);

// Backpropagation through time for a trace produced by forward() with the
// same parameters; dloss_dlogits is the loss gradient at the head output.
ParameterGradients backward(const ModelConfig& cfg, const ModelParameters& params,
                            const ForwardTrace& trace, const Eigen::VectorXd& dloss_dlogits);

}  // namespace tuplemax
