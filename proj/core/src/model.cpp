#include "tuplemax/model.hpp"

#include <cmath>
#include <string>

#include "tuplemax/rng.hpp"

namespace tuplemax {

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
  return 1.0 / (1.0 + (-x.array()).exp());
}

Eigen::MatrixXd uniform_matrix(Rng& rng, int rows, int cols, double bound) {
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
  return m;
}

int layer_input_dim(const ModelConfig& cfg, std::size_t layer) {
  return layer == 0 ? cfg.concat_dim() : cfg.layers[layer - 1].output_size();
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dim < 1) throw InvalidInputError("model config: input_dim must be >= 1");
  if (max_seq_len < 2) throw InvalidInputError("model config: max_seq_len must be >= 2");
  if (num_classes < 2) throw InvalidInputError("model config: num_classes must be >= 2");
  if (layers.empty()) throw InvalidInputError("model config: need at least one recurrent layer");
  for (const auto& spec : layers) {
    if (spec.cell_size < 1) throw InvalidInputError("model config: cell_size must be >= 1");
    if (spec.projection_size < 0 ||
        (spec.projection_size > 0 && spec.projection_size >= spec.cell_size))
      throw InvalidInputError("model config: projection_size must be < cell_size");
  }
}

Eigen::MatrixXd concat_subsample(const Eigen::MatrixXd& frames) {
  const Eigen::Index t = frames.rows();
  if (t < 2) throw SequenceTooShortError("concat_subsample: need at least 2 frames");
  const Eigen::Index d = frames.cols();
  const Eigen::Index half = t / 2;  // odd trailing frame is dropped
  Eigen::MatrixXd out(half, 2 * d);
  for (Eigen::Index i = 0; i < half; ++i) {
    out.row(i).head(d) = frames.row(2 * i);
    out.row(i).tail(d) = frames.row(2 * i + 1);
  }
  return out;
}

ModelParameters init_parameters(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  ModelParameters params;
  params.layers.reserve(cfg.layers.size());
  for (std::size_t l = 0; l < cfg.layers.size(); ++l) {
    const auto& spec = cfg.layers[l];
    const int in = layer_input_dim(cfg, l);
    const int h = spec.cell_size;
    const int out = spec.output_size();
    LayerParameters lp;
    lp.w_input = uniform_matrix(rng, 4 * h, in, 1.0 / std::sqrt(static_cast<double>(in)));
    lp.w_recurrent = uniform_matrix(rng, 4 * h, out, 1.0 / std::sqrt(static_cast<double>(out)));
    lp.bias = Eigen::VectorXd::Zero(4 * h);
    lp.bias.segment(h, h).setConstant(1.0);  // forget gate starts open
    if (spec.projection_size > 0)
      lp.w_projection =
          uniform_matrix(rng, spec.projection_size, h, 1.0 / std::sqrt(static_cast<double>(h)));
    else
      lp.w_projection = Eigen::MatrixXd(0, 0);
    params.layers.push_back(std::move(lp));
  }
  const int emb = cfg.embedding_dim();
  params.w_head =
      uniform_matrix(rng, cfg.num_classes, emb, 1.0 / std::sqrt(static_cast<double>(emb)));
  params.b_head = Eigen::VectorXd::Zero(cfg.num_classes);
  return params;
}

ParameterGradients zero_gradients(const ModelConfig& cfg) {
  cfg.validate();
  ParameterGradients grads;
  grads.layers.reserve(cfg.layers.size());
  for (std::size_t l = 0; l < cfg.layers.size(); ++l) {
    const auto& spec = cfg.layers[l];
    const int h = spec.cell_size;
    LayerParameters lp;
    lp.w_input = Eigen::MatrixXd::Zero(4 * h, layer_input_dim(cfg, l));
    lp.w_recurrent = Eigen::MatrixXd::Zero(4 * h, spec.output_size());
    lp.bias = Eigen::VectorXd::Zero(4 * h);
    lp.w_projection = spec.projection_size > 0
                          ? Eigen::MatrixXd::Zero(spec.projection_size, h)
                          : Eigen::MatrixXd(0, 0);
    grads.layers.push_back(std::move(lp));
  }
  grads.w_head = Eigen::MatrixXd::Zero(cfg.num_classes, cfg.embedding_dim());
  grads.b_head = Eigen::VectorXd::Zero(cfg.num_classes);
  return grads;
}

void validate_parameters(const ModelConfig& cfg, const ModelParameters& params) {
  cfg.validate();
  if (params.layers.size() != cfg.layers.size())
    throw InvalidInputError("parameters: layer count mismatch");
  for (std::size_t l = 0; l < cfg.layers.size(); ++l) {
    const auto& spec = cfg.layers[l];
    const auto& lp = params.layers[l];
    const int h = spec.cell_size;
    if (lp.w_input.rows() != 4 * h || lp.w_input.cols() != layer_input_dim(cfg, l) ||
        lp.w_recurrent.rows() != 4 * h || lp.w_recurrent.cols() != spec.output_size() ||
        lp.bias.size() != 4 * h)
      throw InvalidInputError("parameters: layer " + std::to_string(l) + " shape mismatch");
    const int proj_rows = spec.projection_size > 0 ? spec.projection_size : 0;
    if (lp.w_projection.rows() != proj_rows ||
        (proj_rows > 0 && lp.w_projection.cols() != h))
      throw InvalidInputError("parameters: layer " + std::to_string(l) +
                              " projection shape mismatch");
  }
  if (params.w_head.rows() != cfg.num_classes || params.w_head.cols() != cfg.embedding_dim() ||
      params.b_head.size() != cfg.num_classes)
    throw InvalidInputError("parameters: head shape mismatch");
}

ForwardTrace forward(const ModelConfig& cfg, const ModelParameters& params,
                     const Eigen::MatrixXd& frames) {
  validate_parameters(cfg, params);
  if (frames.cols() != cfg.input_dim)
    throw InvalidInputError("forward: expected " + std::to_string(cfg.input_dim) +
                            " features per frame, got " + std::to_string(frames.cols()));
  if (!frames.allFinite()) throw InvalidInputError("forward: frames must be finite");

  const Eigen::Index t_in = std::min<Eigen::Index>(frames.rows(), cfg.max_seq_len);
  const Eigen::MatrixXd concat = concat_subsample(frames.topRows(t_in));
  const int t_len = static_cast<int>(concat.rows());

  ForwardTrace trace;
  trace.seq_len = t_len;
  trace.layers.resize(cfg.layers.size());

  for (std::size_t l = 0; l < cfg.layers.size(); ++l) {
    const auto& spec = cfg.layers[l];
    const auto& lp = params.layers[l];
    const int h = spec.cell_size;
    LayerTrace& lt = trace.layers[l];
    lt.input.resize(t_len);
    lt.gate_input.resize(t_len);
    lt.gate_forget.resize(t_len);
    lt.gate_cell.resize(t_len);
    lt.gate_output.resize(t_len);
    lt.cell.resize(t_len);
    lt.cell_tanh.resize(t_len);
    lt.output.resize(t_len);

    Eigen::VectorXd cell_prev = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd rec_prev = Eigen::VectorXd::Zero(spec.output_size());
    for (int t = 0; t < t_len; ++t) {
      lt.input[t] = l == 0 ? Eigen::VectorXd(concat.row(t)) : trace.layers[l - 1].output[t];
      const Eigen::VectorXd pre = lp.w_input * lt.input[t] + lp.w_recurrent * rec_prev + lp.bias;
      lt.gate_input[t] = sigmoid(pre.segment(0, h));
      lt.gate_forget[t] = sigmoid(pre.segment(h, h));
      lt.gate_cell[t] = pre.segment(2 * h, h).array().tanh();
      lt.gate_output[t] = sigmoid(pre.segment(3 * h, h));
      lt.cell[t] = lt.gate_forget[t].cwiseProduct(cell_prev) +
                   lt.gate_input[t].cwiseProduct(lt.gate_cell[t]);
      lt.cell_tanh[t] = lt.cell[t].array().tanh();
      const Eigen::VectorXd hidden = lt.gate_output[t].cwiseProduct(lt.cell_tanh[t]);
      lt.output[t] = spec.projection_size > 0 ? Eigen::VectorXd(lp.w_projection * hidden) : hidden;
      cell_prev = lt.cell[t];
      rec_prev = lt.output[t];
    }
  }

  trace.embedding = trace.layers.back().output.back();
  trace.relu_out = trace.embedding.cwiseMax(0.0);
  trace.logits = params.w_head * trace.relu_out + params.b_head;
  return trace;
}

ParameterGradients backward(const ModelConfig& cfg, const ModelParameters& params,
                            const ForwardTrace& trace, const Eigen::VectorXd& dloss_dlogits) {
  validate_parameters(cfg, params);
  if (trace.layers.size() != cfg.layers.size() || trace.seq_len < 1)
    throw InvalidInputError("backward: trace does not match the model config");
  if (dloss_dlogits.size() != cfg.num_classes)
    throw InvalidInputError("backward: dloss_dlogits must have num_classes entries");

  const int t_len = trace.seq_len;
  ParameterGradients grads = zero_gradients(cfg);

  grads.w_head = dloss_dlogits * trace.relu_out.transpose();
  grads.b_head = dloss_dlogits;

  const Eigen::VectorXd d_relu = params.w_head.transpose() * dloss_dlogits;
  Eigen::VectorXd d_embedding =
      (trace.embedding.array() > 0.0).select(d_relu, Eigen::VectorXd::Zero(d_relu.size()));

  // d_output[t]: gradient flowing into layer l's output r_t from the layer
  // above (or the head, for the top layer's final step).
  const int top = static_cast<int>(cfg.layers.size()) - 1;
  std::vector<Eigen::VectorXd> d_output(t_len);
  for (int t = 0; t < t_len; ++t)
    d_output[t] = Eigen::VectorXd::Zero(cfg.layers[top].output_size());
  d_output[t_len - 1] = d_embedding;

  for (int l = top; l >= 0; --l) {
    const auto& spec = cfg.layers[l];
    const auto& lp = params.layers[l];
    const auto& lt = trace.layers[l];
    auto& lg = grads.layers[l];
    const int h = spec.cell_size;

    std::vector<Eigen::VectorXd> d_below;
    if (l > 0) {
      d_below.resize(t_len);
      for (int t = 0; t < t_len; ++t)
        d_below[t] = Eigen::VectorXd::Zero(cfg.layers[l - 1].output_size());
    }

    Eigen::VectorXd d_cell_carry = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd d_rec_carry = Eigen::VectorXd::Zero(spec.output_size());
    for (int t = t_len - 1; t >= 0; --t) {
      const Eigen::VectorXd d_out = d_output[t] + d_rec_carry;
      Eigen::VectorXd d_hidden;
      if (spec.projection_size > 0) {
        const Eigen::VectorXd hidden = lt.gate_output[t].cwiseProduct(lt.cell_tanh[t]);
        lg.w_projection += d_out * hidden.transpose();
        d_hidden = lp.w_projection.transpose() * d_out;
      } else {
        d_hidden = d_out;
      }

      const Eigen::VectorXd d_gate_out = d_hidden.cwiseProduct(lt.cell_tanh[t]);
      const Eigen::VectorXd d_cell =
          d_cell_carry + (d_hidden.cwiseProduct(lt.gate_output[t]).array() *
                          (1.0 - lt.cell_tanh[t].array().square()))
                             .matrix();
      const Eigen::VectorXd cell_prev =
          t > 0 ? lt.cell[t - 1] : Eigen::VectorXd(Eigen::VectorXd::Zero(h));
      const Eigen::VectorXd d_gate_in = d_cell.cwiseProduct(lt.gate_cell[t]);
      const Eigen::VectorXd d_gate_forget = d_cell.cwiseProduct(cell_prev);
      const Eigen::VectorXd d_gate_cell = d_cell.cwiseProduct(lt.gate_input[t]);
      d_cell_carry = d_cell.cwiseProduct(lt.gate_forget[t]);

      Eigen::VectorXd d_pre(4 * h);
      d_pre.segment(0, h) =
          d_gate_in.array() * lt.gate_input[t].array() * (1.0 - lt.gate_input[t].array());
      d_pre.segment(h, h) =
          d_gate_forget.array() * lt.gate_forget[t].array() * (1.0 - lt.gate_forget[t].array());
      d_pre.segment(2 * h, h) = d_gate_cell.array() * (1.0 - lt.gate_cell[t].array().square());
      d_pre.segment(3 * h, h) =
          d_gate_out.array() * lt.gate_output[t].array() * (1.0 - lt.gate_output[t].array());

      const Eigen::VectorXd rec_prev =
          t > 0 ? lt.output[t - 1] : Eigen::VectorXd(Eigen::VectorXd::Zero(spec.output_size()));
      lg.w_input += d_pre * lt.input[t].transpose();
      lg.w_recurrent += d_pre * rec_prev.transpose();
      lg.bias += d_pre;
      if (l > 0) d_below[t] = lp.w_input.transpose() * d_pre;
      d_rec_carry = lp.w_recurrent.transpose() * d_pre;
    }

    if (l > 0) d_output = std::move(d_below);
  }

  return grads;
}

}  // namespace tuplemax
