#include "cohgraph/gcn.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "cohgraph/error.hpp"
#include "jsonl.hpp"

namespace cohgraph {

using nlohmann::json;

Eigen::Index GcnModel::parameter_count() const {
  Eigen::Index n = w1.size() + w2.size();
  if (use_bias) n += b1.size() + b2.size();
  return n;
}

GcnModel GcnModel::initialize(Eigen::Index input_dim, Eigen::Index hidden_dim,
                              Eigen::Index num_classes, double dropout_rate, bool use_bias,
                              Rng& rng) {
  if (input_dim < 1 || hidden_dim < 1 || num_classes < 1) {
    throw ValidationError("model dimensions must be positive");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ValidationError("dropout rate must lie in [0, 1)");
  }
  auto glorot = [&rng](Eigen::Index rows, Eigen::Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-limit, limit);
    }
    return m;
  };
  GcnModel model;
  model.w1 = glorot(input_dim, hidden_dim);
  model.w2 = glorot(hidden_dim, num_classes);
  model.b1 = Eigen::RowVectorXd::Zero(hidden_dim);
  model.b2 = Eigen::RowVectorXd::Zero(num_classes);
  model.use_bias = use_bias;
  model.dropout_rate = dropout_rate;
  return model;
}

namespace {

Eigen::MatrixXd sample_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  const double scale = 1.0 / (1.0 - rate);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform01() < rate ? 0.0 : scale;
  }
  return m;
}

DropoutMasks sample_masks(const GcnModel& model, Eigen::Index nodes, bool training, Rng& rng) {
  DropoutMasks masks;
  if (!training || model.dropout_rate == 0.0) return masks;
  masks.input = sample_mask(nodes, model.input_dim(), model.dropout_rate, rng);
  masks.hidden = sample_mask(nodes, model.hidden_dim(), model.dropout_rate, rng);
  return masks;
}

void check_shapes(const GcnModel& model, const PropagationMatrix* prop, const Eigen::MatrixXd& x,
                  const DropoutMasks& masks) {
  if (prop && (prop->matrix.rows() != x.rows() || prop->matrix.cols() != x.rows())) {
    throw ValidationError("propagation matrix order does not match the number of feature rows");
  }
  if (x.cols() != model.input_dim()) {
    throw ValidationError("feature dimension " + std::to_string(x.cols()) +
                          " does not match model input " + std::to_string(model.input_dim()));
  }
  if (model.w2.rows() != model.hidden_dim()) throw ValidationError("layer dimensions disagree");
  if (masks.active() &&
      (masks.input.rows() != x.rows() || masks.input.cols() != x.cols() ||
       masks.hidden.rows() != x.rows() || masks.hidden.cols() != model.hidden_dim())) {
    throw ValidationError("dropout masks do not match the pass shape");
  }
}

Eigen::MatrixXd propagate(const PropagationMatrix* prop, const Eigen::MatrixXd& m) {
  if (!prop) return m;
  return prop->matrix * m;
}

Eigen::MatrixXd propagate_transposed(const PropagationMatrix* prop, const Eigen::MatrixXd& m) {
  if (!prop) return m;
  return prop->matrix.transpose() * m;
}

ForwardPass run(const GcnModel& model, const PropagationMatrix* prop, const Eigen::MatrixXd& x,
                DropoutMasks masks) {
  check_shapes(model, prop, x, masks);
  ForwardPass pass;
  pass.input = masks.active() ? Eigen::MatrixXd(x.cwiseProduct(masks.input)) : x;
  pass.preactivation = propagate(prop, pass.input * model.w1);
  if (model.use_bias) pass.preactivation.rowwise() += model.b1;
  pass.hidden = pass.preactivation.cwiseMax(0.0);
  if (masks.active()) pass.hidden = pass.hidden.cwiseProduct(masks.hidden);
  pass.logits = propagate(prop, pass.hidden * model.w2);
  if (model.use_bias) pass.logits.rowwise() += model.b2;
  pass.probabilities = softmax_rows(pass.logits);
  if (!pass.probabilities.allFinite()) throw NumericError("non-finite class probabilities");
  pass.masks = std::move(masks);
  return pass;
}

void check_supervision(const Eigen::MatrixXd& p, const Supervision& sup) {
  if (sup.rows.size() != sup.labels.size()) {
    throw ValidationError("supervision rows and labels differ in length");
  }
  for (std::size_t i = 0; i < sup.rows.size(); ++i) {
    if (sup.rows[i] < 0 || sup.rows[i] >= p.rows() || sup.labels[i] < 0 ||
        sup.labels[i] >= p.cols()) {
      throw ValidationError("supervised row or label out of range");
    }
  }
}

}  // namespace

ForwardPass forward(const GcnModel& model, const PropagationMatrix& prop, const Eigen::MatrixXd& x,
                    bool training, Rng& rng) {
  return run(model, &prop, x, sample_masks(model, x.rows(), training, rng));
}

ForwardPass forward_with_masks(const GcnModel& model, const PropagationMatrix& prop,
                               const Eigen::MatrixXd& x, const DropoutMasks& masks) {
  return run(model, &prop, x, masks);
}

ForwardPass baseline_forward(const GcnModel& model, const Eigen::MatrixXd& x, bool training,
                             Rng& rng) {
  return run(model, nullptr, x, sample_masks(model, x.rows(), training, rng));
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double peak = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      p(i, c) = std::exp(logits(i, c) - peak);
      sum += p(i, c);
    }
    p.row(i) /= sum;
  }
  return p;
}

double cross_entropy(const Eigen::MatrixXd& probabilities, const Supervision& sup) {
  check_supervision(probabilities, sup);
  double loss = 0.0;
  for (std::size_t i = 0; i < sup.rows.size(); ++i) {
    loss -= std::log(std::max(probabilities(sup.rows[i], sup.labels[i]), kProbabilityFloor));
  }
  return loss;
}

Gradients gradients(const GcnModel& model, const PropagationMatrix* prop, const Eigen::MatrixXd& x,
                    const Supervision& sup, const DropoutMasks& masks) {
  const ForwardPass pass = run(model, prop, x, masks);
  check_supervision(pass.probabilities, sup);

  // dL/dH2 = P - Y on supervised rows, zero elsewhere.
  Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(pass.logits.rows(), pass.logits.cols());
  for (std::size_t i = 0; i < sup.rows.size(); ++i) {
    d_logits.row(sup.rows[i]) += pass.probabilities.row(sup.rows[i]);
    d_logits(sup.rows[i], sup.labels[i]) -= 1.0;
  }

  Gradients g;
  const Eigen::MatrixXd back2 = propagate_transposed(prop, d_logits);
  g.w2 = pass.hidden.transpose() * back2;
  g.b2 = model.use_bias ? Eigen::RowVectorXd(d_logits.colwise().sum())
                        : Eigen::RowVectorXd::Zero(model.b2.size());

  Eigen::MatrixXd d_hidden = back2 * model.w2.transpose();
  if (masks.active()) d_hidden = d_hidden.cwiseProduct(masks.hidden);
  const Eigen::MatrixXd d_pre =
      d_hidden.cwiseProduct((pass.preactivation.array() > 0.0).cast<double>().matrix());
  const Eigen::MatrixXd back1 = propagate_transposed(prop, d_pre);
  g.w1 = pass.input.transpose() * back1;
  g.b1 = model.use_bias ? Eigen::RowVectorXd(d_pre.colwise().sum())
                        : Eigen::RowVectorXd::Zero(model.b1.size());
  return g;
}

OptimizerState OptimizerState::zeros_like(const GcnModel& model) {
  Gradients z{Eigen::MatrixXd::Zero(model.w1.rows(), model.w1.cols()),
              Eigen::MatrixXd::Zero(model.w2.rows(), model.w2.cols()),
              Eigen::RowVectorXd::Zero(model.b1.size()), Eigen::RowVectorXd::Zero(model.b2.size())};
  return OptimizerState{z, z, 0};
}

namespace {

template <typename Param>
void adam_update(Param& param, Param& m, Param& v, const Param& g, const AdamConfig& cfg,
                 double correction1, double correction2) {
  if (param.rows() != g.rows() || param.cols() != g.cols() || m.size() != g.size()) {
    throw ValidationError("gradient shape does not match parameter shape");
  }
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  param.array() -= cfg.learning_rate * (m.array() / correction1) /
                   ((v.array() / correction2).sqrt() + cfg.epsilon);
}

}  // namespace

void adam_step(OptimizerState& state, GcnModel& model, const Gradients& grads,
               const AdamConfig& cfg) {
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  adam_update(model.w1, state.first.w1, state.second.w1, grads.w1, cfg, c1, c2);
  adam_update(model.w2, state.first.w2, state.second.w2, grads.w2, cfg, c1, c2);
  if (model.use_bias) {
    adam_update(model.b1, state.first.b1, state.second.b1, grads.b1, cfg, c1, c2);
    adam_update(model.b2, state.first.b2, state.second.b2, grads.b2, cfg, c1, c2);
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (epochs < 0) throw ValidationError("epoch count must be non-negative");
  if (hidden_dim < 1) throw ValidationError("hidden dimension must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ValidationError("dropout rate must lie in [0, 1)");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0)) {
    throw ValidationError("invalid Adam moment parameters");
  }
}

int argmax_row(const Eigen::MatrixXd& m, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < m.cols(); ++c) {
    if (m(row, c) > m(row, best)) best = c;
  }
  return static_cast<int>(best);
}

std::vector<EpochStats> train(GcnModel& model, const PropagationMatrix* prop,
                              const Eigen::MatrixXd& x, const Supervision& sup,
                              const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  OptimizerState state = OptimizerState::zeros_like(model);
  std::vector<EpochStats> history;
  history.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const DropoutMasks masks = sample_masks(model, x.rows(), true, rng);
    const ForwardPass pass = run(model, prop, x, masks);
    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = cross_entropy(pass.probabilities, sup);
    int correct = 0;
    for (std::size_t i = 0; i < sup.rows.size(); ++i) {
      if (argmax_row(pass.probabilities, sup.rows[i]) == sup.labels[i]) ++correct;
    }
    stats.train_accuracy = sup.rows.empty() ? 0.0 : static_cast<double>(correct) / sup.rows.size();
    history.push_back(stats);

    const Gradients g = gradients(model, prop, x, sup, masks);
    adam_step(state, model, g, cfg.adam());
    if (!model.w1.allFinite() || !model.w2.allFinite()) {
      throw NumericError("weights became non-finite at epoch " + std::to_string(epoch));
    }
  }
  return history;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, Eigen::Index r, Eigen::Index c) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != r) {
    throw ValidationError("checkpoint matrix has the wrong number of rows");
  }
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != c) {
      throw ValidationError("checkpoint matrix has the wrong number of columns");
    }
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  return m;
}

}  // namespace

void write_checkpoint(std::ostream& out, const GcnModel& model) {
  json rec{{"d_in", model.input_dim()},
           {"d_hidden", model.hidden_dim()},
           {"C", model.num_classes()},
           {"dropout", model.dropout_rate},
           {"W1", matrix_to_json(model.w1)},
           {"W2", matrix_to_json(model.w2)}};
  if (model.use_bias) {
    rec["b1"] = matrix_to_json(model.b1);
    rec["b2"] = matrix_to_json(model.b2);
  }
  out << detail::dump_line(rec) << '\n';
}

GcnModel read_checkpoint(std::istream& in, const std::string& source) {
  std::optional<GcnModel> model;
  detail::for_each_record(in, source, [&](const json& rec, std::size_t line) {
    if (model) throw ParseError(source, line, "checkpoint holds more than one model");
    GcnModel m;
    const auto d_in = rec.at("d_in").get<Eigen::Index>();
    const auto hidden = rec.at("d_hidden").get<Eigen::Index>();
    const auto classes = rec.at("C").get<Eigen::Index>();
    try {
      m.w1 = matrix_from_json(rec.at("W1"), d_in, hidden);
      m.w2 = matrix_from_json(rec.at("W2"), hidden, classes);
      m.dropout_rate = rec.value("dropout", 0.5);
      m.use_bias = rec.contains("b1");
      m.b1 = m.use_bias ? Eigen::RowVectorXd(matrix_from_json(rec.at("b1"), 1, hidden))
                        : Eigen::RowVectorXd::Zero(hidden);
      m.b2 = m.use_bias ? Eigen::RowVectorXd(matrix_from_json(rec.at("b2"), 1, classes))
                        : Eigen::RowVectorXd::Zero(classes);
    } catch (const ValidationError& e) {
      throw ParseError(source, line, e.what());
    }
    model = std::move(m);
  });
  if (!model) throw ParseError(source, 0, "empty checkpoint");
  return *model;
}

void write_history_csv(std::ostream& out, std::span<const EpochStats> history) {
  out << "epoch,loss,train_acc\n";
  std::ostringstream line;
  line << std::setprecision(17);
  for (const auto& e : history) {
    line.str("");
    line << e.epoch << ',' << e.loss << ',' << e.train_accuracy << '\n';
    out << line.str();
  }
}

}  // namespace cohgraph
