#include "biotac/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace biotac {

namespace {

enum class Init { kWeight, kZero, kOne };

struct PSpec {
  int rows, cols;
  Init init;
};

struct TokenLayout {
  std::vector<int> force_offs;
  std::vector<int> pos_offs;
  bool temperature = false;
  int n_tokens() const { return static_cast<int>(force_offs.size()); }
  int width() const { return 6 + (temperature ? 1 : 0); }
};

TokenLayout token_layout(const WindowSpec& w) {
  TokenLayout tl;
  tl.force_offs = w.force_offsets();
  tl.pos_offs = w.position_offsets();
  tl.temperature = w.include_temperature;
  return tl;
}

/// One token per timestep: [position (or zeros), force, (temperature at T)].
Mat tokenize(const WindowSpec& w, const std::vector<double>& x) {
  TokenLayout tl = token_layout(w);
  Mat tokens(tl.n_tokens(), tl.width());
  std::size_t n_pos = tl.pos_offs.size();
  for (int s = 0; s < tl.n_tokens(); ++s) {
    int off = tl.force_offs[static_cast<std::size_t>(s)];
    auto it = std::find(tl.pos_offs.begin(), tl.pos_offs.end(), off);
    if (it != tl.pos_offs.end()) {
      std::size_t pi = static_cast<std::size_t>(it - tl.pos_offs.begin());
      for (int c = 0; c < 3; ++c)
        tokens.at(s, c) = x[pi * 3 + static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < 3; ++c)
      tokens.at(s, 3 + c) =
          x[n_pos * 3 + static_cast<std::size_t>(s) * 3 + static_cast<std::size_t>(c)];
    if (tl.temperature && off == 0) tokens.at(s, 6) = x.back();
  }
  return tokens;
}

void append_dense(std::vector<PSpec>& shapes, int in, int out) {
  shapes.push_back({in, out, Init::kWeight});
  shapes.push_back({1, out, Init::kZero});
}

void append_layernorm(std::vector<PSpec>& shapes, int dim) {
  shapes.push_back({1, dim, Init::kOne});
  shapes.push_back({1, dim, Init::kZero});
}

std::vector<PSpec> shape_list(const NetSpec& spec) {
  std::vector<PSpec> shapes;
  switch (spec.kind) {
    case NetSpec::Kind::kFeedForward: {
      int in = spec.input_dim();
      for (int w : spec.widths) {
        append_dense(shapes, in, w);
        in = w;
      }
      append_dense(shapes, in, spec.output_dim);
      break;
    }
    case NetSpec::Kind::kNetworkB: {
      int n_pos = 3 * static_cast<int>(spec.window.position_offsets().size());
      int n_force = 3 * static_cast<int>(spec.window.force_offsets().size());
      int merged = 0;
      int in = n_pos;
      for (int w : spec.position_widths) {
        append_dense(shapes, in, w);
        in = w;
      }
      merged += in;
      in = n_force;
      for (int w : spec.force_widths) {
        append_dense(shapes, in, w);
        in = w;
      }
      merged += in;
      if (spec.window.include_temperature) {
        in = 1;
        for (int w : spec.temperature_widths) {
          append_dense(shapes, in, w);
          in = w;
        }
        merged += in;
      }
      in = merged;
      for (int w : spec.trunk_widths) {
        append_dense(shapes, in, w);
        in = w;
      }
      append_dense(shapes, in, spec.output_dim);
      break;
    }
    case NetSpec::Kind::kTransformer: {
      TokenLayout tl = token_layout(spec.window);
      int d = spec.embed_dim;
      append_dense(shapes, tl.width(), d);                      // token embedding
      shapes.push_back({1, d, Init::kWeight});                  // regression token
      shapes.push_back({tl.n_tokens() + 1, d, Init::kWeight});  // pos embeddings
      for (int l = 0; l < spec.n_layers; ++l) {
        append_layernorm(shapes, d);
        append_dense(shapes, d, d);  // Wq
        append_dense(shapes, d, d);  // Wk
        append_dense(shapes, d, d);  // Wv
        append_dense(shapes, d, d);  // Wo
        append_layernorm(shapes, d);
        append_dense(shapes, d, spec.hidden_dim);
        append_dense(shapes, spec.hidden_dim, d);
      }
      append_layernorm(shapes, d);
      append_dense(shapes, d, spec.output_dim);  // regression head
      break;
    }
  }
  return shapes;
}

/// Hands out parameter tape nodes in the canonical shape_list order.
/// In leaf mode it creates the nodes; in shared mode it replays an
/// existing node list (transformer samples share one set of leaves).
struct ParamFeed {
  Tape& tape;
  const std::vector<Mat>& params;
  std::vector<int>* record = nullptr;
  const std::vector<int>* shared = nullptr;
  std::size_t cursor = 0;

  int next() {
    if (shared) {
      if (cursor >= shared->size())
        throw std::logic_error("param walk out of sync with shape list");
      return (*shared)[cursor++];
    }
    if (cursor >= params.size())
      throw std::logic_error("param walk out of sync with shape list");
    int id = tape.leaf(params[cursor++]);
    if (record) record->push_back(id);
    return id;
  }
};

int dense(Tape& t, ParamFeed& pf, int x) {
  int w = pf.next();
  int b = pf.next();
  return t.add_rowvec(t.matmul(x, w), b);
}

int affine_layernorm(Tape& t, ParamFeed& pf, int x) {
  int g = pf.next();
  int b = pf.next();
  return t.add_rowvec(t.mul_rowvec(t.layernorm_rows(x), g), b);
}

int maybe_dropout(Tape& t, int x, double rate, bool train_mode, Rng* rng) {
  if (!train_mode || rate <= 0.0 || rng == nullptr) return x;
  const Mat& v = t.val(x);
  Mat mask(v.rows, v.cols);
  double keep = 1.0 - rate;
  for (double& m : mask.a) m = rng->uniform() < keep ? 1.0 / keep : 0.0;
  return t.mul_elem(x, mask);
}

int transformer_sample(Tape& t, ParamFeed& pf, const NetSpec& spec,
                       const std::vector<double>& x, bool train_mode,
                       Rng* rng) {
  int d = spec.embed_dim;
  int heads = spec.n_heads;
  int dk = d / heads;
  double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));

  int tokens = t.leaf(tokenize(spec.window, x));
  int emb = dense(t, pf, tokens);
  int reg = pf.next();
  int pos = pf.next();
  int seq = t.add(t.concat_rows({reg, emb}), pos);
  seq = maybe_dropout(t, seq, spec.dropout_rate, train_mode, rng);

  for (int l = 0; l < spec.n_layers; ++l) {
    int a = affine_layernorm(t, pf, seq);
    int q = dense(t, pf, a);
    int k = dense(t, pf, a);
    int v = dense(t, pf, a);
    std::vector<int> head_outs;
    for (int h = 0; h < heads; ++h) {
      int qh = t.slice_cols(q, h * dk, (h + 1) * dk);
      int kh = t.slice_cols(k, h * dk, (h + 1) * dk);
      int vh = t.slice_cols(v, h * dk, (h + 1) * dk);
      int scores = t.scale(t.matmul(qh, t.transpose(kh)), inv_sqrt_dk);
      head_outs.push_back(t.matmul(t.softmax_rows(scores), vh));
    }
    int att = dense(t, pf, t.concat_cols(head_outs));
    att = maybe_dropout(t, att, spec.dropout_rate, train_mode, rng);
    seq = t.add(seq, att);

    int b = affine_layernorm(t, pf, seq);
    int ff = dense(t, pf, t.activation(dense(t, pf, b), Act::kRelu));
    ff = maybe_dropout(t, ff, spec.dropout_rate, train_mode, rng);
    seq = t.add(seq, ff);
  }
  seq = affine_layernorm(t, pf, seq);
  return dense(t, pf, t.slice_rows(seq, 0, 1));
}

}  // namespace

void NetSpec::validate() const {
  if (output_dim < 1) throw std::invalid_argument("net spec: output_dim >= 1");
  switch (kind) {
    case Kind::kFeedForward:
      if (widths.size() != activations.size())
        throw std::invalid_argument(
            "net spec: one activation per hidden layer required");
      for (int w : widths)
        if (w < 1) throw std::invalid_argument("net spec: widths >= 1");
      break;
    case Kind::kNetworkB:
      for (const auto* ws :
           {&position_widths, &force_widths, &temperature_widths, &trunk_widths})
        for (int w : *ws)
          if (w < 1) throw std::invalid_argument("net spec: widths >= 1");
      break;
    case Kind::kTransformer:
      if (n_layers < 1 || n_heads < 1 || embed_dim < 1 || hidden_dim < 1)
        throw std::invalid_argument("net spec: transformer dims >= 1");
      if (embed_dim % n_heads != 0)
        throw std::invalid_argument(
            "net spec: embed_dim must be divisible by n_heads");
      if (dropout_rate < 0.0 || dropout_rate > 0.5)
        throw std::invalid_argument("net spec: dropout in [0, 0.5]");
      break;
  }
}

NeuralModel init_model(const NetSpec& spec, std::uint64_t seed) {
  spec.validate();
  NeuralModel model;
  model.spec = spec;
  Rng rng(seed);
  for (const PSpec& ps : shape_list(spec)) {
    Mat m(ps.rows, ps.cols);
    switch (ps.init) {
      case Init::kWeight: {
        double bound = std::sqrt(6.0 / static_cast<double>(ps.rows + ps.cols));
        for (double& v : m.a) v = rng.uniform(-bound, bound);
        break;
      }
      case Init::kZero:
        break;
      case Init::kOne:
        std::fill(m.a.begin(), m.a.end(), 1.0);
        break;
    }
    model.params.push_back(std::move(m));
  }
  return model;
}

int forward_graph(Tape& tape, const NeuralModel& model, const Mat& batch,
                  bool train_mode, Rng* dropout_rng,
                  std::vector<int>* param_nodes_out) {
  const NetSpec& spec = model.spec;
  if (batch.cols != spec.input_dim())
    throw std::invalid_argument("forward: input dimension mismatch");

  switch (spec.kind) {
    case NetSpec::Kind::kFeedForward: {
      ParamFeed pf{tape, model.params, param_nodes_out};
      int x = tape.leaf(batch);
      for (std::size_t i = 0; i < spec.widths.size(); ++i)
        x = tape.activation(dense(tape, pf, x), spec.activations[i],
                            spec.leaky_slope);
      return dense(tape, pf, x);
    }
    case NetSpec::Kind::kNetworkB: {
      ParamFeed pf{tape, model.params, param_nodes_out};
      int n_pos = 3 * static_cast<int>(spec.window.position_offsets().size());
      int n_force = 3 * static_cast<int>(spec.window.force_offsets().size());
      int x = tape.leaf(batch);
      std::vector<int> columns;
      int c = tape.slice_cols(x, 0, n_pos);
      for (std::size_t i = 0; i < spec.position_widths.size(); ++i)
        c = tape.activation(dense(tape, pf, c), Act::kRelu);
      columns.push_back(c);
      c = tape.slice_cols(x, n_pos, n_pos + n_force);
      for (std::size_t i = 0; i < spec.force_widths.size(); ++i)
        c = tape.activation(dense(tape, pf, c), Act::kRelu);
      columns.push_back(c);
      if (spec.window.include_temperature) {
        c = tape.slice_cols(x, n_pos + n_force, n_pos + n_force + 1);
        for (std::size_t i = 0; i < spec.temperature_widths.size(); ++i)
          c = tape.activation(dense(tape, pf, c), Act::kRelu);
        columns.push_back(c);
      }
      int merged = tape.concat_cols(columns);
      for (std::size_t i = 0; i < spec.trunk_widths.size(); ++i)
        merged = tape.activation(dense(tape, pf, merged), Act::kRelu);
      return dense(tape, pf, merged);
    }
    case NetSpec::Kind::kTransformer: {
      // Parameters are leafed once; per-sample graphs replay the same
      // nodes so gradients accumulate across the batch.
      std::vector<int> shared;
      ParamFeed leaf_feed{tape, model.params, &shared};
      for (std::size_t i = 0; i < model.params.size(); ++i) leaf_feed.next();
      if (param_nodes_out) *param_nodes_out = shared;

      std::vector<int> outs;
      outs.reserve(static_cast<std::size_t>(batch.rows));
      std::vector<double> x(static_cast<std::size_t>(batch.cols));
      for (int r = 0; r < batch.rows; ++r) {
        for (int j = 0; j < batch.cols; ++j)
          x[static_cast<std::size_t>(j)] = batch.at(r, j);
        ParamFeed pf{tape, model.params, nullptr, &shared};
        outs.push_back(
            transformer_sample(tape, pf, spec, x, train_mode, dropout_rng));
      }
      return outs.size() == 1 ? outs[0] : tape.concat_rows(outs);
    }
  }
  throw std::logic_error("unknown network kind");
}

std::vector<double> forward(const NeuralModel& model,
                            const std::vector<double>& x) {
  Mat batch(1, static_cast<int>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j)
    batch.at(0, static_cast<int>(j)) = x[j];
  Tape tape;
  int out = forward_graph(tape, model, batch, false, nullptr, nullptr);
  const Mat& v = tape.val(out);
  return {v.a.begin(), v.a.end()};
}

std::int64_t NeuralModel::param_count() const {
  std::int64_t n = 0;
  for (const Mat& m : params) n += static_cast<std::int64_t>(m.size());
  return n;
}

std::int64_t param_count(const NetSpec& spec) {
  std::int64_t n = 0;
  for (const PSpec& ps : shape_list(spec))
    n += static_cast<std::int64_t>(ps.rows) * ps.cols;
  return n;
}

std::int64_t flops_count(const NetSpec& spec) {
  // Per single forward pass. Dense layer: 2*in*out multiply-adds plus the
  // bias add (out). Activations are not counted.
  auto dense_flops = [](std::int64_t in, std::int64_t out) {
    return 2 * in * out + out;
  };
  std::int64_t total = 0;
  switch (spec.kind) {
    case NetSpec::Kind::kFeedForward: {
      std::int64_t in = spec.input_dim();
      for (int w : spec.widths) {
        total += dense_flops(in, w);
        in = w;
      }
      total += dense_flops(in, spec.output_dim);
      break;
    }
    case NetSpec::Kind::kNetworkB: {
      std::int64_t n_pos = 3 * static_cast<std::int64_t>(
                                   spec.window.position_offsets().size());
      std::int64_t n_force =
          3 * static_cast<std::int64_t>(spec.window.force_offsets().size());
      std::int64_t merged = 0;
      std::int64_t in = n_pos;
      for (int w : spec.position_widths) {
        total += dense_flops(in, w);
        in = w;
      }
      merged += in;
      in = n_force;
      for (int w : spec.force_widths) {
        total += dense_flops(in, w);
        in = w;
      }
      merged += in;
      if (spec.window.include_temperature) {
        in = 1;
        for (int w : spec.temperature_widths) {
          total += dense_flops(in, w);
          in = w;
        }
        merged += in;
      }
      in = merged;
      for (int w : spec.trunk_widths) {
        total += dense_flops(in, w);
        in = w;
      }
      total += dense_flops(in, spec.output_dim);
      break;
    }
    case NetSpec::Kind::kTransformer: {
      // Attention accounting per block, sequence length S (tokens plus the
      // regression token), model width d, h heads of width dk = d/h:
      //   layernorm           ~ 5*S*d      (mean, var, normalize, affine)
      //   q/k/v/out projection: 4 dense layers of d->d over S tokens
      //   scores  Q K^T       : h * S*S * 2*dk = 2*S*S*d
      //   softmax             : ~3 ops per score element = 3*h*S*S
      //   weighted sum A V    : 2*S*S*d
      //   feed-forward        : dense d->hidden->d over S tokens
      //   two residual adds   : 2*S*d
      TokenLayout tl = token_layout(spec.window);
      std::int64_t s = tl.n_tokens() + 1;
      std::int64_t d = spec.embed_dim;
      std::int64_t h = spec.n_heads;
      total += (s - 1) * dense_flops(tl.width(), d);  // token embedding
      total += s * d;                                 // position embedding add
      std::int64_t per_layer = 0;
      per_layer += 2 * 5 * s * d;                  // two layernorms
      per_layer += 4 * s * dense_flops(d, d);      // projections
      per_layer += 2 * s * s * d + 3 * h * s * s;  // scores + softmax
      per_layer += 2 * s * s * d;                  // weighted sum
      per_layer += s * (dense_flops(d, spec.hidden_dim) +
                        dense_flops(spec.hidden_dim, d));
      per_layer += 2 * s * d;  // residuals
      total += spec.n_layers * per_layer;
      total += 5 * s * d;  // final layernorm
      total += dense_flops(d, spec.output_dim);
      break;
    }
  }
  return total;
}

void adam_step(std::vector<Mat>& params, const std::vector<Mat>& grads,
               AdamState& state, double lr, double beta1, double beta2,
               double eps) {
  if (state.m.empty()) {
    for (const Mat& p : params) {
      state.m.emplace_back(p.rows, p.cols);
      state.v.emplace_back(p.rows, p.cols);
    }
  }
  if (params.size() != grads.size())
    throw std::invalid_argument("adam: param/grad count mismatch");
  ++state.step;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Mat& w = params[p];
    const Mat& g = grads[p];
    Mat& m = state.m[p];
    Mat& v = state.v[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m.a[i] = beta1 * m.a[i] + (1.0 - beta1) * g.a[i];
      v.a[i] = beta2 * v.a[i] + (1.0 - beta2) * g.a[i] * g.a[i];
      double mhat = m.a[i] / bc1;
      double vhat = v.a[i] / bc2;
      w.a[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

namespace {

Mat rows_to_mat(const std::vector<std::vector<double>>& rows,
                const std::vector<std::size_t>& idx, std::size_t lo,
                std::size_t hi) {
  Mat m(static_cast<int>(hi - lo), static_cast<int>(rows[0].size()));
  for (std::size_t r = lo; r < hi; ++r)
    for (std::size_t c = 0; c < rows[0].size(); ++c)
      m.at(static_cast<int>(r - lo), static_cast<int>(c)) = rows[idx[r]][c];
  return m;
}

double eval_loss(const NeuralModel& model,
                 const std::vector<std::vector<double>>& x,
                 const std::vector<std::vector<double>>& y, int batch_size) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t lo = 0; lo < x.size(); lo += static_cast<std::size_t>(batch_size)) {
    std::size_t hi = std::min(x.size(), lo + static_cast<std::size_t>(batch_size));
    Mat xb = rows_to_mat(x, idx, lo, hi);
    Mat yb = rows_to_mat(y, idx, lo, hi);
    Tape tape;
    int out = forward_graph(tape, model, xb, false, nullptr, nullptr);
    total += loss_eq1_value(yb, tape.val(out)) * static_cast<double>(hi - lo);
    count += hi - lo;
  }
  return total / static_cast<double>(count);
}

}  // namespace

NeuralModel train(const NetSpec& spec,
                  const std::vector<std::vector<double>>& x_train,
                  const std::vector<std::vector<double>>& y_train,
                  const std::vector<std::vector<double>>& x_val,
                  const std::vector<std::vector<double>>& y_val,
                  const TrainConfig& config) {
  if (x_train.empty() || x_val.empty())
    throw std::invalid_argument("train: empty train or validation split");
  if (x_train.size() != y_train.size() || x_val.size() != y_val.size())
    throw std::invalid_argument("train: input/target size mismatch");

  NeuralModel model = init_model(spec, config.seed);
  AdamState adam;
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);  // shuffle + dropout stream

  std::vector<Mat> best_params = model.params;
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = 0;

  std::vector<std::size_t> idx(x_train.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<Mat> grads;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(idx);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t lo = 0; lo < idx.size();
         lo += static_cast<std::size_t>(config.batch_size)) {
      std::size_t hi =
          std::min(idx.size(), lo + static_cast<std::size_t>(config.batch_size));
      Mat xb = rows_to_mat(x_train, idx, lo, hi);
      Mat yb = rows_to_mat(y_train, idx, lo, hi);
      Tape tape;
      std::vector<int> param_nodes;
      int out = forward_graph(tape, model, xb, true, &rng, &param_nodes);
      int loss = tape.loss_eq1(out, yb);
      double lv = tape.val(loss).a[0];
      if (!std::isfinite(lv))
        throw TrainingDiverged("training loss became non-finite");
      tape.backward(loss);
      grads.clear();
      for (int pn : param_nodes) grads.push_back(tape.grad(pn));
      adam_step(model.params, grads, adam, config.lr);
      epoch_loss += lv * static_cast<double>(hi - lo);
      seen += hi - lo;
    }
    model.train_curve.push_back(epoch_loss / static_cast<double>(seen));

    double val = eval_loss(model, x_val, y_val, config.batch_size);
    if (!std::isfinite(val))
      throw TrainingDiverged("validation loss became non-finite");
    model.val_curve.push_back(val);
    if (val < best_val) {
      best_val = val;
      best_params = model.params;
      best_epoch = epoch;
    }
    if (epoch - best_epoch >= config.patience) break;
  }
  model.params = std::move(best_params);
  return model;
}

namespace {

nlohmann::json spec_to_json(const NetSpec& s) {
  nlohmann::json j;
  switch (s.kind) {
    case NetSpec::Kind::kNetworkB: j["kind"] = "network_b"; break;
    case NetSpec::Kind::kFeedForward: j["kind"] = "feed_forward"; break;
    case NetSpec::Kind::kTransformer: j["kind"] = "transformer"; break;
  }
  j["output_dim"] = s.output_dim;
  j["widths"] = s.widths;
  nlohmann::json acts = nlohmann::json::array();
  for (Act a : s.activations) acts.push_back(act_name(a));
  j["activations"] = acts;
  j["leaky_slope"] = s.leaky_slope;
  j["position_widths"] = s.position_widths;
  j["force_widths"] = s.force_widths;
  j["temperature_widths"] = s.temperature_widths;
  j["trunk_widths"] = s.trunk_widths;
  j["n_layers"] = s.n_layers;
  j["n_heads"] = s.n_heads;
  j["embed_dim"] = s.embed_dim;
  j["hidden_dim"] = s.hidden_dim;
  j["dropout_rate"] = s.dropout_rate;
  return j;
}

NetSpec spec_from_json(const nlohmann::json& j, const WindowSpec& window,
                       int output_dim) {
  NetSpec s;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "network_b")
    s.kind = NetSpec::Kind::kNetworkB;
  else if (kind == "feed_forward")
    s.kind = NetSpec::Kind::kFeedForward;
  else if (kind == "transformer")
    s.kind = NetSpec::Kind::kTransformer;
  else
    throw std::invalid_argument("unknown network kind: " + kind);
  s.window = window;
  s.output_dim = j.value("output_dim", output_dim);
  if (j.contains("widths")) s.widths = j["widths"].get<std::vector<int>>();
  if (j.contains("activations"))
    for (const auto& a : j["activations"])
      s.activations.push_back(act_from_name(a.get<std::string>()));
  s.leaky_slope = j.value("leaky_slope", s.leaky_slope);
  if (j.contains("position_widths"))
    s.position_widths = j["position_widths"].get<std::vector<int>>();
  if (j.contains("force_widths"))
    s.force_widths = j["force_widths"].get<std::vector<int>>();
  if (j.contains("temperature_widths"))
    s.temperature_widths = j["temperature_widths"].get<std::vector<int>>();
  if (j.contains("trunk_widths"))
    s.trunk_widths = j["trunk_widths"].get<std::vector<int>>();
  s.n_layers = j.value("n_layers", s.n_layers);
  s.n_heads = j.value("n_heads", s.n_heads);
  s.embed_dim = j.value("embed_dim", s.embed_dim);
  s.hidden_dim = j.value("hidden_dim", s.hidden_dim);
  s.dropout_rate = j.value("dropout_rate", s.dropout_rate);
  s.validate();
  return s;
}

}  // namespace

NetSpec net_spec_from_json(const std::string& text, const WindowSpec& window,
                           int output_dim) {
  return spec_from_json(nlohmann::json::parse(text), window, output_dim);
}

void save_neural(const NeuralModel& model, const std::string& path) {
  nlohmann::json j;
  j["model"] = "neural";
  j["spec"] = spec_to_json(model.spec);
  j["window"] = {{"combo", model.spec.window.combo},
                 {"include_temperature", model.spec.window.include_temperature}};
  j["scaler"] = nlohmann::json::parse(scaler_pair_to_json(model.scaler));
  j["n_params"] = model.param_count();
  j["train_curve"] = model.train_curve;
  j["val_curve"] = model.val_curve;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << j.dump() << "\n";
  // Parameter blob: little-endian IEEE-754 doubles in canonical order.
  for (const Mat& m : model.params)
    out.write(reinterpret_cast<const char*>(m.a.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
}

NeuralModel load_neural(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::string header;
  std::getline(in, header);
  nlohmann::json j = nlohmann::json::parse(header);
  if (j.value("model", std::string()) != "neural")
    throw std::runtime_error("not a neural model file: " + path);

  WindowSpec window;
  window.combo = j.at("window").at("combo").get<int>();
  window.include_temperature =
      j.at("window").at("include_temperature").get<bool>();
  NetSpec spec = spec_from_json(j.at("spec"), window, 21);
  spec.window = window;

  NeuralModel model;
  model.spec = spec;
  model.scaler = scaler_pair_from_json(j.at("scaler").dump());
  if (j.contains("train_curve"))
    model.train_curve = j["train_curve"].get<std::vector<double>>();
  if (j.contains("val_curve"))
    model.val_curve = j["val_curve"].get<std::vector<double>>();
  for (const PSpec& ps : shape_list(spec)) {
    Mat m(ps.rows, ps.cols);
    in.read(reinterpret_cast<char*>(m.a.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated parameter blob: " + path);
    model.params.push_back(std::move(m));
  }
  return model;
}

}  // namespace biotac
