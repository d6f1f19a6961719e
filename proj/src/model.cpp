#include "odecast/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace odecast {

using nlohmann::json;

std::string to_string(ForecastMode mode) {
  return mode == ForecastMode::single_step ? "single_step" : "multi_step";
}

ForecastMode forecast_mode_from_string(const std::string& s) {
  if (s == "single_step") return ForecastMode::single_step;
  if (s == "multi_step") return ForecastMode::multi_step;
  throw ContractError("unknown forecast mode '" + s + "'");
}

std::vector<std::string> AblationFlags::names() const {
  std::vector<std::string> out;
  if (no_cgp) out.push_back("no_cgp");
  if (no_cta) out.push_back("no_cta");
  if (no_gsl) out.push_back("no_gsl");
  if (no_attn) out.push_back("no_attn");
  if (fully_discrete) out.push_back("fully_discrete");
  return out;
}

AblationFlags AblationFlags::from_names(const std::vector<std::string>& names) {
  AblationFlags f;
  for (const std::string& n : names) {
    if (n == "no_cgp") f.no_cgp = true;
    else if (n == "no_cta") f.no_cta = true;
    else if (n == "no_gsl") f.no_gsl = true;
    else if (n == "no_attn") f.no_attn = true;
    else if (n == "fully_discrete") f.fully_discrete = true;
    else if (!n.empty()) throw ContractError("unknown ablation flag '" + n + "'");
  }
  return f;
}

std::size_t ModelConfig::max_width() const {
  std::size_t m = 0;
  for (std::size_t w : widths) m = std::max(m, w);
  return m;
}

long long ModelConfig::receptive() const {
  return receptive_field(dilation_factor, static_cast<long long>(max_width()), cta.steps());
}

std::size_t ModelConfig::output_features() const {
  return mode == ForecastMode::multi_step ? in_features * horizon : in_features;
}

void ModelConfig::validate() const {
  if (nodes < 2) throw ContractError("config: need at least 2 nodes");
  if (in_features < 1 || hidden < 1 || decoder_hidden < 1 || embed_dim < 1) {
    throw ContractError("config: dimensions must be positive");
  }
  if (widths.empty() || hidden % widths.size() != 0) {
    throw ContractError("config: hidden dims must be divisible by the number of kernel widths");
  }
  if (max_width() < 2) throw ContractError("config: max kernel width must be >= 2");
  if (input_len < 1 || horizon < 1) throw ContractError("config: input_len and horizon must be >= 1");
  if (dilation_factor < 1) throw ContractError("config: dilation factor must be >= 1");
  if (topk < 1) throw ContractError("config: topk must be >= 1");
  if (!(beta > 0.0)) throw ContractError("config: beta must be positive");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw ContractError("config: dropout in [0,1)");
  cta.validate();
  cgp.validate();
  if (receptive() <= static_cast<long long>(input_len)) {
    throw ContractError("config: receptive field " + std::to_string(receptive()) +
                        " must exceed input length " + std::to_string(input_len));
  }
  if (ablation.fully_discrete && (ablation.no_cgp || ablation.no_cta)) {
    throw ContractError("config: fully_discrete already implies no_cgp/no_cta");
  }
}

json ModelConfig::to_json() const {
  json j;
  j["nodes"] = nodes;
  j["in_features"] = in_features;
  j["hidden"] = hidden;
  j["embed_dim"] = embed_dim;
  j["input_len"] = input_len;
  j["horizon"] = horizon;
  j["mode"] = to_string(mode);
  j["dilation_factor"] = dilation_factor;
  j["widths"] = widths;
  j["cta_method"] = cta.method == SolverSpec::Method::euler ? "euler" : "rk4";
  j["cta_time"] = cta.terminal_time;
  j["cta_step"] = cta.step_size;
  j["cgp_method"] = cgp.method == SolverSpec::Method::euler ? "euler" : "rk4";
  j["cgp_time"] = cgp.terminal_time;
  j["cgp_step"] = cgp.step_size;
  j["topk"] = topk;
  j["beta"] = beta;
  j["dropout"] = dropout_rate;
  j["decoder_hidden"] = decoder_hidden;
  j["ablation"] = ablation.names();
  return j;
}

namespace {

SolverSpec::Method method_from_string(const std::string& s) {
  if (s == "euler") return SolverSpec::Method::euler;
  if (s == "rk4") return SolverSpec::Method::rk4;
  throw ContractError("unknown solver method '" + s + "'");
}

}  // namespace

ModelConfig ModelConfig::from_json(const json& j) {
  ModelConfig c;
  c.nodes = j.at("nodes").get<std::size_t>();
  c.in_features = j.at("in_features").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.input_len = j.at("input_len").get<std::size_t>();
  c.horizon = j.at("horizon").get<std::size_t>();
  c.mode = forecast_mode_from_string(j.at("mode").get<std::string>());
  c.dilation_factor = j.at("dilation_factor").get<long long>();
  c.widths = j.at("widths").get<std::vector<std::size_t>>();
  c.cta.method = method_from_string(j.at("cta_method").get<std::string>());
  c.cta.terminal_time = j.at("cta_time").get<double>();
  c.cta.step_size = j.at("cta_step").get<double>();
  c.cgp.method = method_from_string(j.at("cgp_method").get<std::string>());
  c.cgp.terminal_time = j.at("cgp_time").get<double>();
  c.cgp.step_size = j.at("cgp_step").get<double>();
  c.topk = j.at("topk").get<std::size_t>();
  c.beta = j.at("beta").get<double>();
  c.dropout_rate = j.at("dropout").get<double>();
  c.decoder_hidden = j.at("decoder_hidden").get<std::size_t>();
  c.ablation = AblationFlags::from_names(j.at("ablation").get<std::vector<std::string>>());
  return c;
}

Tensor loss_mae(const Tensor& pred, const Tensor& target) {
  return mean_abs_error(pred, target);
}

// -------------------------------------------------------------------- Model

Model::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  std::mt19937_64 rng(seed);

  const std::size_t d_in = config_.in_features;
  const std::size_t d_hidden = config_.hidden;
  const double start_bound = 1.0 / std::sqrt(static_cast<double>(d_in));
  params_.start_w = Tensor::uniform({d_in, d_hidden}, -start_bound, start_bound, rng, true);
  params_.start_b = Tensor::uniform({d_hidden}, -start_bound, start_bound, rng, true);

  params_.has_graph = !config_.ablation.no_gsl;
  if (params_.has_graph) {
    params_.graph = GraphLearnerParams::init(config_.nodes, config_.embed_dim, config_.beta, rng);
  }

  if (config_.ablation.discrete_temporal()) {
    const int layers = config_.cta.steps();
    for (int l = 0; l < layers; ++l) {
      params_.tcn_layers.push_back(TcnParams::init(d_hidden, config_.widths, rng));
    }
  } else {
    params_.tcn = TcnParams::init(d_hidden, config_.widths, rng);
  }

  if (config_.ablation.no_attn) {
    params_.phi = {Tensor::identity(d_hidden, true)};
  } else {
    params_.phi = init_attentive_maps(d_hidden, config_.cgp.steps());
  }

  const double dec1_bound = 1.0 / std::sqrt(static_cast<double>(d_hidden));
  params_.dec1_w =
      Tensor::uniform({d_hidden, config_.decoder_hidden}, -dec1_bound, dec1_bound, rng, true);
  params_.dec1_b = Tensor::uniform({config_.decoder_hidden}, -dec1_bound, dec1_bound, rng, true);
  const double dec2_bound = 1.0 / std::sqrt(static_cast<double>(config_.decoder_hidden));
  params_.dec2_w = Tensor::uniform({config_.decoder_hidden, config_.output_features()},
                                   -dec2_bound, dec2_bound, rng, true);
  params_.dec2_b =
      Tensor::uniform({config_.output_features()}, -dec2_bound, dec2_bound, rng, true);

  if (config_.ablation.no_gsl) {
    const std::size_t n = config_.nodes;
    Tensor fixed = Tensor::uniform({n, n}, 0.0, 1.0, rng, false);
    auto& v = fixed.values();
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += v[i * n + j];
      for (std::size_t j = 0; j < n; ++j) v[i * n + j] /= row;
    }
    params_.fixed_adjacency = fixed;
  }
}

Tensor Model::normalized_adjacency() const {
  if (config_.ablation.no_gsl) return params_.fixed_adjacency;
  Tensor a = learn_adjacency(params_.graph);
  const std::size_t k = std::min<std::size_t>(config_.topk, config_.nodes);
  return normalize_adjacency(sparsify_topk(a, k));
}

Tensor Model::interior(const Tensor& hc, const Tensor& a_hat) const {
  const int k = config_.cgp.steps();
  if (config_.ablation.discrete_spatial()) {
    // K-hop propagation; the attentive readout still blends every hop.
    std::vector<Tensor> states{hc};
    for (int i = 0; i < k; ++i) states.push_back(propagate_nodes(a_hat, states.back()));
    if (config_.ablation.no_attn) {
      return feature_linear(states.back(), params_.phi[0], Tensor());
    }
    Tensor out;
    for (std::size_t i = 0; i < states.size(); ++i) {
      Tensor term = feature_linear(states[i], params_.phi[i], Tensor());
      out = out.defined() ? add(out, term) : term;
    }
    return out;
  }
  if (config_.ablation.no_attn) {
    VectorField field = [&a_hat](const Tensor& s, int) { return cgp_field(s, a_hat); };
    return feature_linear(integrate(field, hc, config_.cgp), params_.phi[0], Tensor());
  }
  return cgp_solve_attentive(hc, a_hat, config_.cgp, params_.phi);
}

Tensor Model::encode(const Tensor& x, bool training, std::mt19937_64* dropout_rng) const {
  bool batched = true;
  Tensor input = x;
  if (x.rank() == 3) {
    batched = false;
    Shape s = x.shape();
    input = reshape(x, {1, s[0], s[1], s[2]});
  } else if (x.rank() != 4) {
    throw DimensionError("encode: expected [B x N x D x T] or [N x D x T], got " +
                         shape_str(x.shape()));
  }
  if (input.dim(1) != config_.nodes || input.dim(2) != config_.in_features ||
      input.dim(3) != config_.input_len) {
    throw DimensionError("encode: window " + shape_str(input.shape()) +
                         " does not match config (N=" + std::to_string(config_.nodes) +
                         ", D=" + std::to_string(config_.in_features) +
                         ", T=" + std::to_string(config_.input_len) + ")");
  }
  const bool use_dropout = training && config_.dropout_rate > 0.0;
  if (use_dropout && dropout_rng == nullptr) {
    throw ContractError("encode: training with dropout requires an rng");
  }

  const std::size_t r_len = static_cast<std::size_t>(config_.receptive());
  Tensor h0 = feature_linear(pad_left_zero(input, r_len), params_.start_w, params_.start_b);
  Tensor a_hat = normalized_adjacency();

  auto step_increment = [&](const Tensor& h, int step, const TcnParams& tcn) {
    const std::size_t delta =
        static_cast<std::size_t>(dilation_at(config_.dilation_factor, step));
    Tensor mixed = gated_tcn(h, tcn, delta);
    if (use_dropout) mixed = dropout(mixed, config_.dropout_rate, *dropout_rng);
    return interior(mixed, a_hat);
  };

  Tensor h_final;
  if (config_.ablation.discrete_temporal()) {
    Tensor h = h0;
    const int layers = config_.cta.steps();
    for (int l = 0; l < layers; ++l) {
      Tensor inner = step_increment(h, l, params_.tcn_layers[static_cast<std::size_t>(l)]);
      h = add(truncate_last(h, inner.dim(-1)), inner);
    }
    h_final = h;
  } else {
    VectorField field = [&](const Tensor& h, int step) {
      return pad_left_zero(step_increment(h, step, params_.tcn), r_len);
    };
    h_final = integrate(field, h0, config_.cta);
  }

  Tensor last = truncate_last(h_final, 1);
  const std::size_t b = input.dim(0);
  Tensor out = reshape(last, {b, config_.nodes, config_.hidden});
  if (!batched) out = reshape(out, {config_.nodes, config_.hidden});
  return out;
}

Tensor Model::decode(const Tensor& h) const {
  if (h.rank() != 2 && h.rank() != 3) {
    throw DimensionError("decode: expected [B x N x D'] or [N x D'], got " + shape_str(h.shape()));
  }
  if (h.dim(-1) != config_.hidden || h.dim(-2) != config_.nodes) {
    throw DimensionError("decode: state " + shape_str(h.shape()) + " does not match config");
  }
  Shape lifted = h.shape();
  lifted.push_back(1);
  Tensor z = relu(feature_linear(reshape(h, lifted), params_.dec1_w, params_.dec1_b));
  Tensor o = feature_linear(z, params_.dec2_w, params_.dec2_b);
  Shape out_shape(h.shape().begin(), h.shape().end() - 1);  // [.., N]
  out_shape.push_back(config_.in_features);
  if (config_.mode == ForecastMode::multi_step) out_shape.push_back(config_.horizon);
  return reshape(o, std::move(out_shape));
}

Tensor Model::forward(const Tensor& x, bool training, std::mt19937_64* dropout_rng) const {
  return decode(encode(x, training, dropout_rng));
}

Adjacency Model::adjacency() const {
  Adjacency adj;
  adj.topk = std::min<std::size_t>(config_.topk, config_.nodes);
  if (config_.ablation.no_gsl) {
    adj.raw = params_.fixed_adjacency;
    adj.normalized = params_.fixed_adjacency;
    return adj;
  }
  adj.raw = sparsify_topk(learn_adjacency(params_.graph), adj.topk);
  adj.normalized = normalize_adjacency(adj.raw);
  return adj;
}

std::vector<std::pair<std::string, Tensor>> Model::named_parameters() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("start_conv.w", params_.start_w);
  out.emplace_back("start_conv.b", params_.start_b);
  if (params_.has_graph) {
    out.emplace_back("graph.e1", params_.graph.e1);
    out.emplace_back("graph.e2", params_.graph.e2);
    out.emplace_back("graph.g1", params_.graph.g1);
    out.emplace_back("graph.g2", params_.graph.g2);
  }
  auto add_tcn = [&out](const std::string& prefix, const TcnParams& tcn) {
    for (const auto& b : tcn.branches) {
      const std::string base = prefix + ".m" + std::to_string(b.width);
      out.emplace_back(base + ".filter_w", b.filter_w);
      out.emplace_back(base + ".filter_b", b.filter_b);
      out.emplace_back(base + ".gate_w", b.gate_w);
      out.emplace_back(base + ".gate_b", b.gate_b);
    }
  };
  if (config_.ablation.discrete_temporal()) {
    for (std::size_t l = 0; l < params_.tcn_layers.size(); ++l) {
      add_tcn("tcn.layer" + std::to_string(l), params_.tcn_layers[l]);
    }
  } else {
    add_tcn("tcn", params_.tcn);
  }
  for (std::size_t i = 0; i < params_.phi.size(); ++i) {
    out.emplace_back("phi." + std::to_string(i), params_.phi[i]);
  }
  out.emplace_back("decoder.1.w", params_.dec1_w);
  out.emplace_back("decoder.1.b", params_.dec1_b);
  out.emplace_back("decoder.2.w", params_.dec2_w);
  out.emplace_back("decoder.2.b", params_.dec2_b);
  return out;
}

std::vector<Tensor> Model::parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& t : parameters()) n += t.size();
  return n;
}

std::size_t Model::attentive_parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& t : params_.phi) n += t.size();
  return n;
}

json Model::to_json() const {
  json j;
  j["format"] = "odecast-checkpoint";
  j["version"] = 1;
  j["config"] = config_.to_json();
  json params = json::object();
  for (auto& [name, t] : named_parameters()) {
    params[name] = {{"shape", t.shape()}, {"values", t.values()}};
  }
  j["params"] = params;
  if (params_.fixed_adjacency.defined()) {
    j["buffers"]["fixed_adjacency"] = {{"shape", params_.fixed_adjacency.shape()},
                                       {"values", params_.fixed_adjacency.values()}};
  }
  return j;
}

void Model::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint to " + path);
  out << to_json().dump(1) << '\n';
}

namespace {

void load_into(Tensor& dst, const json& entry, const std::string& name) {
  const auto shape = entry.at("shape").get<Shape>();
  auto values = entry.at("values").get<std::vector<double>>();
  if (shape != dst.shape() || values.size() != dst.size()) {
    throw ContractError("checkpoint: parameter '" + name + "' has shape " + shape_str(shape) +
                        ", expected " + shape_str(dst.shape()));
  }
  dst.values() = std::move(values);
}

}  // namespace

Model Model::from_json(const json& j) {
  if (j.at("format").get<std::string>() != "odecast-checkpoint") {
    throw ContractError("checkpoint: unrecognized format");
  }
  if (j.at("version").get<int>() != 1) {
    throw ContractError("checkpoint: unsupported version");
  }
  Model m(ModelConfig::from_json(j.at("config")), 0);
  const json& params = j.at("params");
  auto named = m.named_parameters();
  if (params.size() != named.size()) {
    throw ContractError("checkpoint: expected " + std::to_string(named.size()) +
                        " parameters, found " + std::to_string(params.size()));
  }
  for (auto& [name, t] : named) {
    if (!params.contains(name)) throw ContractError("checkpoint: missing parameter '" + name + "'");
    Tensor target = t;
    load_into(target, params.at(name), name);
  }
  if (m.params_.fixed_adjacency.defined()) {
    load_into(m.params_.fixed_adjacency, j.at("buffers").at("fixed_adjacency"),
              "fixed_adjacency");
  }
  return m;
}

Model Model::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint from " + path);
  json j;
  in >> j;
  return from_json(j);
}

}  // namespace odecast
