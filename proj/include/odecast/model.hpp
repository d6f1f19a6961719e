#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "odecast/graph.hpp"
#include "odecast/temporal.hpp"

// The full encoder: an exterior temporal ODE whose vector field nests the
// interior graph propagation with attentive readout, plus the start/end
// convolutions, the ablation variants, and the training loss.

namespace odecast {

enum class ForecastMode { single_step, multi_step };

std::string to_string(ForecastMode mode);
ForecastMode forecast_mode_from_string(const std::string& s);

// Variant switches. no_cgp / no_cta swap the interior/exterior integration
// for their discrete counterparts, no_gsl freezes a random row-stochastic
// graph, no_attn replaces the attentive readout with a final-state map, and
// fully_discrete is shorthand for no_cgp + no_cta.
struct AblationFlags {
  bool no_cgp = false;
  bool no_cta = false;
  bool no_gsl = false;
  bool no_attn = false;
  bool fully_discrete = false;

  bool discrete_spatial() const { return no_cgp || fully_discrete; }
  bool discrete_temporal() const { return no_cta || fully_discrete; }
  std::vector<std::string> names() const;
  static AblationFlags from_names(const std::vector<std::string>& names);
};

struct ModelConfig {
  std::size_t nodes = 2;
  std::size_t in_features = 1;   // D
  std::size_t hidden = 16;       // D'
  std::size_t embed_dim = 8;     // graph-learner d
  std::size_t input_len = 24;    // T
  std::size_t horizon = 1;       // H
  ForecastMode mode = ForecastMode::single_step;
  long long dilation_factor = 2;
  std::vector<std::size_t> widths = {2, 3, 6, 7};
  SolverSpec cta = SolverSpec::euler(1.0, 0.25);
  SolverSpec cgp = SolverSpec::euler(1.0, 0.5);
  std::size_t topk = 20;
  double beta = 3.0;
  double dropout_rate = 0.3;
  std::size_t decoder_hidden = 32;
  AblationFlags ablation;

  void validate() const;  // throws ContractError on any broken invariant
  long long receptive() const;
  std::size_t max_width() const;
  std::size_t output_features() const;  // decoder output channels

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

struct ModelParams {
  Tensor start_w, start_b;          // D -> D'
  GraphLearnerParams graph;         // absent under no_gsl
  bool has_graph = true;
  TcnParams tcn;                    // shared set (continuous temporal path)
  std::vector<TcnParams> tcn_layers;  // one set per layer (discrete path)
  std::vector<Tensor> phi;          // K_cgp+1 maps, or 1 under no_attn
  Tensor dec1_w, dec1_b, dec2_w, dec2_b;
  Tensor fixed_adjacency;           // row-stochastic buffer under no_gsl
};

Tensor loss_mae(const Tensor& pred, const Tensor& target);

class Model {
public:
  // Builds the variant selected by config.ablation; all parameters are drawn
  // deterministically from `seed`.
  Model(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }

  // x is [B x N x D x T] (or [N x D x T] for a single window); returns
  // [B x N x D'] (or [N x D']). `dropout_rng` is required when training with
  // a nonzero dropout rate.
  Tensor encode(const Tensor& x, bool training = false,
                std::mt19937_64* dropout_rng = nullptr) const;
  // Two 1x1 convolutions with ReLU between; single-step emits [.. x N x D],
  // multi-step [.. x N x D x H].
  Tensor decode(const Tensor& h) const;
  Tensor forward(const Tensor& x, bool training = false,
                 std::mt19937_64* dropout_rng = nullptr) const;

  // Current learned (or frozen) graph.
  Adjacency adjacency() const;

  std::vector<std::pair<std::string, Tensor>> named_parameters() const;
  std::vector<Tensor> parameters() const;
  std::size_t parameter_count() const;
  std::size_t attentive_parameter_count() const;

  nlohmann::json to_json() const;
  void save(const std::string& path) const;
  static Model load(const std::string& path);
  static Model from_json(const nlohmann::json& j);

private:
  Tensor normalized_adjacency() const;
  Tensor interior(const Tensor& hc, const Tensor& a_hat) const;

  ModelConfig config_;
  ModelParams params_;
};

}  // namespace odecast
