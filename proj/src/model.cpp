#include "lnainfer/model.hpp"

#include <cmath>
#include <stdexcept>

#include "lnainfer/errors.hpp"

namespace lnainfer {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::domain_error(std::string(name) + " must be strictly positive and finite");
  }
}

void require_nonnegative_state(std::span<const double> state) {
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i] < 0.0 || !std::isfinite(state[i])) {
      throw InputError("state component " + std::to_string(i) + " is negative or not finite");
    }
  }
}

}  // namespace

std::string to_string(Experiment kind) {
  return kind == Experiment::translation ? "translation" : "transcription";
}

Experiment experiment_from_string(const std::string& name) {
  if (name == "translation") return Experiment::translation;
  if (name == "transcription") return Experiment::transcription;
  throw InputError("unknown experiment kind '" + name + "' (expected translation|transcription)");
}

ReactionNetwork::ReactionNetwork(Experiment kind, std::size_t species, std::vector<Reaction> reactions)
    : experiment_(kind), species_count_(species), reactions_(std::move(reactions)) {}

ReactionNetwork ReactionNetwork::full() {
  return ReactionNetwork(Experiment::transcription, 2,
                         {
                             {"transcription", {+1, 0}, ReactionKind::birth, 0},
                             {"mrna_degradation", {-1, 0}, ReactionKind::death, 0},
                             {"translation", {0, +1}, ReactionKind::birth, 1},
                             {"protein_degradation", {0, -1}, ReactionKind::death, 1},
                         });
}

ReactionNetwork ReactionNetwork::reduced() {
  return ReactionNetwork(Experiment::translation, 1,
                         {
                             {"protein_synthesis", {+1}, ReactionKind::birth, 0},
                             {"protein_degradation", {-1}, ReactionKind::death, 0},
                         });
}

ReactionNetwork ReactionNetwork::for_experiment(Experiment kind) {
  return kind == Experiment::translation ? reduced() : full();
}

void TranslationParams::validate() const {
  require_positive(tau2, "tau2");
  require_positive(delta2, "delta2");
  require_positive(phi2_0, "phi2_0");
  require_positive(sigma_u2, "sigma_u2");
}

void TranscriptionParams::validate() const {
  require_positive(tau1, "tau1");
  require_positive(delta1, "delta1");
  require_positive(alpha, "alpha");
  require_positive(delta2, "delta2");
  require_positive(phi1_0, "phi1_0");
  require_positive(phi2_0, "phi2_0");
  require_positive(sigma_u2, "sigma_u2");
}

Experiment experiment_of(const ModelParams& params) {
  return std::holds_alternative<TranslationParams>(params) ? Experiment::translation
                                                           : Experiment::transcription;
}

std::size_t species_count(Experiment kind) { return kind == Experiment::translation ? 1 : 2; }

void validate(const ModelParams& params) {
  std::visit([](const auto& p) { p.validate(); }, params);
}

MeasurementScale::MeasurementScale(double k) : kappa(k) { require_positive(k, "kappa"); }

void propensities(const ReactionNetwork& network, std::span<const double> state,
                  const ModelParams& params, double t, std::span<double> out) {
  if (state.size() != network.species_count()) {
    throw InputError("state length does not match the network species count");
  }
  if (out.size() != network.reactions().size()) {
    throw InputError("output span must hold one rate per reaction");
  }
  if (experiment_of(params) != network.experiment()) {
    throw InputError("parameters do not belong to this reaction network");
  }
  require_nonnegative_state(state);

  if (const auto* p = std::get_if<TranslationParams>(&params)) {
    out[0] = p->tau2;
    out[1] = p->delta2 * state[0];
  } else {
    const auto& q = std::get<TranscriptionParams>(params);
    out[0] = q.synthesis(t);
    out[1] = q.delta1 * state[0];
    out[2] = q.alpha * state[0];
    out[3] = q.delta2 * state[1];
  }
}

std::vector<double> propensities(const ReactionNetwork& network,
                                 std::span<const std::int64_t> state,
                                 const ModelParams& params, double t) {
  std::vector<double> real_state(state.begin(), state.end());
  std::vector<double> rates(network.reactions().size());
  propensities(network, real_state, params, t, rates);
  return rates;
}

std::vector<double> drift(const ReactionNetwork& network, std::span<const double> phi,
                          const ModelParams& params, double t) {
  std::vector<double> rates(network.reactions().size());
  propensities(network, phi, params, t, rates);
  std::vector<double> result(network.species_count(), 0.0);
  for (std::size_t j = 0; j < rates.size(); ++j) {
    const auto& v = network.reactions()[j].stoichiometry;
    for (std::size_t s = 0; s < result.size(); ++s) result[s] += v[s] * rates[j];
  }
  return result;
}

TranslationTilde reparameterize_translation(const TranslationParams& params, double kappa) {
  require_positive(kappa, "kappa");
  return {kappa * params.tau2, params.delta2, kappa * params.phi2_0, params.sigma_u2};
}

TranslationParams restore_translation(const TranslationTilde& tilde, double kappa) {
  require_positive(kappa, "kappa");
  return {tilde.tau2_tilde / kappa, tilde.delta2, tilde.phi2_0_tilde / kappa, tilde.sigma_u2};
}

TranscriptionTilde reparameterize_transcription(const TranscriptionParams& params, double kappa) {
  require_positive(kappa, "kappa");
  params.validate();
  const double ka = kappa * params.alpha;
  return {ka * params.tau1, params.delta1,       ka,
          params.delta2,    ka * params.phi1_0, kappa * params.phi2_0,
          params.sigma_u2};
}

TranscriptionParams restore_transcription(const TranscriptionTilde& tilde, double kappa) {
  require_positive(kappa, "kappa");
  require_positive(tilde.alpha_tilde, "alpha_tilde");
  const double ka = tilde.alpha_tilde;
  return {tilde.tau1_tilde / ka,   tilde.delta1,          ka / kappa, tilde.delta2,
          tilde.phi1_0_tilde / ka, tilde.phi2_0_tilde / kappa, tilde.sigma_u2};
}

}  // namespace lnainfer
