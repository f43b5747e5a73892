#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lnainfer {

enum class Experiment { translation, transcription };

std::string to_string(Experiment kind);
Experiment experiment_from_string(const std::string& name);

enum class ReactionKind { birth, death };

struct Reaction {
  std::string name;
  std::vector<int> stoichiometry;
  ReactionKind kind;
  std::size_t species;
};

/// Birth-death network of the gene-expression model. The full variant tracks
/// (mRNA, protein); the translation-inhibited variant tracks protein only.
class ReactionNetwork {
 public:
  /// transcription, mRNA degradation, translation, protein degradation
  static ReactionNetwork full();
  /// protein synthesis (basal), protein degradation
  static ReactionNetwork reduced();
  static ReactionNetwork for_experiment(Experiment kind);

  std::size_t species_count() const { return species_count_; }
  const std::vector<Reaction>& reactions() const { return reactions_; }
  Experiment experiment() const { return experiment_; }

 private:
  ReactionNetwork(Experiment kind, std::size_t species, std::vector<Reaction> reactions);

  Experiment experiment_;
  std::size_t species_count_;
  std::vector<Reaction> reactions_;
};

/// Protein-only model under a translation inhibitor. Rates per hour,
/// levels in molecules.
struct TranslationParams {
  double tau2;
  double delta2;
  double phi2_0;
  double sigma_u2;

  void validate() const;
};

/// Two-species model under a transcription inhibitor; mRNA synthesis runs at
/// the basal rate tau1.
struct TranscriptionParams {
  double tau1;
  double delta1;
  double alpha;
  double delta2;
  double phi1_0;
  double phi2_0;
  double sigma_u2;

  // Synthesis profile beta(t). Only the constant basal rate is modelled; this
  // is the single point a time-varying profile would plug into.
  double synthesis(double /*t*/) const { return tau1; }

  void validate() const;
};

using ModelParams = std::variant<TranslationParams, TranscriptionParams>;

Experiment experiment_of(const ModelParams& params);
std::size_t species_count(Experiment kind);
void validate(const ModelParams& params);

struct MeasurementScale {
  double kappa;

  explicit MeasurementScale(double k);
};

/// Reaction rates at `state`, one per reaction of `network`, written into
/// `out`. Throws InputError on a negative state component.
void propensities(const ReactionNetwork& network, std::span<const double> state,
                  const ModelParams& params, double t, std::span<double> out);

std::vector<double> propensities(const ReactionNetwork& network,
                                 std::span<const std::int64_t> state,
                                 const ModelParams& params, double t);

/// sum_j v_j w_j(phi): the macroscopic drift.
std::vector<double> drift(const ReactionNetwork& network, std::span<const double> phi,
                          const ModelParams& params, double t);

// Sampler-scale parameterizations. Levels and synthesis rates are expressed in
// fluorescence units, which decorrelates them from kappa.

struct TranslationTilde {
  double tau2_tilde;
  double delta2;
  double phi2_0_tilde;
  double sigma_u2;
};

struct TranscriptionTilde {
  double tau1_tilde;
  double delta1;
  double alpha_tilde;
  double delta2;
  double phi1_0_tilde;
  double phi2_0_tilde;
  double sigma_u2;
};

TranslationTilde reparameterize_translation(const TranslationParams& params, double kappa);
TranslationParams restore_translation(const TranslationTilde& tilde, double kappa);

TranscriptionTilde reparameterize_transcription(const TranscriptionParams& params, double kappa);
TranscriptionParams restore_transcription(const TranscriptionTilde& tilde, double kappa);

}  // namespace lnainfer
