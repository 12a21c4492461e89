#pragma once

// Amplitude-level algebra for few-photon states over labeled optical modes.
//
// A PhotonicState is a superposition of normalized Fock basis vectors
// |n_1, n_2, ...>. Linear optics acts on creation operators,
// a_in^dagger -> sum_out M(out, in) b_out^dagger, and is expanded exactly.

#include <complex>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tbtele/errors.hpp"

namespace tbtele {

using ComplexAmp = std::complex<double>;

// Spatial port labels. The last four are internal plumbing: the source mode
// feeding Alice's interferometer, the discarded 1550 nm partner of Alice's
// photon, and the loss outputs of the passive couplers.
enum class Port : std::uint8_t {
  AliceIn,
  CharlieA,
  CharlieE,
  BobIn,
  C1,
  C2,
  BobDet,
  AliceSrc,
  AliceIdler,
  AliceLoss,
  BobLoss,
};

std::string_view port_name(Port port);
std::optional<Port> port_from_name(std::string_view name);

struct Mode {
  Port spatial = Port::AliceIn;
  int bin = 0;  // time slot, one slot = bin separation
  int tag = 0;  // internal wavepacket label, 0 = reference

  friend auto operator<=>(const Mode&, const Mode&) = default;
};

std::string to_string(const Mode& mode);

// Canonical occupation: sorted by mode, no zero counts.
using Occupation = std::vector<std::pair<Mode, int>>;

int photon_count(const Occupation& occ);
int count_in(const Occupation& occ, const Mode& mode);
// Total photons in a (spatial, bin) slot, summed over tags.
int count_in_slot(const Occupation& occ, Port spatial, int bin);
Occupation make_occupation(std::vector<std::pair<Mode, int>> entries);

struct FockTerm {
  Occupation occupations;
  ComplexAmp amplitude;
};

inline constexpr int kDefaultPhotonCutoff = 4;
inline constexpr double kDefaultNormTolerance = 1e-9;

class PhotonicState {
 public:
  // Merges duplicate occupations, drops vanishing terms and sorts canonically.
  // Throws CutoffExceeded if any term carries more photons than `cutoff`.
  explicit PhotonicState(std::vector<FockTerm> terms,
                         int cutoff = kDefaultPhotonCutoff,
                         double norm_tolerance = kDefaultNormTolerance);

  static PhotonicState vacuum(int cutoff = kDefaultPhotonCutoff);
  static PhotonicState single_photon(const Mode& mode,
                                     int cutoff = kDefaultPhotonCutoff);

  const std::vector<FockTerm>& terms() const { return terms_; }
  int cutoff() const { return cutoff_; }
  double norm_tolerance() const { return norm_tolerance_; }

  double norm_squared() const;
  bool is_normalized() const;
  std::set<Port> ports() const;
  std::set<Mode> modes() const;
  int max_photons() const;

  // Amplitude of an exact occupation, zero when absent.
  ComplexAmp amplitude_of(const Occupation& occ) const;

 private:
  std::vector<FockTerm> terms_;
  int cutoff_;
  double norm_tolerance_;
};

// Linear map on creation operators. Columns index inputs, rows outputs.
// A tag-blind transform is specified on tag-0 modes and acts identically on
// every tag, carrying the photon's tag to its output.
class ModeTransform {
 public:
  ModeTransform(std::vector<Mode> inputs, std::vector<Mode> outputs,
                Eigen::MatrixXcd matrix, bool lossy = false,
                bool tag_blind = true);

  const std::vector<Mode>& inputs() const { return inputs_; }
  const std::vector<Mode>& outputs() const { return outputs_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  bool lossy() const { return lossy_; }
  bool tag_blind() const { return tag_blind_; }

  // Conjugate transpose; only defined for unitary (non-lossy) transforms.
  ModeTransform inverse() const;

  // Column index of the input handling `mode`, if any.
  std::optional<std::size_t> input_index(const Mode& mode) const;
  std::set<Port> input_ports() const;

 private:
  std::vector<Mode> inputs_;
  std::vector<Mode> outputs_;
  Eigen::MatrixXcd matrix_;
  bool lossy_;
  bool tag_blind_;
};

struct DetectionPattern {
  Occupation clicks;                  // exact photon counts demanded
  std::set<Port> vacuum_elsewhere_over;  // ports required empty elsewhere
};

struct ConditionResult {
  std::optional<PhotonicState> state;  // empty when nothing matched
  double probability = 0.0;
  bool empty_conditional() const { return !state.has_value(); }
};

class DensityOperator {
 public:
  DensityOperator(std::vector<Occupation> basis, Eigen::MatrixXcd matrix);

  const std::vector<Occupation>& basis() const { return basis_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  std::size_t dimension() const { return basis_.size(); }

  double trace() const;
  double purity() const;
  Eigen::VectorXd eigenvalues() const;
  std::optional<std::size_t> index_of(const Occupation& occ) const;
  // Probability weight of the basis entries accepted by `pred`.
  template <typename Pred>
  double weight_where(Pred pred) const {
    double w = 0.0;
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (pred(basis_[i])) w += matrix_(i, i).real();
    return w;
  }

  // Throws DomainError unless Hermitian, unit trace and positive within tol.
  void validate(double tol = 1e-9) const;

  // Weighted sum over a merged basis, renormalized to unit trace.
  static DensityOperator mixture(
      const std::vector<std::pair<double, DensityOperator>>& parts);

 private:
  std::vector<Occupation> basis_;
  Eigen::MatrixXcd matrix_;
};

PhotonicState normalize(const PhotonicState& state);
PhotonicState tensor(const PhotonicState& a, const PhotonicState& b);
PhotonicState apply_transform(const PhotonicState& state,
                              const ModeTransform& transform);
ConditionResult condition_on_pattern(const PhotonicState& state,
                                     const DetectionPattern& pattern);
DensityOperator trace_to_density(const PhotonicState& state,
                                 const std::set<Port>& keep);
double fidelity(const DensityOperator& rho, const PhotonicState& target);

// Normalized (P^dagger)^n |0> for a creation-operator polynomial P^dagger
// given as monomials with coefficients.
PhotonicState creation_power(
    const std::vector<std::pair<Occupation, ComplexAmp>>& polynomial, int n,
    int cutoff = kDefaultPhotonCutoff);

// Line format: `amp_re amp_im Port.bin.tag:count ...`, canonical order.
std::string serialize_state(const PhotonicState& state);
PhotonicState parse_state(std::string_view text,
                          int cutoff = kDefaultPhotonCutoff);

}  // namespace tbtele
