#include "tbtele/qstate.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

namespace tbtele {

namespace {

constexpr double kDropAmplitude = 1e-14;

constexpr std::array<std::string_view, 11> kPortNames = {
    "AliceIn",  "CharlieA", "CharlieE",   "BobIn",     "C1",     "C2",
    "BobDet",   "AliceSrc", "AliceIdler", "AliceLoss", "BobLoss"};

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Multiply a creation-operator monomial by one more creation operator.
void add_photon(Occupation& mono, const Mode& mode, int n = 1) {
  auto it = std::lower_bound(
      mono.begin(), mono.end(), mode,
      [](const std::pair<Mode, int>& e, const Mode& m) { return e.first < m; });
  if (it != mono.end() && it->first == mode) {
    it->second += n;
  } else {
    mono.insert(it, {mode, n});
  }
}

// (a^dagger)^k |0> = sqrt(k!) |k>
double monomial_to_fock(const Occupation& mono) {
  double f = 1.0;
  for (const auto& [mode, n] : mono) f *= std::sqrt(factorial(n));
  return f;
}

double fock_to_monomial(const Occupation& occ) {
  double f = 1.0;
  for (const auto& [mode, n] : occ) f /= std::sqrt(factorial(n));
  return f;
}

using TermMap = std::map<Occupation, ComplexAmp>;

std::vector<FockTerm> to_terms(const TermMap& map) {
  std::vector<FockTerm> out;
  out.reserve(map.size());
  for (const auto& [occ, amp] : map) out.push_back({occ, amp});
  return out;
}

}  // namespace

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroState: return "ZeroState";
    case ErrorKind::ModeCollision: return "ModeCollision";
    case ErrorKind::CutoffExceeded: return "CutoffExceeded";
    case ErrorKind::UncoveredMode: return "UncoveredMode";
    case ErrorKind::NonUnitary: return "NonUnitary";
    case ErrorKind::EmptyKeepSet: return "EmptyKeepSet";
    case ErrorKind::BasisMismatch: return "BasisMismatch";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
  }
  return "Unknown";
}

std::string_view port_name(Port port) {
  return kPortNames.at(static_cast<std::size_t>(port));
}

std::optional<Port> port_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kPortNames.size(); ++i)
    if (kPortNames[i] == name) return static_cast<Port>(i);
  return std::nullopt;
}

std::string to_string(const Mode& mode) {
  std::ostringstream os;
  os << port_name(mode.spatial) << '.' << mode.bin << '.' << mode.tag;
  return os.str();
}

int photon_count(const Occupation& occ) {
  int n = 0;
  for (const auto& e : occ) n += e.second;
  return n;
}

int count_in(const Occupation& occ, const Mode& mode) {
  for (const auto& [m, n] : occ)
    if (m == mode) return n;
  return 0;
}

int count_in_slot(const Occupation& occ, Port spatial, int bin) {
  int n = 0;
  for (const auto& [m, k] : occ)
    if (m.spatial == spatial && m.bin == bin) n += k;
  return n;
}

Occupation make_occupation(std::vector<std::pair<Mode, int>> entries) {
  Occupation occ;
  for (const auto& [mode, n] : entries) {
    if (n < 0) throw Error(ErrorKind::DomainError, "negative photon count");
    if (n > 0) add_photon(occ, mode, n);
  }
  return occ;
}

// ---------------------------------------------------------------------------
// PhotonicState

PhotonicState::PhotonicState(std::vector<FockTerm> terms, int cutoff,
                             double norm_tolerance)
    : cutoff_(cutoff), norm_tolerance_(norm_tolerance) {
  TermMap merged;
  for (auto& t : terms) {
    if (!std::isfinite(t.amplitude.real()) || !std::isfinite(t.amplitude.imag()))
      throw Error(ErrorKind::DomainError, "non-finite amplitude");
    Occupation canon = make_occupation(std::move(t.occupations));
    if (photon_count(canon) > cutoff_)
      throw Error(ErrorKind::CutoffExceeded,
                  "term with " + std::to_string(photon_count(canon)) +
                      " photons exceeds cutoff " + std::to_string(cutoff_));
    merged[std::move(canon)] += t.amplitude;
  }
  for (auto& [occ, amp] : merged)
    if (std::abs(amp) > kDropAmplitude) terms_.push_back({occ, amp});
}

PhotonicState PhotonicState::vacuum(int cutoff) {
  return PhotonicState({{Occupation{}, 1.0}}, cutoff);
}

PhotonicState PhotonicState::single_photon(const Mode& mode, int cutoff) {
  return PhotonicState({{Occupation{{mode, 1}}, 1.0}}, cutoff);
}

double PhotonicState::norm_squared() const {
  double s = 0.0;
  for (const auto& t : terms_) s += std::norm(t.amplitude);
  return s;
}

bool PhotonicState::is_normalized() const {
  return std::abs(norm_squared() - 1.0) <= norm_tolerance_;
}

std::set<Port> PhotonicState::ports() const {
  std::set<Port> out;
  for (const auto& t : terms_)
    for (const auto& e : t.occupations) out.insert(e.first.spatial);
  return out;
}

std::set<Mode> PhotonicState::modes() const {
  std::set<Mode> out;
  for (const auto& t : terms_)
    for (const auto& e : t.occupations) out.insert(e.first);
  return out;
}

int PhotonicState::max_photons() const {
  int n = 0;
  for (const auto& t : terms_) n = std::max(n, photon_count(t.occupations));
  return n;
}

ComplexAmp PhotonicState::amplitude_of(const Occupation& occ) const {
  auto it = std::lower_bound(
      terms_.begin(), terms_.end(), occ,
      [](const FockTerm& t, const Occupation& o) { return t.occupations < o; });
  if (it != terms_.end() && it->occupations == occ) return it->amplitude;
  return 0.0;
}

// ---------------------------------------------------------------------------
// ModeTransform

ModeTransform::ModeTransform(std::vector<Mode> inputs, std::vector<Mode> outputs,
                             Eigen::MatrixXcd matrix, bool lossy, bool tag_blind)
    : inputs_(std::move(inputs)),
      outputs_(std::move(outputs)),
      matrix_(std::move(matrix)),
      lossy_(lossy),
      tag_blind_(tag_blind) {
  if (matrix_.rows() != static_cast<Eigen::Index>(outputs_.size()) ||
      matrix_.cols() != static_cast<Eigen::Index>(inputs_.size()))
    throw Error(ErrorKind::DomainError, "transform matrix shape mismatch");
  if (!lossy_ && outputs_.size() != inputs_.size())
    throw Error(ErrorKind::NonUnitary,
                "non-lossy transform must be square");
  std::set<Mode> seen_in(inputs_.begin(), inputs_.end());
  std::set<Mode> seen_out(outputs_.begin(), outputs_.end());
  if (seen_in.size() != inputs_.size() || seen_out.size() != outputs_.size())
    throw Error(ErrorKind::DomainError, "duplicate transform mode");
  if (tag_blind_) {
    for (const auto& m : inputs_)
      if (m.tag != 0) throw Error(ErrorKind::DomainError, "tag-blind input with tag");
    for (const auto& m : outputs_)
      if (m.tag != 0) throw Error(ErrorKind::DomainError, "tag-blind output with tag");
  }
  const Eigen::MatrixXcd gram = matrix_.adjoint() * matrix_;
  const Eigen::MatrixXcd id =
      Eigen::MatrixXcd::Identity(gram.rows(), gram.cols());
  if ((gram - id).cwiseAbs().maxCoeff() > 1e-9)
    throw Error(ErrorKind::NonUnitary,
                lossy_ ? "lossy transform is not an isometry"
                       : "transform is not unitary");
}

ModeTransform ModeTransform::inverse() const {
  if (lossy_)
    throw Error(ErrorKind::NonUnitary, "lossy transform has no inverse");
  return ModeTransform(outputs_, inputs_, matrix_.adjoint(), false, tag_blind_);
}

std::optional<std::size_t> ModeTransform::input_index(const Mode& mode) const {
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    const Mode& in = inputs_[i];
    if (in.spatial != mode.spatial || in.bin != mode.bin) continue;
    if (tag_blind_ || in.tag == mode.tag) return i;
  }
  return std::nullopt;
}

std::set<Port> ModeTransform::input_ports() const {
  std::set<Port> out;
  for (const auto& m : inputs_) out.insert(m.spatial);
  return out;
}

// ---------------------------------------------------------------------------
// DensityOperator

DensityOperator::DensityOperator(std::vector<Occupation> basis,
                                 Eigen::MatrixXcd matrix)
    : basis_(std::move(basis)), matrix_(std::move(matrix)) {
  const auto n = static_cast<Eigen::Index>(basis_.size());
  if (matrix_.rows() != n || matrix_.cols() != n)
    throw Error(ErrorKind::DomainError, "density matrix shape mismatch");
}

double DensityOperator::trace() const { return matrix_.trace().real(); }

double DensityOperator::purity() const {
  return (matrix_ * matrix_).trace().real();
}

Eigen::VectorXd DensityOperator::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix_);
  return solver.eigenvalues();
}

std::optional<std::size_t> DensityOperator::index_of(const Occupation& occ) const {
  auto it = std::lower_bound(basis_.begin(), basis_.end(), occ);
  if (it != basis_.end() && *it == occ)
    return static_cast<std::size_t>(it - basis_.begin());
  return std::nullopt;
}

void DensityOperator::validate(double tol) const {
  if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > tol)
    throw Error(ErrorKind::DomainError, "density operator not Hermitian");
  if (std::abs(trace() - 1.0) > tol)
    throw Error(ErrorKind::DomainError, "density operator trace != 1");
  if (dimension() > 0 && eigenvalues().minCoeff() < -tol)
    throw Error(ErrorKind::DomainError, "density operator has negative eigenvalue");
}

DensityOperator DensityOperator::mixture(
    const std::vector<std::pair<double, DensityOperator>>& parts) {
  std::set<Occupation> all;
  for (const auto& [w, rho] : parts)
    all.insert(rho.basis().begin(), rho.basis().end());
  std::vector<Occupation> basis(all.begin(), all.end());
  DensityOperator out(basis, Eigen::MatrixXcd::Zero(basis.size(), basis.size()));
  double total = 0.0;
  for (const auto& [w, rho] : parts) {
    if (w < 0) throw Error(ErrorKind::DomainError, "negative mixture weight");
    total += w;
    std::vector<std::size_t> map(rho.dimension());
    for (std::size_t i = 0; i < rho.dimension(); ++i)
      map[i] = *out.index_of(rho.basis()[i]);
    for (std::size_t i = 0; i < rho.dimension(); ++i)
      for (std::size_t j = 0; j < rho.dimension(); ++j)
        out.matrix_(map[i], map[j]) += w * rho.matrix()(i, j);
  }
  if (total <= 0) throw Error(ErrorKind::ZeroState, "empty mixture");
  out.matrix_ /= total;
  return out;
}

// ---------------------------------------------------------------------------
// Operations

PhotonicState normalize(const PhotonicState& state) {
  double max_amp = 0.0;
  for (const auto& t : state.terms())
    max_amp = std::max(max_amp, std::abs(t.amplitude));
  if (max_amp < 1e-15)
    throw Error(ErrorKind::ZeroState, "cannot normalize a zero state");
  const double scale = 1.0 / std::sqrt(state.norm_squared());
  std::vector<FockTerm> terms = state.terms();
  for (auto& t : terms) t.amplitude *= scale;
  return PhotonicState(std::move(terms), state.cutoff(), state.norm_tolerance());
}

PhotonicState tensor(const PhotonicState& a, const PhotonicState& b) {
  const auto pa = a.ports();
  for (Port p : b.ports())
    if (pa.count(p))
      throw Error(ErrorKind::ModeCollision,
                  "port " + std::string(port_name(p)) + " in both factors");
  std::vector<FockTerm> terms;
  terms.reserve(a.terms().size() * b.terms().size());
  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      Occupation occ = ta.occupations;
      occ.insert(occ.end(), tb.occupations.begin(), tb.occupations.end());
      terms.push_back({std::move(occ), ta.amplitude * tb.amplitude});
    }
  }
  return PhotonicState(std::move(terms), std::max(a.cutoff(), b.cutoff()),
                       a.norm_tolerance());
}

PhotonicState apply_transform(const PhotonicState& state,
                              const ModeTransform& transform) {
  const auto covered = transform.input_ports();
  const auto& M = transform.matrix();
  const auto& outs = transform.outputs();
  TermMap result;

  for (const auto& term : state.terms()) {
    TermMap monos{{Occupation{}, term.amplitude * fock_to_monomial(term.occupations)}};
    for (const auto& [mode, n] : term.occupations) {
      const auto col = transform.input_index(mode);
      if (!col) {
        if (covered.count(mode.spatial))
          throw Error(ErrorKind::UncoveredMode,
                      "mode " + to_string(mode) + " not covered by transform");
        TermMap next;
        for (auto& [mono, c] : monos) {
          Occupation m = mono;
          add_photon(m, mode, n);
          next[std::move(m)] += c;
        }
        monos = std::move(next);
        continue;
      }
      for (int k = 0; k < n; ++k) {
        TermMap next;
        for (const auto& [mono, c] : monos) {
          for (Eigen::Index r = 0; r < M.rows(); ++r) {
            const ComplexAmp u = M(r, static_cast<Eigen::Index>(*col));
            if (u == ComplexAmp{}) continue;
            Mode out = outs[static_cast<std::size_t>(r)];
            if (transform.tag_blind()) out.tag = mode.tag;
            Occupation m = mono;
            add_photon(m, out);
            next[std::move(m)] += c * u;
          }
        }
        monos = std::move(next);
      }
    }
    for (const auto& [mono, c] : monos) result[mono] += c * monomial_to_fock(mono);
  }
  return PhotonicState(to_terms(result), state.cutoff(), state.norm_tolerance());
}

ConditionResult condition_on_pattern(const PhotonicState& state,
                                     const DetectionPattern& pattern) {
  if (pattern.clicks.empty())
    throw Error(ErrorKind::DomainError, "detection pattern without clicks");
  std::set<Mode> click_modes;
  for (const auto& [m, n] : pattern.clicks) click_modes.insert(m);

  std::vector<FockTerm> kept;
  double prob = 0.0;
  for (const auto& term : state.terms()) {
    bool match = true;
    for (const auto& [m, n] : pattern.clicks)
      if (count_in(term.occupations, m) != n) { match = false; break; }
    if (!match) continue;
    Occupation rest;
    for (const auto& e : term.occupations) {
      if (click_modes.count(e.first)) continue;
      if (pattern.vacuum_elsewhere_over.count(e.first.spatial)) { match = false; break; }
      rest.push_back(e);
    }
    if (!match) continue;
    prob += std::norm(term.amplitude);
    kept.push_back({std::move(rest), term.amplitude});
  }
  ConditionResult out;
  out.probability = std::clamp(prob / state.norm_squared(), 0.0, 1.0);
  if (kept.empty() || prob <= 0.0) {
    out.probability = 0.0;
    return out;
  }
  out.state = normalize(PhotonicState(std::move(kept), state.cutoff(),
                                      state.norm_tolerance()));
  return out;
}

DensityOperator trace_to_density(const PhotonicState& state,
                                 const std::set<Port>& keep) {
  std::map<Occupation, std::vector<std::pair<Occupation, ComplexAmp>>> groups;
  std::set<Occupation> basis_set;
  bool populated = false;
  for (const auto& term : state.terms()) {
    Occupation kept, env;
    for (const auto& e : term.occupations)
      (keep.count(e.first.spatial) ? kept : env).push_back(e);
    populated = populated || !kept.empty();
    basis_set.insert(kept);
    groups[std::move(env)].push_back({std::move(kept), term.amplitude});
  }
  if (!populated)
    throw Error(ErrorKind::EmptyKeepSet, "kept ports hold no photons");

  std::vector<Occupation> basis(basis_set.begin(), basis_set.end());
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  auto index = [&](const Occupation& o) {
    return static_cast<Eigen::Index>(
        std::lower_bound(basis.begin(), basis.end(), o) - basis.begin());
  };
  for (const auto& [env, vec] : groups) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    for (const auto& [occ, amp] : vec) v(index(occ)) += amp;
    rho += v * v.adjoint();
  }
  rho /= state.norm_squared();
  return DensityOperator(std::move(basis), std::move(rho));
}

double fidelity(const DensityOperator& rho, const PhotonicState& target) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(rho.dimension()));
  for (const auto& t : target.terms()) {
    const auto idx = rho.index_of(t.occupations);
    if (!idx) {
      Occupation occ = t.occupations;
      std::string desc;
      for (const auto& [m, n] : occ) desc += to_string(m) + ":" + std::to_string(n) + " ";
      throw Error(ErrorKind::BasisMismatch, "target term not in basis: " + desc);
    }
    v(static_cast<Eigen::Index>(*idx)) = t.amplitude;
  }
  const double nsq = v.squaredNorm();
  if (nsq <= 0) throw Error(ErrorKind::ZeroState, "zero fidelity target");
  const ComplexAmp f = v.dot(rho.matrix() * v) / nsq;
  return std::clamp(f.real(), 0.0, 1.0);
}

PhotonicState creation_power(
    const std::vector<std::pair<Occupation, ComplexAmp>>& polynomial, int n,
    int cutoff) {
  TermMap monos{{Occupation{}, 1.0}};
  for (int k = 0; k < n; ++k) {
    TermMap next;
    for (const auto& [mono, c] : monos) {
      for (const auto& [factor, u] : polynomial) {
        Occupation m = mono;
        for (const auto& [mode, cnt] : factor) add_photon(m, mode, cnt);
        next[std::move(m)] += c * u;
      }
    }
    monos = std::move(next);
  }
  std::vector<FockTerm> terms;
  for (const auto& [mono, c] : monos)
    terms.push_back({mono, c * monomial_to_fock(mono)});
  return normalize(PhotonicState(std::move(terms), cutoff));
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize_state(const PhotonicState& state) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (const auto& t : state.terms()) {
    os << t.amplitude.real() << ' ' << t.amplitude.imag();
    for (const auto& [m, n] : t.occupations) os << ' ' << to_string(m) << ':' << n;
    os << '\n';
  }
  return os.str();
}

namespace {

int parse_int(std::string_view s, int line_no) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(line_no) + ": bad integer '" + std::string(s) + "'");
  return v;
}

Mode parse_mode_token(std::string_view tok, int line_no, int& count) {
  const auto colon = tok.rfind(':');
  const auto d1 = tok.find('.');
  const auto d2 = d1 == std::string_view::npos ? d1 : tok.find('.', d1 + 1);
  if (colon == std::string_view::npos || d2 == std::string_view::npos || d2 > colon)
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(line_no) + ": bad mode token '" + std::string(tok) + "'");
  const auto port = port_from_name(tok.substr(0, d1));
  if (!port)
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(line_no) + ": unknown port in '" + std::string(tok) + "'");
  Mode m{*port, parse_int(tok.substr(d1 + 1, d2 - d1 - 1), line_no),
         parse_int(tok.substr(d2 + 1, colon - d2 - 1), line_no)};
  count = parse_int(tok.substr(colon + 1), line_no);
  return m;
}

}  // namespace

PhotonicState parse_state(std::string_view text, int cutoff) {
  std::vector<FockTerm> terms;
  std::istringstream is{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double re = 0, im = 0;
    if (!(ls >> re >> im))
      throw Error(ErrorKind::ParseError,
                  "line " + std::to_string(line_no) + ": expected two amplitudes");
    std::vector<std::pair<Mode, int>> entries;
    std::string tok;
    while (ls >> tok) {
      int count = 0;
      Mode m = parse_mode_token(tok, line_no, count);
      entries.push_back({m, count});
    }
    terms.push_back({make_occupation(std::move(entries)), {re, im}});
  }
  return PhotonicState(std::move(terms), cutoff);
}

}  // namespace tbtele
