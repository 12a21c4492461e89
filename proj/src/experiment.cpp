#include "tbtele/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include "tbtele/errors.hpp"

namespace tbtele {

double FiberConfig::transmission() const { return std::pow(10.0, -db_per_km * bob_km / 10.0); }

void FiberConfig::validate() const {
  if (!(bob_km >= 0.0) || !(db_per_km >= 0.0) || !std::isfinite(bob_km * db_per_km))
    throw Error(ErrorKind::DomainError, "fiber length and loss must be >= 0");
}

void ExperimentConfig::validate() const {
  source.validate();
  indistinguishability.validate();
  epr.validate();
  alice.validate();
  analyzer.validate();
  c1.validate();
  c2.validate();
  b.validate();
  timing.validate();
  fiber.validate();
  if (photon_cutoff < 2) throw Error(ErrorKind::DomainError, "photon cutoff below one pair");
  if (pulses_per_point <= 0 || pulses_per_pole <= 0)
    throw Error(ErrorKind::DomainError, "pulse counts must be > 0");
  if (scan_points < 4) throw Error(ErrorKind::DomainError, "phase scan needs >= 4 points");
}

ExperimentConfig ExperimentConfig::ideal() {
  ExperimentConfig cfg;
  cfg.source.statistics = PairStatistics::single;
  cfg.epr.visibility_cap = 1.0;
  cfg.alice_coupler_loss = false;
  cfg.c1 = DetectorConfig::ideal(DetectorMode::free_running);
  cfg.c2 = DetectorConfig::ideal(DetectorMode::gated);
  cfg.b = DetectorConfig::ideal(DetectorMode::gated);
  cfg.fiber.db_per_km = 0.0;
  return cfg;
}

PhotonicState final_state(const ExperimentConfig& cfg, const EmissionOutcome& outcome) {
  PhotonicState s = emission_state(outcome, cfg.alice, cfg.epr,
                                   overlap_mu(cfg.indistinguishability),
                                   cfg.alice_coupler_loss, cfg.photon_cutoff);
  s = apply_transform(s, fiber_link(Port::AliceIn, Port::CharlieA));
  s = apply_transform(s, bsm_splitter());
  return apply_transform(s, analyzer_transform(cfg.analyzer));
}

namespace {

int detector_of(Port p) {
  switch (p) {
    case Port::C1: return 0;
    case Port::C2: return 1;
    case Port::BobDet: return 2;
    default: return -1;
  }
}

std::vector<double> entry_cdf(const std::vector<FrameEntry>& entries) {
  std::vector<double> c(entries.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) c[i] = acc += entries[i].probability;
  for (auto& x : c) x /= acc;
  c.back() = 1.0;
  return c;
}

std::size_t draw_index(const std::vector<double>& cdf, double u) {
  return static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end() - 1, u) - cdf.begin());
}

OutcomeTable compile_outcome(const ExperimentConfig& cfg, const EmissionOutcome& o,
                             double weight) {
  OutcomeTable t;
  t.outcome = o;
  t.weight = weight;
  if (2 * (o.n_alice + o.n_epr) > cfg.photon_cutoff) {
    t.truncated = true;
    t.entries.push_back(FrameEntry{1.0, {}, false});
    t.cdf = {1.0};
    return t;
  }
  const PhotonicState s = final_state(cfg, o);
  const double norm = s.norm_squared();
  std::map<std::pair<SlotPhotons, bool>, double> merged;
  for (const auto& term : s.terms()) {
    SlotPhotons ph{};
    int alice_lost = 0;
    for (const auto& [mode, n] : term.occupations) {
      if (mode.spatial == Port::AliceLoss) alice_lost += n;
      const int d = detector_of(mode.spatial);
      if (d < 0) continue;
      if (mode.bin < 0 || mode.bin >= kDetectorSlots[static_cast<std::size_t>(d)])
        throw Error(ErrorKind::DomainError, "photon outside the detection frame");
      ph[static_cast<std::size_t>(d)][static_cast<std::size_t>(mode.bin)] += n;
    }
    const bool genuine = o.n_epr == 1 && o.n_alice - alice_lost == 1;
    merged[{ph, genuine}] += std::norm(term.amplitude) / norm;
  }
  for (const auto& [key, p] : merged) t.entries.push_back(FrameEntry{p, key.first, key.second});
  t.cdf = entry_cdf(t.entries);
  return t;
}

}  // namespace

CompiledExperiment::CompiledExperiment(const ExperimentConfig& cfg)
    : cfg_(cfg), sampler_((cfg.validate(), cfg.source)) {
  const int n_a = static_cast<int>(sampler_.alice_dist().size());
  const int n_e = static_cast<int>(sampler_.epr_dist().size());
  for (int a = 0; a < n_a; ++a) {
    for (int e = 0; e < n_e; ++e) {
      const EmissionOutcome o{a, e};
      const double w = sampler_.probability(o);
      if (w <= 0.0) continue;
      outcomes_.push_back(compile_outcome(cfg_, o, w));
    }
  }
  const std::array<const DetectorConfig*, 3> dets{&cfg_.c1, &cfg_.c2, &cfg_.b};
  for (std::size_t i = 0; i < 3; ++i) {
    eff_[i] = dets[i]->efficiency;
    dark_[i] = dets[i]->slot_dark_probability(cfg_.timing);
    gated_[i] = dets[i]->mode == DetectorMode::gated;
  }
  eff_[2] *= cfg_.fiber.transmission();
}

const OutcomeTable* CompiledExperiment::table_for(const EmissionOutcome& o) const {
  for (const auto& t : outcomes_)
    if (t.outcome == o) return &t;
  return nullptr;
}

double CompiledExperiment::truncated_weight() const {
  double w = 0.0;
  for (const auto& t : outcomes_)
    if (t.truncated) w += t.weight;
  return w;
}

// ---------------------------------------------------------------------------
// Exact expectations

namespace {

struct FirstClick {
  std::array<double, kFrameSlots> photon{}, dark{};
  double total(int s) const { return photon[s] + dark[s]; }
  double any() const {
    double a = 0.0;
    for (int s = 0; s < kFrameSlots; ++s) a += total(s);
    return a;
  }
};

// Earliest-click distribution of a threshold detector fed with exact photon
// numbers; a photon click takes precedence over a simultaneous dark count.
FirstClick first_click(const std::array<int, kFrameSlots>& n, int slots, double eff, double q) {
  FirstClick f;
  double none = 1.0;
  for (int s = 0; s < slots; ++s) {
    const double pp = 1.0 - std::pow(1.0 - eff, n[s]);
    f.photon[s] = none * pp;
    f.dark[s] = none * (1.0 - pp) * q;
    none *= (1.0 - pp) * (1.0 - q);
  }
  return f;
}

}  // namespace

double FrameProbabilities::fourfold() const {
  return std::accumulate(fourfold_by_slot.begin(), fourfold_by_slot.end(), 0.0);
}

double FrameProbabilities::fourfold_genuine() const {
  return std::accumulate(fourfold_genuine_by_slot.begin(), fourfold_genuine_by_slot.end(), 0.0);
}

FrameProbabilities analytic_frame_probabilities(const CompiledExperiment& exp) {
  FrameProbabilities r;
  for (const auto& t : exp.outcomes()) {
    for (const auto& e : t.entries) {
      const double w = t.weight * e.probability;
      const FirstClick a = first_click(e.photons[0], kDetectorSlots[0], exp.efficiency(DetectorId::C1),
                                       exp.slot_dark(DetectorId::C1));
      const FirstClick c = first_click(e.photons[1], kDetectorSlots[1], exp.efficiency(DetectorId::C2),
                                       exp.slot_dark(DetectorId::C2));
      const FirstClick b = first_click(e.photons[2], kDetectorSlots[2], exp.efficiency(DetectorId::B),
                                       exp.slot_dark(DetectorId::B));
      double bsm = 0.0, bsm_clean = 0.0;
      for (int s = 0; s + 1 < kFrameSlots; ++s) {
        bsm += a.total(s) * c.total(s + 1);
        bsm_clean += a.photon[s] * c.photon[s + 1];
      }
      if (!e.genuine_pair) bsm_clean = 0.0;
      const double a_any = a.any();
      r.c1 += w * a_any;
      r.bsm_success += w * bsm;
      r.bsm_genuine += w * bsm_clean;
      for (int sb = 0; sb < kFrameSlots; ++sb) {
        r.fourfold_by_slot[sb] += w * bsm * b.total(sb);
        r.fourfold_genuine_by_slot[sb] += w * bsm_clean * b.photon[sb];
        r.control_by_slot[sb] += w * a_any * b.total(sb);
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Monte-Carlo

std::int64_t FrameCounts::fourfold() const {
  return std::accumulate(fourfold_by_slot.begin(), fourfold_by_slot.end(), std::int64_t{0});
}

std::int64_t FrameCounts::fourfold_genuine() const {
  return std::accumulate(fourfold_genuine_by_slot.begin(), fourfold_genuine_by_slot.end(),
                         std::int64_t{0});
}

FrameCounts& FrameCounts::operator+=(const FrameCounts& o) {
  pulses += o.pulses;
  c1 += o.c1;
  bsm_success += o.bsm_success;
  bsm_genuine += o.bsm_genuine;
  for (int s = 0; s < kFrameSlots; ++s) {
    fourfold_by_slot[s] += o.fourfold_by_slot[s];
    fourfold_genuine_by_slot[s] += o.fourfold_genuine_by_slot[s];
    control_by_slot[s] += o.control_by_slot[s];
  }
  return *this;
}

namespace {

// One C1-click category: which outcome/entry, and where C1 fired.
struct TriggerCategory {
  const FrameEntry* entry;
  int slot;
  ClickOrigin origin;
};

struct TriggerTable {
  double rate = 0.0;  // P(C1 clicks in a pulse)
  std::vector<TriggerCategory> categories;
  std::vector<double> cdf;
};

TriggerTable build_trigger_table(const CompiledExperiment& exp) {
  TriggerTable tt;
  std::vector<double> weights;
  for (const auto& t : exp.outcomes()) {
    for (const auto& e : t.entries) {
      const FirstClick a = first_click(e.photons[0], kDetectorSlots[0], exp.efficiency(DetectorId::C1),
                                       exp.slot_dark(DetectorId::C1));
      for (int s = 0; s < kFrameSlots; ++s) {
        for (auto origin : {ClickOrigin::photon, ClickOrigin::dark}) {
          const double p = origin == ClickOrigin::photon ? a.photon[s] : a.dark[s];
          if (p <= 0.0) continue;
          tt.categories.push_back({&e, s, origin});
          weights.push_back(t.weight * e.probability * p);
        }
      }
    }
  }
  tt.cdf.resize(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) tt.cdf[i] = acc += weights[i];
  tt.rate = acc;
  if (acc > 0.0) {
    for (auto& c : tt.cdf) c /= acc;
    tt.cdf.back() = 1.0;
  }
  return tt;
}

class FrameSimulator {
 public:
  FrameSimulator(const CompiledExperiment& exp, Rng& rng, FrameCounts& counts,
                 std::vector<CoincidenceEvent>* events)
      : exp_(exp), rng_(rng), counts_(counts), events_(events) {}

  DetectResult detect(const FrameEntry& e, DetectorId d, std::int64_t pulse, bool open) {
    const auto i = static_cast<std::size_t>(d);
    const std::span<const int> photons(e.photons[i].data(),
                                       static_cast<std::size_t>(kDetectorSlots[i]));
    return threshold_detect_counts(photons, exp_.efficiency(d), exp_.slot_dark(d),
                                   exp_.gated(d), d, pulse, open, rng_);
  }

  // Everything after C1 has fired: gates, C2, B, classification.
  void after_trigger(const FrameEntry& e, const ClickRecord& c1) {
    ++counts_.c1;
    const Gates g = trigger_chain(c1, exp_.config().timing);
    std::array<ClickRecord, 3> clicks;
    std::size_t n = 0;
    clicks[n++] = c1;
    const auto c2 = detect(e, DetectorId::C2, c1.pulse_index, g.c2_open).click;
    if (c2) clicks[n++] = *c2;
    const auto b = detect(e, DetectorId::B, c1.pulse_index, g.b_open).click;
    if (b) clicks[n++] = *b;
    if (n == 1) return;
    const auto found = classify_coincidences(std::span<const ClickRecord>(clicks.data(), n));
    for (const auto& ev : found) {
      bool clean = e.genuine_pair;
      for (const auto& o : ev.origins)
        if (o && *o != ClickOrigin::photon) clean = false;
      switch (ev.kind) {
        case CoincidenceKind::bsm_success:
          ++counts_.bsm_success;
          if (clean) ++counts_.bsm_genuine;
          break;
        case CoincidenceKind::fourfold:
          ++counts_.fourfold_by_slot[ev.slots[2]];
          if (clean) ++counts_.fourfold_genuine_by_slot[ev.slots[2]];
          break;
        case CoincidenceKind::control_c1b:
          ++counts_.control_by_slot[ev.slots[2]];
          break;
      }
      if (events_) events_->push_back(ev);
    }
  }

  void run_per_pulse(std::int64_t first, std::int64_t count) {
    for (std::int64_t p = first; p < first + count; ++p) {
      const auto* t = exp_.table_for(exp_.sampler()(rng_));
      const FrameEntry& e = t->entries[draw_index(t->cdf, rng_.uniform())];
      const auto c1 = detect(e, DetectorId::C1, p, true).click;
      if (c1) after_trigger(e, *c1);
    }
    counts_.pulses += count;
  }

  // Jumps straight from one C1 click to the next: the gap is geometric in
  // the trigger rate and the triggering frame is drawn from its conditional
  // distribution. Frames without a C1 click produce no coincidence of any kind.
  void run_skipping(const TriggerTable& tt, std::int64_t first, std::int64_t count) {
    const std::int64_t end = first + count;
    std::int64_t p = first;
    while (tt.rate > 0.0) {
      const std::uint64_t gap = rng_.geometric(tt.rate);
      if (gap >= static_cast<std::uint64_t>(end - p)) break;
      p += static_cast<std::int64_t>(gap);
      const auto& cat = tt.categories[draw_index(tt.cdf, rng_.uniform())];
      after_trigger(*cat.entry, ClickRecord{DetectorId::C1, p, cat.slot, cat.origin});
      ++p;
    }
    counts_.pulses += count;
  }

 private:
  const CompiledExperiment& exp_;
  Rng& rng_;
  FrameCounts& counts_;
  std::vector<CoincidenceEvent>* events_;
};

}  // namespace

FrameCounts run_monte_carlo(const CompiledExperiment& exp, std::int64_t pulses,
                            const RunOptions& options, std::uint64_t stream_base,
                            std::vector<CoincidenceEvent>* events) {
  if (pulses < 0) throw Error(ErrorKind::DomainError, "negative pulse count");
  if (options.workers < 1) throw Error(ErrorKind::DomainError, "workers must be >= 1");
  // Fixed-size chunks, each with its own stream, so the counts do not depend
  // on how many threads share the work.
  constexpr std::int64_t kChunk = std::int64_t{1} << 22;
  const std::int64_t chunk = std::max(kChunk, (pulses >> 20) + 1);
  const auto chunks = static_cast<std::size_t>((pulses + chunk - 1) / chunk);
  const TriggerTable tt = build_trigger_table(exp);
  std::vector<FrameCounts> counts(chunks);
  std::vector<std::vector<CoincidenceEvent>> logs(chunks);
  std::atomic<std::size_t> next{0};
  auto job = [&] {
    for (std::size_t c; (c = next.fetch_add(1)) < chunks;) {
      const std::int64_t first = static_cast<std::int64_t>(c) * chunk;
      const std::int64_t n = std::min(chunk, pulses - first);
      Rng rng(options.seed, stream_base + c);
      FrameSimulator sim(exp, rng, counts[c], events ? &logs[c] : nullptr);
      if (options.per_pulse)
        sim.run_per_pulse(first, n);
      else
        sim.run_skipping(tt, first, n);
    }
  };
  const auto workers = std::min(static_cast<std::size_t>(options.workers), chunks);
  if (workers <= 1) {
    job();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(job);
    for (auto& t : threads) t.join();
  }
  FrameCounts total;
  for (std::size_t c = 0; c < chunks; ++c) {
    total += counts[c];
    if (events) events->insert(events->end(), logs[c].begin(), logs[c].end());
  }
  return total;
}

// ---------------------------------------------------------------------------
// Bob's conditional state

PhotonicState expected_bob_state(const QubitSpec& alice) {
  alice.validate();
  std::vector<FockTerm> terms;
  terms.push_back({make_occupation({{{Port::BobIn, 0, 0}, 1}}),
                   alice.a1() * std::polar(1.0, alice.alpha)});
  terms.push_back({make_occupation({{{Port::BobIn, 1, 0}, 1}}), -alice.a0});
  return PhotonicState(std::move(terms));
}

namespace {

// Reduced state of Bob's time bins. Photon tags are internal labels his
// analyzer cannot resolve, so they are traced out together with the other
// ports: the environment key is the rest of the occupation plus Bob's tags.
DensityOperator bob_bins_density(const PhotonicState& s) {
  using Key = std::pair<Occupation, std::vector<int>>;
  std::map<Key, std::vector<std::pair<Occupation, ComplexAmp>>> groups;
  std::set<Occupation> basis_set;
  bool populated = false;
  for (const auto& term : s.terms()) {
    Occupation bins, env;
    std::vector<int> tags;
    for (const auto& [m, n] : term.occupations) {
      if (m.spatial != Port::BobIn) {
        env.push_back({m, n});
        continue;
      }
      bins.push_back({Mode{m.spatial, m.bin, 0}, n});
      tags.insert(tags.end(), static_cast<std::size_t>(n), m.tag);
    }
    populated = populated || !bins.empty();
    bins = make_occupation(std::move(bins));
    std::sort(tags.begin(), tags.end());
    basis_set.insert(bins);
    groups[{std::move(env), std::move(tags)}].push_back({std::move(bins), term.amplitude});
  }
  if (!populated) throw Error(ErrorKind::EmptyKeepSet, "Bob holds no photon");
  std::vector<Occupation> basis(basis_set.begin(), basis_set.end());
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [key, vec] : groups) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    for (const auto& [occ, amp] : vec)
      v(std::lower_bound(basis.begin(), basis.end(), occ) - basis.begin()) += amp;
    rho += v * v.adjoint();
  }
  rho /= s.norm_squared();
  return DensityOperator(std::move(basis), std::move(rho));
}

}  // namespace

BobState analytic_bob_state(const ExperimentConfig& cfg) {
  cfg.validate();
  const EmissionSampler sampler(cfg.source);
  const double mu = overlap_mu(cfg.indistinguishability);
  std::vector<std::pair<double, DensityOperator>> parts;
  double success = 0.0;
  const int n_a = static_cast<int>(sampler.alice_dist().size());
  const int n_e = static_cast<int>(sampler.epr_dist().size());
  for (int a = 0; a < n_a; ++a) {
    for (int e = 0; e < n_e; ++e) {
      const EmissionOutcome o{a, e};
      const double w = sampler.probability(o);
      if (w <= 0.0 || 2 * (a + e) > cfg.photon_cutoff) continue;
      PhotonicState s = emission_state(o, cfg.alice, cfg.epr, mu, cfg.alice_coupler_loss,
                                       cfg.photon_cutoff);
      s = apply_transform(s, fiber_link(Port::AliceIn, Port::CharlieA));
      s = apply_transform(s, bsm_splitter());
      std::set<int> tags;
      for (const auto& m : s.modes())
        if (m.spatial == Port::C1 || m.spatial == Port::C2) tags.insert(m.tag);
      for (int t1 : tags) {
        for (int t2 : tags) {
          DetectionPattern pat;
          pat.clicks = make_occupation({{{Port::C1, 0, t1}, 1}, {{Port::C2, 1, t2}, 1}});
          pat.vacuum_elsewhere_over = {Port::C1, Port::C2};
          const ConditionResult r = condition_on_pattern(s, pat);
          if (r.empty_conditional() || r.probability <= 0.0) continue;
          const double weight = w * r.probability;
          success += weight;
          try {
            parts.push_back({weight, bob_bins_density(*r.state)});
          } catch (const Error& err) {
            if (err.kind() != ErrorKind::EmptyKeepSet) throw;
            parts.push_back(
                {weight, DensityOperator({Occupation{}}, Eigen::MatrixXcd::Ones(1, 1))});
          }
        }
      }
    }
  }
  if (parts.empty()) throw Error(ErrorKind::ZeroState, "Bell measurement never succeeds");
  return {DensityOperator::mixture(parts), success};
}

}  // namespace tbtele
