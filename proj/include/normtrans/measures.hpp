#ifndef NORMTRANS_MEASURES_HPP
#define NORMTRANS_MEASURES_HPP

#include <cstdio>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "normtrans/chain.hpp"
#include "normtrans/codes.hpp"
#include "normtrans/core.hpp"
#include "normtrans/rng.hpp"

namespace normtrans {

inline constexpr std::uint64_t kDefaultBudget = 10'000'000;

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
  return out + "]";
}

inline void check_probability_vector(const std::vector<double>& p, const char* what) {
  double s = 0;
  for (double x : p) {
    if (!(x >= 0) || !std::isfinite(x)) throw Error(ErrorKind::invalid_model, std::string(what) + " has a negative entry");
    s += x;
  }
  if (p.empty() || std::abs(s - 1) > kExactTol)
    throw Error(ErrorKind::invalid_model, std::string(what) + " sums to " + fmt(s));
}

}  // namespace detail

/// Exactly computable process law: IID, stationary Markov, a finite mixture
/// of ergodic laws, the plain pushforward of a stationary law through a code,
/// or a stationary hidden chain produced by the library itself (normalized
/// transports and indicator processes).
class ProcessModel {
 public:
  enum class Variant { iid, markov, mixture, pushforward, hidden };

  static ProcessModel iid(Alphabet alphabet, std::vector<double> p) {
    if (p.size() != alphabet.size()) throw Error(ErrorKind::invalid_model, "IID vector length differs from support size");
    detail::check_probability_vector(p, "IID probability vector");
    ProcessModel m(Variant::iid, std::move(alphabet));
    const auto n = static_cast<Eigen::Index>(p.size());
    m.law_.states = m.alphabet_.ids();
    m.law_.pi = Eigen::Map<const Vector>(p.data(), n);
    m.law_.K = Vector::Ones(n) * m.law_.pi.transpose();
    return m;
  }

  static ProcessModel markov(Alphabet alphabet, Matrix k, std::optional<Vector> init = std::nullopt) {
    if (static_cast<std::size_t>(k.rows()) != alphabet.size())
      throw Error(ErrorKind::invalid_model, "transition matrix size differs from support size");
    Vector pi = stationary_distribution(k);
    if (init) {
      if (init->size() != pi.size() || (init->transpose() * k - init->transpose()).cwiseAbs().maxCoeff() > kExactTol ||
          std::abs(init->sum() - 1) > kExactTol)
        throw Error(ErrorKind::invalid_model, "initial vector is not stationary for the transition matrix");
      pi = *init;
    }
    ProcessModel m(Variant::markov, std::move(alphabet));
    m.law_ = {m.alphabet_.ids(), std::move(k), std::move(pi)};
    return m;
  }

  static ProcessModel mixture(std::vector<double> weights, std::vector<ProcessModel> components) {
    if (components.empty() || weights.size() != components.size())
      throw Error(ErrorKind::invalid_model, "mixture needs one weight per component");
    detail::check_probability_vector(weights, "mixture weights");
    for (const auto& c : components) {
      if (!c.is_ergodic()) throw Error(ErrorKind::invalid_model, "mixture components must be ergodic");
      if (!(c.alphabet() == components.front().alphabet()))
        throw Error(ErrorKind::invalid_model, "mixture components must share one alphabet");
    }
    ProcessModel m(Variant::mixture, components.front().alphabet());
    m.weights_ = std::move(weights);
    m.components_ = std::move(components);
    return m;
  }

  static ProcessModel pushforward(FinitaryCode code, ProcessModel base) {
    if (!base.is_stationary()) throw Error(ErrorKind::invalid_model, "pushforward base must be stationary");
    for (auto id : base.alphabet().ids())
      if (!code.source().contains(id)) throw Error(ErrorKind::unknown_symbol, "base symbol " + std::to_string(id) + " not in code source");
    ProcessModel m(Variant::pushforward, code.target());
    m.code_ = std::make_shared<const FinitaryCode>(std::move(code));
    m.base_ = std::make_shared<const ProcessModel>(std::move(base));
    return m;
  }

  static ProcessModel hidden(Alphabet alphabet, EmissionChain chain, std::string description) {
    if (!chain.stationary) throw Error(ErrorKind::invalid_model, "hidden-chain models must be stationary");
    ProcessModel m(Variant::hidden, std::move(alphabet));
    m.chain_ = std::make_shared<const EmissionChain>(std::move(chain));
    m.description_ = std::move(description);
    return m;
  }

  Variant variant() const noexcept { return variant_; }
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  bool is_stationary() const noexcept { return variant_ != Variant::pushforward; }
  bool is_ergodic() const noexcept {
    return variant_ == Variant::iid || variant_ == Variant::markov || variant_ == Variant::hidden;
  }

  const MarkovLaw& law() const {
    if (variant_ != Variant::iid && variant_ != Variant::markov)
      throw Error(ErrorKind::invalid_model, "model has no first-order law");
    return law_;
  }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<ProcessModel>& components() const noexcept { return components_; }
  const FinitaryCode& code() const { return *code_; }
  const ProcessModel& base() const { return *base_; }
  const EmissionChain& chain() const { return *chain_; }

  /// Weighted ergodic pieces with weights multiplied through nested mixtures.
  std::vector<std::pair<double, const ProcessModel*>> ergodic_components() const {
    if (variant_ == Variant::mixture) {
      std::vector<std::pair<double, const ProcessModel*>> out;
      for (std::size_t i = 0; i < components_.size(); ++i)
        for (auto [w, c] : components_[i].ergodic_components()) out.emplace_back(weights_[i] * w, c);
      return out;
    }
    if (variant_ == Variant::pushforward) throw Error(ErrorKind::invalid_model, "pushforward laws are not stationary");
    return {{1.0, this}};
  }

  /// Weighted emission chains realizing the law.
  std::vector<std::pair<double, EmissionChain>> chains() const {
    switch (variant_) {
      case Variant::iid:
      case Variant::markov:
        return {{1.0, observed_chain(law_, [](SymbolId s) { return s; })}};
      case Variant::hidden:
        return {{1.0, *chain_}};
      case Variant::mixture: {
        std::vector<std::pair<double, EmissionChain>> out;
        for (std::size_t i = 0; i < components_.size(); ++i)
          for (auto& [w, ch] : components_[i].chains()) out.emplace_back(weights_[i] * w, std::move(ch));
        return out;
      }
      case Variant::pushforward: {
        std::vector<std::pair<double, EmissionChain>> out;
        for (auto [w, c] : base_->ergodic_components()) out.emplace_back(w, coded_chain(*code_, c->law(), false));
        return out;
      }
    }
    return {};
  }

  std::string describe() const {
    switch (variant_) {
      case Variant::iid: return "iid(support=[" + render_word(alphabet_.ids(), &alphabet_) + "],p=" + detail::fmt(std::vector<double>(law_.pi.data(), law_.pi.data() + law_.pi.size())) + ")";
      case Variant::markov: {
        std::string k;
        for (Eigen::Index i = 0; i < law_.K.rows(); ++i) {
          std::vector<double> row(static_cast<std::size_t>(law_.K.cols()));
          for (Eigen::Index j = 0; j < law_.K.cols(); ++j) row[static_cast<std::size_t>(j)] = law_.K(i, j);
          k += (i ? "," : "") + detail::fmt(row);
        }
        return "markov(support=[" + render_word(alphabet_.ids(), &alphabet_) + "],K=[" + k + "])";
      }
      case Variant::mixture: {
        std::string out = "mixture(w=" + detail::fmt(weights_) + ",[";
        for (std::size_t i = 0; i < components_.size(); ++i) out += (i ? "," : "") + components_[i].describe();
        return out + "])";
      }
      case Variant::pushforward: return "pushforward(" + code_->describe() + "," + base_->describe() + ")";
      case Variant::hidden: return description_;
    }
    return "?";
  }

  std::string digest() const { return digest_hex(describe()); }

 private:
  ProcessModel(Variant v, Alphabet a) : variant_(v), alphabet_(std::move(a)) {}

  Variant variant_;
  Alphabet alphabet_;
  MarkovLaw law_;
  std::vector<double> weights_;
  std::vector<ProcessModel> components_;
  std::shared_ptr<const FinitaryCode> code_;
  std::shared_ptr<const ProcessModel> base_;
  std::shared_ptr<const EmissionChain> chain_;
  std::string description_;
};

/// Reusable evaluator; keeps per-chain marginal caches across calls.
class CylinderEngine {
 public:
  explicit CylinderEngine(const ProcessModel& model, std::uint64_t budget = kDefaultBudget)
      : model_(model), budget_(budget) {
    for (auto& [w, ch] : model.chains()) {
      weights_.push_back(w);
      chains_.push_back(std::move(ch));
    }
    for (const auto& ch : chains_) evals_.emplace_back(ch);
  }

  double prob(const CylinderEvent& c) {
    for (auto s : c.word)
      if (!model_.alphabet().contains(s))
        throw Error(ErrorKind::unknown_symbol, "cylinder symbol " + std::to_string(s) + " not in model alphabet");
    if (!model_.is_stationary()) {
      // Work is states^2 per coordinate between the origin and the far end of c.
      std::uint64_t states = 0;
      for (const auto& ch : chains_) states = std::max<std::uint64_t>(states, static_cast<std::uint64_t>(ch.size()));
      const auto span = static_cast<std::uint64_t>(std::max<Coord>(std::abs(c.start), std::abs(c.end())) + 1);
      if (states * states * span > budget_)
        throw Error(ErrorKind::enumeration_budget_exceeded,
                    "cylinder " + render(c) + " needs about " + std::to_string(states * states * span) + " operations");
    }
    double p = 0;
    for (std::size_t i = 0; i < chains_.size(); ++i) p += weights_[i] * evals_[i].prob(c.start, c.word);
    return p;
  }

 private:
  const ProcessModel& model_;
  std::uint64_t budget_;
  std::vector<double> weights_;
  std::deque<EmissionChain> chains_;
  std::deque<ChainEvaluator> evals_;
};

inline double cylinder_prob(const ProcessModel& model, const CylinderEvent& c, std::uint64_t budget = kDefaultBudget) {
  return CylinderEngine(model, budget).prob(c);
}

struct PathSample {
  Window window;
  std::uint64_t seed = 0;
  std::string model_digest;
};

namespace detail {

struct ChainSampler {
  explicit ChainSampler(const EmissionChain& ch) : ch(ch) {
    auto rows = [](const Matrix& m) {
      std::vector<std::vector<double>> out;
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<double> r(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
        out.push_back(cumulative(r));
      }
      return out;
    };
    fwd = rows(ch.Q);
    bwd = rows(ch.Qb);
    std::vector<double> nu(ch.nu0.data(), ch.nu0.data() + ch.nu0.size());
    init = cumulative(nu);
  }

  Word hidden_path(Rng& rng, Coord start, std::size_t length) const {
    Word out(length);
    const Coord end = start + static_cast<Coord>(length) - 1;
    if (ch.stationary) {
      auto h = rng.categorical(init);
      for (std::size_t i = 0; i < length; ++i) {
        if (i) h = rng.categorical(fwd[h]);
        out[i] = static_cast<SymbolId>(h);
      }
      return out;
    }
    const auto h0 = rng.categorical(init);
    auto put = [&](Coord t, std::size_t h) {
      if (t >= start && t <= end) out[static_cast<std::size_t>(t - start)] = static_cast<SymbolId>(h);
    };
    put(0, h0);
    auto h = h0;
    for (Coord t = 1; t <= end; ++t) put(t, h = rng.categorical(fwd[h]));
    h = h0;
    for (Coord t = -1; t >= start; --t) put(t, h = rng.categorical(bwd[h]));
    return out;
  }

  const EmissionChain& ch;
  std::vector<std::vector<double>> fwd, bwd;
  std::vector<double> init;
};

}  // namespace detail

/// Path of `model` on coordinates start .. start+length-1. Pushforward paths
/// have a codeword boundary between coordinates 0 and 1.
inline PathSample sample(const ProcessModel& model, Coord start, std::size_t length, std::uint64_t seed) {
  if (length == 0) throw Error(ErrorKind::invalid_argument, "sample length must be >= 1");
  Rng rng(seed);
  const auto chains = model.chains();
  std::vector<double> w;
  for (const auto& [wt, _] : chains) w.push_back(wt);
  const auto pick = chains.size() == 1 ? 0 : rng.categorical(cumulative(w));
  const auto& ch = chains[pick].second;
  detail::ChainSampler sampler(ch);
  auto hidden = sampler.hidden_path(rng, start, length);
  for (auto& h : hidden) h = ch.emit[static_cast<std::size_t>(h)];
  return {Window{start, std::move(hidden)}, seed, model.digest()};
}

struct Frequency {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  double value() const { return trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0; }
};

/// (1/n) sum_{i<n} 1{T^i path in c} over every shift the window can decide.
inline Frequency birkhoff_frequency(const Window& path, const CylinderEvent& c) {
  if (c.start < path.start || path.end() < c.end())
    throw Error(ErrorKind::window_too_short, "path " + std::to_string(path.start) + ".." + std::to_string(path.end()) +
                                                 " cannot evaluate " + render(c));
  Frequency f;
  f.trials = static_cast<std::uint64_t>(path.end() - c.end() + 1);
  const auto off = static_cast<std::size_t>(c.start - path.start);
  for (std::uint64_t i = 0; i < f.trials; ++i)
    if (std::equal(c.word.begin(), c.word.end(), path.word.begin() + static_cast<std::ptrdiff_t>(off + i))) ++f.hits;
  return f;
}

inline Frequency birkhoff_frequency(const PathSample& path, const CylinderEvent& c) {
  return birkhoff_frequency(path.window, c);
}

}  // namespace normtrans

#endif  // NORMTRANS_MEASURES_HPP
