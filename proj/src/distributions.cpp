#include "mbrnn/distributions.hpp"

#include <cmath>
#include <stdexcept>

namespace mbrnn {

double scv_of(const MomentVector& m) {
  if (m.size() < 2) throw std::invalid_argument("scv_of: need at least two moments");
  return m(1) / (m(0) * m(0)) - 1.0;
}

MomentVector scale_moments(const MomentVector& m, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("scale_moments: factor must be positive");
  MomentVector out(m.size());
  double ci = 1.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    ci *= c;
    out(i) = m(i) * ci;
  }
  return out;
}

Eigen::VectorXd log_moments(const MomentVector& m, int n) {
  if (n > m.size()) throw std::invalid_argument("log_moments: not enough moments");
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    if (!(m(i) > 0.0)) throw std::invalid_argument("log_moments: moments must be positive");
    out(i) = std::log(m(i));
  }
  return out;
}

namespace {

constexpr double kProbTol = 1e-12;

void validate_ph(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& subgen) {
  const auto n = alpha.size();
  if (n == 0 || subgen.rows() != n || subgen.cols() != n)
    throw std::invalid_argument("PhaseType: inconsistent dimensions");
  double asum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alpha(i) < 0.0) throw std::invalid_argument("PhaseType: negative alpha entry");
    asum += alpha(i);
  }
  if (std::abs(asum - 1.0) > kProbTol) throw std::invalid_argument("PhaseType: alpha must sum to 1");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(subgen(i, i) < 0.0)) throw std::invalid_argument("PhaseType: diagonal must be strictly negative");
    double row = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && subgen(i, j) < 0.0)
        throw std::invalid_argument("PhaseType: negative off-diagonal rate");
      row += subgen(i, j);
    }
    if (row > kProbTol) throw std::invalid_argument("PhaseType: row sums must be <= 0");
  }
  // Invertibility of (-S): solve against the ones vector and check the residual.
  Eigen::MatrixXd neg = -subgen;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(neg);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd x = lu.solve(ones);
  if (!x.allFinite() || (neg * x - ones).norm() > 1e-8 * std::sqrt(static_cast<double>(n)))
    throw std::invalid_argument("PhaseType: (-subgen) is numerically singular");
}

}  // namespace

PhaseType::PhaseType(Eigen::VectorXd alpha, Eigen::MatrixXd subgen)
    : alpha_(std::move(alpha)), subgen_(std::move(subgen)) {
  validate_ph(alpha_, subgen_);
  exit_rates_ = -subgen_.rowwise().sum();
  exit_rates_ = exit_rates_.cwiseMax(0.0);  // clip tolerance-level negatives
}

MomentVector PhaseType::moments(int n) const {
  if (n < 1) throw std::invalid_argument("PhaseType::moments: n >= 1 required");
  Eigen::MatrixXd neg = -subgen_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(neg);
  MomentVector out(n);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(order());
  double fact = 1.0;
  for (int i = 1; i <= n; ++i) {
    v = lu.solve(v).eval();
    fact *= i;
    out(i - 1) = fact * alpha_.dot(v);
  }
  return out;
}

double PhaseType::sample(Rng& rng) const {
  const int n = order();
  // Initial phase from alpha.
  int phase = n - 1;
  double u = rng.u01();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += alpha_(i);
    if (u < acc) {
      phase = i;
      break;
    }
  }
  double t = 0.0;
  for (;;) {
    const double rate = -subgen_(phase, phase);
    t += rng.exponential(rate);
    // Jump: off-diagonal rates, remainder absorbs.
    double r = rng.u01() * rate;
    double cum = 0.0;
    int next = -1;
    for (int j = 0; j < n; ++j) {
      if (j == phase) continue;
      cum += subgen_(phase, j);
      if (r < cum) {
        next = j;
        break;
      }
    }
    if (next < 0) return t;  // absorbed
    phase = next;
  }
}

PhaseType PhaseType::scaled(double c) const {
  if (!(c > 0.0)) throw std::invalid_argument("PhaseType::scaled: factor must be positive");
  return PhaseType(alpha_, subgen_ / c);
}

PhaseType PhaseType::exponential(double rate) {
  Eigen::VectorXd a(1);
  a << 1.0;
  Eigen::MatrixXd s(1, 1);
  s << -rate;
  return PhaseType(std::move(a), std::move(s));
}

const char* family_name(Family f) {
  switch (f) {
    case Family::Exponential: return "exponential";
    case Family::Erlang: return "erlang";
    case Family::HyperExp2: return "hyperexp2";
    case Family::LogNormal: return "lognormal";
    case Family::Gamma: return "gamma";
    case Family::Deterministic: return "deterministic";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  if (name == "exponential") return Family::Exponential;
  if (name == "erlang") return Family::Erlang;
  if (name == "hyperexp2") return Family::HyperExp2;
  if (name == "lognormal") return Family::LogNormal;
  if (name == "gamma") return Family::Gamma;
  if (name == "deterministic") return Family::Deterministic;
  throw std::invalid_argument("unknown distribution family: " + name);
}

ParametricDist::ParametricDist(Family family, double mean, double scv)
    : family_(family), mean_(mean), scv_(scv) {
  if (!(mean > 0.0)) throw std::invalid_argument("ParametricDist: mean must be positive");
  if (family_ != Family::Deterministic && !(scv > 0.0))
    throw std::invalid_argument("ParametricDist: scv must be positive");
  switch (family_) {
    case Family::Exponential:
      if (std::abs(scv - 1.0) > 1e-9)
        throw std::invalid_argument("ParametricDist: exponential requires scv = 1");
      break;
    case Family::Erlang: {
      const double kf = 1.0 / scv;
      erlang_k_ = static_cast<int>(std::lround(kf));
      if (erlang_k_ < 1 || std::abs(kf - erlang_k_) > 1e-6)
        throw std::invalid_argument("ParametricDist: Erlang requires scv = 1/k for integer k");
      break;
    }
    case Family::HyperExp2: {
      if (scv <= 1.0)
        throw std::invalid_argument("ParametricDist: hyperexponential requires scv > 1");
      // Balanced means (r = 0.5): p1/r1 = p2/r2 = mean/2.
      hyper_p1_ = 0.5 * (1.0 + std::sqrt((scv - 1.0) / (scv + 1.0)));
      hyper_r1_ = 2.0 * hyper_p1_ / mean;
      hyper_r2_ = 2.0 * (1.0 - hyper_p1_) / mean;
      break;
    }
    case Family::LogNormal:
      ln_sigma_ = std::sqrt(std::log1p(scv));
      ln_mu_ = std::log(mean) - 0.5 * ln_sigma_ * ln_sigma_;
      break;
    case Family::Gamma:
      gamma_shape_ = 1.0 / scv;
      gamma_scale_ = mean * scv;
      break;
    case Family::Deterministic:
      if (scv != 0.0) throw std::invalid_argument("ParametricDist: deterministic requires scv = 0");
      break;
  }
}

MomentVector ParametricDist::moments(int n) const {
  MomentVector out(n);
  switch (family_) {
    case Family::Exponential: {
      double fact = 1.0;
      for (int i = 1; i <= n; ++i) {
        fact *= i;
        out(i - 1) = fact * std::pow(mean_, i);
      }
      break;
    }
    case Family::Erlang: {
      // Gamma with integer shape k and scale mean/k.
      const double theta = mean_ / erlang_k_;
      double prod = 1.0;
      for (int i = 1; i <= n; ++i) {
        prod *= (erlang_k_ + i - 1) * theta;
        out(i - 1) = prod;
      }
      break;
    }
    case Family::HyperExp2: {
      double fact = 1.0;
      for (int i = 1; i <= n; ++i) {
        fact *= i;
        out(i - 1) = fact * (hyper_p1_ / std::pow(hyper_r1_, i) +
                             (1.0 - hyper_p1_) / std::pow(hyper_r2_, i));
      }
      break;
    }
    case Family::LogNormal:
      for (int i = 1; i <= n; ++i)
        out(i - 1) = std::exp(i * ln_mu_ + 0.5 * i * i * ln_sigma_ * ln_sigma_);
      break;
    case Family::Gamma: {
      double prod = 1.0;
      for (int i = 1; i <= n; ++i) {
        prod *= (gamma_shape_ + i - 1) * gamma_scale_;
        out(i - 1) = prod;
      }
      break;
    }
    case Family::Deterministic:
      for (int i = 1; i <= n; ++i) out(i - 1) = std::pow(mean_, i);
      break;
  }
  return out;
}

double ParametricDist::sample(Rng& rng) const {
  switch (family_) {
    case Family::Exponential:
      return rng.exponential(1.0 / mean_);
    case Family::Erlang:
      return rng.gamma(static_cast<double>(erlang_k_), mean_ / erlang_k_);
    case Family::HyperExp2:
      return rng.u01() < hyper_p1_ ? rng.exponential(hyper_r1_) : rng.exponential(hyper_r2_);
    case Family::LogNormal:
      return rng.lognormal(ln_mu_, ln_sigma_);
    case Family::Gamma:
      return rng.gamma(gamma_shape_, gamma_scale_);
    case Family::Deterministic:
      return mean_;
  }
  return 0.0;
}

MomentVector dist_moments(const Dist& d, int n) {
  return std::visit([n](const auto& x) { return x.moments(n); }, d);
}

double dist_sample(const Dist& d, Rng& rng) {
  return std::visit([&rng](const auto& x) { return x.sample(rng); }, d);
}

Dist dist_scaled(const Dist& d, double c) {
  return std::visit([c](const auto& x) -> Dist { return x.scaled(c); }, d);
}

double dist_mean(const Dist& d) { return dist_moments(d, 1)(0); }

namespace {

PhaseType random_hyperexp(Rng& rng, int max_branches) {
  // Half the draws target an explicit SCV via the balanced-means two-branch
  // form; the rest use free branches for shape diversity.
  if (rng.u01() < 0.5) {
    const double scv = rng.log_uniform(1.05, 150.0);
    const double p1 = 0.5 * (1.0 + std::sqrt((scv - 1.0) / (scv + 1.0)));
    Eigen::VectorXd a(2);
    a << p1, 1.0 - p1;
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2, 2);
    s(0, 0) = -2.0 * p1;
    s(1, 1) = -2.0 * (1.0 - p1);
    return PhaseType(std::move(a), std::move(s));
  }
  const int b = static_cast<int>(rng.uniform_int(2, max_branches));
  Eigen::VectorXd a(b);
  double sum = 0.0;
  for (int i = 0; i < b; ++i) {
    a(i) = rng.exponential(1.0);
    sum += a(i);
  }
  a /= sum;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(b, b);
  for (int i = 0; i < b; ++i) s(i, i) = -rng.log_uniform(0.1, 50.0);
  return PhaseType(std::move(a), std::move(s));
}

PhaseType random_coxian(Rng& rng, int max_order) {
  const int n = static_cast<int>(rng.uniform_int(2, max_order));
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  a(0) = 1.0;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double mu = rng.log_uniform(0.2, 20.0);
    s(i, i) = -mu;
    if (i + 1 < n) s(i, i + 1) = mu * rng.uniform(0.2, 1.0);
  }
  return PhaseType(std::move(a), std::move(s));
}

PhaseType random_dense(Rng& rng, int max_order) {
  const int n = static_cast<int>(rng.uniform_int(2, max_order));
  Eigen::VectorXd a(n);
  double asum = 0.0;
  for (int i = 0; i < n; ++i) {
    a(i) = rng.exponential(1.0);
    asum += a(i);
  }
  a /= asum;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (rng.u01() < 0.5) {
        s(i, j) = rng.uniform(0.0, 1.0);
        row += s(i, j);
      }
    }
    const double exit = rng.uniform(0.02, 1.0);  // every phase can absorb directly
    s(i, i) = -(row + exit);
  }
  return PhaseType(std::move(a), std::move(s));
}

}  // namespace

Dist ph_random(Rng& rng, const PhSamplerConfig& cfg) {
  const double wsum = cfg.w_erlang + cfg.w_hyper + cfg.w_coxian + cfg.w_dense;
  for (;;) {
    try {
      const double u = rng.u01() * wsum;
      if (u < cfg.w_erlang) {
        // log-uniform stage count reaches SCV = 1/k down to 1/max_erlang
        const int k = static_cast<int>(std::floor(rng.log_uniform(1.0, cfg.max_erlang + 0.999)));
        return ParametricDist(Family::Erlang, 1.0, 1.0 / std::min(k, cfg.max_erlang));
      }
      PhaseType ph = u < cfg.w_erlang + cfg.w_hyper ? random_hyperexp(rng, 5)
                     : u < cfg.w_erlang + cfg.w_hyper + cfg.w_coxian
                         ? random_coxian(rng, cfg.max_order)
                         : random_dense(rng, cfg.max_order);
      const double m1 = ph.moments(1)(0);
      if (!(m1 > 0.0) || !std::isfinite(m1)) continue;
      return ph.scaled(1.0 / m1);  // mean exactly 1
    } catch (const std::invalid_argument&) {
      continue;  // numerical failure: resample
    }
  }
}

ParametricDist named_family(Family family, double mean, double scv) {
  return ParametricDist(family, mean, scv);
}

}  // namespace mbrnn
