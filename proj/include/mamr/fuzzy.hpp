// Copyright 2026 The MAMR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Mamdani fuzzy inference for the brake controller.
//
// Three inputs (heading error, lateral error, heading-rate error) each carry
// the terms N / Z / P; the single output F carries N and P. A 3x3x3 rule table
// maps antecedent terms to an output term, min is used for AND and for
// implication, max for aggregation, and the crisp output is the centroid of
// the aggregated set. The crisp value is then turned into a brake pair.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mamr/dynamics.hpp"
#include "mamr/errors.hpp"

namespace mamr::fuzzy {

enum class MembershipKind { sigma_z, gaussian, sigma_s };

/// sigma_s(x) = 1 / (1 + exp(-slope (x - center)))
/// sigma_z(x) = 1 / (1 + exp( slope (x - center)))
/// gaussian(x) = exp(-(x - center)^2 / (2 width^2))
///
/// `width` is the slope for the sigmoids and the standard deviation for the
/// Gaussian.
struct MembershipFunction {
  MembershipKind kind = MembershipKind::gaussian;
  double center = 0.0;
  double width = 1.0;

  static MembershipFunction sigma_z(double center, double slope) {
    return {MembershipKind::sigma_z, center, slope};
  }
  static MembershipFunction gaussian(double mean, double sigma) {
    return {MembershipKind::gaussian, mean, sigma};
  }
  static MembershipFunction sigma_s(double center, double slope) {
    return {MembershipKind::sigma_s, center, slope};
  }

  double operator()(double x) const {
    switch (kind) {
      case MembershipKind::sigma_z:
        return 1.0 / (1.0 + std::exp(width * (x - center)));
      case MembershipKind::sigma_s:
        return 1.0 / (1.0 + std::exp(-(width * (x - center))));
      case MembershipKind::gaussian: {
        const double d = (x - center) / width;
        return std::exp(-0.5 * d * d);
      }
    }
    return 0.0;
  }

  bool valid() const { return std::isfinite(center) && std::isfinite(width) && width > 0.0; }

  friend bool operator==(const MembershipFunction&, const MembershipFunction&) = default;
};

struct Universe {
  double lower = -1.0;
  double upper = 1.0;
  std::size_t samples = 1001;

  double clamp(double v) const { return std::min(std::max(v, lower), upper); }

  /// k-th grid point. Built from the midpoint outward so a universe that is
  /// symmetric about zero yields a grid that is exactly odd.
  double sample(std::size_t k) const {
    const double mid = 0.5 * (lower + upper);
    const double half = 0.5 * (upper - lower);
    const double n1 = static_cast<double>(samples - 1);
    const double t = (2.0 * static_cast<double>(k) - n1) / n1;
    return mid + half * t;
  }

  double step() const { return (upper - lower) / static_cast<double>(samples - 1); }

  bool valid() const {
    return std::isfinite(lower) && std::isfinite(upper) && lower < upper && samples >= 101;
  }

  friend bool operator==(const Universe&, const Universe&) = default;
};

enum class Term { N = 0, Z = 1, P = 2 };

inline constexpr std::array<Term, 3> kTerms{Term::N, Term::Z, Term::P};

constexpr std::size_t index(Term t) { return static_cast<std::size_t>(t); }

constexpr Term negate(Term t) {
  return t == Term::N ? Term::P : (t == Term::P ? Term::N : Term::Z);
}

inline char to_char(Term t) { return "NZP"[index(t)]; }

/// Consequent of one rule. `none` marks the cell that fires nothing.
enum class Output { N, P, none };

constexpr Output negate(Output o) {
  return o == Output::N ? Output::P : (o == Output::P ? Output::N : Output::none);
}

inline char to_char(Output o) { return o == Output::N ? 'N' : (o == Output::P ? 'P' : '-'); }

struct InputVariable {
  Universe universe;
  std::array<MembershipFunction, 3> terms;  // indexed by Term

  const MembershipFunction& term(Term t) const { return terms[index(t)]; }

  friend bool operator==(const InputVariable&, const InputVariable&) = default;
};

struct OutputVariable {
  Universe universe;
  MembershipFunction negative = MembershipFunction::sigma_z(-0.25, 11.78);
  MembershipFunction positive = MembershipFunction::sigma_s(0.25, 11.78);

  const MembershipFunction& term(Output o) const { return o == Output::N ? negative : positive; }

  friend bool operator==(const OutputVariable&, const OutputVariable&) = default;
};

/// 27-cell rule table indexed by (e_y term, e_theta term, e_theta_dot term).
class RuleBase {
 public:
  RuleBase() { cells_.fill(Output::none); }

  Output at(Term e_y, Term e_theta, Term e_theta_dot) const {
    return cells_[flat(e_y, e_theta, e_theta_dot)];
  }
  void set(Term e_y, Term e_theta, Term e_theta_dot, Output o) {
    cells_[flat(e_y, e_theta, e_theta_dot)] = o;
  }

  /// Parses nine 3-character rows, ordered e_y block (N, Z, P) then e_theta
  /// row (N, Z, P); each character is the consequent for e_theta_dot = N, Z, P
  /// and is one of 'N', 'P' or '-'.
  static RuleBase from_rows(const std::array<std::string_view, 9>& rows) {
    RuleBase rb;
    for (std::size_t r = 0; r < 9; ++r) {
      if (rows[r].size() != 3) throw InputDomainError("rule row must have 3 entries");
      for (std::size_t c = 0; c < 3; ++c) {
        Output o;
        switch (rows[r][c]) {
          case 'N': o = Output::N; break;
          case 'P': o = Output::P; break;
          case '-': o = Output::none; break;
          default: throw InputDomainError("rule entry must be one of N, P, -");
        }
        rb.set(kTerms[r / 3], kTerms[r % 3], kTerms[c], o);
      }
    }
    return rb;
  }

  std::array<std::string, 9> rows() const {
    std::array<std::string, 9> out;
    for (std::size_t r = 0; r < 9; ++r)
      for (Term c : kTerms) out[r].push_back(to_char(at(kTerms[r / 3], kTerms[r % 3], c)));
    return out;
  }

  /// Negating every antecedent flips the consequent.
  bool mirror_symmetric() const {
    for (Term a : kTerms)
      for (Term b : kTerms)
        for (Term c : kTerms)
          if (at(negate(a), negate(b), negate(c)) != negate(at(a, b, c))) return false;
    return true;
  }

  /// Rule table used by the parking controller. The e_theta = Z rows and the
  /// e_theta_dot = Z column follow the published table; the remaining cells
  /// of the e_theta = N rows are the mirror images of the e_theta = P rows so
  /// that the controller treats both sides of the target line identically.
  static RuleBase parking() {
    return from_rows({"NNP", "NNP", "NPP",    // e_y = N
                      "NNP", "N-P", "NPP",    // e_y = Z
                      "NNP", "NPP", "NPP"});  // e_y = P
  }

  friend bool operator==(const RuleBase&, const RuleBase&) = default;

 private:
  static constexpr std::size_t flat(Term a, Term b, Term c) {
    return 9 * index(a) + 3 * index(b) + index(c);
  }

  std::array<Output, 27> cells_{};
};

struct FisDefinition {
  InputVariable e_theta;      // deg
  InputVariable e_y;          // m
  InputVariable e_theta_dot;  // deg/s
  OutputVariable output;
  RuleBase rules = RuleBase::parking();
  double dead_band = 0.05;    // |F| <= dead_band classifies as Z

  void validate() const {
    auto check_input = [](const InputVariable& v, const char* name) {
      if (!v.universe.valid())
        throw InputDomainError(std::string(name) + ": universe must have lower < upper and >= 101 samples");
      if (v.term(Term::N).kind != MembershipKind::sigma_z ||
          v.term(Term::Z).kind != MembershipKind::gaussian ||
          v.term(Term::P).kind != MembershipKind::sigma_s)
        throw InputDomainError(std::string(name) + ": terms must be sigma_z / gaussian / sigma_s");
      for (const auto& mf : v.terms)
        if (!mf.valid()) throw InputDomainError(std::string(name) + ": membership width must be > 0");
    };
    check_input(e_theta, "e_theta");
    check_input(e_y, "e_y");
    check_input(e_theta_dot, "e_theta_dot");
    if (!output.universe.valid())
      throw InputDomainError("output: universe must have lower < upper and >= 101 samples");
    if (output.negative.kind != MembershipKind::sigma_z ||
        output.positive.kind != MembershipKind::sigma_s || !output.negative.valid() ||
        !output.positive.valid())
      throw InputDomainError("output: terms must be sigma_z (N) and sigma_s (P)");
    if (rules.at(Term::Z, Term::Z, Term::Z) != Output::none)
      throw InputDomainError("rules: the (Z, Z, Z) cell must be '-'");
    if (!std::isfinite(dead_band) || dead_band < 0.0)
      throw InputDomainError("dead_band must be >= 0");
  }

  friend bool operator==(const FisDefinition&, const FisDefinition&) = default;
};

/// Builds an input variable on [-half_range, half_range] whose N/Z and Z/P
/// crossovers sit at +-crossover_fraction * half_range with membership 0.5.
inline InputVariable symmetric_input(double half_range, double crossover_fraction = 0.25,
                                     double edge_membership = 0.95) {
  const double c = crossover_fraction * half_range;
  const double sigma = c / std::sqrt(2.0 * std::log(2.0));
  // sigmoid reaches edge_membership at twice the crossover distance
  const double slope = std::log(edge_membership / (1.0 - edge_membership)) / c;
  InputVariable v;
  v.universe = {-half_range, half_range, 1001};
  v.terms = {MembershipFunction::sigma_z(-c, slope), MembershipFunction::gaussian(0.0, sigma),
             MembershipFunction::sigma_s(c, slope)};
  return v;
}

/// Controller tuning shipped as the default configuration.
inline FisDefinition default_parking_fis() {
  FisDefinition fis;
  // tuned for a slow, brake-dominated approach; the closed loop is sensitive
  // to these values down to the last digit
  fis.e_theta = symmetric_input(90.0, 28.002521603455698 / 90.0, 0.999);
  fis.e_y = symmetric_input(2.0, 1.5398364682122243 / 2.0, 0.999);
  fis.e_theta_dot = symmetric_input(90.0, 8.4242657040118534 / 90.0, 0.999);
  fis.output.universe = {-1.0, 1.0, 1001};
  fis.output.negative = MembershipFunction::sigma_z(-0.25, std::log(19.0) / 0.25);
  fis.output.positive = MembershipFunction::sigma_s(0.25, std::log(19.0) / 0.25);
  fis.dead_band = 0.007338102053365987;
  return fis;
}

struct FuzzyError {
  double e_theta = 0.0;      // deg
  double e_y = 0.0;          // m
  double e_theta_dot = 0.0;  // deg/s
};

/// Membership degrees of the three inputs, [variable][term].
struct Fuzzified {
  std::array<double, 3> e_theta{};
  std::array<double, 3> e_y{};
  std::array<double, 3> e_theta_dot{};
};

inline std::array<double, 3> fuzzify_variable(const InputVariable& v, double value) {
  const double x = v.universe.clamp(value);
  return {v.term(Term::N)(x), v.term(Term::Z)(x), v.term(Term::P)(x)};
}

inline Fuzzified fuzzify(const FisDefinition& fis, const FuzzyError& e) {
  if (!std::isfinite(e.e_theta) || !std::isfinite(e.e_y) || !std::isfinite(e.e_theta_dot))
    throw InputDomainError("fuzzify: non-finite error input");
  return {fuzzify_variable(fis.e_theta, e.e_theta), fuzzify_variable(fis.e_y, e.e_y),
          fuzzify_variable(fis.e_theta_dot, e.e_theta_dot)};
}

/// Output membership sampled on the output universe grid.
struct Aggregate {
  Universe universe;
  std::vector<double> membership;
};

/// Firing strength of each output term: max over the rules with that
/// consequent of min over their antecedent degrees.
struct Activation {
  double negative = 0.0;
  double positive = 0.0;
};

inline Activation activations(const FisDefinition& fis, const Fuzzified& d) {
  Activation act;
  for (Term ey : kTerms)
    for (Term et : kTerms)
      for (Term ed : kTerms) {
        const Output o = fis.rules.at(ey, et, ed);
        if (o == Output::none) continue;
        const double w =
            std::min({d.e_y[index(ey)], d.e_theta[index(et)], d.e_theta_dot[index(ed)]});
        double& slot = o == Output::N ? act.negative : act.positive;
        slot = std::max(slot, w);
      }
  return act;
}

/// Clips each consequent at its firing strength and aggregates by max.
/// Clipping before or after the max over rules gives the same set, so the
/// per-term activations are computed first.
inline Aggregate infer(const FisDefinition& fis, const Fuzzified& degrees) {
  const Activation act = activations(fis, degrees);
  const Universe& u = fis.output.universe;
  Aggregate agg{u, std::vector<double>(u.samples, 0.0)};
  for (std::size_t k = 0; k < u.samples; ++k) {
    const double x = u.sample(k);
    const double n = std::min(act.negative, fis.output.negative(x));
    const double p = std::min(act.positive, fis.output.positive(x));
    agg.membership[k] = std::max(n, p);
  }
  return agg;
}

/// Centroid of area by the trapezoidal rule. Returns std::nullopt when the
/// aggregate has zero area (no rule fired).
///
/// Grid points are accumulated in symmetric pairs (k, n-1-k), which makes the
/// centroid of a reflected aggregate exactly the negated centroid.
inline std::optional<double> defuzzify_coa(const Aggregate& agg) {
  const std::vector<double>& mu = agg.membership;
  const std::size_t n = mu.size();
  if (n < 2) return std::nullopt;
  const double h = agg.universe.step();
  auto weight = [n, h](std::size_t k) { return (k == 0 || k + 1 == n) ? 0.5 * h : h; };

  double area = 0.0;
  double moment = 0.0;
  for (std::size_t k = 0, j = n - 1; k <= j; ++k, --j) {
    const double xk = agg.universe.sample(k);
    if (k == j) {
      area += weight(k) * mu[k];
      moment += weight(k) * xk * mu[k];
      break;
    }
    const double xj = agg.universe.sample(j);
    area += weight(k) * (mu[k] + mu[j]);
    moment += weight(k) * (xk * mu[k] + xj * mu[j]);
  }
  if (!(area > 0.0)) return std::nullopt;
  return agg.universe.clamp(moment / area);
}

/// Crisp output to brake pair: F > dead_band is P (brake 1), F < -dead_band is
/// N (brake 2), anything else, including no activation, releases both.
inline BrakeCommand discretize_brakes(std::optional<double> crisp, double dead_band) {
  if (!crisp) return BrakeCommand::none();
  if (*crisp > dead_band) return {true, false};
  if (*crisp < -dead_band) return {false, true};
  return BrakeCommand::none();
}

inline std::optional<double> crisp_output(const FisDefinition& fis, const FuzzyError& e) {
  return defuzzify_coa(infer(fis, fuzzify(fis, e)));
}

inline BrakeCommand evaluate(const FisDefinition& fis, const FuzzyError& e) {
  return discretize_brakes(crisp_output(fis, e), fis.dead_band);
}

}  // namespace mamr::fuzzy
