#include "leapsgd/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace leapsgd {

int Monomial::new_mass(BasisKind basis, const std::vector<char>& covered) const {
  int mass = 0;
  for (size_t i = 0; i < exponents.size(); ++i) {
    if (exponents[i] == 0 || (i < covered.size() && covered[i])) continue;
    mass += basis == BasisKind::Gaussian ? exponents[i] : 1;
  }
  return mass;
}

int Monomial::mass(BasisKind basis) const {
  return new_mass(basis, {});
}

int Monomial::total_degree() const {
  int deg = 0;
  for (int e : exponents) deg += e;
  return deg;
}

void SparsePolynomial::validate() const {
  std::set<std::vector<int>> seen;
  for (const auto& [mono, coeff] : terms) {
    (void)coeff;
    if (static_cast<int>(mono.exponents.size()) != latent_dim)
      throw std::invalid_argument("monomial length does not match latent_dim");
    bool nonzero = false;
    for (int e : mono.exponents) {
      if (e < 0) throw std::invalid_argument("negative exponent");
      if (basis == BasisKind::Boolean && e > 1)
        throw std::invalid_argument("Boolean basis only permits exponents 0 and 1");
      nonzero = nonzero || e > 0;
    }
    if (!nonzero)
      throw std::invalid_argument("constant term must use the scalar offset, not a monomial");
    if (!seen.insert(mono.exponents).second)
      throw std::invalid_argument("duplicate monomial");
  }
}

void EmbeddedTarget::validate() const {
  poly.validate();
  if (static_cast<int>(support.size()) != poly.latent_dim)
    throw std::invalid_argument("support size must equal latent_dim");
  std::set<int> seen;
  for (int i : support) {
    if (i < 0 || i >= ambient_dim) throw std::invalid_argument("support index out of range");
    if (!seen.insert(i).second) throw std::invalid_argument("duplicate support index");
  }
}

EmbeddedTarget embed_prefix(SparsePolynomial poly, int ambient_dim) {
  EmbeddedTarget t;
  t.poly = std::move(poly);
  t.ambient_dim = ambient_dim;
  t.support.resize(t.poly.latent_dim);
  for (int i = 0; i < t.poly.latent_dim; ++i) t.support[i] = i;
  t.validate();
  return t;
}

double hermite_eval(int k, double x) {
  if (k == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (int j = 1; j < k; ++j) {
    double next = x * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double eval_poly(const SparsePolynomial& h, const std::vector<double>& z) {
  if (static_cast<int>(z.size()) != h.latent_dim)
    throw std::invalid_argument("eval_poly: dimension mismatch");
  double out = h.constant;
  for (const auto& [mono, coeff] : h.terms) {
    double prod = coeff;
    for (int i = 0; i < h.latent_dim; ++i) {
      int e = mono.exponents[i];
      if (e == 0) continue;
      prod *= h.basis == BasisKind::Gaussian ? hermite_eval(e, z[i]) : z[i];
    }
    out += prod;
  }
  return out;
}

std::pair<std::vector<double>, double> sample_pair(const EmbeddedTarget& target,
                                                   double noise_std, Rng& rng) {
  std::vector<double> x(target.ambient_dim);
  if (target.poly.basis == BasisKind::Gaussian) {
    for (double& xi : x) xi = rng.normal();
  } else {
    for (double& xi : x) xi = rng.rademacher();
  }
  std::vector<double> z(target.poly.latent_dim);
  for (int i = 0; i < target.poly.latent_dim; ++i) z[i] = x[target.support[i]];
  double y = eval_poly(target.poly, z);
  if (noise_std > 0) y += noise_std * rng.normal();
  return {std::move(x), y};
}

namespace {

// Minimal recursive-descent parser for the target DSL.
class TargetParser {
public:
  explicit TargetParser(const std::string& s) : s_(s) {}

  SparsePolynomial parse() {
    SparsePolynomial h;
    skip_ws();
    if (try_keyword("bool")) {
      h.basis = BasisKind::Boolean;
    } else if (try_keyword("gauss")) {
      h.basis = BasisKind::Gaussian;
    } else {
      fail("expected basis 'bool' or 'gauss'");
    }
    expect(':');
    // Terms as (exponent-map, coefficient); latent_dim fixed afterwards.
    struct RawTerm {
      std::vector<int> exp;
      double coeff;
    };
    std::vector<RawTerm> raw;
    int max_var = 0;
    do {
      RawTerm t;
      t.coeff = parse_coeff();
      parse_factors(h.basis, t.exp);
      max_var = std::max(max_var, static_cast<int>(t.exp.size()));
      raw.push_back(std::move(t));
      skip_ws();
    } while (try_char('+'));
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    h.latent_dim = max_var;
    for (auto& t : raw) {
      t.exp.resize(max_var, 0);
      h.terms.push_back({Monomial{std::move(t.exp)}, t.coeff});
    }
    h.validate();
    return h;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << "target parse error at position " << pos_ << ": " << msg;
    throw std::invalid_argument(os.str());
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool try_char(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!try_char(c)) fail(std::string("expected '") + c + "'");
  }

  bool try_keyword(const std::string& kw) {
    skip_ws();
    if (s_.compare(pos_, kw.size(), kw) == 0) {
      pos_ += kw.size();
      return true;
    }
    return false;
  }

  int parse_int() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ == start) fail("expected integer");
    return std::stoi(s_.substr(start, pos_ - start));
  }

  // Optional leading coefficient: a number followed by '*' or by a variable.
  double parse_coeff() {
    skip_ws();
    size_t start = pos_;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
    size_t digits = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ == digits) {
      pos_ = start;  // no coefficient
      return 1.0;
    }
    double c = std::stod(s_.substr(start, pos_ - start));
    try_char('*');  // "2*z1" and "2 z1" both accepted
    return c;
  }

  // One variable or Hermite factor; bumps exp accordingly.
  void parse_factors(BasisKind basis, std::vector<int>& exp) {
    do {
      skip_ws();
      if (basis == BasisKind::Gaussian) {
        if (!try_keyword("He")) fail("expected 'He'");
        int k = parse_int();
        expect('(');
        int var = parse_var();
        expect(')');
        bump(exp, var, k);
      } else {
        int var = parse_var();
        bump(exp, var, 1);
      }
    } while (try_char('*'));
  }

  int parse_var() {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != 'z') fail("expected variable 'zN'");
    ++pos_;
    int v = parse_int();
    if (v < 1) fail("variables are 1-indexed");
    return v;
  }

  void bump(std::vector<int>& exp, int var, int k) {
    if (static_cast<int>(exp.size()) < var) exp.resize(var, 0);
    exp[var - 1] += k;
  }

  const std::string& s_;
  size_t pos_ = 0;
};

}  // namespace

SparsePolynomial parse_target(const std::string& spec) {
  return TargetParser(spec).parse();
}

std::string print_target(const SparsePolynomial& h) {
  std::ostringstream os;
  os << (h.basis == BasisKind::Boolean ? "bool:" : "gauss:");
  bool first = true;
  for (const auto& [mono, coeff] : h.terms) {
    os << (first ? " " : " + ");
    first = false;
    if (coeff != 1.0) os << coeff << "*";
    bool first_factor = true;
    for (int i = 0; i < h.latent_dim; ++i) {
      int e = mono.exponents[i];
      if (e == 0) continue;
      if (!first_factor) os << "*";
      first_factor = false;
      if (h.basis == BasisKind::Gaussian) {
        os << "He" << e << "(z" << i + 1 << ")";
      } else {
        os << "z" << i + 1;
      }
    }
  }
  return os.str();
}

double target_variance(const SparsePolynomial& h) {
  double var = 0.0;
  for (const auto& [mono, coeff] : h.terms) {
    double v = coeff * coeff;
    if (h.basis == BasisKind::Gaussian) {
      for (int e : mono.exponents)
        for (int j = 2; j <= e; ++j) v *= j;
    }
    var += v;
  }
  return var;
}

}  // namespace leapsgd
