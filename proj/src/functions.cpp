#include "uplocal/functions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace uplocal {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw Error(ErrorCode::invalid_argument, "malformed number '" + s + "'");
  }
  return v;
}

int parse_int(const std::string& s) {
  int v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw Error(ErrorCode::invalid_argument, "malformed integer '" + s + "'");
  }
  return v;
}

Vec parse_list(std::string_view s) {
  Vec out;
  for (const auto& tok : split(s, ',')) out.push_back(parse_double(tok));
  return out;
}

std::string format_list(std::span<const double> v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

// \int_{-1}^{1} x^k exp(-i w x) dx.
cplx monomial_ft(int k, double w) {
  if (std::abs(w) < 2.0) {
    cplx sum = 0.0;
    cplx term = 1.0;  // (-i w)^m / m!
    for (int m = 0; m < 80; ++m) {
      if ((k + m) % 2 == 0) sum += term * (2.0 / (k + m + 1));
      term *= cplx(0.0, -w) / static_cast<double>(m + 1);
      if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
    }
    return sum;
  }
  const cplx iw(0.0, w);
  const cplx em = std::exp(-iw), ep = std::exp(iw);
  cplx prev = 2.0 * std::sin(w) / w;
  for (int j = 1; j <= k; ++j) {
    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
    prev = (em - sgn * ep) / (-iw) + (static_cast<double>(j) / iw) * prev;
  }
  return prev;
}

bool in_unit_box(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::abs(v) <= 1.0; });
}

int next_pow2(double v) {
  int n = 1;
  while (n < v) n *= 2;
  return n;
}

// Rows of the Jacobian of u(x) for the directional Gaussian.
double transverse(std::span<const double> L, std::span<const double> x, std::span<double> u) {
  const int d = static_cast<int>(L.size());
  double t = 0.0;
  for (int k = 0; k < d; ++k) t += L[k] * x[k];
  for (int j = 0; j + 1 < d; ++j) u[j] = L[j + 1] * x[0] - L[0] * x[j + 1];
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// Polynomial

Polynomial Polynomial::constant(int dim, double value) {
  Polynomial p;
  p.dim = dim;
  p.terms.push_back({value, std::vector<int>(dim, 0)});
  return p;
}

Polynomial Polynomial::parse(std::string_view text, int dim_hint) {
  Polynomial p;
  p.dim = -1;
  for (const auto& term : split(text, ';')) {
    if (term.empty()) continue;
    const auto at = term.find('@');
    Term t;
    t.coef = parse_double(trim(term.substr(0, at)));
    if (at != std::string::npos) {
      const std::string exps = trim(term.substr(at + 1));
      if (!exps.empty())
        for (const auto& e : split(exps, ',')) {
          const int v = parse_int(e);
          if (v < 0) throw Error(ErrorCode::invalid_argument, "negative exponent in polynomial");
          t.exponents.push_back(v);
        }
    }
    const int d = t.exponents.empty() ? dim_hint : static_cast<int>(t.exponents.size());
    if (t.exponents.empty()) t.exponents.assign(d, 0);
    if (p.dim >= 0 && p.dim != d) throw Error(ErrorCode::invalid_argument, "polynomial terms disagree on dimension");
    p.dim = d;
    p.terms.push_back(std::move(t));
  }
  if (p.terms.empty()) throw Error(ErrorCode::invalid_argument, "empty polynomial");
  return p;
}

int Polynomial::total_degree() const noexcept {
  int deg = 0;
  for (const auto& t : terms) {
    int s = 0;
    for (int e : t.exponents) s += e;
    deg = std::max(deg, s);
  }
  return deg;
}

double Polynomial::evaluate(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& t : terms) {
    double v = t.coef;
    for (int k = 0; k < dim; ++k) v *= std::pow(x[k], t.exponents[k]);
    sum += v;
  }
  return sum;
}

void Polynomial::gradient(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& t : terms) {
    for (int j = 0; j < dim; ++j) {
      if (t.exponents[j] == 0) continue;
      double v = t.coef * t.exponents[j];
      for (int k = 0; k < dim; ++k) v *= std::pow(x[k], k == j ? t.exponents[k] - 1 : t.exponents[k]);
      out[j] += v;
    }
  }
}

bool Polynomial::uniform_parity(int axis) const noexcept {
  if (terms.empty()) return true;
  const int parity = terms.front().exponents[axis] % 2;
  return std::all_of(terms.begin(), terms.end(), [&](const Term& t) { return t.exponents[axis] % 2 == parity; });
}

bool Polynomial::all_odd() const noexcept {
  return std::all_of(terms.begin(), terms.end(), [](const Term& t) {
    return std::all_of(t.exponents.begin(), t.exponents.end(), [](int e) { return e % 2 == 1; });
  });
}

std::string Polynomial::to_string() const {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    os << (i ? ";" : "") << terms[i].coef << "@";
    for (std::size_t k = 0; k < terms[i].exponents.size(); ++k) os << (k ? "," : "") << terms[i].exponents[k];
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Direction

Direction::Direction(Vec c) : components(std::move(c)) {
  if (components.empty()) throw Error(ErrorCode::invalid_argument, "direction has no components");
  if (!(norm() > 0.0)) throw Error(ErrorCode::zero_direction, "direction must be nonzero");
}

bool Direction::is_integer() const noexcept {
  return std::all_of(components.begin(), components.end(),
                     [](double v) { return std::abs(v - std::round(v)) < 1e-12; });
}

Direction Direction::unit() const {
  Vec u = components;
  const double n = norm();
  for (double& v : u) v /= n;
  return Direction(std::move(u));
}

bool Transform::is_identity() const noexcept {
  auto zero = [](const Vec& v) { return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }); };
  return amplitude == cplx(1.0) && scale == 1.0 && zero(shift) && zero(modulation) && rotation.empty();
}

// ---------------------------------------------------------------------------
// Hermite functions

void hermite_all(int kmax, double y, std::span<double> out) {
  out[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * y * y);
  if (kmax >= 1) out[1] = std::sqrt(2.0) * y * out[0];
  for (int k = 2; k <= kmax; ++k) {
    out[k] = y * std::sqrt(2.0 / k) * out[k - 1] - std::sqrt((k - 1.0) / k) * out[k - 2];
  }
}

double hermite_function(int k, double y) {
  if (k < 0) throw Error(ErrorCode::invalid_argument, "Hermite order must be nonnegative");
  std::vector<double> h(k + 1);
  hermite_all(k, y, h);
  return h[k];
}

// ---------------------------------------------------------------------------
// Catalog

CatalogFunction CatalogFunction::gaussian_diag(Vec a) {
  if (a.empty()) throw Error(ErrorCode::invalid_argument, "gaussian_diag needs at least one width");
  for (double v : a)
    if (!(v > 0.0)) throw Error(ErrorCode::invalid_argument, "gaussian_diag requires all a_k > 0");
  CatalogFunction f(FunctionKind::gaussian_diag, static_cast<int>(a.size()), "gaussian_diag:" + format_list(a));
  f.params_ = std::move(a);
  f.even_per_axis_ = true;
  return f;
}

CatalogFunction CatalogFunction::gaussian_directional(Vec L, double mu, double nu, Polynomial phi) {
  const int d = static_cast<int>(L.size());
  if (d < 1) throw Error(ErrorCode::invalid_argument, "gaussian_directional needs a direction");
  if (std::abs(norm2(L) - 1.0) > 1e-12) throw Error(ErrorCode::invalid_argument, "gaussian_directional requires |L| = 1");
  if (!(mu > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "gaussian_directional requires mu > 0 (mu < 0 is not square integrable)");
  }
  if (d >= 2 && !(nu > 0.0)) throw Error(ErrorCode::invalid_argument, "gaussian_directional requires nu > 0");
  if (d >= 3 && std::abs(L[0]) < 1e-12) {
    throw Error(ErrorCode::invalid_argument, "gaussian_directional requires L_1 != 0 for d >= 3");
  }
  if (phi.dim != d - 1) {
    throw Error(ErrorCode::invalid_argument, "Phi must be a polynomial in d - 1 = " + std::to_string(d - 1) + " variables");
  }
  if (phi.total_degree() > 4) throw Error(ErrorCode::invalid_argument, "Phi must have total degree <= 4");
  std::ostringstream name;
  name << std::setprecision(17) << "gaussian_directional:" << format_list(L) << "|" << mu << "|" << nu << "|"
       << phi.to_string();
  CatalogFunction f(FunctionKind::gaussian_directional, d, name.str());
  f.params_ = L;
  f.params_.push_back(mu);
  f.params_.push_back(nu);
  f.poly_ = std::move(phi);
  f.even_per_axis_ = (d == 1);
  return f;
}

CatalogFunction CatalogFunction::indicator_poly(Polynomial p) {
  if (p.dim < 1) throw Error(ErrorCode::invalid_argument, "indicator_poly needs a polynomial in >= 1 variables");
  CatalogFunction f(FunctionKind::indicator_poly, p.dim, "indicator_poly:" + p.to_string());
  f.even_per_axis_ = true;
  for (int k = 0; k < p.dim; ++k) f.even_per_axis_ = f.even_per_axis_ && p.uniform_parity(k);
  f.odd_per_axis_ = p.all_odd();
  f.poly_ = std::move(p);
  return f;
}

CatalogFunction CatalogFunction::example1() {
  Polynomial p;
  p.dim = 2;
  p.terms.push_back({1.5, {1, 1}});
  auto f = indicator_poly(std::move(p));
  f.kind_ = FunctionKind::example1;
  f.name_ = "example1";
  return f;
}

CatalogFunction CatalogFunction::example2() {
  Polynomial p;
  p.dim = 2;
  p.terms.push_back({std::sqrt(21.0) / 2.0, {3, 1}});
  auto f = indicator_poly(std::move(p));
  f.kind_ = FunctionKind::example2;
  f.name_ = "example2";
  return f;
}

CatalogFunction CatalogFunction::hermite_pure(std::vector<int> alpha) {
  if (alpha.empty()) throw Error(ErrorCode::invalid_argument, "hermite_pure needs a multi-index");
  std::ostringstream name;
  name << "hermite_pure:";
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (alpha[k] < 0) throw Error(ErrorCode::invalid_argument, "Hermite multi-index must be nonnegative");
    name << (k ? "," : "") << alpha[k];
  }
  CatalogFunction f(FunctionKind::hermite_pure, static_cast<int>(alpha.size()), name.str());
  f.even_per_axis_ = true;
  f.odd_per_axis_ = std::all_of(alpha.begin(), alpha.end(), [](int a) { return a % 2 == 1; });
  for (int a : alpha) f.params_.push_back(a);
  f.alpha_ = std::move(alpha);
  return f;
}

CatalogFunction CatalogFunction::custom_grid(SampledFunction samples, bool normalized, std::string source) {
  if (samples.grid.kind() != Grid::Kind::box) throw Error(ErrorCode::invalid_argument, "custom grids are box grids");
  if (normalized && std::abs(norm_sq(samples) - 1.0) >= 1e-8) {
    throw Error(ErrorCode::invalid_argument, "custom grid declared normalized but its squared norm is " +
                                                 std::to_string(norm_sq(samples)));
  }
  CatalogFunction f(FunctionKind::custom_grid, samples.dim(), "custom_grid:" + source);
  f.custom_ = std::make_shared<const SampledFunction>(std::move(samples));
  return f;
}

CatalogFunction CatalogFunction::parse(std::string_view spec) {
  const std::string s = trim(spec);
  const auto colon = s.find(':');
  const std::string id = s.substr(0, colon);
  const std::string args = colon == std::string::npos ? std::string() : s.substr(colon + 1);
  if (id == "example1") return example1();
  if (id == "example2") return example2();
  if (id == "gaussian_diag") return gaussian_diag(parse_list(args));
  if (id == "hermite_pure") {
    std::vector<int> alpha;
    for (const auto& tok : split(args, ',')) alpha.push_back(parse_int(tok));
    return hermite_pure(std::move(alpha));
  }
  if (id == "indicator_poly") return indicator_poly(Polynomial::parse(args));
  if (id == "gaussian_directional") {
    const auto parts = split(args, '|');
    if (parts.size() < 3 || parts.size() > 4) {
      throw Error(ErrorCode::invalid_argument, "gaussian_directional expects L|mu|nu[|phi]");
    }
    Vec L = parse_list(parts[0]);
    const int d = static_cast<int>(L.size());
    Polynomial phi = parts.size() == 4 && !parts[3].empty() ? Polynomial::parse(parts[3], d - 1)
                                                             : Polynomial::constant(d - 1, 1.0);
    return gaussian_directional(std::move(L), parse_double(parts[1]), parse_double(parts[2]), std::move(phi));
  }
  if (id == "custom_grid") {
    bool normalized = false;
    auto samples = read_custom_grid(args, &normalized);
    return custom_grid(std::move(samples), normalized, args);
  }
  throw Error(ErrorCode::unknown_function, "unknown catalog function '" + id + "'");
}

bool CatalogFunction::has_exact_ft() const noexcept {
  return kind_ == FunctionKind::gaussian_diag || kind_ == FunctionKind::hermite_pure ||
         kind_ == FunctionKind::indicator_poly || kind_ == FunctionKind::example1 || kind_ == FunctionKind::example2;
}

bool CatalogFunction::compact_support() const noexcept {
  return kind_ == FunctionKind::indicator_poly || kind_ == FunctionKind::example1 || kind_ == FunctionKind::example2;
}

bool CatalogFunction::admissible() const noexcept {
  return kind_ == FunctionKind::gaussian_diag || kind_ == FunctionKind::hermite_pure ||
         kind_ == FunctionKind::gaussian_directional;
}

cplx CatalogFunction::evaluate_base(std::span<const double> y) const {
  switch (kind_) {
    case FunctionKind::gaussian_diag: {
      double prod = 1.0, expo = 0.0;
      for (int k = 0; k < dim_; ++k) {
        prod *= params_[k];
        expo += params_[k] * y[k] * y[k];
      }
      return std::pow(2.0 / kPi, dim_ / 4.0) * std::pow(prod, 0.25) * std::exp(-expo);
    }
    case FunctionKind::gaussian_directional: {
      const double mu = params_[dim_], nu = params_[dim_ + 1];
      std::vector<double> u(std::max(dim_ - 1, 0));
      const double t = transverse(std::span(params_).first(dim_), y, u);
      double uu = 0.0;
      for (double v : u) uu += v * v;
      return std::exp(-(2.0 * kPi * kPi / mu) * t * t - nu * uu) * poly_.evaluate(u);
    }
    case FunctionKind::example1:
    case FunctionKind::example2:
    case FunctionKind::indicator_poly:
      return in_unit_box(y) ? poly_.evaluate(y) : 0.0;
    case FunctionKind::hermite_pure: {
      double v = 1.0;
      for (int k = 0; k < dim_; ++k) v *= hermite_function(alpha_[k], y[k]);
      return v;
    }
    case FunctionKind::custom_grid:
      break;
  }
  throw Error(ErrorCode::invalid_argument, "custom_grid functions have no pointwise evaluator");
}

cplx CatalogFunction::exact_ft_base(std::span<const double> xi) const {
  switch (kind_) {
    case FunctionKind::gaussian_diag: {
      double prod = 1.0, expo = 0.0;
      for (int k = 0; k < dim_; ++k) {
        prod *= params_[k];
        expo += xi[k] * xi[k] / params_[k];
      }
      return std::pow(kTwoPi, dim_ / 4.0) * std::pow(prod, -0.25) * std::exp(-kPi * kPi * expo);
    }
    case FunctionKind::hermite_pure: {
      int order = 0;
      double v = std::pow(kTwoPi, dim_ / 2.0);
      for (int k = 0; k < dim_; ++k) {
        order += alpha_[k];
        v *= hermite_function(alpha_[k], kTwoPi * xi[k]);
      }
      static const cplx phases[4] = {1.0, cplx(0, -1), -1.0, cplx(0, 1)};
      return phases[order % 4] * v;
    }
    case FunctionKind::example1:
    case FunctionKind::example2:
    case FunctionKind::indicator_poly: {
      cplx sum = 0.0;
      for (const auto& t : poly_.terms) {
        cplx v = t.coef;
        for (int k = 0; k < dim_; ++k) v *= monomial_ft(t.exponents[k], kTwoPi * xi[k]);
        sum += v;
      }
      return sum;
    }
    default:
      break;
  }
  throw Error(ErrorCode::ft_unavailable, name_ + " has no closed-form Fourier transform");
}

void CatalogFunction::gradient_base(std::span<const double> y, std::span<cplx> out) const {
  switch (kind_) {
    case FunctionKind::gaussian_diag: {
      const cplx f = evaluate_base(y);
      for (int k = 0; k < dim_; ++k) out[k] = -2.0 * params_[k] * y[k] * f;
      return;
    }
    case FunctionKind::gaussian_directional: {
      const double mu = params_[dim_], nu = params_[dim_ + 1];
      const auto L = std::span(params_).first(dim_);
      const int m = dim_ - 1;
      std::vector<double> u(m), gp(m);
      const double t = transverse(L, y, u);
      double uu = 0.0;
      for (double v : u) uu += v * v;
      const double env = std::exp(-(2.0 * kPi * kPi / mu) * t * t - nu * uu);
      const double p = poly_.evaluate(u);
      poly_.gradient(u, gp);
      // d/du_j of P(u) exp(-nu |u|^2), then chain through du_j/dx.
      std::vector<double> du(m);
      for (int j = 0; j < m; ++j) du[j] = env * (gp[j] - 2.0 * nu * p * u[j]);
      for (int k = 0; k < dim_; ++k) out[k] = -(4.0 * kPi * kPi / mu) * t * L[k] * env * p;
      for (int j = 0; j < m; ++j) {
        out[0] += du[j] * L[j + 1];
        out[j + 1] += -du[j] * L[0];
      }
      return;
    }
    case FunctionKind::example1:
    case FunctionKind::example2:
    case FunctionKind::indicator_poly: {
      if (!in_unit_box(y)) {
        std::fill(out.begin(), out.end(), cplx(0.0));
        return;
      }
      std::vector<double> g(dim_);
      poly_.gradient(y, g);
      for (int k = 0; k < dim_; ++k) out[k] = g[k];
      return;
    }
    case FunctionKind::hermite_pure: {
      std::vector<double> h(dim_), dh(dim_);
      for (int k = 0; k < dim_; ++k) {
        const int a = alpha_[k];
        std::vector<double> all(a + 2);
        hermite_all(a + 1, y[k], all);
        h[k] = all[a];
        dh[k] = (a > 0 ? std::sqrt(a / 2.0) * all[a - 1] : 0.0) - std::sqrt((a + 1) / 2.0) * all[a + 1];
      }
      for (int k = 0; k < dim_; ++k) {
        double v = dh[k];
        for (int j = 0; j < dim_; ++j)
          if (j != k) v *= h[j];
        out[k] = v;
      }
      return;
    }
    case FunctionKind::custom_grid:
      break;
  }
  throw Error(ErrorCode::not_differentiable, name_ + " has no exact gradient");
}

namespace {

// y = b U x - x0
void transform_point(const Transform& t, std::span<const double> x, std::span<double> y) {
  const int d = static_cast<int>(x.size());
  for (int i = 0; i < d; ++i) {
    double v = 0.0;
    if (t.rotation.empty()) {
      v = x[i];
    } else {
      for (int k = 0; k < d; ++k) v += t.rotation[static_cast<std::size_t>(i) * d + k] * x[k];
    }
    y[i] = t.scale * v - (t.shift.empty() ? 0.0 : t.shift[i]);
  }
}

cplx modulation_phase(const Transform& t, std::span<const double> x) {
  if (t.modulation.empty()) return 1.0;
  return std::polar(1.0, kTwoPi * dot(t.modulation, x));
}

}  // namespace

cplx CatalogFunction::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw Error(ErrorCode::invalid_argument, "point dimension mismatch");
  if (transform_.is_identity()) return evaluate_base(x);
  std::vector<double> y(dim_);
  transform_point(transform_, x, y);
  return transform_.amplitude * modulation_phase(transform_, x) * evaluate_base(y);
}

cplx CatalogFunction::exact_ft(std::span<const double> xi) const {
  if (static_cast<int>(xi.size()) != dim_) throw Error(ErrorCode::invalid_argument, "frequency dimension mismatch");
  if (transform_.is_identity()) return exact_ft_base(xi);
  // g^(xi) = amp |b|^-d exp(2 pi i <U(W - xi), x0> / b) f^(U(xi - W) / b)
  const Transform& t = transform_;
  std::vector<double> diff(dim_), rotated(dim_);
  for (int k = 0; k < dim_; ++k) diff[k] = xi[k] - (t.modulation.empty() ? 0.0 : t.modulation[k]);
  for (int i = 0; i < dim_; ++i) {
    double v = 0.0;
    if (t.rotation.empty()) {
      v = diff[i];
    } else {
      for (int k = 0; k < dim_; ++k) v += t.rotation[static_cast<std::size_t>(i) * dim_ + k] * diff[k];
    }
    rotated[i] = v;
  }
  const double phase = t.shift.empty() ? 0.0 : -kTwoPi * dot(rotated, t.shift) / t.scale;
  for (double& v : rotated) v /= t.scale;
  return t.amplitude * std::pow(std::abs(t.scale), -dim_) * std::polar(1.0, phase) * exact_ft_base(rotated);
}

void CatalogFunction::gradient(std::span<const double> x, std::span<cplx> out) const {
  if (static_cast<int>(x.size()) != dim_) throw Error(ErrorCode::invalid_argument, "point dimension mismatch");
  if (transform_.is_identity()) {
    gradient_base(x, out);
    return;
  }
  // grad g = amp e^{2 pi i <W,x>} (2 pi i W f(y) + b U^T grad f(y))
  const Transform& t = transform_;
  std::vector<double> y(dim_);
  transform_point(t, x, y);
  std::vector<cplx> gy(dim_);
  gradient_base(y, gy);
  const cplx f = evaluate_base(y);
  const cplx pre = t.amplitude * modulation_phase(t, x);
  for (int k = 0; k < dim_; ++k) {
    cplx v = 0.0;
    if (t.rotation.empty()) {
      v = gy[k];
    } else {
      for (int i = 0; i < dim_; ++i) v += t.rotation[static_cast<std::size_t>(i) * dim_ + k] * gy[i];
    }
    const double w = t.modulation.empty() ? 0.0 : t.modulation[k];
    out[k] = pre * (cplx(0.0, kTwoPi * w) * f + t.scale * v);
  }
}

CatalogFunction CatalogFunction::transformed(const Transform& t) const {
  if (kind_ == FunctionKind::custom_grid) throw Error(ErrorCode::invalid_argument, "custom grids cannot be transformed");
  const int d = dim_;
  auto check = [d](const Vec& v, const char* what) {
    if (!v.empty() && static_cast<int>(v.size()) != d) {
      throw Error(ErrorCode::invalid_argument, std::string("transform ") + what + " has the wrong dimension");
    }
  };
  check(t.shift, "shift");
  check(t.modulation, "modulation");
  if (!t.rotation.empty() && t.rotation.size() != static_cast<std::size_t>(d) * d) {
    throw Error(ErrorCode::invalid_argument, "transform rotation has the wrong size");
  }
  if (t.scale == 0.0) throw Error(ErrorCode::invalid_argument, "transform scale must be nonzero");

  // Compose outer t with the existing inner transform s:
  //   g(x) = a_t e^{2pi i<W_t,x>} f_s(b_t U_t x - x_t)
  //   f_s(z) = a_s e^{2pi i<W_s,z>} f(b_s U_s z - x_s)
  const Transform& s = transform_;
  auto mat = [d](const std::vector<double>& m, int i, int k) {
    return m.empty() ? (i == k ? 1.0 : 0.0) : m[static_cast<std::size_t>(i) * d + k];
  };
  auto vec = [](const Vec& v, int i) { return v.empty() ? 0.0 : v[i]; };

  Transform c;
  c.scale = s.scale * t.scale;
  c.rotation.assign(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      double v = 0.0;
      for (int j = 0; j < d; ++j) v += mat(s.rotation, i, j) * mat(t.rotation, j, k);
      c.rotation[static_cast<std::size_t>(i) * d + k] = v;
    }
  c.shift.assign(d, 0.0);
  for (int i = 0; i < d; ++i) {
    double v = 0.0;
    for (int j = 0; j < d; ++j) v += mat(s.rotation, i, j) * vec(t.shift, j);
    c.shift[i] = s.scale * v + vec(s.shift, i);
  }
  c.modulation.assign(d, 0.0);
  double phase = 0.0;
  for (int k = 0; k < d; ++k) {
    double v = 0.0;
    for (int j = 0; j < d; ++j) v += mat(t.rotation, j, k) * vec(s.modulation, j);
    c.modulation[k] = vec(t.modulation, k) + t.scale * v;
    phase -= vec(s.modulation, k) * vec(t.shift, k);
  }
  c.amplitude = t.amplitude * s.amplitude * std::polar(1.0, kTwoPi * phase);

  bool identity_rotation = true;
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      if (std::abs(c.rotation[static_cast<std::size_t>(i) * d + k] - (i == k ? 1.0 : 0.0)) > 0.0)
        identity_rotation = false;
  if (identity_rotation) c.rotation.clear();

  CatalogFunction out = *this;
  out.transform_ = c;
  if (!c.is_identity()) {
    auto zero = [](const Vec& v) { return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }); };
    const bool only_scaling = c.rotation.empty() && zero(c.shift) && zero(c.modulation);
    if (!only_scaling) {
      out.even_per_axis_ = false;
      out.odd_per_axis_ = false;
    }
    std::string base = name_;
    if (const auto plus = base.find('+'); plus != std::string::npos) base.resize(plus);
    out.name_ = base + "+transformed";
  }
  return out;
}

Grid CatalogFunction::recommended_grid() const {
  if (kind_ == FunctionKind::custom_grid) return custom_->grid;
  if (compact_support()) {
    const double b = std::abs(transform_.scale);
    if (transform_.is_identity() || (transform_.rotation.empty() && b == 1.0)) return Grid::box(dim_, 1.0, 801);
    return Grid::box(dim_, 1.0 / b + 2.0, 1201);
  }
  // Spatial and spectral radii beyond which |f|^2 and |f^|^2 fall below ~e^-50.
  double a_small = 0.0, a_big = 0.0, extra_x = 0.0, extra_xi = 0.0;
  switch (kind_) {
    case FunctionKind::gaussian_diag:
      a_small = *std::min_element(params_.begin(), params_.end());
      a_big = *std::max_element(params_.begin(), params_.end());
      break;
    case FunctionKind::hermite_pure: {
      const int kmax = *std::max_element(alpha_.begin(), alpha_.end());
      a_small = a_big = 0.5;
      extra_x = std::sqrt(2.0 * kmax + 1.0);
      extra_xi = extra_x / kTwoPi;
      break;
    }
    case FunctionKind::gaussian_directional: {
      const double mu = params_[dim_], nu = params_[dim_ + 1];
      const double at = 2.0 * kPi * kPi / mu;
      a_small = a_big = at;
      for (int j = 0; j + 1 < dim_; ++j) {
        const double s2 = params_[0] * params_[0] + params_[j + 1] * params_[j + 1];
        a_small = std::min(a_small, nu * s2);
        a_big = std::max(a_big, nu * s2);
      }
      // Polynomial factors of degree <= 4 widen both sides.
      extra_x = 2.0 / std::sqrt(a_small);
      extra_xi = 2.0 * std::sqrt(a_big) / kPi;
      break;
    }
    default:
      break;
  }
  const double b = std::abs(transform_.scale);
  double center = 0.0, mod = 0.0;
  for (int k = 0; k < dim_; ++k) {
    center = std::max(center, std::abs(transform_.shift.empty() ? 0.0 : transform_.shift[k]) / b);
    mod = std::max(mod, std::abs(transform_.modulation.empty() ? 0.0 : transform_.modulation[k]));
  }
  const double rx = std::sqrt(50.0 / (2.0 * a_small)) / b + extra_x / b + center * std::sqrt(dim_ * 1.0);
  const double rxi = std::sqrt(50.0 * a_big / (2.0 * kPi * kPi)) * b + extra_xi * b + mod;
  const double R = std::ceil(rx * 4.0) / 4.0;
  const int n = std::max(64, next_pow2(4.0 * R * rxi * 1.15 + 1.0));
  return Grid::box(dim_, R, n);
}

// ---------------------------------------------------------------------------
// Sampling

SampledFunction sample(const CatalogFunction& f, const Grid& grid) {
  if (grid.dim() != f.dim()) throw Error(ErrorCode::invalid_argument, "grid dimension does not match function");
  if (f.kind() == FunctionKind::custom_grid) {
    if (!(f.custom_samples()->grid == grid)) {
      throw Error(ErrorCode::invalid_argument, "custom grid functions can only be sampled on their own grid");
    }
    return *f.custom_samples();
  }
  SampledFunction out(grid);
  parallel_for(grid.size(), [&](std::size_t i) {
    std::vector<double> x(grid.dim());
    grid.point(i, x);
    out.values[i] = f.evaluate(x);
  });
  return out;
}

SampledFunction sample_ft(const CatalogFunction& f, const Grid& grid) {
  if (!f.has_exact_ft()) throw Error(ErrorCode::ft_unavailable, f.name() + " has no closed-form Fourier transform");
  SampledFunction out(grid);
  parallel_for(grid.size(), [&](std::size_t i) {
    std::vector<double> xi(grid.dim());
    grid.point(i, xi);
    out.values[i] = f.exact_ft(xi);
  });
  return out;
}

std::vector<SampledFunction> sample_gradient(const CatalogFunction& f, const Grid& grid) {
  const int d = f.dim();
  if (grid.dim() != d) throw Error(ErrorCode::invalid_argument, "grid dimension does not match function");
  if (!f.has_exact_gradient()) {
    std::vector<SampledFunction> out;
    const auto& s = *f.custom_samples();
    for (int k = 0; k < d; ++k) {
      Vec e(d, 0.0);
      e[k] = 1.0;
      out.push_back(spectral_directional_derivative(s, e));
    }
    return out;
  }
  std::vector<SampledFunction> out(d, SampledFunction(grid));
  parallel_for(grid.size(), [&](std::size_t i) {
    std::vector<double> x(d);
    std::vector<cplx> g(d);
    grid.point(i, x);
    f.gradient(x, g);
    for (int k = 0; k < d; ++k) out[k].values[i] = g[k];
  });
  return out;
}

SampledFunction directional_derivative(const CatalogFunction& f, std::span<const double> L, const Grid& grid) {
  if (static_cast<int>(L.size()) != f.dim()) throw Error(ErrorCode::invalid_argument, "direction dimension mismatch");
  if (!f.has_exact_gradient()) {
    if (!(f.custom_samples()->grid == grid)) {
      throw Error(ErrorCode::not_differentiable, f.name() + " can only be differentiated on its own grid");
    }
    return spectral_directional_derivative(*f.custom_samples(), L);
  }
  SampledFunction out(grid);
  std::vector<double> x(grid.dim());
  std::vector<cplx> g(grid.dim());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    f.gradient(x, g);
    cplx v = 0.0;
    for (int k = 0; k < grid.dim(); ++k) v += L[k] * g[k];
    out.values[i] = v;
  }
  return out;
}

SampledFunction directional_derivative(const SampledFunction& f, std::span<const double> L) {
  return spectral_directional_derivative(f, L);
}

SampledFunction read_custom_grid(const std::string& path, bool* normalized) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open custom grid file '" + path + "'");
  int dim = 0, n = 0, norm_flag = 0;
  double R = 0.0;
  if (!(in >> dim >> n >> R >> norm_flag)) throw Error(ErrorCode::io, "malformed custom grid header in '" + path + "'");
  Grid grid = Grid::box(dim, R, n);
  std::vector<cplx> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    double re = 0.0, im = 0.0;
    if (!(in >> re >> im)) {
      throw Error(ErrorCode::io, "custom grid '" + path + "' ends after " + std::to_string(i) + " samples");
    }
    values[i] = {re, im};
  }
  if (normalized) *normalized = norm_flag != 0;
  return SampledFunction(grid, std::move(values));
}

void write_custom_grid(const std::string& path, const SampledFunction& f, bool normalized) {
  if (f.grid.kind() != Grid::Kind::box) throw Error(ErrorCode::invalid_argument, "custom grids are box grids");
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
  out << std::setprecision(17) << f.dim() << ' ' << f.grid.points_per_axis() << ' ' << f.grid.halfwidth() << ' '
      << (normalized ? 1 : 0) << '\n';
  for (const auto& v : f.values) out << v.real() << ' ' << v.imag() << '\n';
}

}  // namespace uplocal
