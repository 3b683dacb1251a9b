#pragma once

// JSON, CSV and SVG interchange.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "curve_geometry.hpp"
#include "oracle.hpp"
#include "transforms.hpp"
#include "weights_szego.hpp"
#include "zeros.hpp"

namespace curveortho::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// JSON

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) return {j[0].get<double>(), j[1].get<double>()};
  throw Error(ErrorKind::Configuration, what + ": expected a number or [re, im]");
}

inline std::vector<cplx> complex_list(const json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorKind::Configuration, what + ": expected a list");
  std::vector<cplx> out;
  for (const auto& e : j) out.push_back(complex_from_json(e, what));
  return out;
}

inline json to_json(const CurveSpec& s) {
  json cneg = json::array();
  for (const auto& c : s.cneg) cneg.push_back(to_json(c));
  return {{"c1", s.c1}, {"c0", to_json(s.c0)}, {"cneg", cneg}};
}

inline CurveSpec curve_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Configuration, "curve: expected an object");
  for (const auto& [k, v] : j.items())
    if (k != "c1" && k != "c0" && k != "cneg") throw Error(ErrorKind::Configuration, "curve: unknown field '" + k + "'");
  CurveSpec s;
  if (j.contains("c1")) {
    if (!j["c1"].is_number()) throw Error(ErrorKind::Configuration, "curve.c1: expected a number");
    s.c1 = j["c1"].get<double>();
  }
  if (j.contains("c0")) s.c0 = complex_from_json(j["c0"], "curve.c0");
  if (j.contains("cneg")) s.cneg = complex_list(j["cneg"], "curve.cneg");
  if (!(s.c1 > 0.0)) throw Error(ErrorKind::Configuration, "curve.c1 must be positive");
  return s;
}

/// A list is read as ascending polynomial coefficients; an object may carry
/// "pos" and "neg" (coefficients of z^{-1}, z^{-2}, ...).
inline LaurentSeries laurent_from_json(const json& j, const std::string& what) {
  LaurentSeries s;
  if (j.is_number() || (j.is_array() && j.size() == 2 && j[0].is_number())) {
    s.pos = {complex_from_json(j, what)};
    return s;
  }
  if (j.is_array()) {
    s.pos = complex_list(j, what);
    return s;
  }
  if (j.is_object()) {
    if (j.contains("pos")) s.pos = complex_list(j["pos"], what + ".pos");
    if (j.contains("neg")) s.neg = complex_list(j["neg"], what + ".neg");
    return s;
  }
  throw Error(ErrorKind::Configuration, what + ": expected coefficients");
}

inline json to_json(const LaurentSeries& s) {
  json pos = json::array(), neg = json::array();
  for (const auto& c : s.pos) pos.push_back(to_json(c));
  for (const auto& c : s.neg) neg.push_back(to_json(c));
  return {{"pos", pos}, {"neg", neg}};
}

inline WeightSpec weight_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw Error(ErrorKind::Configuration, "weight: expected an object with a string 'kind'");
  const std::string kind = j["kind"];
  WeightSpec w;
  if (kind == "unit") return w;
  if (kind == "generic") {
    if (!j.contains("V")) throw Error(ErrorKind::Configuration, "weight: generic weight needs 'V'");
    w.V = laurent_from_json(j["V"], "weight.V");
    if (j.contains("rho")) w.rho = j["rho"].get<double>();
    return w;
  }
  if (kind == "singular") {
    w.kind = WeightSpec::Kind::AlgebraicSingular;
    if (j.contains("omega")) w.omega = laurent_from_json(j["omega"], "weight.omega");
    if (!j.contains("sing") || !j["sing"].is_array() || j["sing"].empty())
      throw Error(ErrorKind::Configuration, "weight: singular weight needs a nonempty 'sing' list");
    for (const auto& s : j["sing"]) {
      if (!s.contains("a") || !s.contains("lambda")) throw Error(ErrorKind::Configuration, "weight.sing: need 'a' and 'lambda'");
      w.singularities.push_back({complex_from_json(s["a"], "weight.sing.a"), s["lambda"].get<double>()});
    }
    if (j.contains("sigma")) w.sigma = j["sigma"].get<double>();
    return w;
  }
  throw Error(ErrorKind::Configuration, "weight: unknown kind '" + kind + "'");
}

inline json to_json(const WeightSpec& w) {
  if (w.kind == WeightSpec::Kind::GenericAnalytic) {
    json j = {{"kind", "generic"}, {"V", to_json(w.V)}};
    if (w.rho) j["rho"] = *w.rho;
    return j;
  }
  json sing = json::array();
  for (const auto& p : w.singularities) sing.push_back({{"a", to_json(p.a)}, {"lambda", p.lambda}});
  json j = {{"kind", "singular"}, {"omega", to_json(w.omega)}, {"sing", sing}};
  if (w.sigma) j["sigma"] = *w.sigma;
  return j;
}

inline json to_json(const PolyCoeffs& p) {
  json c = json::array();
  for (const auto& v : p.coeffs) c.push_back(to_json(v));
  return {{"n", p.n}, {"coeffs", c}, {"gamma", p.gamma}};
}

inline PolyCoeffs poly_from_json(const json& j) {
  PolyCoeffs p;
  p.n = j.at("n").get<int>();
  p.coeffs = complex_list(j.at("coeffs"), "coeffs");
  p.gamma = j.at("gamma").get<double>();
  p.norm = 1.0 / p.gamma;
  p.scaled = p.coeffs;  // center 0, scale 1
  if (static_cast<int>(p.coeffs.size()) != p.n + 1) throw Error(ErrorKind::Configuration, "PolyCoeffs: coefficient count != n + 1");
  return p;
}

inline json to_json(const ExpansionResult& r) {
  json targets = json::array();
  for (const auto& t : r.targets)
    targets.push_back({{"z", to_json(t.z)}, {"Pn_re", t.value.real()}, {"Pn_im", t.value.imag()}, {"branch", to_string(t.branch)}});
  json warn = json::array();
  for (const auto& w : r.warnings) warn.push_back(w);
  return {{"n", r.n},
          {"gamma_n", r.gamma},
          {"targets", targets},
          {"terms_used", r.terms_used},
          {"bound_residual", r.bound_residual},
          {"r", r.r},
          {"N", r.N},
          {"q", r.q},
          {"term_bound_violations", r.term_bounds.violations},
          {"warnings", warn}};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Error(ErrorKind::Configuration, "cannot open '" + path + "' for writing");
    row_strings(header);
  }
  void row(const std::vector<double>& v) {
    std::vector<std::string> s;
    for (double x : v) s.push_back(fmt(x));
    row_strings(s);
  }
  void row_strings(const std::vector<std::string>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << v[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

inline const std::vector<std::string>& sweep_header() {
  static const std::vector<std::string> h{"z_re", "z_im", "n", "value_re", "value_im", "oracle_re", "oracle_im",
                                          "abs_err", "rel_err", "modeled_rate"};
  return h;
}

inline const std::vector<std::string>& zero_header() {
  static const std::vector<std::string> h{"n", "k", "re", "im", "abs_phi", "angle_phi"};
  return h;
}

inline void zero_rows(CsvWriter& csv, const ZeroSet& zs) {
  for (std::size_t k = 0; k < zs.zeros.size(); ++k) {
    const auto& w = zs.phi_images[k];
    const double nan = std::numeric_limits<double>::quiet_NaN();
    csv.row({static_cast<double>(zs.n), static_cast<double>(k), zs.zeros[k].real(), zs.zeros[k].imag(), w ? std::abs(*w) : nan,
             w ? std::arg(*w) : nan});
  }
}

// ---------------------------------------------------------------------------
// SVG

/// Zeros over the outlines of L_1 and L_rho.
inline std::string zero_svg(const ZeroSet& zs, const Curve& curve, double rho) {
  const int m = 400;
  std::vector<cplx> l1(m), lr(m);
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  auto grow = [&](cplx z) {
    xmin = std::min(xmin, z.real());
    xmax = std::max(xmax, z.real());
    ymin = std::min(ymin, z.imag());
    ymax = std::max(ymax, z.imag());
  };
  for (int j = 0; j < m; ++j) {
    l1[j] = curve.psi(unit(node_angle(j, m)));
    grow(l1[j]);
    if (rho > curve.rho_hat()) lr[j] = curve.psi(rho * unit(node_angle(j, m)));
  }
  for (const auto& z : zs.zeros) grow(z);
  const double pad = 0.05 * std::max(xmax - xmin, ymax - ymin);
  xmin -= pad, xmax += pad, ymin -= pad, ymax += pad;
  const double size = 600.0;
  const double s = size / std::max(xmax - xmin, ymax - ymin);
  auto X = [&](cplx z) { return fmt((z.real() - xmin) * s); };
  auto Y = [&](cplx z) { return fmt((ymax - z.imag()) * s); };
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt((xmax - xmin) * s) << "\" height=\"" << fmt((ymax - ymin) * s)
    << "\">\n<title>zeros of P_" << zs.n << "</title>\n";
  auto poly = [&](const std::vector<cplx>& pts, const char* colour, const char* dash) {
    o << "<polygon fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1\"" << dash << " points=\"";
    for (const auto& z : pts) o << X(z) << ',' << Y(z) << ' ';
    o << "\"/>\n";
  };
  poly(l1, "black", "");
  if (rho > curve.rho_hat()) poly(lr, "grey", " stroke-dasharray=\"4 3\"");
  for (const auto& z : zs.zeros) o << "<circle cx=\"" << X(z) << "\" cy=\"" << Y(z) << "\" r=\"2.5\" fill=\"crimson\"/>\n";
  o << "</svg>\n";
  return o.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::Configuration, "cannot open '" + path + "' for writing");
  f << text;
}

}  // namespace curveortho::io
