#include "stitchlab/scenario.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stitchlab {

namespace {

struct Line {
  int number = 0;
  std::string section;
  std::string key;
  std::string value;
};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string line = trim(raw);
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", number, 1);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", number, 1);
    Line l;
    l.number = number;
    l.section = section;
    l.key = trim(line.substr(0, eq));
    l.value = trim(line.substr(eq + 1));
    if (l.key.empty()) throw ConfigError("empty key", number, 1);
    out.push_back(std::move(l));
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& s, int line) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("expected a number, got '" + s + "'", line, 1);
  }
}

int parse_int(const std::string& s, int line) {
  double v = parse_double(s, line);
  int i = static_cast<int>(std::lround(v));
  if (std::abs(v - i) > 1e-9) throw ConfigError("expected an integer, got '" + s + "'", line, 1);
  return i;
}

std::vector<int> parse_int_list(const std::string& s, int line) {
  std::vector<int> out;
  for (const auto& tok : split(s, ','))
    if (!tok.empty()) out.push_back(parse_int(tok, line));
  return out;
}

// complex literal: "1.5", "-2i", "0.5+0.25i", "1-1i"
cx parse_complex(const std::string& tok, int line) {
  std::string s = trim(tok);
  if (s.empty()) throw ConfigError("empty complex literal", line, 1);
  if (s.back() != 'i') return cx(parse_double(s, line), 0.0);
  std::string body = s.substr(0, s.size() - 1);
  // find the split between real and imaginary parts
  for (size_t p = body.size(); p-- > 1;) {
    char c = body[p];
    if ((c == '+' || c == '-') && body[p - 1] != 'e' && body[p - 1] != 'E') {
      double re = parse_double(body.substr(0, p), line);
      std::string im = body.substr(p);
      if (im == "+") im = "1";
      if (im == "-") im = "-1";
      return cx(re, parse_double(im, line));
    }
  }
  if (body.empty() || body == "+") return cx(0.0, 1.0);
  if (body == "-") return cx(0.0, -1.0);
  return cx(0.0, parse_double(body, line));
}

struct ParsedTerm {
  double coeff = 1.0;
  std::string name;
  std::vector<int> sites;
  std::vector<cx> inline_values;
};

// term = [coeff *] preset(sites)  or  [coeff *] inline(sites)[v1, v2, ...]
ParsedTerm parse_term(const std::string& value, int line) {
  ParsedTerm t;
  std::string body = value;
  size_t star = body.find('*');
  if (star != std::string::npos &&
      body.find('(') != std::string::npos && star < body.find('(')) {
    t.coeff = parse_double(trim(body.substr(0, star)), line);
    body = trim(body.substr(star + 1));
  }
  size_t open = body.find('(');
  size_t close = body.find(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw ConfigError("term needs the form name(site,...)", line, 1);
  t.name = trim(body.substr(0, open));
  t.sites = parse_int_list(body.substr(open + 1, close - open - 1), line);
  if (t.sites.empty()) throw ConfigError("term needs at least one site", line, 1);
  std::string rest = trim(body.substr(close + 1));
  if (t.name == "inline") {
    if (rest.empty() || rest.front() != '[' || rest.back() != ']')
      throw ConfigError("inline term needs [values]", line, 1);
    for (const auto& tok : split(rest.substr(1, rest.size() - 2), ','))
      t.inline_values.push_back(parse_complex(tok, line));
  } else if (!rest.empty()) {
    throw ConfigError("unexpected trailing text after term", line, 1);
  }
  return t;
}

cxmat term_matrix(const ParsedTerm& t, int line) {
  if (t.name == "inline") {
    std::size_t dim = std::size_t{1} << t.sites.size();
    if (t.inline_values.size() != dim * dim)
      throw ConfigError("inline matrix needs " + std::to_string(dim * dim) + " entries", line, 1);
    cxmat m(dim, dim);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) m(r, c) = t.inline_values[r * dim + c];
    return m;
  }
  cxmat m = preset_matrix(t.name);
  std::size_t need = std::size_t{1} << t.sites.size();
  if (static_cast<std::size_t>(m.rows()) != need)
    throw ConfigError("preset '" + t.name + "' expects " +
                          std::to_string(static_cast<int>(std::log2(m.rows()))) + " site(s)",
                      line, 1);
  return m;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& origin,
                             std::size_t dim_cap) {
  auto lines = tokenize(text);
  Scenario s;
  s.name = origin;
  s.dim_cap = dim_cap;

  // graph first
  std::string kind = "chain";
  int length = 0, width = 0, height = 0;
  std::string edge_file;
  for (const auto& l : lines) {
    if (l.section != "graph") continue;
    if (l.key == "kind") kind = l.value;
    else if (l.key == "length" || l.key == "size") length = parse_int(l.value, l.number);
    else if (l.key == "width") width = parse_int(l.value, l.number);
    else if (l.key == "height") height = parse_int(l.value, l.number);
    else if (l.key == "file") edge_file = l.value;
    else throw ConfigError("unknown [graph] key: " + l.key, l.number, 1);
  }
  if (kind == "chain") s.graph = std::make_shared<LatticeGraph>(LatticeGraph::chain(length));
  else if (kind == "ring") s.graph = std::make_shared<LatticeGraph>(LatticeGraph::ring(length));
  else if (kind == "grid") s.graph = std::make_shared<LatticeGraph>(LatticeGraph::grid(width, height));
  else if (kind == "explicit") s.graph = std::make_shared<LatticeGraph>(LatticeGraph::from_edge_list_file(edge_file));
  else throw ConfigError("unknown graph kind: " + kind);
  const int n = s.graph->size();

  std::vector<InvertibilityCertificate::Gate> gates;
  std::vector<int> aux_dims(n, 1);
  bool circuit_cert = false;
  std::optional<Region> anchor;
  std::vector<Line> pert_terms;

  for (const auto& l : lines) {
    if (l.section == "graph") continue;
    if (l.section == "hamiltonian") {
      if (l.key == "term") {
        ParsedTerm t = parse_term(l.value, l.number);
        s.hamiltonian.add_term(Region(t.sites, n), t.coeff * term_matrix(t, l.number));
      } else if (l.key == "every_site") {
        cxmat m = preset_matrix(l.value);
        for (int i = 0; i < n; ++i) s.hamiltonian.add_term(Region::single(i, n), m);
      } else if (l.key == "every_bond") {
        cxmat m = preset_matrix(l.value);
        for (const auto& [u, v] : s.graph->edges())
          s.hamiltonian.add_term(Region({u, v}, n), m);
      } else if (l.key == "ground") {
        if (l.value == "all_down") s.ground_kind = Scenario::GroundKind::all_down;
        else if (l.value == "circuit") s.ground_kind = Scenario::GroundKind::circuit;
        else if (l.value == "solve") s.ground_kind = Scenario::GroundKind::solve;
        else throw ConfigError("unknown ground kind: " + l.value, l.number, 1);
      } else {
        throw ConfigError("unknown [hamiltonian] key: " + l.key, l.number, 1);
      }
    } else if (l.section == "perturbation") {
      if (l.key == "anchor") anchor = Region(parse_int_list(l.value, l.number), n);
      else if (l.key == "term") pert_terms.push_back(l);
      else throw ConfigError("unknown [perturbation] key: " + l.key, l.number, 1);
    } else if (l.section == "certificate") {
      if (l.key == "kind") {
        if (l.value == "trivial") circuit_cert = false;
        else if (l.value == "circuit") circuit_cert = true;
        else throw ConfigError("unknown certificate kind: " + l.value, l.number, 1);
      } else if (l.key == "gate") {
        // gate = layer : term-expression
        auto parts = split(l.value, ':');
        if (parts.size() != 2) throw ConfigError("gate needs 'layer : unitary(sites)'", l.number, 1);
        ParsedTerm t = parse_term(parts[1], l.number);
        gates.push_back({Region(t.sites, n), term_matrix(t, l.number), parse_int(parts[0], l.number)});
        circuit_cert = true;
      } else if (l.key == "aux_dims") {
        auto v = parse_int_list(l.value, l.number);
        if (static_cast<int>(v.size()) != n)
          throw ConfigError("aux_dims needs one entry per site", l.number, 1);
        aux_dims = v;
      } else {
        throw ConfigError("unknown [certificate] key: " + l.key, l.number, 1);
      }
    } else if (l.section == "plan") {
      if (l.key == "expect_ff") s.plan.expect_ff = l.value == "pass";
      else if (l.key == "expect_gap") s.plan.expect_gap = l.value == "pass";
      else if (l.key == "expect_ltqo") s.plan.expect_ltqo = l.value == "pass";
      else if (l.key == "expect_invertibility") s.plan.expect_invertibility = l.value == "pass";
      else if (l.key == "check_assumptions") s.plan.check_assumptions = l.value != "off";
      else if (l.key == "decay_centers") s.plan.decay_centers = parse_int_list(l.value, l.number);
      else if (l.key == "decay_radius") s.plan.decay_radius = parse_int(l.value, l.number);
      else if (l.key == "iso_center") s.plan.iso_center = parse_int(l.value, l.number);
      else if (l.key == "iso_r") s.plan.iso_r = parse_int(l.value, l.number);
      else throw ConfigError("unknown [plan] key: " + l.key, l.number, 1);
    } else if (l.section == "exponents") {
      if (l.key == "d") s.exponents.d = parse_double(l.value, l.number);
      else if (l.key == "d_gamma") s.exponents.d_gamma = parse_double(l.value, l.number);
      else throw ConfigError("unknown [exponents] key: " + l.key, l.number, 1);
    } else {
      throw ConfigError("unknown section: [" + l.section + "]", l.number, 1);
    }
  }

  if (!pert_terms.empty()) {
    if (!anchor) throw ConfigError("[perturbation] needs an anchor site list");
    Interaction j(*anchor, "config-j");
    for (const auto& l : pert_terms) {
      ParsedTerm t = parse_term(l.value, l.number);
      j.add_term(Region(t.sites, n), t.coeff * term_matrix(t, l.number));
    }
    s.perturbation = std::move(j);
  }
  if (circuit_cert) {
    cxvec down(2);
    down << 0.0, 1.0;
    // Pi defaults to the all-down product on the doubled dims
    std::vector<cxvec> pi;
    std::size_t aux_total = 1;
    for (int i = 0; i < n; ++i) {
      int dd = 2 * aux_dims[i];
      cxvec v = cxvec::Zero(dd);
      v[dd - 1] = 1.0;
      pi.push_back(v);
      aux_total *= static_cast<std::size_t>(aux_dims[i]);
    }
    cxvec op = cxvec::Zero(aux_total);
    op[static_cast<Eigen::Index>(aux_total) - 1] = 1.0;
    s.certificate = InvertibilityCertificate::circuit(std::move(gates), aux_dims, std::move(pi), op);
  }
  if (s.hamiltonian.empty()) throw ConfigError("scenario has no hamiltonian terms");
  return s;
}

Scenario load_scenario_file(const std::string& path, std::size_t dim_cap) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), path, dim_cap);
}

Scenario resolve_scenario(const std::string& name_or_path,
                          const std::map<std::string, double>& overrides, std::size_t dim_cap) {
  std::ifstream probe(name_or_path);
  if (probe.good()) return load_scenario_file(name_or_path, dim_cap);
  Scenario s = builtin_scenario(name_or_path, overrides);
  s.dim_cap = dim_cap;
  return s;
}

}  // namespace stitchlab
