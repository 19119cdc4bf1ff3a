#include "bl/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace bl {
namespace {

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument(what); }

const json& field(const json& doc, const std::string& key) {
  if (!doc.is_object() || !doc.contains(key)) bad("missing field '" + key + "'");
  return doc.at(key);
}

double number_at(const json& doc, const std::string& key) {
  const json& v = field(doc, key);
  if (!v.is_number()) bad("field '" + key + "' must be a number");
  return v.get<double>();
}

int int_at(const json& doc, const std::string& key) {
  const json& v = field(doc, key);
  if (!v.is_number_integer()) bad("field '" + key + "' must be an integer");
  return v.get<int>();
}

}  // namespace

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open '" + path + "'");
  return json::parse(in);
}

VectorXd parse_vector(const json& doc, const std::string& key) {
  const json& v = field(doc, key);
  if (!v.is_array() || v.empty()) bad("field '" + key + "' must be a nonempty array");
  VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) bad("field '" + key + "' must hold numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

MatrixXd parse_matrix(const json& doc, const std::string& key) {
  const json& v = field(doc, key);
  if (!v.is_array() || v.empty() || !v[0].is_array() || v[0].empty())
    bad("field '" + key + "' must be a nonempty array of rows");
  std::size_t cols = v[0].size();
  MatrixXd out(v.size(), cols);
  for (std::size_t r = 0; r < v.size(); ++r) {
    if (!v[r].is_array() || v[r].size() != cols) bad("ragged rows in '" + key + "'");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!v[r][c].is_number()) bad("field '" + key + "' must hold numbers");
      out(r, c) = v[r][c].get<double>();
    }
  }
  return out;
}

DatumDocument parse_datum(const json& doc) {
  DatumDocument out;
  out.rank_one = doc.contains("vectors");
  if (out.rank_one == doc.contains("blocks"))
    bad("datum needs exactly one of 'vectors' or 'blocks'");
  int n = int_at(doc, "n");
  if (n < 1) bad("'n' must be positive");
  if (out.rank_one) {
    MatrixXd rows = parse_matrix(doc, "vectors");  // one vector per row
    if (rows.cols() != n) bad("each vector must have length n");
    out.vectors.n = n;
    out.vectors.vectors = rows.transpose();
    out.vectors.c = parse_vector(doc, "c");
  } else {
    const json& blocks = field(doc, "blocks");
    if (!blocks.is_array() || blocks.empty()) bad("'blocks' must be a nonempty array");
    out.blocks.n = n;
    for (const json& blk : blocks) {
      MatrixXd b = parse_matrix(blk, "matrix");
      if (b.cols() != n) bad("block matrix must have n columns");
      out.blocks.blocks.push_back({b, number_at(blk, "c")});
    }
  }
  return out;
}

GridFunction parse_grid_function(const json& doc) {
  GridFunction g;
  g.dim = int_at(doc, "dim");
  if (g.dim < 1 || g.dim > 3) bad("'dim' must be 1, 2, or 3");
  VectorXd origin = parse_vector(doc, "origin");
  VectorXd cell = parse_vector(doc, "cell");
  const json& shape = field(doc, "shape");
  if (origin.size() != g.dim || cell.size() != g.dim ||
      !shape.is_array() || shape.size() != static_cast<std::size_t>(g.dim))
    bad("'origin', 'cell', 'shape' must have length dim");
  std::size_t total = 1;
  for (int a = 0; a < g.dim; ++a) {
    g.origin[a] = origin[a];
    g.cell[a] = cell[a];
    if (!shape[a].is_number_integer()) bad("'shape' must hold integers");
    g.shape[a] = shape[a].get<int>();
    if (g.shape[a] < 1) bad("'shape' entries must be positive");
    total *= static_cast<std::size_t>(g.shape[a]);
  }
  VectorXd samples = parse_vector(doc, "samples");
  if (static_cast<std::size_t>(samples.size()) != total)
    bad("'samples' length must equal the shape product");
  g.samples.assign(samples.data(), samples.data() + samples.size());
  ValidationReport rep = validate(g);
  if (!rep.empty()) bad("grid function: " + rep.front().detail);
  return g;
}

json grid_function_json(const GridFunction& g) {
  json doc;
  doc["dim"] = g.dim;
  json origin = json::array(), cell = json::array(), shape = json::array();
  for (int a = 0; a < g.dim; ++a) {
    origin.push_back(g.origin[a]);
    cell.push_back(g.cell[a]);
    shape.push_back(g.shape[a]);
  }
  doc["origin"] = origin;
  doc["cell"] = cell;
  doc["shape"] = shape;
  doc["samples"] = g.samples;
  return doc;
}

ZonoidDocument parse_zonoid(const json& doc) {
  ZonoidDocument out;
  int n = int_at(doc, "n");
  MatrixXd rows = parse_matrix(doc, "u");  // one direction per row
  if (rows.cols() != n) bad("each direction must have length n");
  out.ball.u = rows.transpose();
  out.ball.c = parse_vector(doc, "c");
  out.alpha = doc.contains("alpha") ? parse_vector(doc, "alpha") : out.ball.c;
  if (out.ball.c.size() != rows.rows() || out.alpha.size() != rows.rows())
    bad("'c' and 'alpha' must have one entry per direction");
  for (int i = 0; i < out.alpha.size(); ++i)
    if (!(out.alpha[i] > 0.0)) bad("'alpha' entries must be positive");
  return out;
}

YoungDocument parse_young(const json& doc) {
  YoungDocument out;
  out.v = parse_matrix(doc, "V");
  out.n = int_at(doc, "n");
  out.r = number_at(doc, "r");
  out.p = parse_vector(doc, "p");
  if (out.n < 1 || out.n >= out.v.cols()) bad("'n' must satisfy 1 <= n < columns of V");
  if (out.v.rows() != out.p.size()) bad("'p' must have one exponent per row of V");
  if (!(out.r > 1.0)) bad("'r' must exceed 1");
  return out;
}

FunctionsDocument parse_functions(const json& doc) {
  FunctionsDocument out;
  const json& f = field(doc, "f");
  if (!f.is_array() || f.empty()) bad("'f' must be a nonempty array");
  for (const json& g : f) out.f.push_back(parse_grid_function(g));
  if (doc.contains("h")) {
    const json& h = doc.at("h");
    if (!h.is_array() || h.size() != f.size()) bad("'h' must match 'f' in length");
    for (const json& g : h) out.h.push_back(parse_grid_function(g));
  } else {
    out.h = out.f;
  }
  return out;
}

json vector_json(const VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_json(const MatrixXd& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

json finite_or_inf(double x) {
  if (std::isinf(x)) return json(x > 0 ? "inf" : "-inf");
  return json(x);
}

std::string dump_result(const json& doc) { return doc.dump(2) + "\n"; }

void write_result(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) bad("cannot write '" + path + "'");
  out << dump_result(doc);
}

}  // namespace bl
