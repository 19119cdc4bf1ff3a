#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bl/convex.hpp"
#include "bl/datum.hpp"
#include "bl/grid.hpp"

namespace bl {

using json = nlohmann::json;

// Throws json::parse_error on malformed input and std::invalid_argument on
// structurally wrong documents.
json load_json_file(const std::string& path);

struct DatumDocument {
  bool rank_one = false;
  RankOneDatum vectors;
  MultiDatum blocks;
  int n() const { return rank_one ? vectors.n : blocks.n; }
  MultiDatum as_multi() const { return rank_one ? as_blocks(vectors) : blocks; }
};

DatumDocument parse_datum(const json& doc);

GridFunction parse_grid_function(const json& doc);
json grid_function_json(const GridFunction& g);

struct ZonoidDocument {
  BallDecomposition ball;
  VectorXd alpha;
};

ZonoidDocument parse_zonoid(const json& doc);

struct YoungDocument {
  MatrixXd v;
  int n = 0;
  double r = 0.0;
  VectorXd p;
};

YoungDocument parse_young(const json& doc);

// {"f": [...]} with optional {"h": [...]} defaulting to f.
struct FunctionsDocument {
  std::vector<GridFunction> f, h;
};

FunctionsDocument parse_functions(const json& doc);

json vector_json(const VectorXd& v);
json matrix_json(const MatrixXd& m);
VectorXd parse_vector(const json& doc, const std::string& key);
MatrixXd parse_matrix(const json& doc, const std::string& key);

// Finite doubles serialize as numbers; D = 0 makes F the string "inf".
json finite_or_inf(double x);

std::string dump_result(const json& doc);
void write_result(const std::string& path, const json& doc);

}  // namespace bl
