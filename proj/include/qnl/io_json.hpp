#pragma once
// JSON serialization for matrices and states.
//
// Matrix schema: {"field": "real"|"complex", "re": [[...]], "im": [[...]]}
// with row-major nested arrays; "im" is present only for complex matrices.
// States add "dims": [d0, d1, ...].

#include <json.hpp>

#include "qnl/qmat.hpp"

namespace qnl {

using json = nlohmann::json;

inline json mat_to_json(const Mat& m) {
  json j;
  j["field"] = m.is_real() ? "real" : "complex";
  json re = json::array();
  for (long i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (long jc = 0; jc < m.cols(); ++jc) row.push_back(m.re(i, jc));
    re.push_back(std::move(row));
  }
  j["re"] = std::move(re);
  if (!m.is_real()) {
    json im = json::array();
    for (long i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (long jc = 0; jc < m.cols(); ++jc) row.push_back(m.im(i, jc));
      im.push_back(std::move(row));
    }
    j["im"] = std::move(im);
  }
  return j;
}

inline Eigen::MatrixXd json_to_dense(const json& rows) {
  if (!rows.is_array() || rows.empty())
    throw ValidationError("matrix json: expected nonempty array of rows");
  const long r = long(rows.size());
  const long c = long(rows.at(0).size());
  Eigen::MatrixXd m(r, c);
  for (long i = 0; i < r; ++i) {
    const json& row = rows.at(i);
    if (long(row.size()) != c) throw ValidationError("matrix json: ragged rows");
    for (long j = 0; j < c; ++j) m(i, j) = row.at(j).get<double>();
  }
  return m;
}

inline Mat mat_from_json(const json& j) {
  const std::string field = j.value("field", j.contains("im") ? "complex" : "real");
  Eigen::MatrixXd re = json_to_dense(j.at("re"));
  if (field == "real") {
    if (j.contains("im")) throw ValidationError("matrix json: real field with im part");
    return real_mat(std::move(re));
  }
  if (field != "complex") throw ValidationError("matrix json: unknown field tag");
  Eigen::MatrixXd im = j.contains("im")
                           ? json_to_dense(j.at("im"))
                           : Eigen::MatrixXd::Zero(re.rows(), re.cols()).eval();
  if (im.rows() != re.rows() || im.cols() != re.cols())
    throw ValidationError("matrix json: re/im shape mismatch");
  return complex_mat(std::move(re), std::move(im));
}

inline json state_to_json(const DensityMatrix& rho) {
  json j = mat_to_json(rho.m);
  j["dims"] = rho.dims;
  return j;
}

inline DensityMatrix state_from_json(const json& j) {
  Mat m = mat_from_json(j);
  std::vector<int> dims;
  if (j.contains("dims")) dims = j.at("dims").get<std::vector<int>>();
  return density_matrix(std::move(m), std::move(dims));
}

}  // namespace qnl
