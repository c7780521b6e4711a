#include "report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace probitar {

namespace {

using json = nlohmann::ordered_json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument(std::string("json: ") + what +
                                " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols)
      throw std::invalid_argument(std::string("json: ragged rows in ") + what);
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, const char* what) {
  if (!j.is_array())
    throw std::invalid_argument(std::string("json: ") + what + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument("json: malformed document");
  return j;
}

std::string fixed(double v, int width, int prec) {
  std::ostringstream os;
  os << std::setw(width) << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

}  // namespace

std::string params_to_json(const ModelParams& params) {
  json j;
  j["k"] = params.k;
  j["p"] = params.p;
  j["d"] = params.d;
  json a = json::array();
  for (const auto& al : params.A) a.push_back(matrix_to_json(al));
  j["A"] = std::move(a);
  j["B"] = matrix_to_json(params.B);
  j["C"] = vector_to_json(params.C);
  j["R"] = matrix_to_json(params.R);
  return j.dump(2) + "\n";
}

ModelParams params_from_json(const std::string& text) {
  const json j = parse(text);
  ModelParams m;
  try {
    m.k = j.at("k").get<int>();
    m.p = j.at("p").get<int>();
    m.d = j.at("d").get<int>();
    if (m.k < 1 || m.p < 1 || m.d < 0)
      throw std::invalid_argument("json: bad dimensions");
    const json& a = j.at("A");
    if (!a.is_array() || static_cast<int>(a.size()) != m.p)
      throw std::invalid_argument("json: A must hold p lag matrices");
    m.A.clear();
    for (const auto& al : a) m.A.push_back(matrix_from_json(al, "A"));
    m.B = m.d > 0 ? matrix_from_json(j.at("B"), "B")
                  : Eigen::MatrixXd(m.k, 0);
    m.C = vector_from_json(j.at("C"), "C");
    m.R = matrix_from_json(j.at("R"), "R");
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("json: ") + e.what());
  }
  m.validate();
  return m;
}

std::string fit_to_json(const EstimationResult& fit) {
  json j;
  j["k"] = fit.dims.k;
  j["p"] = fit.dims.p;
  j["d"] = fit.dims.d;
  j["method"] = fit.method;
  j["gamma"] = vector_to_json(fit.gamma_hat);
  j["r"] = vector_to_json(fit.r_hat.r);
  j["objective"] = fit.objective_value;
  json diag;
  json eq = json::array();
  for (const auto& e : fit.equation_diag) {
    json one;
    one["iterations"] = e.iterations;
    one["evaluations"] = e.evaluations;
    one["restarts"] = e.restarts_used;
    one["converged"] = e.converged;
    eq.push_back(std::move(one));
  }
  diag["equations"] = std::move(eq);
  json pairs = json::array();
  for (const auto& pd : fit.pair_diag) {
    json one;
    one["i"] = pd.i + 1;
    one["j"] = pd.j + 1;
    one["r"] = pd.r_hat;
    one["evaluations"] = pd.evaluations;
    one["at_boundary"] = pd.at_boundary;
    pairs.push_back(std::move(one));
  }
  diag["pairs"] = std::move(pairs);
  diag["pd_repaired"] = fit.pd_repaired;
  diag["pd_shrink_alpha"] = fit.pd_shrink_alpha;
  diag["clamp_events"] = fit.clamp_events;
  j["diagnostics"] = std::move(diag);
  if (fit.bootstrap) {
    json b;
    b["level"] = fit.bootstrap->level;
    b["lo"] = vector_to_json(fit.bootstrap->lo);
    b["hi"] = vector_to_json(fit.bootstrap->hi);
    b["requested"] = fit.bootstrap->requested;
    b["failed"] = fit.bootstrap->failed;
    b["replicates"] = matrix_to_json(fit.bootstrap->replicates);
    j["bootstrap"] = std::move(b);
  }
  return j.dump(2) + "\n";
}

EstimationResult fit_from_json(const std::string& text) {
  const json j = parse(text);
  EstimationResult fit;
  try {
    fit.dims.k = j.at("k").get<int>();
    fit.dims.p = j.at("p").get<int>();
    fit.dims.d = j.at("d").get<int>();
    fit.method = j.at("method").get<std::string>();
    fit.gamma_hat = vector_from_json(j.at("gamma"), "gamma");
    fit.r_hat = CorrParam::identity(fit.dims.k);
    fit.r_hat.r = vector_from_json(j.at("r"), "r");
    fit.objective_value = j.at("objective").get<double>();
    if (fit.gamma_hat.size() != fit.dims.length())
      throw std::invalid_argument("json: gamma length mismatch");
    if (fit.r_hat.r.size() != fit.dims.k * (fit.dims.k - 1) / 2)
      throw std::invalid_argument("json: r length mismatch");
    if (j.contains("diagnostics")) {
      const json& diag = j.at("diagnostics");
      fit.pd_repaired = diag.value("pd_repaired", false);
      fit.pd_shrink_alpha = diag.value("pd_shrink_alpha", 1.0);
      fit.clamp_events = diag.value("clamp_events", 0L);
      if (diag.contains("pairs"))
        for (const auto& one : diag.at("pairs")) {
          PairDiag pd;
          pd.i = one.at("i").get<int>() - 1;
          pd.j = one.at("j").get<int>() - 1;
          pd.r_hat = one.at("r").get<double>();
          pd.evaluations = one.value("evaluations", 0);
          pd.at_boundary = one.value("at_boundary", false);
          fit.pair_diag.push_back(pd);
        }
    }
    if (j.contains("bootstrap")) {
      auto b = std::make_unique<BootstrapSummary>();
      const json& jb = j.at("bootstrap");
      b->level = jb.at("level").get<double>();
      b->lo = vector_from_json(jb.at("lo"), "bootstrap.lo");
      b->hi = vector_from_json(jb.at("hi"), "bootstrap.hi");
      b->requested = jb.value("requested", 0);
      b->failed = jb.value("failed", 0);
      if (jb.contains("replicates"))
        b->replicates = matrix_from_json(jb.at("replicates"), "replicates");
      fit.bootstrap = std::move(b);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("json: ") + e.what());
  }
  return fit;
}

std::string format_fit_table(const EstimationResult& fit) {
  const auto names = parameter_names(fit.dims);
  const auto order = table_order(fit.dims);
  const Eigen::VectorXd theta = fit.theta();
  std::ostringstream os;
  os << "Parameter     Estimate\n";
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    os << std::left << std::setw(12) << names[pos] << ' '
       << fixed(theta[order[pos]], 9, 4) << '\n';
  }
  os << "method: " << fit.method
     << "  objective: " << fixed(fit.objective_value, 0, 4) << '\n';
  if (fit.pd_repaired)
    os << "warning: pairwise R was not positive definite; shrunk by alpha="
       << fixed(fit.pd_shrink_alpha, 0, 2) << '\n';
  if (fit.any_boundary())
    os << "warning: a correlation estimate sits at the search boundary\n";
  return os.str();
}

std::string format_replication_table(const std::vector<ReplicationRow>& rows) {
  std::ostringstream os;
  os << "Parameter    True Value  Mean Estimate        MSE       Bias   Variance\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(12) << r.name << std::right
       << fixed(r.truth, 11, 3) << fixed(r.mean, 15, 3) << fixed(r.mse, 11, 3)
       << fixed(r.bias, 11, 3) << fixed(r.variance, 11, 3) << '\n';
  }
  return os.str();
}

std::string format_interval_table(const EstimationResult& fit) {
  if (!fit.bootstrap)
    throw std::invalid_argument("format_interval_table: fit has no bootstrap block");
  const auto names = parameter_names(fit.dims);
  const auto order = table_order(fit.dims);
  const Eigen::VectorXd theta = fit.theta();
  std::ostringstream os;
  const int pct = static_cast<int>(std::lround(fit.bootstrap->level * 100));
  os << "Parameter     Estimate  " << pct << "% Confidence Interval\n";
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const int idx = order[pos];
    os << std::left << std::setw(12) << names[pos] << ' '
       << fixed(theta[idx], 9, 3) << "  [" << fixed(fit.bootstrap->lo[idx], 0, 3)
       << ";" << fixed(fit.bootstrap->hi[idx], 0, 3) << "]\n";
  }
  return os.str();
}

}  // namespace probitar
